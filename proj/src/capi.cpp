#include "fracmgrit/fracmgrit.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <sstream>
#include <string>

#include "fracmgrit/error.hpp"
#include "fracmgrit/mgrit.hpp"
#include "fracmgrit/report.hpp"
#include "fracmgrit/selftest.hpp"
#include "fracmgrit/theory.hpp"
#include "fracmgrit/verify.hpp"

using namespace fracmgrit;
using nlohmann::json;

struct fm_problem {
  fm_problem_desc desc;
  std::string load_rule;
  ProblemSpec spec;
  std::unique_ptr<Discretization> disc;
  bool manufactured = false;
  ManufacturedCase kase;
};

struct fm_solution {
  SpaceTimeVector u;
  MgritTrace trace;
  bool has_trace = false;
  double l2_error = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  double factor = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t spatial_solves = 0;
  std::uint64_t cg_iterations = 0;
  std::string report;
};

namespace {

thread_local std::string g_last_error;

fm_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return FM_INVALID_ARGUMENT;
    case ErrorCode::convergence_failure: return FM_CONVERGENCE_FAILURE;
    case ErrorCode::numerical_breakdown: return FM_NUMERICAL_BREAKDOWN;
    case ErrorCode::cap_exceeded: return FM_CAP_EXCEEDED;
    case ErrorCode::insufficient_data: return FM_INSUFFICIENT_DATA;
    case ErrorCode::invariant_violation: return FM_INVARIANT_VIOLATION;
    case ErrorCode::io: return FM_IO;
  }
  return FM_INTERNAL;
}

template <typename Fn>
fm_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return FM_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FM_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FM_INTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool cond, const char* what) {
  if (!cond) throw InvalidArgument(what);
}

json desc_json(const fm_problem& p) {
  const fm_problem_desc& d = p.desc;
  return {{"beta", d.beta},
          {"gamma", d.gamma},
          {"kx", d.kx},
          {"ky", d.ky},
          {"final_time", d.final_time},
          {"m_beta", d.m_beta},
          {"m_gamma", d.m_gamma},
          {"n_time", d.n_time},
          {"mesh", d.mesh_kind == FM_MESH_SHISHKIN ? "shishkin" : "uniform"},
          {"epsilon", d.epsilon},
          {"source", d.source_kind == FM_SOURCE_ZERO ? "zero" : "manufactured"},
          {"initial_data", "nodal interpolation"},
          {"load_rule", p.load_rule},
          {"cg_tol", d.cg_tol},
          {"cg_jacobi", d.cg_jacobi != 0}};
}

MgritOptions to_options(const fm_solver_options& o) {
  MgritOptions m;
  m.m = o.m;
  m.max_levels = o.max_levels;
  m.min_coarse = o.min_coarse;
  m.halt_tol = o.halt_tol;
  m.max_iters = o.max_iters;
  m.relaxation = o.relaxation == FM_RELAX_F ? Relaxation::f : Relaxation::fcf;
  m.skip_first_down = o.skip_first_down != 0;
  m.seed = o.seed;
  m.random_initial_guess = o.random_initial_guess != 0;
  m.fixed_iterations = o.fixed_iterations;
  m.workers = o.workers;
  m.record_wall_time = o.record_wall_time != 0;
  return m;
}

const char* solver_name(int s) {
  switch (s) {
    case FM_SOLVER_SEQUENTIAL: return "sequential";
    case FM_SOLVER_PARAREAL: return "parareal";
    case FM_SOLVER_MGRIT: return "mgrit";
  }
  return "unknown";
}

}  // namespace

extern "C" {

FM_API void fm_problem_desc_default(fm_problem_desc* d) {
  if (!d) return;
  *d = fm_problem_desc{};
  d->beta = 0.6;
  d->gamma = 0.7;
  d->kx = 2.0;
  d->ky = 0.5;
  d->final_time = 1.0;
  d->m_beta = 16;
  d->m_gamma = 16;
  d->n_time = 256;
  d->mesh_kind = FM_MESH_UNIFORM;
  d->epsilon = 1.0 / 64.0;
  d->source_kind = FM_SOURCE_MANUFACTURED;
  d->cg_tol = 1e-9;
  d->cg_jacobi = 0;
  d->load_rule = nullptr;
}

FM_API fm_status fm_problem_create(const fm_problem_desc* desc, fm_problem** out) {
  return guarded([&] {
    require(desc && out, "null argument");
    *out = nullptr;
    auto p = std::make_unique<fm_problem>();
    p->desc = *desc;
    p->load_rule = desc->load_rule ? desc->load_rule : "gauss4";
    p->desc.load_rule = nullptr;
    require(desc->mesh_kind == FM_MESH_UNIFORM || desc->mesh_kind == FM_MESH_SHISHKIN,
            "unknown mesh kind");
    const TemporalMesh mesh = make_temporal_mesh(
        desc->mesh_kind == FM_MESH_UNIFORM ? MeshKind::uniform : MeshKind::shishkin,
        desc->final_time, desc->n_time, desc->epsilon);
    const SpatialGrid grid = SpatialGrid::unit_square(desc->m_beta, desc->m_gamma);
    if (desc->source_kind == FM_SOURCE_MANUFACTURED) {
      p->manufactured = true;
      p->kase = ManufacturedCase{desc->beta, desc->gamma, desc->kx, desc->ky};
      p->spec = manufactured_problem(p->kase, grid, mesh);
    } else {
      require(desc->source_kind == FM_SOURCE_ZERO, "unknown source kind");
      p->spec.grid = grid;
      p->spec.tmesh = mesh;
      p->spec.beta = desc->beta;
      p->spec.gamma = desc->gamma;
      p->spec.kx = desc->kx;
      p->spec.ky = desc->ky;
    }
    p->spec.load_rule = p->load_rule;
    CgOptions cg;
    cg.rel_tol = desc->cg_tol;
    cg.jacobi = desc->cg_jacobi != 0;
    p->disc = std::make_unique<Discretization>(p->spec, cg);
    *out = p.release();
  });
}

FM_API void fm_problem_destroy(fm_problem* problem) { delete problem; }

FM_API size_t fm_problem_unknowns(const fm_problem* problem) {
  return problem ? problem->disc->dof() : 0;
}

FM_API void fm_solver_options_default(fm_solver_options* o) {
  if (!o) return;
  *o = fm_solver_options{};
  o->solver = FM_SOLVER_MGRIT;
  o->m = 2;
  o->max_levels = 0;
  o->min_coarse = 2;
  o->halt_tol = 1e-9;
  o->max_iters = 100;
  o->relaxation = FM_RELAX_FCF;
  o->skip_first_down = 1;
  o->seed = 20240501;
  o->random_initial_guess = 1;
  o->fixed_iterations = 0;
  o->workers = 1;
  o->record_wall_time = 0;
  o->compute_residual = 1;
}

FM_API fm_status fm_solve(fm_problem* problem, const fm_solver_options* opts, fm_solution** out) {
  return guarded([&] {
    require(problem && opts && out, "null argument");
    *out = nullptr;
    auto sol = std::make_unique<fm_solution>();
    const Discretization& disc = *problem->disc;
    const std::uint64_t s0 = disc.counter().spatial_solves.load();
    const std::uint64_t c0 = disc.counter().cg_iterations.load();
    MgritOptions mo = to_options(*opts);
    switch (opts->solver) {
      case FM_SOLVER_SEQUENTIAL:
        sol->u = sequential_solve(disc);
        break;
      case FM_SOLVER_PARAREAL:
      case FM_SOLVER_MGRIT: {
        MgritResult r = opts->solver == FM_SOLVER_PARAREAL ? parareal_solve(disc, mo)
                                                             : mgrit_solve(disc, mo);
        sol->u = std::move(r.u);
        sol->trace = std::move(r.trace);
        sol->has_trace = true;
        if (opts->solver == FM_SOLVER_PARAREAL) {
          mo.relaxation = Relaxation::f;
          mo.max_levels = 2;
          mo.min_coarse = 1;
        }
        try {
          sol->factor = convergence_factor(sol->trace);
        } catch (const InsufficientData&) {
        }
        break;
      }
      default:
        throw InvalidArgument("unknown solver kind");
    }
    sol->spatial_solves = disc.counter().spatial_solves.load() - s0;
    sol->cg_iterations = disc.counter().cg_iterations.load() - c0;
    if (problem->manufactured) {
      sol->l2_error = l2_error_at_T(sol->u.back(), problem->kase, problem->spec.grid,
                                    problem->spec.tmesh.final_time());
    }
    if (opts->compute_residual) {
      sol->residual = spacetime_residual(disc, disc.fine_level(), sol->u, opts->workers).global;
    }

    json j;
    j["problem"] = desc_json(*problem);
    j["grid"] = to_json(problem->spec.grid);
    j["mesh"] = to_json(problem->spec.tmesh);
    j["solver"] = solver_name(opts->solver);
    if (opts->solver != FM_SOLVER_SEQUENTIAL) {
      j["options"] = to_json(mo);
      j["trace"] = to_json(sol->trace);
    }
    j["spatial_solves"] = sol->spatial_solves;
    j["cg_iterations"] = sol->cg_iterations;
    j["l2_error"] = std::isnan(sol->l2_error) ? json(nullptr) : json(sol->l2_error);
    j["spacetime_residual"] = std::isnan(sol->residual) ? json(nullptr) : json(sol->residual);
    j["convergence_factor"] = std::isnan(sol->factor) ? json(nullptr) : json(sol->factor);
    sol->report = j.dump(2);
    *out = sol.release();
  });
}

FM_API void fm_solution_destroy(fm_solution* solution) { delete solution; }

FM_API int fm_solution_time_points(const fm_solution* s) {
  return s ? static_cast<int>(s->u.size()) : 0;
}

FM_API fm_status fm_solution_values(const fm_solution* s, int time_index, double* out, size_t len) {
  return guarded([&] {
    require(s && out, "null argument");
    require(time_index >= 0 && static_cast<std::size_t>(time_index) < s->u.size(),
            "time index out of range");
    const Vector& v = s->u[static_cast<std::size_t>(time_index)];
    require(len == v.size(), "buffer length does not match the number of unknowns");
    std::memcpy(out, v.data(), len * sizeof(double));
  });
}

FM_API double fm_solution_l2_error(const fm_solution* s) {
  return s ? s->l2_error : std::numeric_limits<double>::quiet_NaN();
}

FM_API double fm_solution_residual(const fm_solution* s) {
  return s ? s->residual : std::numeric_limits<double>::quiet_NaN();
}

FM_API double fm_solution_convergence_factor(const fm_solution* s) {
  return s ? s->factor : std::numeric_limits<double>::quiet_NaN();
}

FM_API int fm_solution_iterations(const fm_solution* s) {
  if (!s || !s->has_trace || s->trace.records.empty()) return 0;
  return s->trace.records.back().iteration;
}

FM_API uint64_t fm_solution_spatial_solves(const fm_solution* s) {
  return s ? s->spatial_solves : 0;
}

FM_API fm_status fm_solution_report(const fm_solution* s, char** json_out) {
  return guarded([&] {
    require(s && json_out, "null argument");
    *json_out = dup_string(s->report);
  });
}

FM_API fm_status fm_predict(fm_problem* problem, int m, int per_mode, double* bound, char** json_out) {
  return guarded([&] {
    require(problem, "null problem");
    const ModeSpectrum spectrum = mode_spectrum(problem->disc->operators());
    const BoundReport rep = two_level_bound(spectrum, problem->spec.tmesh, m);
    if (bound) *bound = rep.bound;
    if (json_out) {
      json j;
      j["problem"] = desc_json(*problem);
      j["mesh"] = to_json(problem->spec.tmesh);
      j["bound"] = to_json(rep, per_mode != 0);
      *json_out = dup_string(j.dump(2));
    }
  });
}

FM_API fm_status fm_dump_operator(fm_problem* problem, const char* which, size_t cap, char** csv) {
  return guarded([&] {
    require(problem && which && csv, "null argument");
    const SpatialOperators& ops = problem->disc->operators();
    const std::size_t limit = cap ? cap : kDefaultDenseCap;
    const std::string w = which;
    Eigen::MatrixXd a;
    if (w == "mass") {
      a = dense_instantiation(ops.mass, limit);
    } else if (w == "stiffness-x") {
      a = dense_instantiation(ops.stiff_x, limit);
    } else if (w == "stiffness-y") {
      a = dense_instantiation(ops.stiff_y, limit);
    } else if (w == "step-implicit" || w == "step-explicit") {
      auto pair = problem->disc->step_pair(problem->spec.tmesh.step(1));
      a = dense_instantiation(w == "step-implicit" ? pair->lhs : pair->rhs, limit);
    } else {
      throw InvalidArgument("unknown operator '" + w +
                            "' (mass, stiffness-x, stiffness-y, step-implicit, step-explicit)");
    }
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index j = 0; j < a.cols(); ++j) {
        if (j) os << ',';
        os << a(i, j);
      }
      os << '\n';
    }
    *csv = dup_string(os.str());
  });
}

FM_API fm_status fm_run_table(const fm_table_desc* d, char** csv, char** json_out) {
  return guarded([&] {
    require(d, "null table description");
    require(d->n_pairs > 0 && d->betas && d->gammas, "table needs at least one order pair");
    require(d->n_rows > 0 && d->m_space && d->n_time, "table needs at least one row");
    std::string text = table_csv_header() + "\n";
    json columns = json::array();
    for (std::size_t p = 0; p < d->n_pairs; ++p) {
      TableStudy st;
      st.kase = ManufacturedCase{d->betas[p], d->gammas[p], d->kx, d->ky};
      st.mesh = d->mesh_kind == FM_MESH_SHISHKIN ? MeshKind::shishkin : MeshKind::uniform;
      st.epsilon = d->epsilon;
      if (d->error_rule) st.error_rule = d->error_rule;
      if (d->load_rule) st.load_rule = d->load_rule;
      for (std::size_t r = 0; r < d->n_rows; ++r) st.rows.push_back({d->m_space[r], d->n_time[r]});
      const auto rows = run_table(st, d->workers);
      json col = {{"beta", d->betas[p]}, {"gamma", d->gammas[p]}, {"rows", json::array()}};
      for (const auto& row : rows) {
        text += table_csv_row(d->betas[p], d->gammas[p], row) + "\n";
        col["rows"].push_back(to_json(row));
      }
      columns.push_back(std::move(col));
    }
    if (csv) *csv = dup_string(text);
    if (json_out) {
      json j = {{"kx", d->kx},
                {"ky", d->ky},
                {"mesh", d->mesh_kind == FM_MESH_SHISHKIN ? "shishkin" : "uniform"},
                {"epsilon", d->epsilon},
                {"error_rule", d->error_rule ? d->error_rule : "gauss9"},
                {"load_rule", d->load_rule ? d->load_rule : "gauss4"},
                {"columns", std::move(columns)}};
      *json_out = dup_string(j.dump(2));
    }
  });
}

FM_API fm_status fm_factor_study(const fm_factor_desc* d, char** csv, char** json_out) {
  return guarded([&] {
    require(d, "null factor description");
    require(d->n_columns > 0 && d->betas && d->gammas && d->m, "study needs at least one column");
    require(d->n_rows > 0 && d->m_space && d->n_time, "study needs at least one row");
    std::vector<FactorConfig> configs;
    std::vector<bool> skipped;
    for (std::size_t c = 0; c < d->n_columns; ++c) {
      for (std::size_t r = 0; r < d->n_rows; ++r) {
        FactorConfig cfg;
        cfg.beta = d->betas[c];
        cfg.gamma = d->gammas[c];
        cfg.kx = d->kx;
        cfg.ky = d->ky;
        cfg.m_space = d->m_space[r];
        cfg.n_time = d->n_time[r];
        cfg.mesh = d->mesh_kind == FM_MESH_SHISHKIN ? MeshKind::shishkin : MeshKind::uniform;
        cfg.epsilon = d->epsilon;
        cfg.m = d->m[c];
        if (d->iterations > 0) cfg.iterations = d->iterations;
        cfg.seed = d->seed;
        configs.push_back(cfg);
        skipped.push_back((d->max_space > 0 && cfg.m_space > d->max_space) ||
                          (d->max_time > 0 && cfg.n_time > d->max_time));
      }
    }
    std::vector<FactorConfig> active;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      if (!skipped[i]) active.push_back(configs[i]);
    }
    const auto results = factor_study(active, d->workers);
    std::string text = factor_csv_header() + "\n";
    json rows = json::array();
    std::size_t next = 0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      FactorResult r;
      if (skipped[i]) {
        r.config = configs[i];
        r.status = "skipped (size limit)";
      } else {
        r = results[next++];
      }
      text += factor_csv_row(r) + "\n";
      rows.push_back(to_json(r));
    }
    if (csv) *csv = dup_string(text);
    if (json_out) {
      json j = {{"kx", d->kx},
                {"ky", d->ky},
                {"mesh", d->mesh_kind == FM_MESH_SHISHKIN ? "shishkin" : "uniform"},
                {"epsilon", d->epsilon},
                {"problem", "homogeneous error equation from a random guess, two levels"},
                {"rows", std::move(rows)}};
      *json_out = dup_string(j.dump(2));
    }
  });
}

FM_API fm_status fm_selftest(int inject_fault, char** report, int* failures) {
  return guarded([&] {
    const SelftestReport rep = run_selftest(inject_fault != 0);
    if (failures) *failures = rep.failures();
    if (report) *report = dup_string(rep.summary());
  });
}

FM_API void fm_string_free(char* s) { std::free(s); }

FM_API const char* fm_last_error(void) { return g_last_error.c_str(); }

FM_API const char* fm_status_string(fm_status status) {
  switch (status) {
    case FM_OK: return "ok";
    case FM_INVALID_ARGUMENT: return "invalid-argument";
    case FM_CONVERGENCE_FAILURE: return "convergence-failure";
    case FM_NUMERICAL_BREAKDOWN: return "numerical-breakdown";
    case FM_CAP_EXCEEDED: return "cap-exceeded";
    case FM_INSUFFICIENT_DATA: return "insufficient-data";
    case FM_INVARIANT_VIOLATION: return "invariant-violation";
    case FM_IO: return "io";
    case FM_INTERNAL: return "internal";
  }
  return "unknown";
}

FM_API const char* fm_version(void) { return "0.1.0"; }

}  // extern "C"
