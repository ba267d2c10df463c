// Command-line driver over the C interface.
#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracmgrit/fracmgrit.h"

#ifndef FRACMGRIT_PRESET_DIR
#define FRACMGRIT_PRESET_DIR "presets"
#endif

namespace fs = std::filesystem;

namespace {

struct CString {
  char* p = nullptr;
  ~CString() { fm_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

class Failure : public std::runtime_error {
 public:
  Failure(fm_status s, const std::string& what) : std::runtime_error(what), status(s) {}
  fm_status status;
};

void check(fm_status s, const char* where) {
  if (s != FM_OK) {
    throw Failure(s, std::string(where) + ": " + fm_status_string(s) + ": " + fm_last_error());
  }
}

struct ProblemArgs {
  double beta = 0.6, gamma = 0.7, kx = 2.0, ky = 0.5, final_time = 1.0;
  int mx = 16, my = 16, nt = 256;
  std::string mesh = "uniform";
  double epsilon = 1.0 / 64.0;
  std::string source = "manufactured";
  double cg_tol = 1e-9;
  bool jacobi = false;
  std::string load_rule = "gauss4";
};

struct OutputArgs {
  std::string dir;
  std::string name;
};

int mesh_kind(const std::string& s) {
  if (s == "uniform") return FM_MESH_UNIFORM;
  if (s == "shishkin" || s == "piecewise") return FM_MESH_SHISHKIN;
  throw Failure(FM_INVALID_ARGUMENT, "mesh: expected uniform or shishkin, got '" + s + "'");
}

void add_problem_options(CLI::App* sub, ProblemArgs& p) {
  sub->add_option("--beta", p.beta, "fractional half-order in x, in (1/2,1)");
  sub->add_option("--gamma", p.gamma, "fractional half-order in y, in (1/2,1)");
  sub->add_option("--kx", p.kx, "diffusion coefficient in x");
  sub->add_option("--ky", p.ky, "diffusion coefficient in y");
  sub->add_option("--mx", p.mx, "spatial intervals in x");
  sub->add_option("--my", p.my, "spatial intervals in y");
  sub->add_option("--nt", p.nt, "time intervals");
  sub->add_option("--T", p.final_time, "final time");
  sub->add_option("--mesh", p.mesh, "uniform | shishkin");
  sub->add_option("--epsilon", p.epsilon, "piecewise-uniform mesh parameter");
  sub->add_option("--source", p.source, "manufactured | zero");
  sub->add_option("--cg-tol", p.cg_tol, "relative CG tolerance");
  sub->add_flag("--jacobi", p.jacobi, "diagonal scaling in CG");
  sub->add_option("--load-rule", p.load_rule, "triangle rule for the load: edge | seven | gauss<n>");
}

void add_output_options(CLI::App* sub, OutputArgs& o) {
  sub->add_option("--out", o.dir, "output directory (default: $FRACMGRIT_OUTPUT_DIR, else stdout)");
  sub->add_option("--name", o.name, "artifact file stem");
}

std::unique_ptr<fm_problem, void (*)(fm_problem*)> make_problem(const ProblemArgs& a) {
  fm_problem_desc d;
  fm_problem_desc_default(&d);
  d.beta = a.beta;
  d.gamma = a.gamma;
  d.kx = a.kx;
  d.ky = a.ky;
  d.final_time = a.final_time;
  d.m_beta = a.mx;
  d.m_gamma = a.my;
  d.n_time = a.nt;
  d.mesh_kind = mesh_kind(a.mesh);
  d.epsilon = a.epsilon;
  if (a.source == "manufactured") {
    d.source_kind = FM_SOURCE_MANUFACTURED;
  } else if (a.source == "zero") {
    d.source_kind = FM_SOURCE_ZERO;
  } else {
    throw Failure(FM_INVALID_ARGUMENT, "source: expected manufactured or zero");
  }
  d.cg_tol = a.cg_tol;
  d.cg_jacobi = a.jacobi ? 1 : 0;
  d.load_rule = a.load_rule.c_str();
  fm_problem* p = nullptr;
  check(fm_problem_create(&d, &p), "problem");
  return {p, fm_problem_destroy};
}

std::string output_dir(const OutputArgs& o) {
  if (!o.dir.empty()) return o.dir;
  if (const char* env = std::getenv("FRACMGRIT_OUTPUT_DIR"); env && *env) return env;
  return {};
}

// Writes to <dir>/<stem><ext>, or to stdout when no directory is configured.
void emit(const OutputArgs& o, const std::string& stem, const std::string& ext,
          const std::string& text) {
  const std::string dir = output_dir(o);
  if (dir.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
    return;
  }
  fs::create_directories(dir);
  const fs::path path = fs::path(dir) / ((o.name.empty() ? stem : o.name) + ext);
  std::ofstream f(path);
  if (!f) throw Failure(FM_IO, "cannot write " + path.string());
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
  std::cerr << "wrote " << path.string() << "\n";
}

std::vector<std::pair<std::string, std::string>> split_pairs(const std::vector<std::string>& items,
                                                             const char* what) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : items) {
    const auto c = s.find(':');
    if (c == std::string::npos) {
      throw Failure(FM_INVALID_ARGUMENT, std::string(what) + ": expected a:b, got '" + s + "'");
    }
    out.emplace_back(s.substr(0, c), s.substr(c + 1));
  }
  return out;
}

double to_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Failure(FM_INVALID_ARGUMENT, std::string(what) + ": not a number: '" + s + "'");
}

int to_int(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw Failure(FM_INVALID_ARGUMENT, std::string(what) + ": not an integer: '" + s + "'");
}

void parse_rows(const std::vector<std::string>& rows, std::vector<int>& ms, std::vector<int>& ns) {
  for (const auto& [a, b] : split_pairs(rows, "rows")) {
    ms.push_back(to_int(a, "rows"));
    ns.push_back(to_int(b, "rows"));
  }
}

// Rewrites "--preset NAME" into "--config <preset dir>/NAME.ini".
std::vector<std::string> expand_presets(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  const char* env = std::getenv("FRACMGRIT_PRESETS");
  const std::string dir = env && *env ? env : FRACMGRIT_PRESET_DIR;
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string name;
    if (args[i] == "--preset" && i + 1 < args.size()) {
      name = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i) + 1);
    } else if (args[i].rfind("--preset=", 0) == 0) {
      name = args[i].substr(9);
    } else {
      continue;
    }
    fs::path path = name;
    if (!fs::exists(path)) path = fs::path(dir) / (name + ".ini");
    args[i] = "--config=" + path.string();
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time solver for 2-D Riesz fractional diffusion with parareal and MGRIT"};
  app.set_config("--config", "", "INI file; [subcommand] sections supply option values");
  app.fallthrough();
  app.require_subcommand(1);

  // solve
  ProblemArgs solve_p;
  OutputArgs solve_o;
  std::string solver = "mgrit", relax = "FCF";
  fm_solver_options so;
  fm_solver_options_default(&so);
  bool no_skip = false, zero_guess = false, wall = false, no_residual = false;
  auto* solve = app.add_subcommand("solve", "run sequential stepping, parareal or MGRIT");
  add_problem_options(solve, solve_p);
  add_output_options(solve, solve_o);
  solve->add_option("--solver", solver, "seq | parareal | mgrit");
  solve->add_option("--m", so.m, "coarsening factor");
  solve->add_option("--levels", so.max_levels, "maximum levels (0 = as many as possible)");
  solve->add_option("--min-coarse", so.min_coarse, "stop coarsening below this many intervals");
  solve->add_option("--halt-tol", so.halt_tol, "absolute space-time residual tolerance");
  solve->add_option("--max-iters", so.max_iters, "iteration cap");
  solve->add_option("--relax", relax, "FCF | F");
  solve->add_flag("--no-skip-first-down", no_skip, "relax on the first down cycle too");
  solve->add_option("--seed", so.seed, "seed of the random initial guess");
  solve->add_flag("--zero-guess", zero_guess, "start from zero instead of a random guess");
  solve->add_option("--fixed-iters", so.fixed_iterations, "run exactly this many cycles");
  solve->add_option("--workers", so.workers, "worker threads");
  solve->add_flag("--wall-time", wall, "record wall time in the trace (breaks byte-identity)");
  solve->add_flag("--no-residual", no_residual, "skip the final space-time residual");

  // predict
  ProblemArgs pred_p;
  OutputArgs pred_o;
  int pred_m = 2;
  bool per_mode = false;
  auto* predict = app.add_subcommand("predict", "two-level convergence bound");
  add_problem_options(predict, pred_p);
  add_output_options(predict, pred_o);
  predict->add_option("--m", pred_m, "coarsening factor");
  predict->add_flag("--per-mode", per_mode, "include per-mode factors");
  predict->add_option("--solver", solver, "ignored; accepted for symmetry with solve");

  // table
  OutputArgs table_o;
  double t_kx = 2.0, t_ky = 0.5, t_eps = 1.0 / 64.0;
  std::string t_mesh = "uniform", t_err = "gauss9", t_load = "gauss4";
  std::vector<std::string> t_pairs{"0.6:0.7"}, t_rows{"4:4", "8:8"};
  int t_workers = 1;
  auto* table = app.add_subcommand("table", "error/rate table for the manufactured problem");
  add_output_options(table, table_o);
  table->add_option("--kx", t_kx);
  table->add_option("--ky", t_ky);
  table->add_option("--mesh", t_mesh, "uniform | shishkin");
  table->add_option("--epsilon", t_eps);
  table->add_option("--pairs", t_pairs, "beta:gamma list")->delimiter(',');
  table->add_option("--rows", t_rows, "M:N list")->delimiter(',');
  table->add_option("--error-rule", t_err, "triangle rule for the error norm");
  table->add_option("--load-rule", t_load, "triangle rule for the load");
  table->add_option("--workers", t_workers);

  // factors
  OutputArgs fac_o;
  double f_kx = 2.0, f_ky = 0.5, f_eps = 1.0 / 64.0;
  std::string f_mesh = "uniform";
  std::vector<std::string> f_cols{"0.6:0.7:2"}, f_rows{"16:256"};
  int f_iters = 10, f_max_m = 0, f_max_n = 0, f_workers = 1;
  std::uint64_t f_seed = 20240501;
  auto* factors = app.add_subcommand("factors", "observed two-level factors against the bound");
  add_output_options(factors, fac_o);
  factors->add_option("--kx", f_kx);
  factors->add_option("--ky", f_ky);
  factors->add_option("--mesh", f_mesh, "uniform | shishkin");
  factors->add_option("--epsilon", f_eps);
  factors->add_option("--columns", f_cols, "beta:gamma:m list")->delimiter(',');
  factors->add_option("--rows", f_rows, "M:N list")->delimiter(',');
  factors->add_option("--iterations", f_iters, "cycles per run");
  factors->add_option("--seed", f_seed);
  factors->add_option("--max-m", f_max_m, "skip rows with more spatial intervals");
  factors->add_option("--max-n", f_max_n, "skip rows with more time intervals");
  factors->add_option("--workers", f_workers);

  // dump-operators
  ProblemArgs dump_p;
  OutputArgs dump_o;
  std::vector<std::string> which{"mass", "stiffness-x", "stiffness-y"};
  std::size_t cap = 4096;
  dump_p.mx = dump_p.my = 4;
  dump_p.nt = 4;
  auto* dump = app.add_subcommand("dump-operators", "dense operator matrices as CSV");
  add_problem_options(dump, dump_p);
  add_output_options(dump, dump_o);
  dump->add_option("--which", which, "mass, stiffness-x, stiffness-y, step-implicit, step-explicit")
      ->delimiter(',');
  dump->add_option("--cap", cap, "refuse orders above this");

  // selftest
  bool inject = false;
  auto* selftest = app.add_subcommand("selftest", "dense-oracle invariant suite");
  selftest->add_flag("--inject-fault", inject, "perturb a stiffness entry first");

  std::vector<std::string> args = expand_presets(argc, argv);
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*solve) {
      if (solver == "seq" || solver == "sequential") {
        so.solver = FM_SOLVER_SEQUENTIAL;
      } else if (solver == "parareal") {
        so.solver = FM_SOLVER_PARAREAL;
      } else if (solver == "mgrit") {
        so.solver = FM_SOLVER_MGRIT;
      } else {
        throw Failure(FM_INVALID_ARGUMENT, "solver: expected seq, parareal or mgrit");
      }
      if (relax == "FCF" || relax == "fcf") {
        so.relaxation = FM_RELAX_FCF;
      } else if (relax == "F" || relax == "f") {
        so.relaxation = FM_RELAX_F;
      } else {
        throw Failure(FM_INVALID_ARGUMENT, "relax: expected FCF or F");
      }
      so.skip_first_down = no_skip ? 0 : 1;
      so.random_initial_guess = zero_guess ? 0 : 1;
      so.record_wall_time = wall ? 1 : 0;
      so.compute_residual = no_residual ? 0 : 1;
      auto problem = make_problem(solve_p);
      fm_solution* raw = nullptr;
      check(fm_solve(problem.get(), &so, &raw), "solve");
      std::unique_ptr<fm_solution, void (*)(fm_solution*)> sol(raw, fm_solution_destroy);
      CString report;
      check(fm_solution_report(sol.get(), &report.p), "report");
      emit(solve_o, "solve", ".json", report.str());
      if (!output_dir(solve_o).empty()) {
        std::printf("iterations %d  residual %.3e  factor %.4f  L2 error %.4e  spatial solves %llu\n",
                    fm_solution_iterations(sol.get()), fm_solution_residual(sol.get()),
                    fm_solution_convergence_factor(sol.get()), fm_solution_l2_error(sol.get()),
                    static_cast<unsigned long long>(fm_solution_spatial_solves(sol.get())));
      }
    } else if (*predict) {
      auto problem = make_problem(pred_p);
      double bound = 0.0;
      CString report;
      check(fm_predict(problem.get(), pred_m, per_mode ? 1 : 0, &bound, &report.p), "predict");
      emit(pred_o, "predict", ".json", report.str());
      char row[256];
      std::snprintf(row, sizeof row, "beta,gamma,M,N,m,bound\n%.6e,%.6e,%d,%d,%d,%.6e\n",
                    pred_p.beta, pred_p.gamma, pred_p.mx, pred_p.nt, pred_m, bound);
      emit(pred_o, "predict", ".csv", row);
    } else if (*table) {
      std::vector<double> betas, gammas;
      for (const auto& [b, g] : split_pairs(t_pairs, "pairs")) {
        betas.push_back(to_double(b, "pairs"));
        gammas.push_back(to_double(g, "pairs"));
      }
      std::vector<int> ms, ns;
      parse_rows(t_rows, ms, ns);
      fm_table_desc d{t_kx, t_ky, mesh_kind(t_mesh), t_eps, betas.size(), betas.data(),
                      gammas.data(), ms.size(), ms.data(), ns.data(), t_err.c_str(),
                      t_load.c_str(), t_workers};
      CString csv, json;
      check(fm_run_table(&d, &csv.p, &json.p), "table");
      emit(table_o, "table", ".csv", csv.str());
      if (!output_dir(table_o).empty()) emit(table_o, "table", ".json", json.str());
    } else if (*factors) {
      std::vector<double> betas, gammas;
      std::vector<int> coarsening;
      for (const auto& c : f_cols) {
        const auto a = c.find(':'), b = c.rfind(':');
        if (a == std::string::npos || a == b) {
          throw Failure(FM_INVALID_ARGUMENT, "columns: expected beta:gamma:m, got '" + c + "'");
        }
        betas.push_back(to_double(c.substr(0, a), "columns"));
        gammas.push_back(to_double(c.substr(a + 1, b - a - 1), "columns"));
        coarsening.push_back(to_int(c.substr(b + 1), "columns"));
      }
      std::vector<int> ms, ns;
      parse_rows(f_rows, ms, ns);
      fm_factor_desc d{f_kx, f_ky, mesh_kind(f_mesh), f_eps, betas.size(), betas.data(),
                       gammas.data(), coarsening.data(), ms.size(), ms.data(), ns.data(),
                       f_iters, f_seed, f_max_m, f_max_n, f_workers};
      CString csv, json;
      check(fm_factor_study(&d, &csv.p, &json.p), "factors");
      emit(fac_o, "factors", ".csv", csv.str());
      if (!output_dir(fac_o).empty()) emit(fac_o, "factors", ".json", json.str());
    } else if (*dump) {
      auto problem = make_problem(dump_p);
      for (const auto& w : which) {
        CString csv;
        check(fm_dump_operator(problem.get(), w.c_str(), cap, &csv.p), "dump-operators");
        emit(dump_o, w, ".csv", csv.str());
      }
    } else if (*selftest) {
      CString report;
      int failures = 0;
      check(fm_selftest(inject ? 1 : 0, &report.p, &failures), "selftest");
      std::cout << report.str();
      return failures == 0 ? 0 : 1;
    }
  } catch (const Failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.status) == 0 ? 1 : static_cast<int>(e.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
