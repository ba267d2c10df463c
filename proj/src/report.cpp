#include "fracmgrit/report.hpp"

#include <algorithm>
#include <cstdio>

namespace fracmgrit {

using nlohmann::json;

json to_json(const SpatialGrid& g) {
  return {{"domain", {g.a, g.b, g.c, g.d}}, {"m_beta", g.m_beta}, {"m_gamma", g.m_gamma},
          {"hx", g.hx()}, {"hy", g.hy()}, {"unknowns", g.dof()}};
}

json to_json(const TemporalMesh& mesh, bool with_points) {
  json j = {{"intervals", mesh.intervals()},
            {"final_time", mesh.final_time()},
            {"uniform", mesh.is_uniform()},
            {"min_step", 0.0},
            {"max_step", 0.0}};
  double lo = mesh.step(1), hi = mesh.step(1);
  for (int n = 2; n <= mesh.intervals(); ++n) {
    lo = std::min(lo, mesh.step(n));
    hi = std::max(hi, mesh.step(n));
  }
  j["min_step"] = lo;
  j["max_step"] = hi;
  if (with_points) j["points"] = std::vector<double>(mesh.points().begin(), mesh.points().end());
  return j;
}

json to_json(const MgritOptions& o) {
  return {{"m", o.m},
          {"max_levels", o.max_levels},
          {"min_coarse", o.min_coarse},
          {"halt_tol", o.halt_tol},
          {"max_iters", o.max_iters},
          {"relaxation", o.relaxation == Relaxation::fcf ? "FCF" : "F"},
          {"skip_first_down", o.skip_first_down},
          {"seed", o.seed},
          {"random_initial_guess", o.random_initial_guess},
          {"fixed_iterations", o.fixed_iterations},
          {"workers", o.workers}};
}

json to_json(const MgritTrace& t) {
  json iters = json::array();
  bool wall = false;
  for (const auto& r : t.records) wall = wall || r.wall_seconds > 0.0;
  for (const auto& r : t.records) {
    json e = {{"iteration", r.iteration},
              {"residual", r.residual},
              {"spatial_solves", r.spatial_solves},
              {"cg_iterations", r.cg_iterations}};
    if (wall) e["wall_seconds"] = r.wall_seconds;
    iters.push_back(std::move(e));
  }
  json j = {{"iterations", std::move(iters)},
            {"converged", t.converged},
            {"level_intervals", t.level_intervals},
            {"seed", t.seed},
            {"residual_norm", "euclidean, C-points after F-relaxation"},
            {"warnings", t.warnings}};
  try {
    j["convergence_factor"] = convergence_factor(t);
  } catch (const Error&) {
    j["convergence_factor"] = nullptr;
  }
  return j;
}

json to_json(const BoundReport& rep, bool per_mode) {
  json j = {{"bound", rep.bound},
            {"argmax_mode", rep.argmax},
            {"m", rep.m},
            {"fine_intervals", rep.fine_intervals},
            {"coarse_intervals", rep.coarse_intervals},
            {"modes", rep.sigmas.size()}};
  if (!rep.sigmas.empty()) {
    j["sigma_min"] = rep.sigmas.front();
    j["sigma_max"] = rep.sigmas.back();
    j["argmax_sigma"] = rep.sigmas[rep.argmax];
    j["argmax_lambda"] = rep.lambda_dagger[rep.argmax];
    j["argmax_mu_min"] = rep.mu_ddagger[rep.argmax];
    j["argmax_mu_abs"] = rep.mu_star[rep.argmax];
  }
  if (per_mode) {
    j["sigma"] = rep.sigmas;
    j["lambda_dagger"] = rep.lambda_dagger;
    j["mu_ddagger"] = rep.mu_ddagger;
    j["mu_star"] = rep.mu_star;
    j["per_mode"] = rep.per_mode;
  }
  return j;
}

json to_json(const ConvergenceRow& row) {
  json j = {{"M", row.m_space}, {"N", row.n_time}, {"error", row.error}, {"status", row.status}};
  j["rate"] = row.rate ? json(*row.rate) : json(nullptr);
  return j;
}

json to_json(const FactorResult& r) {
  const FactorConfig& c = r.config;
  return {{"beta", c.beta},
          {"gamma", c.gamma},
          {"kx", c.kx},
          {"ky", c.ky},
          {"M", c.m_space},
          {"N", c.n_time},
          {"mesh", to_string(c.mesh)},
          {"epsilon", c.epsilon},
          {"m", c.m},
          {"iterations", c.iterations},
          {"seed", c.seed},
          {"observed", r.observed},
          {"bound", r.bound},
          {"max_ratio", r.max_ratio},
          {"within_bound", r.within_bound},
          {"residuals", r.residuals},
          {"spatial_solves", r.spatial_solves},
          {"status", r.status}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}

std::string table_csv_header() { return "beta,gamma,M,N,error,rate,status"; }

std::string table_csv_row(double beta, double gamma, const ConvergenceRow& row) {
  std::string s = csv_number(beta) + "," + csv_number(gamma) + "," + std::to_string(row.m_space) +
                  "," + std::to_string(row.n_time) + ",";
  s += row.status == "ok" ? csv_number(row.error) : "";
  s += ",";
  if (row.rate) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *row.rate);
    s += buf;
  }
  s += "," + csv_field(row.status);
  return s;
}

std::string factor_csv_header() { return "beta,gamma,M,N,m,observed,bound,status"; }

std::string factor_csv_row(const FactorResult& r) {
  const FactorConfig& c = r.config;
  std::string s = csv_number(c.beta) + "," + csv_number(c.gamma) + "," +
                  std::to_string(c.m_space) + "," + std::to_string(c.n_time) + "," +
                  std::to_string(c.m) + ",";
  if (r.status == "ok") {
    s += csv_number(r.observed) + "," + csv_number(r.bound);
  } else {
    s += ",";
  }
  s += "," + csv_field(r.status);
  return s;
}

}  // namespace fracmgrit
