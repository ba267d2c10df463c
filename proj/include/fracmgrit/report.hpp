#pragma once

#include <json.hpp>
#include <string>
#include <vector>

#include "fracmgrit/mgrit.hpp"
#include "fracmgrit/theory.hpp"
#include "fracmgrit/verify.hpp"

namespace fracmgrit {

nlohmann::json to_json(const SpatialGrid& grid);
nlohmann::json to_json(const TemporalMesh& mesh, bool with_points = false);
nlohmann::json to_json(const MgritOptions& opts);
nlohmann::json to_json(const MgritTrace& trace);
nlohmann::json to_json(const BoundReport& rep, bool per_mode = false);
nlohmann::json to_json(const ConvergenceRow& row);
nlohmann::json to_json(const FactorResult& res);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);
std::string csv_number(double v);

/// beta,gamma,M,N,error,rate[,status]
std::string table_csv_header();
std::string table_csv_row(double beta, double gamma, const ConvergenceRow& row);
/// beta,gamma,M,N,m,observed,bound[,status]
std::string factor_csv_header();
std::string factor_csv_row(const FactorResult& res);

}  // namespace fracmgrit
