#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>

#include "json.hpp"

#include "dcaa/backtest.hpp"
#include "dcaa/model.hpp"
#include "dcaa/optimizer.hpp"

namespace dcaa {

using Json = nlohmann::ordered_json;

// Shortest text that parses back to the same double.
std::string format_number(double value);

Json to_json(const JumpLaw& law);
JumpLaw jump_law_from_json(const Json& j);

/// {"r", "A", "mu", "sigma", "rho", "lambda_common", "lambda_idio",
///  "common_jumps", "idio_jumps"}. Reading takes "A" when present,
/// otherwise "mu".
Json to_json(const ModelParams& params);
ModelParams model_from_json(const Json& j);
ModelParams load_model(const std::filesystem::path& path);

Json to_json(const SolverReport& report);
Json to_json(const BacktestLedger& ledger);

// period,wealth,return_pct,x_1..x_m,q,binding; one row per period plus a
// final row carrying the terminal wealth.
void write_ledger_csv(std::ostream& out, const BacktestLedger& ledger);

// k_star,W_1..W_tau,return_pct
void write_summary_csv(std::ostream& out, std::span<const BacktestLedger> ledgers, int tau);

void write_file(const std::filesystem::path& path, const std::string& content);

}  // namespace dcaa
