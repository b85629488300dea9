#include "dcaa/io.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/format.h>

namespace dcaa {

namespace {

Json vector_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Json matrix_json(const Matrix& m) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
    return out;
}

template <class T>
T field(const Json& j, const char* key) {
    require(j.contains(key), ErrorKind::InvalidArgument, fmt::format("missing field '{}'", key));
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("field '{}' has the wrong type", key));
    }
}

Vector vector_field(const Json& j, const char* key) {
    const auto values = field<std::vector<double>>(j, key);
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Matrix matrix_field(const Json& j, const char* key) {
    const auto rows = field<std::vector<std::vector<double>>>(j, key);
    Matrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(static_cast<Eigen::Index>(rows[i].size()) == m.cols(), ErrorKind::DimensionMismatch,
                fmt::format("'{}' is not rectangular", key));
        for (std::size_t k = 0; k < rows[i].size(); ++k)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    return m;
}

std::vector<JumpLaw> laws_field(const Json& j, const char* key, Eigen::Index m) {
    if (!j.contains(key)) return std::vector<JumpLaw>(static_cast<std::size_t>(m), JumpLaw::none());
    require(j.at(key).is_array(), ErrorKind::InvalidArgument, fmt::format("'{}' must be an array", key));
    std::vector<JumpLaw> laws;
    for (const Json& entry : j.at(key)) laws.push_back(jump_law_from_json(entry));
    return laws;
}

}  // namespace

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    return fmt::format("{}", value);
}

Json to_json(const JumpLaw& law) {
    if (law.family == JumpLaw::Family::PointMass) return {{"family", "point_mass"}, {"value", law.mean}};
    return {{"family", "normal"}, {"mean", law.mean}, {"variance", law.variance}};
}

JumpLaw jump_law_from_json(const Json& j) {
    const auto family = field<std::string>(j, "family");
    if (family == "normal") return JumpLaw::normal(field<double>(j, "mean"), field<double>(j, "variance"));
    if (family == "point_mass") return JumpLaw::point_mass(field<double>(j, "value"));
    if (family == "none") return JumpLaw::none();
    throw Error(ErrorKind::InvalidArgument, fmt::format("unknown jump family '{}'", family));
}

Json to_json(const ModelParams& params) {
    Json common = Json::array();
    Json idio = Json::array();
    for (const JumpLaw& law : params.common_jump_law()) common.push_back(to_json(law));
    for (const JumpLaw& law : params.idio_jump_law()) idio.push_back(to_json(law));
    return {{"r", params.r()},
            {"A", vector_json(params.excess_drift())},
            {"mu", vector_json(params.mu())},
            {"sigma", vector_json(params.sigma())},
            {"rho", matrix_json(params.rho())},
            {"lambda_common", params.lambda_common()},
            {"lambda_idio", vector_json(params.lambda_idio())},
            {"common_jumps", common},
            {"idio_jumps", idio}};
}

ModelParams model_from_json(const Json& j) {
    require(j.is_object(), ErrorKind::InvalidArgument, "model must be a JSON object");
    const double r = field<double>(j, "r");
    const Vector sigma = vector_field(j, "sigma");
    const Eigen::Index m = sigma.size();
    const Matrix rho = j.contains("rho") ? matrix_field(j, "rho") : Matrix(Matrix::Identity(m, m));
    const double lambda = j.contains("lambda_common") ? field<double>(j, "lambda_common") : 0.0;
    const Vector lambda_idio = j.contains("lambda_idio") ? vector_field(j, "lambda_idio") : Vector(Vector::Zero(m));
    const auto common = laws_field(j, "common_jumps", m);
    const auto idio = laws_field(j, "idio_jumps", m);
    if (j.contains("A")) return ModelParams::with_excess_drift(r, vector_field(j, "A"), sigma, rho, lambda, lambda_idio,
                                                               common, idio);
    return ModelParams(r, vector_field(j, "mu"), sigma, rho, lambda, lambda_idio, common, idio);
}

ModelParams load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Io, fmt::format("cannot open '{}'", path.string()));
    try {
        return model_from_json(Json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("{}: {}", path.string(), e.what()));
    }
}

Json to_json(const SolverReport& report) {
    Json warnings = Json::array();
    for (const auto& w : report.warnings) warnings.push_back(w);
    return {{"x_star", vector_json(report.x_star)},
            {"q1", report.q1},
            {"q2", report.q2},
            {"q3", report.q3},
            {"q", report.q},
            {"x", vector_json(report.x)},
            {"cash_fraction", 1.0 - report.x.sum()},
            {"binding", std::string(to_string(report.binding))},
            {"objective", report.objective},
            {"risk_slack", report.risk_slack},
            {"drift_slack", report.drift_slack},
            {"diagnostics",
             {{"B1", report.B1},
              {"B2", report.B2},
              {"B3", report.B3},
              {"sharpe_sq", report.sharpe_sq},
              {"c4", report.coefficients.c4},
              {"c5", report.coefficients.c5},
              {"c6", report.coefficients.c6},
              {"c7", report.coefficients.c7},
              {"c8", report.coefficients.c8},
              {"c9", report.coefficients.c9}}},
            {"warnings", warnings}};
}

Json to_json(const BacktestLedger& ledger) {
    Json rows = Json::array();
    for (const LedgerRow& row : ledger.rows) {
        rows.push_back({{"period", row.period},
                        {"open_date", format_date(row.open_date)},
                        {"close_date", format_date(row.close_date)},
                        {"wealth", row.wealth},
                        {"x", vector_json(row.x)},
                        {"q", row.q},
                        {"binding", std::string(to_string(row.binding))},
                        {"objective", row.objective},
                        {"risk_slack", row.risk_slack},
                        {"drift_slack", row.drift_slack},
                        {"open", vector_json(row.open)},
                        {"close", vector_json(row.close)},
                        {"volumes", vector_json(row.volumes)},
                        {"cash", row.cash},
                        {"cash_growth", row.cash_growth},
                        {"endowment_next", row.endowment_next},
                        {"wealth_next", row.wealth_next}});
    }
    Json out{{"tickers", ledger.tickers},
             {"k_star", ledger.k_star},
             {"K", ledger.K},
             {"complete", ledger.complete},
             {"periods", rows},
             {"terminal_wealth", ledger.terminal_wealth()},
             {"invested", ledger.invested()},
             {"return_pct", ledger.return_pct()},
             {"internal_rate", ledger.internal_rate()}};
    if (ledger.error_kind) out["error"] = {{"kind", std::string(to_string(*ledger.error_kind))}, {"message", ledger.error}};
    return out;
}

void write_ledger_csv(std::ostream& out, const BacktestLedger& ledger) {
    const std::size_t m = ledger.tickers.size();
    out << "period,wealth,return_pct";
    for (std::size_t j = 1; j <= m; ++j) out << ",x_" << j;
    out << ",q,binding\n";
    for (const LedgerRow& row : ledger.rows) {
        out << row.period << ',' << format_number(row.wealth) << ',';
        out << format_number((row.wealth_next - row.endowment_next - row.wealth) / row.wealth * 100.0);
        for (Eigen::Index j = 0; j < row.x.size(); ++j) out << ',' << format_number(row.x(j));
        out << ',' << format_number(row.q) << ',' << to_string(row.binding) << '\n';
    }
    if (!ledger.rows.empty()) {
        out << ledger.rows.size() << ',' << format_number(ledger.terminal_wealth()) << ','
            << format_number(ledger.return_pct());
        for (std::size_t j = 0; j < m; ++j) out << ',';
        out << ",," << (ledger.complete ? "terminal" : "truncated") << '\n';
    }
}

void write_summary_csv(std::ostream& out, std::span<const BacktestLedger> ledgers, int tau) {
    out << "k_star";
    for (int l = 1; l <= tau; ++l) out << ",W_" << l;
    out << ",return_pct\n";
    for (const BacktestLedger& ledger : ledgers) {
        out << format_number(ledger.k_star);
        const auto path = ledger.wealth_path();
        for (int l = 0; l < tau; ++l)
            out << ',' << (static_cast<std::size_t>(l) < path.size() ? format_number(path[static_cast<std::size_t>(l)]) : "");
        out << ',' << (ledger.complete ? format_number(ledger.return_pct()) : "") << '\n';
    }
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::Io, fmt::format("cannot write '{}'", path.string()));
    out << content;
    require(static_cast<bool>(out), ErrorKind::Io, fmt::format("write to '{}' failed", path.string()));
}

}  // namespace dcaa
