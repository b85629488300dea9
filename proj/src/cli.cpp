#include "dcaa/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "dcaa/config.hpp"
#include "dcaa/normal.hpp"
#include "dcaa/risk.hpp"
#include "parallel.hpp"

namespace dcaa {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flags shared by the subcommands; unset flags leave config values alone.
struct Flags {
    std::optional<std::string> config;
    std::optional<std::string> output_dir;
    std::optional<unsigned> workers;
    std::optional<std::string> model;
    std::optional<std::string> prices;
    std::optional<double> r;
    std::optional<int> tau;
    std::optional<double> p;
    std::optional<double> c0;
    std::optional<int> l;
    std::optional<double> w_prev;
    std::optional<std::string> k_star;
    std::optional<std::string> c9;
    std::optional<double> kappa;
    std::optional<std::size_t> window;
    std::optional<double> days_per_period;
    std::optional<double> common_fraction;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::string> x;
    std::optional<std::string> out_file;
    std::optional<std::string> timing;
    std::optional<std::size_t> first_period;
    bool cash_interest = false;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw UsageError(fmt::format("{}: '{}' is not a number", what, item));
        }
    }
    if (values.empty()) throw UsageError(fmt::format("{}: empty list", what));
    return values;
}

void add_config_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--output-dir", f.output_dir, "Directory for reports (default $DCAA_OUTPUT_DIR or .)");
    cmd->add_option("--workers", f.workers, "Worker threads, 0 for all cores");
}

void add_model_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--model", f.model, "Model parameters as JSON");
    cmd->add_option("--prices", f.prices, "Price CSV to calibrate from");
    cmd->add_option("--r", f.r, "Risk-free rate per period");
    cmd->add_option("--kappa", f.kappa, "Jump threshold in rolling standard deviations");
    cmd->add_option("--window", f.window, "Trailing price rows used for calibration");
    cmd->add_option("--days-per-period", f.days_per_period, "Trading days per period");
    cmd->add_option("--common-fraction", f.common_fraction, "Share of assets flagged for a common jump");
}

void add_plan_flags(CLI::App* cmd, Flags& f, bool k_list) {
    cmd->add_option("--tau", f.tau, "Horizon in periods");
    cmd->add_option("--p", f.p, "Risk level of the CLVaR floor");
    cmd->add_option("--c0", f.c0, "Drift cap");
    cmd->add_option("--k-star", f.k_star, k_list ? "Stop-loss rates, comma separated" : "Stop-loss rate");
    cmd->add_option("--c9", f.c9, "Quadratic ray coefficient: derived or literal")
        ->check(CLI::IsMember({"derived", "literal"}));
}

RunConfig resolve(const Flags& f) {
    RunConfig c = f.config ? load_run_config(*f.config) : RunConfig{};
    if (f.output_dir) c.output_dir = *f.output_dir;
    if (f.workers) c.workers = *f.workers;
    if (f.r) {
        c.r = *f.r;
        c.calibration.r = *f.r;
    }
    if (f.kappa) c.calibration.kappa = *f.kappa;
    if (f.window) c.calibration.window = *f.window;
    if (f.days_per_period) c.calibration.days_per_period = *f.days_per_period;
    if (f.common_fraction) c.calibration.common_jump_fraction = *f.common_fraction;
    if (f.tau) resize_schedule(c.plan, *f.tau);
    if (f.p) c.plan.p = *f.p;
    if (f.c0) c.plan.c0 = *f.c0;
    if (f.l) c.plan.l = *f.l;
    if (f.w_prev) c.plan.w_prev = *f.w_prev;
    if (f.k_star) c.k_stars = parse_list(*f.k_star, "--k-star");
    if (f.c9) c.c9_form = *f.c9 == "literal" ? C9Form::Literal : C9Form::Derived;
    if (f.seed) c.seed = *f.seed;
    if (f.paths) c.paths = *f.paths;
    if (f.timing) c.timing = *f.timing == "rolling" ? CalibrationTiming::Rolling : CalibrationTiming::Fixed;
    if (f.first_period) c.first_period = *f.first_period;
    if (f.cash_interest) c.cash_interest = true;
    if (f.prices) {
        require(std::filesystem::exists(*f.prices), ErrorKind::Io, fmt::format("price file '{}' does not exist", *f.prices));
        c.prices = *f.prices;
    }
    if (f.model) {
        c.model = load_model(*f.model);
        c.prices.reset();
    }
    c.calibration.validate();
    return c;
}

std::filesystem::path output_dir(const RunConfig& c) {
    if (c.output_dir) return *c.output_dir;
    if (const char* env = std::getenv("DCAA_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

ModelParams model_of(const RunConfig& c) {
    if (c.model) return *c.model;
    require(c.prices.has_value(), ErrorKind::InvalidArgument, "no model: pass --model or --prices");
    return calibrate(load_prices(*c.prices), c.calibration);
}

InvestmentPlan plan_of(const RunConfig& c, double r) {
    InvestmentPlan plan = c.plan;
    plan.k_star = c.k_stars.front();
    plan.K = stop_loss_floor(plan.k_star, plan.tau, r);
    return plan;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// Two-asset market with common and idiosyncratic jumps used when no model is given.
ModelParams reference_jump_market() {
    Vector A(2);
    A << 0.04, 0.025;
    Vector sigma(2);
    sigma << 0.2, 0.15;
    Matrix rho(2, 2);
    rho << 1.0, 0.3, 0.3, 1.0;
    return ModelParams::with_excess_drift(0.03, A, sigma, rho, 0.3, Vector::Constant(2, 0.2),
                                          {JumpLaw::normal(-0.05, 0.01), JumpLaw::normal(-0.03, 0.02)},
                                          {JumpLaw::normal(0.02, 0.01), JumpLaw::normal(-0.04, 0.01)});
}

Vector vector_of(const std::string& text, Eigen::Index m) {
    const auto v = parse_list(text, "--x");
    if (static_cast<Eigen::Index>(v.size()) != m)
        throw UsageError(fmt::format("--x needs {} entries, got {}", m, v.size()));
    return Eigen::Map<const Vector>(v.data(), m);
}

int cmd_calibrate(const Flags& f, std::ostream& out) {
    const RunConfig c = resolve(f);
    require(c.prices.has_value(), ErrorKind::InvalidArgument, "calibrate needs --prices");
    const CalibrationResult result = calibrate_detailed(load_prices(*c.prices), c.calibration);
    Json j = to_json(result.params);
    const std::string text = dump(j);
    if (f.out_file) write_file(*f.out_file, text);
    out << text;
    return 0;
}

int cmd_optimize(const Flags& f, std::ostream& out) {
    const RunConfig c = resolve(f);
    const ModelParams params = model_of(c);
    const InvestmentPlan plan = plan_of(c, params.r());
    const SolverReport report = solve(params, plan, {.c9_form = c.c9_form});
    Json j = to_json(report);
    j["k_star"] = plan.k_star;
    j["K"] = plan.K;
    const std::string text = dump(j);
    if (f.out_file) write_file(*f.out_file, text);
    out << text;
    return 0;
}

int cmd_simulate(const Flags& f, std::ostream& out) {
    const RunConfig c = resolve(f);
    if (!c.seed) throw UsageError("simulate requires --seed");
    const ModelParams params = model_of(c);
    const InvestmentPlan plan = plan_of(c, params.r());
    const Vector x = f.x ? vector_of(*f.x, params.m()) : solve(params, plan, {.c9_form = c.c9_form}).x;
    const auto paths = sample_terminal_wealth(params, plan, x, {.n_paths = c.paths, .seed = *c.seed, .workers = c.workers});

    std::ostringstream csv;
    csv << "path,terminal_wealth,lambda_std,ruined";
    for (int i = 0; i < plan.tranche_count(); ++i) csv << ",y_" << plan.l + i;
    csv << '\n';
    std::vector<double> wealth;
    std::size_t ruined = 0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const PathSample& s = paths[i];
        csv << i << ',' << format_number(s.terminal_wealth) << ',' << format_number(s.lambda_std) << ','
            << (s.ruined ? 1 : 0);
        for (Eigen::Index k = 0; k < s.y.size(); ++k) csv << ',' << format_number(s.y(k));
        csv << '\n';
        wealth.push_back(s.terminal_wealth);
        ruined += s.ruined ? 1 : 0;
    }

    const EmpiricalSample sample(wealth);
    double mean = 0.0;
    for (double w : wealth) mean += w;
    mean /= static_cast<double>(wealth.size());
    const BoundCoefficients coeffs = bound_coefficients(params, plan, x);
    std::vector<std::pair<std::string, double>> rows{
        {"mean", mean},
        {"lower_bound_mean", lower_bound_mean(coeffs)},
        {fmt::format("var_{}", format_number(plan.p)), var(sample, plan.p)},
        {fmt::format("clvar_{}", format_number(plan.p)), clvar(sample, plan.p)},
        {fmt::format("var_{}", format_number(1.0 - plan.p)), var(sample, 1.0 - plan.p)},
        {fmt::format("cvar_{}", format_number(1.0 - plan.p)), cvar(sample, 1.0 - plan.p)},
        {"ruined_paths", static_cast<double>(ruined)}};
    std::ostringstream risk;
    risk << "measure,value\n";
    Json summary{{"paths", paths.size()}, {"seed", *c.seed}, {"x", std::vector<double>(x.data(), x.data() + x.size())}};
    for (const auto& [name, value] : rows) {
        risk << name << ',' << format_number(value) << '\n';
        summary[name] = value;
    }
    const auto dir = output_dir(c);
    write_file(dir / "paths.csv", csv.str());
    write_file(dir / "risk.csv", risk.str());
    summary["files"] = {(dir / "paths.csv").string(), (dir / "risk.csv").string()};
    out << dump(summary);
    return 0;
}

int cmd_backtest(const Flags& f, std::ostream& out) {
    const RunConfig c = resolve(f);
    require(c.prices.has_value(), ErrorKind::InvalidArgument, "backtest needs --prices");
    const PricePanel panel = load_prices(*c.prices);
    BacktestSettings base;
    base.plan = c.plan;
    base.calibration = c.calibration;
    base.timing = c.timing;
    base.cash_interest = c.cash_interest;
    base.first_period = c.first_period;
    base.solver.c9_form = c.c9_form;
    base.params = c.model;
    if (!base.params && base.timing == CalibrationTiming::Fixed) {
        // Calibrate once for the whole sweep.
        const std::size_t periods = panel.periods().size();
        require(periods >= static_cast<std::size_t>(c.plan.tau), ErrorKind::Data,
                fmt::format("panel has {} periods, backtest needs {}", periods, c.plan.tau));
        const std::size_t first = c.first_period.value_or(periods - static_cast<std::size_t>(c.plan.tau));
        require(first < periods, ErrorKind::InvalidArgument, "first period lies past the end of the panel");
        const Eigen::Index start = panel.periods()[first].begin;
        const Eigen::Index from = c.calibration.window == 0
                                      ? 0
                                      : std::max<Eigen::Index>(0, start - static_cast<Eigen::Index>(c.calibration.window));
        base.params = start - from >= 2 ? calibrate(panel.rows(from, start), c.calibration) : calibrate(panel, c.calibration);
    }

    std::vector<BacktestLedger> ledgers(c.k_stars.size());
    detail::parallel_for(c.k_stars.size(), c.workers, [&](std::size_t i) {
        BacktestSettings s = base;
        s.plan.k_star = c.k_stars[i];
        ledgers[i] = run_backtest(panel, s);
    });

    const auto dir = output_dir(c);
    for (const BacktestLedger& ledger : ledgers) {
        std::ostringstream csv;
        write_ledger_csv(csv, ledger);
        const std::string stem = fmt::format("ledger_k{}", format_number(ledger.k_star));
        write_file(dir / (stem + ".csv"), csv.str());
        write_file(dir / (stem + ".json"), dump(to_json(ledger)));
    }
    std::ostringstream summary;
    write_summary_csv(summary, ledgers, c.plan.tau);
    write_file(dir / "summary.csv", summary.str());
    out << summary.str();
    bool all_complete = true;
    for (const BacktestLedger& ledger : ledgers) all_complete = all_complete && ledger.complete;
    if (!all_complete) {
        const auto bad = std::find_if(ledgers.begin(), ledgers.end(), [](const auto& l) { return !l.complete; });
        throw Error(bad->error_kind.value_or(ErrorKind::Data),
                    fmt::format("backtest truncated at k*={}: {}", format_number(bad->k_star), bad->error));
    }
    return 0;
}

int cmd_bound_check(const Flags& f, std::ostream& out) {
    RunConfig c = resolve(f);
    const ModelParams params = c.model || c.prices ? model_of(c) : reference_jump_market();
    InvestmentPlan plan = plan_of(c, params.r());
    Vector x = Vector::Constant(params.m(), 0.5 / static_cast<double>(params.m()));
    if (params.m() == 2) x << 0.6, 0.4;
    if (f.x) x = vector_of(*f.x, params.m());
    const std::size_t n = f.paths ? *f.paths : 100'000;
    const std::uint64_t seed = c.seed.value_or(1);

    const auto paths = sample_terminal_wealth(params, plan, x, {.n_paths = n, .seed = seed, .workers = c.workers});
    std::vector<double> w;
    w.reserve(n);
    for (const auto& s : paths) w.push_back(s.terminal_wealth);
    auto mean_se = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double a : v) mean += a;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double a : v) ss += (a - mean) * (a - mean);
        return std::pair{mean, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
    };
    const BoundCoefficients coeffs = bound_coefficients(params, plan, x);
    bool ok = true;
    auto line = [&](bool pass, const std::string& name, const std::string& detail) {
        ok = ok && pass;
        out << (pass ? "PASS " : "FAIL ") << name << ' ' << detail << '\n';
    };

    const auto [mc_mean, mc_se] = mean_se(w);
    const double bound_mean = lower_bound_mean(coeffs);
    line(std::abs(mc_mean - bound_mean) <= 3.0 * mc_se, "convex-order-mean",
         fmt::format("mc={} bound={} se={}", mc_mean, bound_mean, mc_se));

    const EmpiricalSample sample(w);
    for (double u : {0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99}) {
        const double d = var(sample, u);
        std::vector<double> excess(w.size());
        std::transform(w.begin(), w.end(), excess.begin(), [d](double a) { return std::max(a - d, 0.0); });
        const auto [mc, se] = mean_se(excess);
        const double lb = lower_bound_stop_loss(coeffs, d);
        line(lb <= mc + 3.0 * se, "stop-loss-dominance", fmt::format("u={} d={} bound={} mc={} se={}", u, d, lb, mc, se));
    }

    const std::vector<QuantileFunction> marginals{
        [](double u) { return std::exp(0.1 + 0.2 * normal::quantile(u)); },
        [](double u) { return std::exp(-0.05 + 0.5 * normal::quantile(u)); }};
    const Matrix rows = comonotonic_counterpart(marginals, midpoint_grid(10'000));
    const EmpiricalSample total = EmpiricalSample::from(Vector(rows.rowwise().sum()));
    const EmpiricalSample a = EmpiricalSample::from(Vector(rows.col(0)));
    const EmpiricalSample b = EmpiricalSample::from(Vector(rows.col(1)));
    for (double p : {0.05, 0.5, 0.95}) {
        const double gap = std::abs(var(total, p) - var(a, p) - var(b, p));
        line(gap <= 1e-9, "comonotonic-additivity", fmt::format("p={} gap={}", p, gap));
    }
    if (!ok) throw Error(ErrorKind::Data, "bound-check battery failed");
    return 0;
}

void emit_error(std::ostream& err, std::string_view kind, std::string_view message) {
    err << Json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Dynamic allocation under a CLVaR floor for jump-diffusion markets", "dcaa"};
    app.require_subcommand(1);
    Flags f;

    auto* calibrate_cmd = app.add_subcommand("calibrate", "Estimate model parameters from prices and print them as JSON");
    add_config_flags(calibrate_cmd, f);
    add_model_flags(calibrate_cmd, f);
    calibrate_cmd->add_option("--out", f.out_file, "Also write the JSON here");

    auto* optimize_cmd = app.add_subcommand("optimize", "Solve the allocation for the current period");
    add_config_flags(optimize_cmd, f);
    add_model_flags(optimize_cmd, f);
    add_plan_flags(optimize_cmd, f, false);
    optimize_cmd->add_option("--l", f.l, "Current period, 1-based");
    optimize_cmd->add_option("--w-prev", f.w_prev, "Wealth at the start of the period");
    optimize_cmd->add_option("--out", f.out_file, "Also write the JSON here");

    auto* simulate_cmd = app.add_subcommand("simulate", "Sample terminal wealth and its risk measures");
    add_config_flags(simulate_cmd, f);
    add_model_flags(simulate_cmd, f);
    add_plan_flags(simulate_cmd, f, false);
    simulate_cmd->add_option("--l", f.l, "Current period, 1-based");
    simulate_cmd->add_option("--w-prev", f.w_prev, "Wealth at the start of the period");
    simulate_cmd->add_option("--seed", f.seed, "Random seed (required)");
    simulate_cmd->add_option("--paths", f.paths, "Number of paths");
    simulate_cmd->add_option("--x", f.x, "Fixed allocation, comma separated (default: the solver's)");

    auto* backtest_cmd = app.add_subcommand("backtest", "Run the rebalancing strategy on historical prices");
    add_config_flags(backtest_cmd, f);
    add_model_flags(backtest_cmd, f);
    add_plan_flags(backtest_cmd, f, true);
    backtest_cmd->add_flag("--cash-interest", f.cash_interest, "Accrue exp(r / tau) on the cash fraction");
    backtest_cmd->add_option("--timing", f.timing, "Calibration timing: fixed or rolling")
        ->check(CLI::IsMember({"fixed", "rolling"}));
    backtest_cmd->add_option("--first-period", f.first_period, "Panel period where the backtest starts");

    auto* check_cmd = app.add_subcommand("bound-check", "Monte Carlo checks of the lower bound and additivity");
    add_config_flags(check_cmd, f);
    add_model_flags(check_cmd, f);
    add_plan_flags(check_cmd, f, false);
    check_cmd->add_option("--seed", f.seed, "Random seed (default 1)");
    check_cmd->add_option("--paths", f.paths, "Number of paths (default 100000)");
    check_cmd->add_option("--x", f.x, "Fixed allocation, comma separated");

    if (args.empty()) {
        err << app.help();
        return 2;
    }
    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return 0;
    } catch (const CLI::ParseError& e) {
        emit_error(err, "usage", e.what());
        return 2;
    }

    try {
        if (calibrate_cmd->parsed()) return cmd_calibrate(f, out);
        if (optimize_cmd->parsed()) return cmd_optimize(f, out);
        if (simulate_cmd->parsed()) return cmd_simulate(f, out);
        if (backtest_cmd->parsed()) return cmd_backtest(f, out);
        return cmd_bound_check(f, out);
    } catch (const UsageError& e) {
        emit_error(err, "usage", e.what());
        return 2;
    } catch (const Error& e) {
        emit_error(err, to_string(e.kind()), e.what());
        return 1;
    } catch (const nlohmann::json::exception& e) {
        emit_error(err, "invalid_argument", e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error(err, "internal", e.what());
        return 1;
    }
}

}  // namespace dcaa
