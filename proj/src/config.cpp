#include "dcaa/config.hpp"

#include <fstream>
#include <set>
#include <string>

#include <fmt/format.h>

namespace dcaa {

namespace {

void check_keys(const Json& j, const char* where, std::initializer_list<const char*> allowed) {
    require(j.is_object(), ErrorKind::InvalidArgument, fmt::format("'{}' must be an object", where));
    const std::set<std::string> known(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        require(known.contains(key), ErrorKind::InvalidArgument, fmt::format("unknown key '{}' in {}", key, where));
}

template <class T>
void read(const Json& j, const char* key, T& target) {
    if (!j.contains(key) || j.at(key).is_null()) return;
    try {
        target = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("config key '{}' has the wrong type", key));
    }
}

std::filesystem::path existing(const std::filesystem::path& base, const std::string& name) {
    std::filesystem::path p(name);
    if (p.is_relative() && !base.empty()) p = base / p;
    require(std::filesystem::exists(p), ErrorKind::Io, fmt::format("referenced file '{}' does not exist", p.string()));
    return p;
}

}  // namespace

void resize_schedule(InvestmentPlan& plan, int tau) {
    require(tau >= 1, ErrorKind::InvalidArgument, "tau must be at least 1");
    plan.tau = tau;
    plan.alpha.resize(static_cast<std::size_t>(tau), 1.0);
}

RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
    check_keys(j, "config", {"model", "calibration", "prices", "plan", "simulation", "backtest", "output_dir"});
    require(!(j.contains("model") && j.contains("calibration")), ErrorKind::InvalidArgument,
            "config may hold either 'model' or 'calibration', not both");
    RunConfig c;

    if (j.contains("plan")) {
        const Json& p = j.at("plan");
        check_keys(p, "plan", {"tau", "alpha", "p", "k_star", "c0", "r", "l", "w_prev", "c9", "lambda_weighting"});
        int tau = c.plan.tau;
        read(p, "tau", tau);
        resize_schedule(c.plan, tau);
        if (p.contains("alpha")) {
            read(p, "alpha", c.plan.alpha);
            require(std::ssize(c.plan.alpha) == c.plan.tau, ErrorKind::InvalidArgument, "alpha needs tau entries");
        }
        read(p, "p", c.plan.p);
        read(p, "c0", c.plan.c0);
        read(p, "r", c.r);
        read(p, "l", c.plan.l);
        read(p, "w_prev", c.plan.w_prev);
        if (p.contains("k_star")) {
            if (p.at("k_star").is_array())
                read(p, "k_star", c.k_stars);
            else
                c.k_stars = {p.at("k_star").get<double>()};
        }
        std::string c9 = "derived";
        read(p, "c9", c9);
        require(c9 == "derived" || c9 == "literal", ErrorKind::InvalidArgument, "c9 must be 'derived' or 'literal'");
        c.c9_form = c9 == "literal" ? C9Form::Literal : C9Form::Derived;
        std::string weighting = "literal";
        read(p, "lambda_weighting", weighting);
        require(weighting == "literal" || weighting == "wealth", ErrorKind::InvalidArgument,
                "lambda_weighting must be 'literal' or 'wealth'");
        c.plan.weighting = weighting == "wealth" ? LambdaWeighting::WealthWeighted : LambdaWeighting::Literal;
    }
    c.calibration.r = c.r;

    if (j.contains("model")) {
        const Json& m = j.at("model");
        c.model = m.is_string() ? load_model(existing(base_dir, m.get<std::string>())) : model_from_json(m);
    }
    if (j.contains("calibration")) {
        const Json& cal = j.at("calibration");
        check_keys(cal, "calibration", {"kappa", "window", "days_per_period", "common_jump_fraction", "rolling_window"});
        read(cal, "kappa", c.calibration.kappa);
        read(cal, "window", c.calibration.window);
        read(cal, "days_per_period", c.calibration.days_per_period);
        read(cal, "common_jump_fraction", c.calibration.common_jump_fraction);
        read(cal, "rolling_window", c.calibration.rolling_window);
        c.calibration.validate();
    }
    if (j.contains("prices")) c.prices = existing(base_dir, j.at("prices").get<std::string>());

    if (j.contains("simulation")) {
        const Json& s = j.at("simulation");
        check_keys(s, "simulation", {"paths", "seed", "dt", "workers"});
        read(s, "paths", c.paths);
        if (s.contains("seed") && !s.at("seed").is_null()) c.seed = s.at("seed").get<std::uint64_t>();
        read(s, "dt", c.dt);
        read(s, "workers", c.workers);
    }
    if (j.contains("backtest")) {
        const Json& b = j.at("backtest");
        check_keys(b, "backtest", {"cash_interest", "timing", "first_period", "boundary"});
        read(b, "cash_interest", c.cash_interest);
        std::string timing = "fixed";
        read(b, "timing", timing);
        require(timing == "fixed" || timing == "rolling", ErrorKind::InvalidArgument,
                "timing must be 'fixed' or 'rolling'");
        c.timing = timing == "rolling" ? CalibrationTiming::Rolling : CalibrationTiming::Fixed;
        if (b.contains("first_period") && !b.at("first_period").is_null())
            c.first_period = b.at("first_period").get<std::size_t>();
        std::string boundary = "calendar-month";
        read(b, "boundary", boundary);
        require(boundary == "calendar-month", ErrorKind::InvalidArgument, "only calendar-month periods are supported");
    }
    if (j.contains("output_dir")) {
        std::filesystem::path out(j.at("output_dir").get<std::string>());
        c.output_dir = out.is_relative() && !base_dir.empty() ? base_dir / out : out;
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::Io, fmt::format("cannot open config '{}'", path.string()));
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("{}: {}", path.string(), e.what()));
    }
    return run_config_from_json(j, path.parent_path());
}

}  // namespace dcaa
