#include "config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

#include <json.hpp>

#include "fwreg/error.hpp"

namespace fwreg::cli {

namespace {

using nlohmann::json;

json read_config(const std::optional<std::string>& path) {
    if (!path) return json::object();
    std::ifstream in(*path);
    if (!in) raise(ErrorCode::io, "cannot open config file " + *path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        raise(ErrorCode::config, "config file " + *path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) raise(ErrorCode::config, "config file must hold a JSON object");
    return j;
}

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& command) {
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) raise(ErrorCode::config, "unknown key '" + key + "' for command " + command);
}

template <class T>
void take(const json& j, const char* key, T& dst) {
    if (!j.contains(key)) return;
    try {
        dst = j.at(key).get<T>();
    } catch (const json::exception&) {
        raise(ErrorCode::config, std::string("key '") + key + "' has the wrong type");
    }
}

std::uint64_t take_seed(const json& j, std::uint64_t fallback) {
    if (!j.contains("seed")) return fallback;
    const json& s = j.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
        raise(ErrorCode::config, "seed must be a nonnegative integer");
    return s.get<std::uint64_t>();
}

BasisSpec parse_basis(const json& j, BasisSpec spec) {
    try {
        if (j.is_string()) {
            spec.family = parse_family(j.get<std::string>());
            return spec;
        }
        if (!j.is_object()) raise(ErrorCode::config, "basis must be a family name or an object");
        reject_unknown(j, {"family", "degree", "order", "mode", "tensor_cap", "interior_knots"}, "basis");
        if (j.contains("family")) spec.family = parse_family(j.at("family").get<std::string>());
        take(j, "degree", spec.degree);
        take(j, "order", spec.order);
        take(j, "tensor_cap", spec.tensor_cap);
        take(j, "interior_knots", spec.interior_knots);
        if (j.contains("mode")) {
            std::string m = j.at("mode").get<std::string>();
            if (m == "additive")
                spec.mode = MultivariateMode::additive;
            else if (m == "tensor")
                spec.mode = MultivariateMode::tensor;
            else
                raise(ErrorCode::config, "unknown multivariate mode '" + m + "'");
        }
    } catch (const json::exception&) {
        raise(ErrorCode::config, "basis has a field of the wrong type");
    } catch (const Error& e) {
        if (e.code() == ErrorCode::config) throw;
        raise(ErrorCode::config, e.what());
    }
    return spec;
}

Method parse_method(const std::string& s) {
    if (s == "fw") return Method::fw;
    if (s == "ls") return Method::ls;
    raise(ErrorCode::config, "method must be fw or ls, got '" + s + "'");
}

template <class F>
auto rethrow_as_config(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::config) throw;
        raise(ErrorCode::config, e.what());
    }
}

Schema parse_schema(const json& j) {
    if (!j.is_object()) raise(ErrorCode::config, "schema must be an object");
    reject_unknown(j, {"x", "y", "r", "a", "z", "w", "l"}, "schema");
    Schema s;
    s.given = true;
    auto list = [&](const char* key, std::vector<std::string>& dst) {
        if (!j.contains(key)) return;
        const json& v = j.at(key);
        if (v.is_string())
            dst = {v.get<std::string>()};
        else
            take(j, key, dst);
    };
    list("x", s.x);
    list("z", s.z);
    list("w", s.w);
    list("l", s.l);
    take(j, "y", s.y);
    take(j, "r", s.r);
    take(j, "a", s.a);
    return s;
}

}  // namespace

int resolve_threads(const std::optional<int>& flag, int file_value) {
    int t = file_value;
    if (flag) {
        t = *flag;
    } else if (const char* env = std::getenv("FWREG_THREADS"); env && *env) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (*end != '\0') raise(ErrorCode::config, std::string("FWREG_THREADS is not an integer: ") + env);
        t = static_cast<int>(v);
    }
    if (t < 1) raise(ErrorCode::config, "threads must be >= 1");
    return t;
}

FitConfig load_fit_config(const Flags& flags) {
    json j = read_config(flags.config);
    reject_unknown(j,
                   {"setting", "data", "schema", "predict_at", "basis", "J_grid", "J_max", "K", "split_fraction",
                    "method", "n_folds", "link", "outcome_method", "spline_df", "bridge_J", "seed", "threads", "out"},
                   "fit");
    FitConfig c;
    std::string setting;
    take(j, "setting", setting);
    if (flags.setting) setting = *flags.setting;
    if (!setting.empty()) {
        c.setting = rethrow_as_config([&] { return parse_setting(setting); });
        c.setting_given = true;
    }
    take(j, "data", c.data);
    if (flags.data) c.data = *flags.data;
    if (j.contains("schema")) c.schema = parse_schema(j.at("schema"));
    take(j, "predict_at", c.predict_at);
    if (j.contains("basis")) c.basis = parse_basis(j.at("basis"), c.basis);
    take(j, "J_grid", c.J_grid);
    take(j, "J_max", c.J_max);
    take(j, "K", c.K);
    take(j, "split_fraction", c.split_fraction);
    if (j.contains("method")) {
        std::string m;
        take(j, "method", m);
        c.method = parse_method(m);
    }
    take(j, "n_folds", c.n_folds);
    if (j.contains("link")) {
        std::string l;
        take(j, "link", l);
        c.link = rethrow_as_config([&] { return parse_link(l); });
    }
    if (j.contains("outcome_method")) {
        std::string m;
        take(j, "outcome_method", m);
        c.outcome_method = rethrow_as_config([&] { return parse_regression_method(m); });
    }
    take(j, "spline_df", c.spline_df);
    take(j, "bridge_J", c.bridge_J);
    c.seed = take_seed(j, 0);
    if (flags.seed) c.seed = *flags.seed;
    int threads = 1;
    take(j, "threads", threads);
    c.threads = resolve_threads(flags.threads, threads);
    take(j, "out", c.out);
    if (flags.out) c.out = *flags.out;

    if (!c.setting_given) raise(ErrorCode::config, "fit needs a setting (--setting or config key 'setting')");
    if (c.data.empty()) raise(ErrorCode::config, "fit needs a dataset path");
    if (c.K < 1) raise(ErrorCode::config, "K must be >= 1");
    if (!(c.split_fraction > 0.0 && c.split_fraction < 1.0))
        raise(ErrorCode::config, "split_fraction must lie in (0, 1)");
    if (c.J_max < 0) raise(ErrorCode::config, "J_max must be >= 0");
    if (c.bridge_J < 2) raise(ErrorCode::config, "bridge_J must be >= 2");
    for (int J : c.J_grid)
        if (J < 1) raise(ErrorCode::config, "J_grid entries must be >= 1");
    return c;
}

SimulateConfig load_simulate_config(const Flags& flags, bool rates) {
    json j = read_config(flags.config);
    std::set<std::string> known{"dgp",      "estimators", "n_grid",       "alpha_grid", "replications",
                                "K",        "split_fraction", "J_grid",   "J_max",      "basis",
                                "smooth_alpha", "spline_df", "test_size", "seed",       "threads",
                                "timing",   "baseline",   "out"};
    if (rates) {
        known.insert("min_replications");
        known.insert("results_in");
    }
    reject_unknown(j, known, rates ? "rates" : "simulate");
    SimulateConfig c;
    sim::ExperimentConfig& e = c.experiment;
    if (j.contains("dgp")) {
        std::string d;
        take(j, "dgp", d);
        e.dgp = rethrow_as_config([&] { return sim::parse_dgp(d); });
    }
    take(j, "estimators", e.estimators);
    take(j, "n_grid", e.n_grid);
    take(j, "alpha_grid", e.alpha_grid);
    take(j, "replications", e.replications);
    take(j, "K", e.K);
    take(j, "split_fraction", e.split_fraction);
    take(j, "J_grid", e.J_grid);
    take(j, "J_max", e.J_max);
    if (j.contains("basis")) e.basis = parse_basis(j.at("basis"), e.basis);
    take(j, "smooth_alpha", e.smooth_alpha);
    take(j, "spline_df", e.spline_df);
    take(j, "test_size", e.test_size);
    e.seed = take_seed(j, 0);
    if (flags.seed) e.seed = *flags.seed;
    int threads = 1;
    take(j, "threads", threads);
    e.threads = resolve_threads(flags.threads, threads);
    take(j, "timing", e.timing);
    take(j, "baseline", c.baseline);
    take(j, "out", c.out);
    if (flags.out) c.out = *flags.out;
    if (rates) {
        take(j, "min_replications", c.min_replications);
        take(j, "results_in", c.results_in);
    }
    if (flags.setting) {
        Setting s = rethrow_as_config([&] { return parse_setting(*flags.setting); });
        if (s != sim::dgp_setting(e.dgp))
            raise(ErrorCode::config, "--setting " + *flags.setting + " does not match dgp " + sim::dgp_name(e.dgp));
    }

    if (e.replications < 0) raise(ErrorCode::config, "replications must be >= 0");
    if (e.K < 1) raise(ErrorCode::config, "K must be >= 1");
    if (!(e.split_fraction > 0.0 && e.split_fraction < 1.0))
        raise(ErrorCode::config, "split_fraction must lie in (0, 1)");
    if (e.test_size < 1) raise(ErrorCode::config, "test_size must be >= 1");
    if (e.estimators.empty()) raise(ErrorCode::config, "estimators must not be empty");
    if (!rates && std::find(e.estimators.begin(), e.estimators.end(), c.baseline) == e.estimators.end())
        raise(ErrorCode::config, "baseline '" + c.baseline + "' is not among the estimators");
    return c;
}

}  // namespace fwreg::cli
