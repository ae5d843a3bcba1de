#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "fwreg/crossfit.hpp"
#include "fwreg/cv.hpp"
#include "fwreg/plans.hpp"
#include "fwreg/rng.hpp"
#include "fwreg/sim/rates.hpp"

namespace fwreg::cli {

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::io: return 4;
        case ErrorCode::numerical_consistency:
        case ErrorCode::under_identified:
        case ErrorCode::weak_instrument:
        case ErrorCode::nuisance_range:
        case ErrorCode::link_domain:
        case ErrorCode::density:
        case ErrorCode::separation:
        case ErrorCode::fit: return 3;
        default: return 2;
    }
}

namespace {

bool has_prefix_role(const std::string& name, char role) {
    if (name.empty() || name[0] != role) return false;
    if (name.size() == 1) return true;
    if (name[1] == '_') return true;
    return std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; });
}

Schema complete_schema(const Table& t, Schema s) {
    auto infer_list = [&](std::vector<std::string>& dst, char role) {
        if (!dst.empty()) return;
        for (const auto& h : t.header)
            if (has_prefix_role(h, role)) dst.push_back(h);
    };
    auto infer_one = [&](std::string& dst, const char* name) {
        if (dst.empty() && t.column(name) >= 0) dst = name;
    };
    infer_list(s.x, 'x');
    infer_list(s.z, 'z');
    infer_list(s.w, 'w');
    infer_list(s.l, 'l');
    infer_one(s.y, "y");
    infer_one(s.r, "r");
    infer_one(s.a, "a");
    return s;
}

struct Roles {
    std::vector<int> x, z, w, l;
    int y = -1, r = -1, a = -1;
};

std::vector<int> resolve(const Table& t, const std::vector<std::string>& names, const char* role, bool required,
                         Setting setting) {
    if (required && names.empty())
        raise(ErrorCode::schema, "setting " + setting_name(setting) + " needs role '" + role + "'");
    std::vector<int> idx;
    for (const auto& n : names) {
        int c = t.column(n);
        if (c < 0) raise(ErrorCode::schema, std::string("role '") + role + "' names missing column '" + n + "'");
        idx.push_back(c);
    }
    return idx;
}

int resolve_one(const Table& t, const std::string& name, const char* role, Setting setting) {
    auto v = resolve(t, name.empty() ? std::vector<std::string>{} : std::vector<std::string>{name}, role, true, setting);
    return v.front();
}

Roles resolve_roles(const Table& t, Setting s, const Schema& schema) {
    Roles r;
    r.y = resolve_one(t, schema.y, "y", s);
    switch (s) {
        case Setting::fulldata: r.x = resolve(t, schema.x, "x", true, s); break;
        case Setting::mar:
            r.x = resolve(t, schema.x, "x", true, s);
            r.z = resolve(t, schema.z, "z", false, s);
            r.r = resolve_one(t, schema.r, "r", s);
            break;
        case Setting::shadow:
            r.x = resolve(t, schema.x, "x", true, s);
            r.w = resolve(t, schema.w, "w", true, s);
            r.r = resolve_one(t, schema.r, "r", s);
            break;
        case Setting::cate:
            r.x = resolve(t, schema.x, "x", true, s);
            r.a = resolve_one(t, schema.a, "a", s);
            break;
        case Setting::proximal:
            r.x = resolve(t, schema.x, "x", true, s);
            r.z = resolve(t, schema.z, "z", true, s);
            r.w = resolve(t, schema.w, "w", true, s);
            r.a = resolve_one(t, schema.a, "a", s);
            break;
        case Setting::dose:
            r.l = resolve(t, schema.l, "l", true, s);
            r.a = resolve_one(t, schema.a, "a", s);
            break;
        case Setting::iv:
            r.x = resolve(t, schema.x, "x", true, s);
            r.z = resolve(t, schema.z, "z", true, s);
            if (r.z.size() != 1) raise(ErrorCode::schema, "setting iv needs exactly one instrument column");
            r.a = resolve_one(t, schema.a, "a", s);
            break;
    }
    std::set<int> seen;
    auto claim = [&](int c) {
        if (c < 0) return;
        if (!seen.insert(c).second)
            raise(ErrorCode::schema, "column '" + t.header[static_cast<std::size_t>(c)] + "' has more than one role");
    };
    for (const auto* v : {&r.x, &r.z, &r.w, &r.l})
        for (int c : *v) claim(c);
    claim(r.y);
    claim(r.r);
    claim(r.a);
    return r;
}

struct RowReader {
    const Table& t;
    std::size_t row;
    const std::vector<std::string>& cells() const { return t.rows[row]; }
    const std::string& name(int c) const { return t.header[static_cast<std::size_t>(c)]; }
    double num(int c) const { return parse_number(cells()[static_cast<std::size_t>(c)], row + 1, name(c)); }
    std::vector<double> nums(const std::vector<int>& cs) const {
        std::vector<double> v;
        for (int c : cs) v.push_back(num(c));
        return v;
    }
    int binary(int c) const {
        double v = num(c);
        if (v != 0.0 && v != 1.0)
            raise(ErrorCode::parse, "row " + std::to_string(row + 1) + " column '" + name(c) + "': expected 0 or 1");
        return static_cast<int>(v);
    }
    bool empty(int c) const {
        const std::string& s = cells()[static_cast<std::size_t>(c)];
        return s.find_first_not_of(" \t") == std::string::npos;
    }
    std::optional<double> response(const Roles& r) const {
        int obs = binary(r.r);
        if (obs == 0) return std::nullopt;
        if (empty(r.y))
            raise(ErrorCode::parse, "row " + std::to_string(row + 1) + " column '" + name(r.y) +
                                        "': response is missing but marked observed");
        return num(r.y);
    }
};

std::vector<std::string> names_of(const Table& t, const std::vector<int>& cs) {
    std::vector<std::string> out;
    for (int c : cs) out.push_back(t.header[static_cast<std::size_t>(c)]);
    return out;
}

PseudoPlan make_plan(const FitConfig& c) {
    PseudoPlan plan;
    plan.setting = c.setting;
    plan.link = c.link;
    plan.recipe.outcome.method = c.outcome_method;
    plan.recipe.outcome.df = c.spline_df;
    plan.recipe.outcome.basis = c.basis;
    plan.recipe.propensity.basis.family = Family::polynomial;
    plan.recipe.bridge_basis.family = Family::polynomial;
    plan.recipe.bridge_J = c.bridge_J;
    plan.recipe.extended.instrument_basis.family = Family::polynomial;
    plan.recipe.extended.endogenous_basis.family = Family::polynomial;
    return plan;
}

RowMatrix target_matrix(const std::vector<ObservedRecord>& recs) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : recs) rows.push_back(target_covariates(r));
    return stack_rows(rows);
}

RowMatrix read_points(const std::string& path, const std::vector<std::string>& columns) {
    Table t = read_csv(path);
    std::vector<int> idx;
    for (const auto& c : columns) {
        int i = t.column(c);
        if (i < 0) raise(ErrorCode::schema, "prediction points " + path + " lack column '" + c + "'");
        idx.push_back(i);
    }
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        RowReader rr{t, r};
        rows.push_back(rr.nums(idx));
    }
    RowMatrix m = stack_rows(rows);
    if (rows.empty()) m.resize(0, static_cast<Eigen::Index>(columns.size()));
    return m;
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
    return s;
}

std::string out_path(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

}  // namespace

LoadedData load_records(const Table& t, Setting s, const Schema& given) {
    Schema schema = complete_schema(t, given);
    Roles r = resolve_roles(t, s, schema);
    LoadedData out;
    out.target_columns = s == Setting::dose ? names_of(t, {r.a}) : names_of(t, r.x);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        RowReader rr{t, i};
        switch (s) {
            case Setting::fulldata: out.records.emplace_back(FullDataRecord{rr.nums(r.x), rr.num(r.y)}); break;
            case Setting::mar: {
                MarRecord m{rr.nums(r.x), rr.nums(r.z), rr.response(r)};
                out.records.emplace_back(std::move(m));
                break;
            }
            case Setting::shadow: {
                ShadowRecord m{rr.nums(r.x), rr.nums(r.w), rr.response(r)};
                out.records.emplace_back(std::move(m));
                break;
            }
            case Setting::cate:
                out.records.emplace_back(CateRecord{rr.nums(r.x), rr.binary(r.a), rr.num(r.y)});
                break;
            case Setting::proximal:
                out.records.emplace_back(
                    ProximalRecord{rr.nums(r.x), rr.nums(r.z), rr.nums(r.w), rr.binary(r.a), rr.num(r.y)});
                break;
            case Setting::dose:
                out.records.emplace_back(DoseResponseRecord{rr.nums(r.l), rr.num(r.a), rr.num(r.y)});
                break;
            case Setting::iv:
                out.records.emplace_back(IvRecord{rr.nums(r.x), rr.binary(r.z.front()), rr.binary(r.a), rr.num(r.y)});
                break;
        }
    }
    return out;
}

void run_fit(const FitConfig& c, std::ostream& summary) {
    Table table = read_csv(c.data);
    LoadedData data = load_records(table, c.setting, c.schema);
    const auto n = static_cast<int>(data.records.size());
    if (n < 2) raise(ErrorCode::sample_size, "fit needs at least 2 records, got " + std::to_string(n));
    RowMatrix X = target_matrix(data.records);

    BasisSpec spec = c.basis;
    spec.dim = static_cast<int>(X.cols());
    BasisSequence basis = make_basis(spec, X);

    std::vector<double> pseudo(static_cast<std::size_t>(n));
    std::vector<int> fold_sizes;
    if (c.setting == Setting::fulldata) {
        for (int i = 0; i < n; ++i) pseudo[static_cast<std::size_t>(i)] = fulldata_pseudo(std::get<FullDataRecord>(data.records[static_cast<std::size_t>(i)]));
    } else {
        CrossfitOptions opt;
        opt.n_folds = c.n_folds;
        opt.seed = derive_seed(c.seed, 1);
        opt.method = c.method;
        CrossfitResult cf = crossfit(data.records, make_plan(c), basis, 1, opt);
        pseudo = cf.pseudo;
        fold_sizes.assign(static_cast<std::size_t>(c.n_folds), 0);
        for (int f : cf.folds) ++fold_sizes[static_cast<std::size_t>(f)];
    }

    CVOptions cv;
    cv.K = c.K;
    cv.split_fraction = c.split_fraction;
    cv.seed = derive_seed(c.seed, 2);
    cv.method = c.method;
    int n_fit = static_cast<int>(std::floor(c.split_fraction * n));
    if (c.J_grid.empty()) {
        cv.J_grid = default_J_grid(n_fit, c.J_max > 0 ? std::min(basis.max_J(), c.J_max) : basis.max_J());
    } else {
        for (int J : c.J_grid)
            if (J > basis.max_J())
                raise(ErrorCode::truncation, "J = " + std::to_string(J) + " exceeds the basis maximum " +
                                                 std::to_string(basis.max_J()));
        cv.J_grid = c.J_grid;
    }
    Vector y = Eigen::Map<const Vector>(pseudo.data(), n);
    CVResult res = select_J_cv(X, y, basis, cv);

    double mean = y.mean();
    double sigma2 = (y.array() - mean).square().sum() / std::max(n - 1, 1);

    RowMatrix P = c.predict_at.empty() ? X : read_points(c.predict_at, data.target_columns);
    std::vector<std::string> header = data.target_columns;
    for (const char* h : {"estimate", "variance", "ci_lower", "ci_upper"}) header.emplace_back(h);
    CsvBuilder csv(header);
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        Point x = row(P, i);
        double est = res.predictor.predict(x);
        double ell = 0.0;
        for (const SeriesPredictor& m : res.predictor.members()) ell += m.ell(x);
        double var = ell / static_cast<double>(res.predictor.members().size()) * sigma2;
        double hw = 1.96 * std::sqrt(var);
        for (double v : x) csv.cell(v);
        csv.cell(est).cell(var).cell(est - hw).cell(est + hw);
        csv.end_row();
    }

    std::ostringstream s;
    s << "setting: " << setting_name(c.setting) << "\n";
    s << "records: " << n << "\n";
    s << "covariates: " << X.cols() << "\n";
    s << "basis: " << family_name(c.basis.family) << " (max J " << basis.max_J() << ")\n";
    s << "method: " << (c.method == Method::fw ? "fw" : "ls") << "\n";
    if (!fold_sizes.empty()) s << "crossfit folds: " << join(fold_sizes) << "\n";
    s << "cv split: " << n_fit << " fit / " << n - n_fit << " evaluate, " << c.K << " repeats\n";
    s << "J grid: " << join(cv.J_grid) << "\n";
    s << "selected J: " << join(res.selected_J) << "\n";
    s << "pseudo-outcome mean: " << format_number(mean) << "\n";
    s << "pseudo-outcome variance: " << format_number(sigma2) << "\n";
    if (c.setting == Setting::mar || c.setting == Setting::shadow) {
        int obs = 0;
        for (const auto& r : data.records)
            obs += std::visit([](const auto& v) {
                if constexpr (requires { v.r(); }) return v.r();
                else return 1;
            }, r);
        s << "observed responses: " << obs << "\n";
    }
    if (c.setting == Setting::cate || c.setting == Setting::proximal || c.setting == Setting::iv) {
        int treated = 0;
        for (const auto& r : data.records)
            treated += std::visit([](const auto& v) {
                if constexpr (requires { v.a; }) return static_cast<int>(v.a);
                else return 0;
            }, r);
        s << "treated: " << treated << "\n";
    }
    write_atomic(out_path(c.out, "predictions.csv"), csv.text());
    write_atomic(out_path(c.out, "summary.txt"), s.str());
    summary << s.str();
}

std::string results_csv(const std::vector<sim::ReplicationResult>& results) {
    CsvBuilder csv({"estimator", "n", "alpha", "replication", "mse", "J", "seconds"});
    for (const auto& r : results) {
        csv.cell(r.estimator).cell(static_cast<long long>(r.n)).cell(r.alpha);
        csv.cell(static_cast<long long>(r.replication)).cell(r.mse).cell(r.J).cell(r.seconds);
        csv.end_row();
    }
    return csv.text();
}

std::string ratios_csv(const std::vector<sim::ReplicationResult>& results, const std::vector<std::string>& estimators,
                       const std::string& baseline) {
    std::map<std::pair<int, double>, std::map<std::string, std::pair<double, int>>> agg;
    for (const auto& r : results) {
        auto& [sum, count] = agg[{r.n, r.alpha}][r.estimator];
        sum += r.mse;
        ++count;
    }
    CsvBuilder csv({"estimator", "n", "alpha", "mse", "baseline_mse", "ratio"});
    for (const auto& [key, by_est] : agg) {
        auto b = by_est.find(baseline);
        if (b == by_est.end()) continue;
        double base = b->second.first / b->second.second;
        for (const auto& e : estimators) {
            auto it = by_est.find(e);
            if (it == by_est.end()) continue;
            double m = it->second.first / it->second.second;
            csv.cell(e).cell(static_cast<long long>(key.first)).cell(key.second).cell(m).cell(base);
            csv.cell(e == baseline ? 1.0 : m / base);
            csv.end_row();
        }
    }
    return csv.text();
}

std::vector<sim::ReplicationResult> parse_results(const Table& t) {
    std::vector<sim::ReplicationResult> out;
    const char* cols[] = {"estimator", "n", "alpha", "replication", "mse"};
    int idx[5];
    for (int k = 0; k < 5; ++k) {
        idx[k] = t.column(cols[k]);
        if (idx[k] < 0) raise(ErrorCode::schema, std::string("results table lacks column '") + cols[k] + "'");
    }
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        RowReader rr{t, i};
        sim::ReplicationResult r;
        r.estimator = t.rows[i][static_cast<std::size_t>(idx[0])];
        r.n = static_cast<int>(rr.num(idx[1]));
        r.alpha = rr.num(idx[2]);
        r.replication = static_cast<int>(rr.num(idx[3]));
        r.mse = rr.num(idx[4]);
        out.push_back(std::move(r));
    }
    return out;
}

void run_simulate(const SimulateConfig& c) {
    auto results = sim::run_replications(c.experiment);
    std::string res = results_csv(results);
    std::string rat = ratios_csv(results, c.experiment.estimators, c.baseline);
    write_atomic(out_path(c.out, "results.csv"), res);
    write_atomic(out_path(c.out, "ratios.csv"), rat);
}

void run_rates(const SimulateConfig& c) {
    std::vector<sim::ReplicationResult> results;
    if (!c.results_in.empty()) {
        results = parse_results(read_csv(c.results_in));
    } else {
        results = sim::run_replications(c.experiment);
        write_atomic(out_path(c.out, "results.csv"), results_csv(results));
    }
    std::map<std::pair<std::string, double>, std::vector<sim::ReplicationResult>> groups;
    for (const auto& r : results) groups[{r.estimator, r.alpha}].push_back(r);
    if (groups.empty()) raise(ErrorCode::grid, "no results to fit a rate to");
    CsvBuilder csv({"estimator", "alpha", "slope", "se", "intercept", "points"});
    for (const auto& [key, rs] : groups) {
        sim::SlopeFit f = sim::rate_slope(rs, c.min_replications);
        csv.cell(key.first).cell(key.second).cell(f.slope).cell(f.se).cell(f.intercept);
        csv.cell(static_cast<long long>(f.points));
        csv.end_row();
    }
    write_atomic(out_path(c.out, "rates.csv"), csv.text());
}

}  // namespace fwreg::cli
