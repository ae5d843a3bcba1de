#include "fwreg/sim/replications.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "fwreg/cv.hpp"
#include "fwreg/error.hpp"
#include "fwreg/nuisance.hpp"
#include "fwreg/plans.hpp"

namespace fwreg::sim {

const std::vector<std::string>& estimator_registry() {
    static const std::vector<std::string> names{"plugin", "xl", "drl-stub", "oracle-drl", "fw", "ls"};
    return names;
}

bool estimator_applies(DgpKind kind, const std::string& name) {
    const auto& reg = estimator_registry();
    if (std::find(reg.begin(), reg.end(), name) == reg.end()) return false;
    switch (dgp_setting(kind)) {
        case Setting::cate: return true;
        case Setting::fulldata: return name == "fw" || name == "ls";
        default: return name != "xl" && name != "drl-stub";
    }
}

namespace {

struct Split {
    std::vector<int> first, second;
};

Split split_indices(int n, double fraction, std::uint64_t seed) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    auto n1 = static_cast<std::size_t>(std::floor(fraction * n));
    Split s;
    s.first.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n1));
    s.second.assign(perm.begin() + static_cast<std::ptrdiff_t>(n1), perm.end());
    std::sort(s.first.begin(), s.first.end());
    std::sort(s.second.begin(), s.second.end());
    return s;
}

std::vector<ObservedRecord> pick(const std::vector<ObservedRecord>& recs, const std::vector<int>& idx) {
    std::vector<ObservedRecord> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(recs[static_cast<std::size_t>(i)]);
    return out;
}

RowMatrix covariates(const std::vector<ObservedRecord>& recs) {
    std::vector<std::vector<double>> rows;
    rows.reserve(recs.size());
    for (const auto& r : recs) rows.push_back(target_covariates(r));
    return stack_rows(rows);
}

Vector as_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

using Prediction = std::function<double(Point)>;

struct Fitted {
    Prediction predict;
    double J = 0.0;
};

struct Context {
    const ExperimentConfig& cfg;
    const Dataset& data;
    Split split;
    std::vector<ObservedRecord> first, second;
    RowMatrix X2;
    RowMatrix test;
    std::vector<double> truth;
    std::uint64_t cv_seed;

    Fitted series(const RowMatrix& X, const std::vector<double>& y, Method method) const {
        BasisSpec bs = cfg.basis;
        bs.dim = static_cast<int>(X.cols());
        BasisSequence basis = make_basis(bs, X);
        CVOptions opt;
        opt.K = cfg.K;
        opt.split_fraction = cfg.split_fraction;
        opt.seed = cv_seed;
        opt.method = method;
        int n_fit = static_cast<int>(std::floor(cfg.split_fraction * static_cast<double>(X.rows())));
        if (cfg.J_grid.empty()) {
            opt.J_grid = default_J_grid(n_fit, cfg.J_max > 0 ? std::min(basis.max_J(), cfg.J_max) : basis.max_J());
        } else {
            for (int J : cfg.J_grid)
                if (J <= basis.max_J()) opt.J_grid.push_back(J);
            if (opt.J_grid.empty()) opt.J_grid.push_back(1);
        }
        CVResult cv = select_J_cv(X, as_vector(y), basis, opt);
        double mj = 0.0;
        for (int J : cv.selected_J) mj += J;
        auto pred = std::make_shared<AveragedPredictor>(std::move(cv.predictor));
        return {[pred](Point x) { return pred->predict(x); }, mj / static_cast<double>(cv.selected_J.size())};
    }

    Fitted spline(const RowMatrix& X, const std::vector<double>& y) const {
        auto s = std::make_shared<SmoothingSpline>(SmoothingSpline::fit(X, as_vector(y), cfg.spline_df));
        return {[s](Point x) { return s->predict(x); }, 0.0};
    }
};

void score(const Context& ctx, const Fitted& f, ReplicationResult& r) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < ctx.test.rows(); ++i) {
        double e = f.predict(row(ctx.test, i)) - ctx.truth[static_cast<std::size_t>(i)];
        s += e * e;
        if (ctx.cfg.keep_errors) r.squared_errors.push_back(e * e);
    }
    r.mse = s / static_cast<double>(ctx.test.rows());
    r.J = f.J;
}

using Builder = std::function<Fitted()>;

void run_estimators(const Context& ctx, int n, double alpha, int rep, const std::map<std::string, Builder>& builders,
                    std::vector<ReplicationResult>& out) {
    for (const std::string& name : ctx.cfg.estimators) {
        ReplicationResult r;
        r.estimator = name;
        r.n = n;
        r.alpha = alpha;
        r.replication = rep;
        auto t0 = std::chrono::steady_clock::now();
        Fitted f = builders.at(name)();
        score(ctx, f, r);
        if (ctx.cfg.timing)
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    }
}

void run_cate(Context& ctx, int n, int rep, std::uint64_t rep_seed, std::vector<ReplicationResult>& out) {
    const ExperimentConfig& cfg = ctx.cfg;
    std::vector<std::vector<double>> x0, x1;
    std::vector<double> y0, y1;
    for (const auto& o : ctx.first) {
        const auto& r = std::get<CateRecord>(o);
        (r.a ? x1 : x0).push_back(r.x);
        (r.a ? y1 : y0).push_back(r.y);
    }
    if (x0.size() < 4 || x1.size() < 4) raise(ErrorCode::fit, "too few records per arm in the nuisance split");
    Fitted mu0 = ctx.spline(stack_rows(x0), y0);
    Fitted mu1 = ctx.spline(stack_rows(x1), y1);
    NuisanceSet hat;
    hat.mu0 = mu0.predict;
    hat.mu1 = mu1.predict;
    const NuisanceSet& truth = ctx.data.oracle.truth;

    std::vector<double> oracle_pseudo;
    for (const auto& o : ctx.second) oracle_pseudo.push_back(cate_dr_pseudo(std::get<CateRecord>(o), truth));

    Rng zr(derive_seed(rep_seed, 4));
    double z = std::normal_distribution<double>(0.0, 1.0)(zr);
    for (double alpha : cfg.alpha_grid) {
        hat.pi = corrupt_propensity_with(truth.pi, alpha, n, z);
        std::vector<double> pseudo;
        for (const auto& o : ctx.second) pseudo.push_back(cate_dr_pseudo(std::get<CateRecord>(o), hat));
        std::map<std::string, Builder> b;
        b["plugin"] = [&] { return Fitted{[&](Point x) { return mu1.predict(x) - mu0.predict(x); }, 0.0}; };
        b["fw"] = [&] { return ctx.series(ctx.X2, pseudo, Method::fw); };
        b["ls"] = [&] { return ctx.series(ctx.X2, pseudo, Method::ls); };
        b["drl-stub"] = [&] { return ctx.spline(ctx.X2, pseudo); };
        b["oracle-drl"] = [&] { return ctx.series(ctx.X2, oracle_pseudo, Method::fw); };
        b["xl"] = [&] {
            std::vector<std::vector<double>> xt, xc;
            std::vector<double> dt, dc;
            for (const auto& o : ctx.second) {
                const auto& r = std::get<CateRecord>(o);
                Point x(r.x.data(), r.x.size());
                if (r.a) {
                    xt.push_back(r.x);
                    dt.push_back(r.y - mu0.predict(x));
                } else {
                    xc.push_back(r.x);
                    dc.push_back(mu1.predict(x) - r.y);
                }
            }
            if (xt.size() < 4 || xc.size() < 4) raise(ErrorCode::fit, "too few records per arm for the x-learner");
            Fitted t1 = ctx.spline(stack_rows(xt), dt);
            Fitted t0 = ctx.spline(stack_rows(xc), dc);
            Evaluator g = hat.pi;
            return Fitted{[t0, t1, g](Point x) {
                              double p = g(x);
                              return p * t0.predict(x) + (1.0 - p) * t1.predict(x);
                          },
                          0.0};
        };
        run_estimators(ctx, n, alpha, rep, b, out);
    }
}

PseudoPlan default_plan(const ExperimentConfig& cfg, Setting s) {
    PseudoPlan plan;
    plan.setting = s;
    plan.recipe.outcome.method = RegressionMethod::smoothing_spline;
    plan.recipe.outcome.df = cfg.spline_df;
    plan.recipe.bridge_basis.family = Family::polynomial;
    plan.recipe.bridge_J = s == Setting::shadow ? 3 : 4;
    plan.recipe.extended.instrument_basis.family = Family::polynomial;
    plan.recipe.extended.endogenous_basis.family = Family::polynomial;
    return plan;
}

void run_generic(Context& ctx, int n, int rep, std::uint64_t rep_seed, std::vector<ReplicationResult>& out) {
    const ExperimentConfig& cfg = ctx.cfg;
    Setting s = ctx.data.setting;
    std::map<std::string, Builder> b;
    if (s == Setting::fulldata) {
        RowMatrix X = covariates(ctx.data.records);
        std::vector<double> y;
        for (const auto& o : ctx.data.records) y.push_back(std::get<FullDataRecord>(o).y);
        b["fw"] = [&, X, y] { return ctx.series(X, y, Method::fw); };
        b["ls"] = [&, X, y] { return ctx.series(X, y, Method::ls); };
        run_estimators(ctx, n, 0.0, rep, b, out);
        return;
    }
    PseudoPlan plan = default_plan(cfg, s);
    NuisanceSet hat = fit_nuisances(plan, ctx.first, derive_seed(rep_seed, 5));
    std::vector<double> pseudo, oracle_pseudo;
    for (const auto& o : ctx.second) {
        pseudo.push_back(plan_pseudo(plan, o, hat));
        oracle_pseudo.push_back(plan_pseudo(plan, o, ctx.data.oracle.truth));
    }
    b["fw"] = [&] { return ctx.series(ctx.X2, pseudo, Method::fw); };
    b["ls"] = [&] { return ctx.series(ctx.X2, pseudo, Method::ls); };
    b["oracle-drl"] = [&] { return ctx.series(ctx.X2, oracle_pseudo, Method::fw); };
    b["plugin"] = [&] {
        std::vector<std::vector<double>> xs;
        std::vector<double> ys;
        if (s == Setting::proximal) {
            for (const auto& o : ctx.second) {
                const auto& r = std::get<ProximalRecord>(o);
                std::vector<double> w1 = r.w, w0 = r.w;
                w1.push_back(1.0);
                w0.push_back(0.0);
                w1.insert(w1.end(), r.x.begin(), r.x.end());
                w0.insert(w0.end(), r.x.begin(), r.x.end());
                xs.push_back(r.x);
                ys.push_back(hat.h_bridge(Point(w1.data(), w1.size())) - hat.h_bridge(Point(w0.data(), w0.size())));
            }
        } else {
            for (const auto& o : ctx.data.records) {
                std::optional<double> y;
                std::vector<double> x;
                if (const auto* m = std::get_if<MarRecord>(&o)) {
                    y = m->y;
                    x = m->x;
                } else {
                    const auto& sh = std::get<ShadowRecord>(o);
                    y = sh.y;
                    x = sh.x;
                }
                if (!y) continue;
                xs.push_back(x);
                ys.push_back(*y);
            }
        }
        return ctx.series(stack_rows(xs), ys, Method::ls);
    };
    run_estimators(ctx, n, 0.0, rep, b, out);
}

}  // namespace

std::vector<ReplicationResult> run_single(const ExperimentConfig& cfg, int n, int rep) {
    std::uint64_t rep_seed = derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(n)), static_cast<std::uint64_t>(rep));
    DGPSpec spec{cfg.dgp, n, derive_seed(rep_seed, 0), cfg.smooth_alpha};
    Dataset data = generate(spec);
    Context ctx{cfg, data, split_indices(n, cfg.split_fraction, derive_seed(rep_seed, 1)), {}, {}, {}, {}, {},
                derive_seed(rep_seed, 3)};
    ctx.first = pick(data.records, ctx.split.first);
    ctx.second = pick(data.records, ctx.split.second);
    ctx.X2 = covariates(ctx.second);
    Rng tr(derive_seed(rep_seed, 2));
    std::vector<std::vector<double>> test;
    for (int i = 0; i < cfg.test_size; ++i) test.push_back(data.oracle.draw_x(tr));
    ctx.test = stack_rows(test);
    for (Eigen::Index i = 0; i < ctx.test.rows(); ++i) ctx.truth.push_back(data.oracle.target(row(ctx.test, i)));

    std::vector<ReplicationResult> out;
    if (data.setting == Setting::cate)
        run_cate(ctx, n, rep, rep_seed, out);
    else
        run_generic(ctx, n, rep, rep_seed, out);
    return out;
}

std::vector<ReplicationResult> run_replications(const ExperimentConfig& cfg) {
    for (const std::string& e : cfg.estimators)
        if (!estimator_applies(cfg.dgp, e))
            raise(ErrorCode::registry, "estimator '" + e + "' is not available for dgp " + dgp_name(cfg.dgp));
    if (cfg.n_grid.empty()) raise(ErrorCode::grid, "n grid is empty");
    if (cfg.replications < 0) raise(ErrorCode::config, "replications must be >= 0");
    if (dgp_setting(cfg.dgp) == Setting::cate && cfg.alpha_grid.empty())
        raise(ErrorCode::grid, "alpha grid is empty");
    if (cfg.test_size < 1) raise(ErrorCode::config, "test size must be >= 1");

    std::size_t tasks = cfg.n_grid.size() * static_cast<std::size_t>(cfg.replications);
    std::vector<std::vector<ReplicationResult>> slots(tasks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (;;) {
            std::size_t t = next.fetch_add(1);
            if (t >= tasks) return;
            try {
                int n = cfg.n_grid[t / static_cast<std::size_t>(cfg.replications)];
                int rep = static_cast<int>(t % static_cast<std::size_t>(cfg.replications));
                slots[t] = run_single(cfg, n, rep);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next = tasks;
            }
        }
    };
    int threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(std::max<std::size_t>(tasks, 1))));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    std::vector<ReplicationResult> out;
    for (auto& s : slots)
        for (auto& r : s) out.push_back(std::move(r));
    return out;
}

}  // namespace fwreg::sim
