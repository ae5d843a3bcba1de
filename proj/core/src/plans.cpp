#include "fwreg/plans.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fwreg/error.hpp"
#include "fwreg/rng.hpp"

namespace fwreg {

RowMatrix stack_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return RowMatrix(0, 0);
    RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows.front().size()) raise(ErrorCode::shape, "ragged covariate rows");
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

namespace {

std::vector<double> join(std::initializer_list<const std::vector<double>*> parts) {
    std::vector<double> out;
    for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
    return out;
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

RegressionSpec seeded(RegressionSpec spec, std::uint64_t seed, std::uint64_t k) {
    spec.seed = derive_seed(seed, k);
    return spec;
}

Evaluator regress(const std::vector<std::vector<double>>& X, const std::vector<double>& y, const RegressionSpec& spec) {
    if (X.empty()) raise(ErrorCode::fit, "no observations for an outcome regression");
    return fit_regression(stack_rows(X), to_vector(y), spec).evaluator();
}

template <class R>
const R& as(const ObservedRecord& rec, Setting s) {
    if (setting_of(rec) != s)
        raise(ErrorCode::schema, "record of setting " + setting_name(setting_of(rec)) + " in a " + setting_name(s) +
                                     " plan");
    return std::get<R>(rec);
}

NuisanceSet fit_mar(const NuisanceRecipe& rc, std::span<const ObservedRecord> train, std::uint64_t seed) {
    std::vector<std::vector<double>> xz, xz_cc;
    std::vector<int> r;
    std::vector<double> y_cc;
    for (const ObservedRecord& o : train) {
        const auto& rec = as<MarRecord>(o, Setting::mar);
        xz.push_back(join({&rec.x, &rec.z}));
        r.push_back(rec.r());
        if (rec.y) {
            xz_cc.push_back(xz.back());
            y_cc.push_back(*rec.y);
        }
    }
    NuisanceSet nu;
    PropensitySpec ps = rc.propensity;
    ps.clip = rc.clip;
    nu.pi = fit_propensity(stack_rows(xz), r, ps).evaluator();
    nu.mu = regress(xz_cc, y_cc, seeded(rc.outcome, seed, 1));
    return nu;
}

NuisanceSet fit_shadow(const NuisanceRecipe& rc, std::span<const ObservedRecord> train, std::uint64_t seed) {
    std::vector<ShadowRecord> recs;
    std::vector<std::vector<double>> xy, xw;
    std::vector<double> y;
    for (const ObservedRecord& o : train) {
        const auto& rec = as<ShadowRecord>(o, Setting::shadow);
        recs.push_back(rec);
        if (rec.y) {
            std::vector<double> yy{*rec.y};
            xy.push_back(join({&rec.x, &yy}));
            xw.push_back(join({&rec.x, &rec.w}));
            y.push_back(*rec.y);
        }
    }
    if (y.empty()) raise(ErrorCode::fit, "shadow plan needs complete cases");
    NuisanceSet nu;
    ExtendedPropensitySpec es = rc.extended;
    es.seed = derive_seed(seed, 2);
    nu.pi = fit_extended_propensity(recs, es);
    int M = rc.bridge_M > 0 ? rc.bridge_M : 2 * rc.bridge_J;
    RowMatrix inst = stack_rows(xy), endo = stack_rows(xw);
    Sieve si(rc.bridge_basis, inst, M);
    Sieve se(rc.bridge_basis, endo, rc.bridge_J);
    BridgeFunction eta{se, fit_bridge_npiv(si.matrix(inst), se.matrix(endo), to_vector(y), rc.lambda_grid,
                                           derive_seed(seed, 3))};
    nu.eta = [eta](Point x) { return eta(x); };
    return nu;
}

NuisanceSet fit_cate(const NuisanceRecipe& rc, std::span<const ObservedRecord> train, std::uint64_t seed) {
    std::vector<std::vector<double>> x, x0, x1;
    std::vector<double> y0, y1;
    std::vector<int> a;
    for (const ObservedRecord& o : train) {
        const auto& rec = as<CateRecord>(o, Setting::cate);
        x.push_back(rec.x);
        a.push_back(rec.a);
        (rec.a == 1 ? x1 : x0).push_back(rec.x);
        (rec.a == 1 ? y1 : y0).push_back(rec.y);
    }
    NuisanceSet nu;
    PropensitySpec ps = rc.propensity;
    ps.clip = rc.clip;
    nu.pi = fit_propensity(stack_rows(x), a, ps).evaluator();
    nu.mu0 = regress(x0, y0, seeded(rc.outcome, seed, 4));
    nu.mu1 = regress(x1, y1, seeded(rc.outcome, seed, 5));
    return nu;
}

NuisanceSet fit_proximal(const NuisanceRecipe& rc, std::span<const ObservedRecord> train, std::uint64_t seed) {
    std::vector<std::vector<double>> zax, wax, wx, zx;
    std::vector<double> y;
    std::vector<int> a;
    for (const ObservedRecord& o : train) {
        const auto& rec = as<ProximalRecord>(o, Setting::proximal);
        std::vector<double> av{static_cast<double>(rec.a)};
        zax.push_back(join({&rec.z, &av, &rec.x}));
        wax.push_back(join({&rec.w, &av, &rec.x}));
        wx.push_back(join({&rec.w, &rec.x}));
        zx.push_back(join({&rec.z, &rec.x}));
        y.push_back(rec.y);
        a.push_back(rec.a);
    }
    int M = rc.bridge_M > 0 ? rc.bridge_M : 2 * rc.bridge_J;
    NuisanceSet nu;

    RowMatrix inst_h = stack_rows(zax), endo_h = stack_rows(wax);
    Sieve si_h(rc.bridge_basis, inst_h, M);
    Sieve se_h(rc.bridge_basis, endo_h, rc.bridge_J);
    BridgeFunction h{se_h, fit_bridge_npiv(si_h.matrix(inst_h), se_h.matrix(endo_h), to_vector(y), rc.lambda_grid,
                                           derive_seed(seed, 6))};
    nu.h_bridge = [h](Point wax_pt) { return h(wax_pt); };

    // E[1{A=a} q(Z,a,X) - 1 | W, X] = 0 per arm.
    RowMatrix inst_q = stack_rows(wx), endo_q = stack_rows(zx);
    int Jq = std::max(1, rc.bridge_J - 1);
    int Mq = rc.bridge_M > 0 ? rc.bridge_M : 2 * Jq;
    Sieve si_q(rc.bridge_basis, inst_q, Mq);
    Sieve se_q(rc.bridge_basis, endo_q, Jq);
    Matrix Phi = si_q.matrix(inst_q);
    Matrix Psi_all = se_q.matrix(endo_q);
    BridgeFunction q[2];
    for (int arm = 0; arm < 2; ++arm) {
        Matrix Psi = Psi_all;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i] != arm) Psi.row(static_cast<Eigen::Index>(i)).setZero();
        q[arm] = BridgeFunction{se_q, fit_bridge_npiv(Phi, Psi, Vector::Ones(Psi.rows()), rc.lambda_grid,
                                                      derive_seed(seed, 7 + static_cast<std::uint64_t>(arm)))};
    }
    std::size_t dz = std::get<ProximalRecord>(train.front()).z.size();
    nu.q_bridge = [q0 = q[0], q1 = q[1], dz](Point zax_pt) {
        std::vector<double> zx_pt(zax_pt.begin(), zax_pt.begin() + static_cast<std::ptrdiff_t>(dz));
        zx_pt.insert(zx_pt.end(), zax_pt.begin() + static_cast<std::ptrdiff_t>(dz) + 1, zax_pt.end());
        Point p(zx_pt.data(), zx_pt.size());
        return zax_pt[dz] > 0.5 ? q1(p) : q0(p);
    };
    return nu;
}

NuisanceSet fit_dose(const NuisanceRecipe& rc, std::span<const ObservedRecord> train, std::uint64_t seed) {
    std::vector<std::vector<double>> al, l;
    std::vector<double> y, a;
    for (const ObservedRecord& o : train) {
        const auto& rec = as<DoseResponseRecord>(o, Setting::dose);
        std::vector<double> av{rec.a};
        al.push_back(join({&av, &rec.l}));
        l.push_back(rec.l);
        y.push_back(rec.y);
        a.push_back(rec.a);
    }
    std::size_t n = a.size();
    if (n < 3) raise(ErrorCode::fit, "dose-response plan needs at least 3 observations");
    NuisanceSet nu;
    Regressor mu = fit_regression(stack_rows(al), to_vector(y), seeded(rc.outcome, seed, 9));
    nu.mu = mu.evaluator();

    // Gaussian working models: A ~ N(m, s^2), A | L ~ N(c0 + c'L, s_l^2).
    double m = 0.0;
    for (double v : a) m += v;
    m /= static_cast<double>(n);
    double s2 = 0.0;
    for (double v : a) s2 += (v - m) * (v - m);
    s2 /= static_cast<double>(n - 1);
    RowMatrix L = stack_rows(l);
    Matrix D(static_cast<Eigen::Index>(n), L.cols() + 1);
    D.col(0).setOnes();
    D.rightCols(L.cols()) = L;
    Vector av = to_vector(a);
    Vector coef = SymmetricSpectrum(D.transpose() * D).solve(Vector(D.transpose() * av));
    double sl2 = (av - D * coef).squaredNorm() / static_cast<double>(std::max<std::size_t>(1, n - static_cast<std::size_t>(D.cols())));
    if (!(s2 > 0.0) || !(sl2 > 0.0)) raise(ErrorCode::density, "degenerate treatment density");
    nu.dens_ratio = [m, s2, sl2, coef](Point al_pt) {
        double av = al_pt[0];
        double ml = coef(0);
        for (Eigen::Index j = 1; j < coef.size(); ++j) ml += coef(j) * al_pt[static_cast<std::size_t>(j)];
        double log_marg = -0.5 * (av - m) * (av - m) / s2 - 0.5 * std::log(s2);
        double log_cond = -0.5 * (av - ml) * (av - ml) / sl2 - 0.5 * std::log(sl2);
        return std::exp(log_marg - log_cond);
    };
    nu.marg_mu = [mu, l](Point a_pt) {
        double s = 0.0;
        std::vector<double> pt(1 + l.front().size());
        for (const auto& li : l) {
            pt[0] = a_pt[0];
            std::copy(li.begin(), li.end(), pt.begin() + 1);
            s += mu.predict(Point(pt.data(), pt.size()));
        }
        return s / static_cast<double>(l.size());
    };
    return nu;
}

NuisanceSet fit_iv(const NuisanceRecipe& rc, std::span<const ObservedRecord> train, std::uint64_t seed) {
    std::vector<std::vector<double>> x, xz[2];
    std::vector<double> yz[2], az[2];
    std::vector<int> z;
    for (const ObservedRecord& o : train) {
        const auto& rec = as<IvRecord>(o, Setting::iv);
        x.push_back(rec.x);
        z.push_back(rec.z);
        xz[rec.z].push_back(rec.x);
        yz[rec.z].push_back(rec.y);
        az[rec.z].push_back(rec.a);
    }
    NuisanceSet nu;
    PropensitySpec ps = rc.propensity;
    ps.clip = rc.clip;
    nu.iv_fz = fit_propensity(stack_rows(x), z, ps).evaluator();
    nu.iv_y0 = regress(xz[0], yz[0], seeded(rc.outcome, seed, 10));
    nu.iv_y1 = regress(xz[1], yz[1], seeded(rc.outcome, seed, 11));
    nu.iv_a0 = regress(xz[0], az[0], seeded(rc.outcome, seed, 12));
    nu.iv_a1 = regress(xz[1], az[1], seeded(rc.outcome, seed, 13));
    return nu;
}

}  // namespace

NuisanceSet fit_nuisances(const PseudoPlan& plan, std::span<const ObservedRecord> train, std::uint64_t seed) {
    if (plan.custom) return plan.custom(train, seed);
    if (train.empty() && plan.setting != Setting::fulldata) raise(ErrorCode::fit, "no records to fit nuisances on");
    switch (plan.setting) {
        case Setting::fulldata: return {};
        case Setting::mar: return fit_mar(plan.recipe, train, seed);
        case Setting::shadow: return fit_shadow(plan.recipe, train, seed);
        case Setting::cate: return fit_cate(plan.recipe, train, seed);
        case Setting::proximal: return fit_proximal(plan.recipe, train, seed);
        case Setting::dose: return fit_dose(plan.recipe, train, seed);
        case Setting::iv: return fit_iv(plan.recipe, train, seed);
    }
    return {};
}

double plan_pseudo(const PseudoPlan& plan, const ObservedRecord& rec, const NuisanceSet& nu) {
    if (setting_of(rec) != plan.setting)
        raise(ErrorCode::schema, "record of setting " + setting_name(setting_of(rec)) + " in a " +
                                     setting_name(plan.setting) + " plan");
    return pseudo_outcome(rec, nu, plan.link);
}

}  // namespace fwreg
