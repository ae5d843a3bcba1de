#include "fwreg/sim/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>

#include "fwreg/error.hpp"
#include "fwreg/nuisance.hpp"

namespace fwreg::sim {

namespace {

using std::numbers::pi;

double unif(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
double normal(Rng& rng, double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(rng); }
int bern(Rng& rng, double p) { return unif(rng, 0.0, 1.0) < p ? 1 : 0; }

void check_n(int n) {
    if (n < 20) raise(ErrorCode::sample_size, "data-generating processes need n >= 20");
}

Dataset draw(int n, std::uint64_t seed, Setting s, Oracle oracle) {
    check_n(n);
    Dataset d;
    d.setting = s;
    Rng rng(seed);
    d.records.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        std::vector<double> x = oracle.draw_x(rng);
        d.records.push_back(oracle.sampler(Point(x.data(), x.size()), rng));
    }
    d.oracle = std::move(oracle);
    return d;
}

// --- null-CATE designs ---

Oracle kennedy_oracle(bool heavy) {
    Oracle o;
    o.target = [](Point) { return 0.0; };
    o.truth.pi = [](Point x) { return kennedy_pi(x[0]); };
    o.truth.mu0 = [](Point x) { return kennedy_mu(x[0]); };
    o.truth.mu1 = o.truth.mu0;
    o.sampler = [](Point x, Rng& rng) -> ObservedRecord {
        CateRecord r;
        r.x = {x[0]};
        r.a = bern(rng, kennedy_pi(x[0]));
        r.y = kennedy_mu(x[0]) + normal(rng);
        return r;
    };
    if (heavy)
        o.draw_x = [](Rng& rng) {
            int c = bern(rng, 0.5);
            return std::vector<double>{c ? normal(rng) : unif(rng, -1.0, 1.0)};
        };
    else
        o.draw_x = [](Rng& rng) { return std::vector<double>{unif(rng, -1.0, 1.0)}; };
    return o;
}

// --- MAR ---

double mar_m(double x) { return std::sin(pi * x); }
double mar_mu(double x, double z) { return mar_m(x) + z; }
double mar_pi(double x, double z) { return expit(0.3 + 0.5 * x + z); }

Oracle mar_oracle() {
    Oracle o;
    o.target = [](Point x) { return mar_m(x[0]); };
    o.truth.pi = [](Point xz) { return mar_pi(xz[0], xz[1]); };
    o.truth.mu = [](Point xz) { return mar_mu(xz[0], xz[1]); };
    o.sampler = [](Point x, Rng& rng) -> ObservedRecord {
        MarRecord r;
        r.x = {x[0]};
        double z = normal(rng);
        r.z = {z};
        double y = mar_mu(x[0], z) + normal(rng, 0.5);
        if (bern(rng, mar_pi(x[0], z))) r.y = y;
        return r;
    };
    o.draw_x = [](Rng& rng) { return std::vector<double>{unif(rng, -1.0, 1.0)}; };
    return o;
}

// --- shadow variable, classical measurement W = Y + noise ---

double shadow_m(double x) { return std::sin(pi * x) + 0.5 * x; }
double shadow_e(double x, double y) { return expit(0.5 + 1.5 * y - 0.5 * x); }

Oracle shadow_oracle() {
    Oracle o;
    o.target = [](Point x) { return shadow_m(x[0]); };
    o.truth.pi = [](Point xy) { return shadow_e(xy[0], xy[1]); };
    o.truth.eta = [](Point xw) { return xw[1]; };
    o.sampler = [](Point x, Rng& rng) -> ObservedRecord {
        ShadowRecord r;
        r.x = {x[0]};
        double y = shadow_m(x[0]) + normal(rng);
        r.w = {y + normal(rng, 0.5)};
        if (bern(rng, shadow_e(x[0], y))) r.y = y;
        return r;
    };
    o.draw_x = [](Rng& rng) { return std::vector<double>{unif(rng, -1.0, 1.0)}; };
    return o;
}

// --- proximal, binary latent confounder ---

Oracle proximal_oracle() {
    const ProximalParameters& p = proximal_parameters();
    ProximalBridges b = proximal_bridges(p);
    Oracle o;
    o.target = [tau = p.tau](Point) { return tau; };
    o.truth.h_bridge = [b](Point wax) { return b.c[0] + b.c[1] * wax[0] + b.c[2] * wax[1] + b.c[3] * wax[2]; };
    o.truth.q_bridge = [b, az = p.alpha_z](Point zax) {
        int a = zax[1] > 0.5 ? 1 : 0;
        return b.e0[a] + b.e1[a] * (zax[0] - az * zax[2]);
    };
    o.sampler = [p](Point x, Rng& rng) -> ObservedRecord {
        ProximalRecord r;
        r.x = {x[0]};
        double u = bern(rng, 0.5) ? 1.0 : -1.0;
        r.a = bern(rng, u > 0 ? p.p_treat_pos : p.p_treat_neg);
        r.z = {p.alpha_z * x[0] + p.gamma_z * u + normal(rng, p.sd_z)};
        r.w = {p.alpha_w * x[0] + p.gamma_w * u + normal(rng, p.sd_w)};
        r.y = p.b0 + p.tau * r.a + p.b_x * x[0] + p.b_u * u + normal(rng, p.sd_y);
        return r;
    };
    o.draw_x = [](Rng& rng) { return std::vector<double>{normal(rng)}; };
    return o;
}

// --- smooth full-data target ---

struct SmoothTable {
    double alpha;
    std::vector<double> values;
    static constexpr int kTerms = 2000;
    static constexpr int kGrid = 1 << 16;

    explicit SmoothTable(double a) : alpha(a), values(kGrid + 1) {
        std::vector<double> coef(kTerms + 1);
        for (int k = 1; k <= kTerms; ++k) coef[static_cast<std::size_t>(k)] = std::pow(k, -(alpha + 0.5));
        for (int g = 0; g <= kGrid; ++g) {
            double u = -1.0 + 2.0 * g / kGrid;
            double th = pi * u;
            // Chebyshev-style recurrences for cos(k th), sin(k th)
            double c1 = std::cos(th), s1 = std::sin(th);
            double cprev = 1.0, sprev = 0.0, ck = c1, sk = s1, sum = 0.0;
            for (int k = 1; k <= kTerms; ++k) {
                sum += coef[static_cast<std::size_t>(k)] * (ck + sk);
                double cn = 2.0 * c1 * ck - cprev;
                double sn = 2.0 * c1 * sk - sprev;
                cprev = ck;
                sprev = sk;
                ck = cn;
                sk = sn;
            }
            values[static_cast<std::size_t>(g)] = sum;
        }
    }

    double operator()(double x) const {
        double t = (std::clamp(x, -1.0, 1.0) + 1.0) / 2.0 * kGrid;
        auto g = std::min(static_cast<int>(t), kGrid - 1);
        double f = t - g;
        return (1.0 - f) * values[static_cast<std::size_t>(g)] + f * values[static_cast<std::size_t>(g + 1)];
    }
};

std::shared_ptr<const SmoothTable> smooth_table(double alpha) {
    static const auto two = std::make_shared<const SmoothTable>(2.0);
    if (alpha == 2.0) return two;
    static std::mutex mu;
    static std::map<double, std::shared_ptr<const SmoothTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[alpha];
    if (!slot) slot = std::make_shared<const SmoothTable>(alpha);
    return slot;
}

Oracle smooth_oracle(double alpha) {
    std::shared_ptr<const SmoothTable> table = smooth_table(alpha);
    Oracle o;
    o.target = [table](Point x) { return (*table)(x[0]); };
    o.sampler = [table](Point x, Rng& rng) -> ObservedRecord {
        return FullDataRecord{{x[0]}, (*table)(x[0]) + normal(rng)};
    };
    o.draw_x = [](Rng& rng) { return std::vector<double>{unif(rng, -1.0, 1.0)}; };
    return o;
}

}  // namespace

DgpKind parse_dgp(const std::string& name) {
    if (name == "kennedy-null-cate") return DgpKind::kennedy;
    if (name == "heavy-tail-covariate") return DgpKind::heavy_tail;
    if (name == "mar-selection") return DgpKind::mar;
    if (name == "shadow-mnar") return DgpKind::shadow;
    if (name == "proximal-linear") return DgpKind::proximal_linear;
    if (name == "smooth-fulldata") return DgpKind::smooth_fulldata;
    raise(ErrorCode::config, "unknown dgp '" + name + "'");
}

std::string dgp_name(DgpKind k) {
    switch (k) {
        case DgpKind::kennedy: return "kennedy-null-cate";
        case DgpKind::heavy_tail: return "heavy-tail-covariate";
        case DgpKind::mar: return "mar-selection";
        case DgpKind::shadow: return "shadow-mnar";
        case DgpKind::proximal_linear: return "proximal-linear";
        case DgpKind::smooth_fulldata: return "smooth-fulldata";
    }
    return "?";
}

Setting dgp_setting(DgpKind k) {
    switch (k) {
        case DgpKind::kennedy:
        case DgpKind::heavy_tail: return Setting::cate;
        case DgpKind::mar: return Setting::mar;
        case DgpKind::shadow: return Setting::shadow;
        case DgpKind::proximal_linear: return Setting::proximal;
        case DgpKind::smooth_fulldata: return Setting::fulldata;
    }
    return Setting::fulldata;
}

double kennedy_mu(double x) {
    if (x < -0.5) return (x + 2.0) * (x + 2.0) / 2.0;
    if (x < 0.0) return x / 2.0 + 0.875;
    if (x < 0.5) return -5.0 * (x - 0.2) * (x - 0.2) + 1.075;
    return x + 0.125;
}

double kennedy_pi(double x) { return x > 0.0 ? 0.9 : 0.1; }

double smooth_target(double x, double alpha) { return (*smooth_table(alpha))(x); }

const ProximalParameters& proximal_parameters() {
    static const ProximalParameters p;
    return p;
}

ProximalBridges proximal_bridges(const ProximalParameters& p) {
    ProximalBridges b{};
    b.c[1] = p.b_u / p.gamma_w;
    b.c[2] = p.tau;
    b.c[3] = p.b_x - b.c[1] * p.alpha_w;
    b.c[0] = p.b0;
    for (int a = 0; a < 2; ++a) {
        double pos = a == 1 ? p.p_treat_pos : 1.0 - p.p_treat_pos;
        double neg = a == 1 ? p.p_treat_neg : 1.0 - p.p_treat_neg;
        b.e0[a] = 0.5 * (1.0 / pos + 1.0 / neg);
        b.e1[a] = 0.5 * (1.0 / pos - 1.0 / neg) / p.gamma_z;
    }
    return b;
}

Oracle oracle_for(DgpKind kind, double alpha) {
    switch (kind) {
        case DgpKind::kennedy: return kennedy_oracle(false);
        case DgpKind::heavy_tail: return kennedy_oracle(true);
        case DgpKind::mar: return mar_oracle();
        case DgpKind::shadow: return shadow_oracle();
        case DgpKind::proximal_linear: return proximal_oracle();
        case DgpKind::smooth_fulldata: return smooth_oracle(alpha);
    }
    return {};
}

Dataset dgp_kennedy(int n, std::uint64_t seed) { return draw(n, seed, Setting::cate, kennedy_oracle(false)); }

Dataset dgp_heavy_tail(int n, std::uint64_t seed) {
    check_n(n);
    Oracle o = kennedy_oracle(true);
    Dataset d;
    d.setting = Setting::cate;
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        int c = bern(rng, 0.5);
        double x = c ? normal(rng) : unif(rng, -1.0, 1.0);
        d.component.push_back(c);
        d.records.push_back(o.sampler(Point(&x, 1), rng));
    }
    d.oracle = std::move(o);
    return d;
}

Dataset dgp_mar(int n, std::uint64_t seed) { return draw(n, seed, Setting::mar, mar_oracle()); }
Dataset dgp_shadow(int n, std::uint64_t seed) { return draw(n, seed, Setting::shadow, shadow_oracle()); }
Dataset dgp_proximal_linear(int n, std::uint64_t seed) {
    return draw(n, seed, Setting::proximal, proximal_oracle());
}
Dataset dgp_smooth_fulldata(int n, std::uint64_t seed, double alpha) {
    return draw(n, seed, Setting::fulldata, smooth_oracle(alpha));
}

Dataset generate(const DGPSpec& spec) {
    switch (spec.kind) {
        case DgpKind::kennedy: return dgp_kennedy(spec.n, spec.seed);
        case DgpKind::heavy_tail: return dgp_heavy_tail(spec.n, spec.seed);
        case DgpKind::mar: return dgp_mar(spec.n, spec.seed);
        case DgpKind::shadow: return dgp_shadow(spec.n, spec.seed);
        case DgpKind::proximal_linear: return dgp_proximal_linear(spec.n, spec.seed);
        case DgpKind::smooth_fulldata: return dgp_smooth_fulldata(spec.n, spec.seed, spec.alpha);
    }
    return {};
}

}  // namespace fwreg::sim
