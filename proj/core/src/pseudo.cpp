#include "fwreg/pseudo.hpp"

#include <cmath>

#include "fwreg/error.hpp"

namespace fwreg {

namespace {

std::vector<double> cat(std::initializer_list<Point> parts) {
    std::size_t n = 0;
    for (Point p : parts) n += p.size();
    std::vector<double> out;
    out.reserve(n);
    for (Point p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

double call(const Evaluator& f, const char* name, Point x) {
    if (!f) raise(ErrorCode::config, std::string("nuisance '") + name + "' is not set");
    return f(x);
}

double call(const Evaluator& f, const char* name, const std::vector<double>& x) {
    return call(f, name, Point(x.data(), x.size()));
}

void check_weight(double p, bool allow_one, const char* what) {
    bool ok = std::isfinite(p) && p > 0.0 && (allow_one ? p <= 1.0 : p < 1.0);
    if (!ok)
        raise(ErrorCode::nuisance_range, std::string(what) + " = " + std::to_string(p) +
                                             (allow_one ? " outside (0,1]" : " outside (0,1)"));
}

}  // namespace

Link parse_link(const std::string& name) {
    if (name == "identity") return Link::identity;
    if (name == "log") return Link::log;
    if (name == "logit") return Link::logit;
    raise(ErrorCode::config, "unknown link '" + name + "'");
}

double mar_pseudo(const MarRecord& rec, const NuisanceSet& nu) {
    std::vector<double> xz = cat({rec.x, rec.z});
    double mu = call(nu.mu, "mu", xz);
    if (!rec.y) return mu;
    double pi = call(nu.pi, "pi", xz);
    check_weight(pi, true, "pi");
    return *rec.y / pi - (1.0 / pi - 1.0) * mu;
}

double shadow_pseudo(const ShadowRecord& rec, const NuisanceSet& nu) {
    double eta = call(nu.eta, "eta", cat({rec.x, rec.w}));
    if (!rec.y) return eta;
    double y = *rec.y;
    double e = call(nu.pi, "pi", cat({rec.x, Point(&y, 1)}));
    check_weight(e, true, "e");
    return y / e - (1.0 / e - 1.0) * eta;
}

double cate_dr_pseudo(const CateRecord& rec, const NuisanceSet& nu) {
    double pi = call(nu.pi, "pi", rec.x);
    check_weight(pi, false, "pi");
    double mu0 = call(nu.mu0, "mu0", rec.x);
    double mu1 = call(nu.mu1, "mu1", rec.x);
    double mua = rec.a == 1 ? mu1 : mu0;
    return (rec.a - pi) / (pi * (1.0 - pi)) * (rec.y - mua) + mu1 - mu0;
}

double proximal_cate_pseudo(const ProximalRecord& rec, const NuisanceSet& nu) {
    double one = 1.0, zero = 0.0;
    double q1 = call(nu.q_bridge, "q_bridge", cat({rec.z, Point(&one, 1), rec.x}));
    double q0 = call(nu.q_bridge, "q_bridge", cat({rec.z, Point(&zero, 1), rec.x}));
    double h1 = call(nu.h_bridge, "h_bridge", cat({rec.w, Point(&one, 1), rec.x}));
    double h0 = call(nu.h_bridge, "h_bridge", cat({rec.w, Point(&zero, 1), rec.x}));
    double ha = rec.a == 1 ? h1 : h0;
    return (rec.a * q1 - (1 - rec.a) * q0) * (rec.y - ha) + h1 - h0;
}

double glm_cate_pseudo(const CateRecord& rec, const NuisanceSet& nu, Link link) {
    if (link == Link::identity) return cate_dr_pseudo(rec, nu);
    double pi = call(nu.pi, "pi", rec.x);
    check_weight(pi, false, "pi");
    double mu0 = call(nu.mu0, "mu0", rec.x);
    double mu1 = call(nu.mu1, "mu1", rec.x);
    auto in_domain = [&](double m) { return link == Link::log ? m > 0.0 : (m > 0.0 && m < 1.0); };
    if (!in_domain(mu0) || !in_domain(mu1))
        raise(ErrorCode::link_domain, "outcome regression outside the link domain (mu0=" + std::to_string(mu0) +
                                          ", mu1=" + std::to_string(mu1) + ")");
    double mua = rec.a == 1 ? mu1 : mu0;
    double dens = rec.a == 1 ? pi : 1.0 - pi;
    double gprime = link == Link::log ? mua : mua * (1.0 - mua);
    auto g = [&](double m) { return link == Link::log ? std::log(m) : std::log(m / (1.0 - m)); };
    double sign = rec.a == 1 ? 1.0 : -1.0;
    return sign * (rec.y - mua) / (dens * gprime) + g(mu1) - g(mu0);
}

double dose_response_pseudo(const DoseResponseRecord& rec, const NuisanceSet& nu) {
    std::vector<double> al = cat({Point(&rec.a, 1), rec.l});
    double ratio = call(nu.dens_ratio, "dens_ratio", al);
    if (!(ratio > 0.0) || !std::isfinite(ratio))
        raise(ErrorCode::density, "density ratio " + std::to_string(ratio) + " is not positive");
    double mu = call(nu.mu, "mu", al);
    return (rec.y - mu) * ratio + call(nu.marg_mu, "marg_mu", Point(&rec.a, 1));
}

double iv_cate_pseudo(const IvRecord& rec, const NuisanceSet& nu) {
    double fz1 = call(nu.iv_fz, "iv_fz", rec.x);
    double fz = rec.z == 1 ? fz1 : 1.0 - fz1;
    check_weight(fz, false, "f(Z|X)");
    double y0 = call(nu.iv_y0, "iv_y0", rec.x);
    double y1 = call(nu.iv_y1, "iv_y1", rec.x);
    double a0 = call(nu.iv_a0, "iv_a0", rec.x);
    double a1 = call(nu.iv_a1, "iv_a1", rec.x);
    double delta = a1 - a0;
    if (!(std::abs(delta) >= kWeakInstrument))
        raise(ErrorCode::weak_instrument, "instrument strength |delta_A| = " + std::to_string(std::abs(delta)) +
                                              " below " + std::to_string(kWeakInstrument));
    double beta = (y1 - y0) / delta;
    double resid = rec.y - rec.a * beta - y0 + a0 * beta;
    return (2.0 * rec.z - 1.0) / fz * resid / delta + beta;
}

double fulldata_pseudo(const FullDataRecord& rec) { return rec.y; }

double pseudo_outcome(const ObservedRecord& rec, const NuisanceSet& nu, Link link) {
    switch (setting_of(rec)) {
        case Setting::fulldata: return fulldata_pseudo(std::get<FullDataRecord>(rec));
        case Setting::mar: return mar_pseudo(std::get<MarRecord>(rec), nu);
        case Setting::shadow: return shadow_pseudo(std::get<ShadowRecord>(rec), nu);
        case Setting::cate: return glm_cate_pseudo(std::get<CateRecord>(rec), nu, link);
        case Setting::proximal: return proximal_cate_pseudo(std::get<ProximalRecord>(rec), nu);
        case Setting::dose: return dose_response_pseudo(std::get<DoseResponseRecord>(rec), nu);
        case Setting::iv: return iv_cate_pseudo(std::get<IvRecord>(rec), nu);
    }
    return 0.0;
}

double mixed_bias_pseudo(double q, double h, double g1, double g2, double g3, double g4) {
    return q * h * g1 + q * g2 + h * g3 + g4;
}

double MixedBiasForm::operator()(const ObservedRecord& rec) const {
    auto ev = [&](const RecordFunction& f) { return f ? f(rec) : 0.0; };
    return mixed_bias_pseudo(ev(q), ev(h), ev(g1), ev(g2), ev(g3), ev(g4));
}

MixedBiasForm mar_mixed_bias_form(const NuisanceSet& nu) {
    MixedBiasForm f;
    f.h = [nu](const ObservedRecord& o) {
        const auto& r = std::get<MarRecord>(o);
        if (!r.y) return 0.0;
        double pi = call(nu.pi, "pi", cat({r.x, r.z}));
        check_weight(pi, true, "pi");
        return 1.0 / pi;
    };
    f.q = [nu](const ObservedRecord& o) {
        const auto& r = std::get<MarRecord>(o);
        return call(nu.mu, "mu", cat({r.x, r.z}));
    };
    f.g1 = [](const ObservedRecord& o) { return -static_cast<double>(std::get<MarRecord>(o).r()); };
    f.g2 = [](const ObservedRecord&) { return 1.0; };
    f.g3 = [](const ObservedRecord& o) {
        const auto& r = std::get<MarRecord>(o);
        return r.y ? *r.y : 0.0;
    };
    f.g4 = [](const ObservedRecord&) { return 0.0; };
    return f;
}

MixedBiasForm proximal_mixed_bias_form(const NuisanceSet& nu, int arm) {
    MixedBiasForm f;
    double a = arm;
    f.q = [nu, a](const ObservedRecord& o) {
        const auto& r = std::get<ProximalRecord>(o);
        return call(nu.q_bridge, "q_bridge", cat({r.z, Point(&a, 1), r.x}));
    };
    f.h = [nu, a](const ObservedRecord& o) {
        const auto& r = std::get<ProximalRecord>(o);
        return call(nu.h_bridge, "h_bridge", cat({r.w, Point(&a, 1), r.x}));
    };
    f.g1 = [arm](const ObservedRecord& o) { return std::get<ProximalRecord>(o).a == arm ? -1.0 : 0.0; };
    f.g2 = [arm](const ObservedRecord& o) {
        const auto& r = std::get<ProximalRecord>(o);
        return r.a == arm ? r.y : 0.0;
    };
    f.g3 = [](const ObservedRecord&) { return 1.0; };
    f.g4 = [](const ObservedRecord&) { return 0.0; };
    return f;
}

double proximal_mixed_bias_pseudo(const ProximalRecord& rec, const NuisanceSet& nu) {
    ObservedRecord o = rec;
    return proximal_mixed_bias_form(nu, 1)(o) - proximal_mixed_bias_form(nu, 0)(o);
}

ProbeResult conditional_bias_probe(const ConditionalSampler& sampler, const PseudoFunction& pseudo,
                                   const NuisanceSet& truth, const NuisanceSet& hat,
                                   const std::vector<std::vector<double>>& x_grid, int mc_size,
                                   std::uint64_t seed) {
    if (mc_size < 100) raise(ErrorCode::sample_size, "probe needs mc-size >= 100");
    ProbeResult out;
    for (std::size_t g = 0; g < x_grid.size(); ++g) {
        Rng rng = make_rng(seed, g);
        Point x(x_grid[g].data(), x_grid[g].size());
        double s = 0.0, ss = 0.0;
        for (int i = 0; i < mc_size; ++i) {
            ObservedRecord rec = sampler(x, rng);
            double d = pseudo(rec, hat) - pseudo(rec, truth);
            s += d;
            ss += d * d;
        }
        double mean = s / mc_size;
        double var = std::max(0.0, (ss - mc_size * mean * mean) / (mc_size - 1));
        out.x.push_back(x_grid[g]);
        out.bias.push_back(mean);
        out.se.push_back(std::sqrt(var / mc_size));
    }
    return out;
}

BinnedMeans binned_conditional_means(const std::vector<double>& coordinate, const std::vector<double>& values,
                                     const std::vector<double>& target, double lower, double upper, int bins) {
    if (coordinate.size() != values.size() || values.size() != target.size())
        raise(ErrorCode::shape, "binning inputs differ in length");
    if (bins < 1 || !(lower < upper)) raise(ErrorCode::grid, "binning needs bins >= 1 and lower < upper");
    BinnedMeans b;
    std::size_t nb = static_cast<std::size_t>(bins);
    b.count.assign(nb, 0);
    b.mean.assign(nb, 0.0);
    b.target.assign(nb, 0.0);
    b.se.assign(nb, 0.0);
    std::vector<double> dsum(nb, 0.0), dss(nb, 0.0);
    double width = (upper - lower) / bins;
    for (int k = 0; k < bins; ++k) {
        b.lower.push_back(lower + k * width);
        b.upper.push_back(lower + (k + 1) * width);
    }
    for (std::size_t i = 0; i < coordinate.size(); ++i) {
        double c = coordinate[i];
        if (c < lower || c > upper) continue;
        auto k = std::min(nb - 1, static_cast<std::size_t>((c - lower) / width));
        double d = values[i] - target[i];
        ++b.count[k];
        b.mean[k] += values[i];
        b.target[k] += target[i];
        dsum[k] += d;
        dss[k] += d * d;
    }
    for (std::size_t k = 0; k < nb; ++k) {
        int n = b.count[k];
        if (n == 0) continue;
        b.mean[k] /= n;
        b.target[k] /= n;
        double md = dsum[k] / n;
        double var = n > 1 ? std::max(0.0, (dss[k] - n * md * md) / (n - 1)) : 0.0;
        b.se[k] = std::sqrt(var / n);
    }
    return b;
}

}  // namespace fwreg
