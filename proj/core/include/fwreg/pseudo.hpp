#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "fwreg/records.hpp"
#include "fwreg/rng.hpp"
#include "fwreg/types.hpp"

namespace fwreg {

// Argument order of each evaluator:
//   pi          MAR (x,z); shadow e(x,y); CATE pi(x)
//   mu          MAR (x,z); dose (a,l)
//   mu0, mu1    (x)
//   eta         (x,w)
//   h_bridge    (w,a,x)
//   q_bridge    (z,a,x)
//   dens_ratio  (a,l)
//   marg_mu     (a)
//   iv_y0/iv_y1 E[Y|Z=z,L](x); iv_a0/iv_a1 E[A|Z=z,L](x); iv_fz P(Z=1|X)(x)
struct NuisanceSet {
    Evaluator pi;
    Evaluator mu;
    Evaluator mu0;
    Evaluator mu1;
    Evaluator eta;
    Evaluator h_bridge;
    Evaluator q_bridge;
    Evaluator dens_ratio;
    Evaluator marg_mu;
    Evaluator iv_y0;
    Evaluator iv_y1;
    Evaluator iv_a0;
    Evaluator iv_a1;
    Evaluator iv_fz;
};

enum class Link { identity, log, logit };
Link parse_link(const std::string& name);

constexpr double kWeakInstrument = 0.05;

double mar_pseudo(const MarRecord& rec, const NuisanceSet& nu);
double shadow_pseudo(const ShadowRecord& rec, const NuisanceSet& nu);
double cate_dr_pseudo(const CateRecord& rec, const NuisanceSet& nu);
double proximal_cate_pseudo(const ProximalRecord& rec, const NuisanceSet& nu);
double glm_cate_pseudo(const CateRecord& rec, const NuisanceSet& nu, Link link);
double dose_response_pseudo(const DoseResponseRecord& rec, const NuisanceSet& nu);
double iv_cate_pseudo(const IvRecord& rec, const NuisanceSet& nu);
double fulldata_pseudo(const FullDataRecord& rec);

// Dispatch on the record type; CATE uses the given link.
double pseudo_outcome(const ObservedRecord& rec, const NuisanceSet& nu, Link link = Link::identity);

// q h g1 + q g2 + h g3 + g4
double mixed_bias_pseudo(double q, double h, double g1, double g2, double g3, double g4);

using RecordFunction = std::function<double(const ObservedRecord&)>;

struct MixedBiasForm {
    RecordFunction q, h, g1, g2, g3, g4;
    double operator()(const ObservedRecord& rec) const;
};

MixedBiasForm mar_mixed_bias_form(const NuisanceSet& nu);
// Per-arm form; the proximal pseudo-outcome is arm 1 minus arm 0.
MixedBiasForm proximal_mixed_bias_form(const NuisanceSet& nu, int arm);
double proximal_mixed_bias_pseudo(const ProximalRecord& rec, const NuisanceSet& nu);

// Draws one record with covariates fixed at x.
using ConditionalSampler = std::function<ObservedRecord(Point x, Rng& rng)>;
using PseudoFunction = std::function<double(const ObservedRecord&, const NuisanceSet&)>;

struct ProbeResult {
    std::vector<std::vector<double>> x;
    std::vector<double> bias;
    std::vector<double> se;
};

// Monte Carlo estimate of E[f_hat(O) - f(O) | X=x], where f uses the true
// nuisances and so has conditional mean m*(x).
ProbeResult conditional_bias_probe(const ConditionalSampler& sampler, const PseudoFunction& pseudo,
                                   const NuisanceSet& truth, const NuisanceSet& hat,
                                   const std::vector<std::vector<double>>& x_grid, int mc_size,
                                   std::uint64_t seed);

struct BinnedMeans {
    std::vector<double> lower, upper;
    std::vector<int> count;
    std::vector<double> mean;    // mean of values in the bin
    std::vector<double> target;  // mean of the target at the same points
    std::vector<double> se;      // standard error of mean(values - target)
};

BinnedMeans binned_conditional_means(const std::vector<double>& coordinate, const std::vector<double>& values,
                                     const std::vector<double>& target, double lower, double upper, int bins);

}  // namespace fwreg
