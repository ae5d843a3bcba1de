#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fwreg/pseudo.hpp"
#include "fwreg/records.hpp"
#include "fwreg/rng.hpp"

namespace fwreg::sim {

enum class DgpKind { kennedy, heavy_tail, mar, shadow, proximal_linear, smooth_fulldata };

DgpKind parse_dgp(const std::string& name);
std::string dgp_name(DgpKind k);
Setting dgp_setting(DgpKind k);

struct DGPSpec {
    DgpKind kind = DgpKind::kennedy;
    int n = 1000;
    std::uint64_t seed = 0;
    double alpha = 2.0;  // smooth-fulldata smoothness
};

struct Oracle {
    Evaluator target;         // m*(x) or tau*(x)
    NuisanceSet truth;        // argument order as documented on NuisanceSet
    ConditionalSampler sampler;
    std::function<std::vector<double>(Rng&)> draw_x;
};

struct Dataset {
    Setting setting = Setting::fulldata;
    std::vector<ObservedRecord> records;
    std::vector<int> component;  // heavy-tail mixture labels (1 = Gaussian)
    Oracle oracle;
};

Dataset generate(const DGPSpec& spec);

Dataset dgp_kennedy(int n, std::uint64_t seed);
Dataset dgp_heavy_tail(int n, std::uint64_t seed);
Dataset dgp_mar(int n, std::uint64_t seed);
Dataset dgp_shadow(int n, std::uint64_t seed);
Dataset dgp_proximal_linear(int n, std::uint64_t seed);
Dataset dgp_smooth_fulldata(int n, std::uint64_t seed, double alpha = 2.0);

Oracle oracle_for(DgpKind kind, double alpha = 2.0);

// Piecewise polynomial outcome surface shared by both arms of the null-CATE designs.
double kennedy_mu(double x);
double kennedy_pi(double x);

// Periodic target with Fourier coefficients k^-(alpha + 1/2).
double smooth_target(double x, double alpha = 2.0);

struct ProximalParameters {
    double alpha_z = 0.5, gamma_z = 1.0, sd_z = 0.3;
    double alpha_w = -0.4, gamma_w = 1.2, sd_w = 0.3;
    double b0 = 0.5, tau = 1.0, b_x = 0.8, b_u = 1.0, sd_y = 0.2;
    double p_treat_pos = 0.7, p_treat_neg = 0.3;  // P(A=1 | U=+1), P(A=1 | U=-1)
};

// h*(w,a,x) = c[0] + c[1] w + c[2] a + c[3] x;
// q*(z,a,x) = e0[a] + e1[a] (z - alpha_z x).
struct ProximalBridges {
    double c[4];
    double e0[2];
    double e1[2];
};

const ProximalParameters& proximal_parameters();
ProximalBridges proximal_bridges(const ProximalParameters& p);

}  // namespace fwreg::sim
