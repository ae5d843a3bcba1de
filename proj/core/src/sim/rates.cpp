#include "fwreg/sim/rates.hpp"

#include <cmath>

#include "fwreg/error.hpp"

namespace fwreg::sim {

SlopeFit rate_slope(const std::vector<ReplicationResult>& results, int min_replications) {
    std::map<int, std::pair<double, int>> by_n;
    for (const auto& r : results) {
        auto& [sum, count] = by_n[r.n];
        sum += r.mse;
        ++count;
    }
    if (by_n.size() < 3) raise(ErrorCode::grid, "rate fit needs at least 3 distinct sample sizes");
    std::vector<double> lx, ly;
    for (const auto& [n, agg] : by_n) {
        if (agg.second < min_replications)
            raise(ErrorCode::grid, "sample size " + std::to_string(n) + " has " + std::to_string(agg.second) +
                                       " replications; need " + std::to_string(min_replications));
        double mean = agg.first / agg.second;
        if (!(mean > 0.0)) raise(ErrorCode::grid, "mean MSE must be positive to take logs");
        lx.push_back(std::log2(static_cast<double>(n)));
        ly.push_back(std::log2(mean));
    }
    auto k = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i] / k;
        my += ly[i] / k;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        double e = ly[i] - f.intercept - f.slope * lx[i];
        rss += e * e;
    }
    f.se = std::sqrt(rss / (k - 2.0) / sxx);
    f.points = static_cast<int>(lx.size());
    return f;
}

std::map<std::string, SlopeFit> rate_slopes(const std::vector<ReplicationResult>& results, int min_replications) {
    std::map<std::string, std::vector<ReplicationResult>> groups;
    for (const auto& r : results) groups[r.estimator].push_back(r);
    std::map<std::string, SlopeFit> out;
    for (const auto& [name, rs] : groups) out[name] = rate_slope(rs, min_replications);
    return out;
}

}  // namespace fwreg::sim
