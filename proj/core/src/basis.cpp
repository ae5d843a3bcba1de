#include "fwreg/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fwreg/error.hpp"

namespace fwreg {

namespace {

constexpr int kCap = 512;

struct Coordinate {
    Family family = Family::polynomial;
    int degree = 3;
    int order = 0;
    double lo = -1.0;
    double hi = 1.0;
    int max_m = 0;
    // Indexed by m (number of non-constant functions). bspline: interior knots;
    // natural spline: all knots on [0,1]; partition: interior cell boundaries.
    std::vector<std::vector<double>> knots_by_m;

    bool nested() const { return family == Family::polynomial || family == Family::trigonometric; }

    double clip(double x) const { return std::clamp(x, lo, hi); }

    void eval(int m, double x, double* out) const;
};

void eval_bspline(const Coordinate& c, int m, double x, double* out) {
    int p = m <= c.degree ? m : c.degree;
    std::vector<double> full;
    full.reserve(static_cast<std::size_t>(m + p + 2));
    for (int i = 0; i <= p; ++i) full.push_back(c.lo);
    if (m > c.degree)
        for (double k : c.knots_by_m[m]) full.push_back(k);
    for (int i = 0; i <= p; ++i) full.push_back(c.hi);
    std::vector<double> v = bspline_values(full, p, x);
    for (int i = 0; i < m; ++i) out[i] = v[static_cast<std::size_t>(i + 1)];
}

void eval_natural(const Coordinate& c, int m, double x, double* out) {
    double t = (x - c.lo) / (c.hi - c.lo);
    out[0] = t;
    if (m == 1) return;
    const std::vector<double>& xi = c.knots_by_m[m];
    int K = static_cast<int>(xi.size());
    auto cube = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
    auto d = [&](int k) {
        return (cube(t - xi[k]) - cube(t - xi[K - 1])) / (xi[K - 1] - xi[k]);
    };
    double last = d(K - 2);
    for (int k = 0; k < K - 2; ++k) out[k + 1] = d(k) - last;
}

void eval_partition(const Coordinate& c, int m, double x, double* out) {
    const std::vector<double>& b = c.knots_by_m[m];
    int L = static_cast<int>(b.size()) + 1;
    int cell = static_cast<int>(std::upper_bound(b.begin(), b.end(), x) - b.begin());
    double left = cell == 0 ? c.lo : b[cell - 1];
    double right = cell == L - 1 ? c.hi : b[cell];
    double v = 2.0 * (x - left) / (right - left) - 1.0;
    int k = 0;
    for (int deg = 0; deg <= c.order && k < m; ++deg) {
        double pw = std::pow(v, deg);
        for (int j = 0; j < L && k < m; ++j) {
            if (deg == 0 && j == 0) continue;
            out[k++] = j == cell ? pw : 0.0;
        }
    }
}

void Coordinate::eval(int m, double x, double* out) const {
    if (m <= 0) return;
    x = clip(x);
    switch (family) {
        case Family::polynomial: {
            double u = 2.0 * (x - lo) / (hi - lo) - 1.0;
            double pw = 1.0;
            for (int k = 0; k < m; ++k) {
                pw *= u;
                out[k] = pw;
            }
            return;
        }
        case Family::trigonometric: {
            double u = 2.0 * (x - lo) / (hi - lo) - 1.0;
            for (int k = 0; k < m; ++k) {
                double freq = std::numbers::pi * static_cast<double>(k / 2 + 1);
                out[k] = k % 2 == 0 ? std::cos(freq * u) : std::sin(freq * u);
            }
            return;
        }
        case Family::bspline: eval_bspline(*this, m, x, out); return;
        case Family::natural_spline: eval_natural(*this, m, x, out); return;
        case Family::partition: eval_partition(*this, m, x, out); return;
    }
}

std::vector<double> quantile_knots(const std::vector<double>& sorted, int count, double p0, double p1,
                                   int intervals) {
    std::vector<double> k;
    k.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        double p = p0 + (p1 - p0) * static_cast<double>(j) / static_cast<double>(intervals);
        k.push_back(quantile_type7(sorted, p));
    }
    return k;
}

void require_strict(const std::vector<double>& k, double lo, double hi, bool open) {
    for (std::size_t i = 1; i < k.size(); ++i)
        if (!(k[i] > k[i - 1]))
            raise(ErrorCode::degenerate_knots, "quantile knots are not strictly increasing; "
                                               "too few distinct covariate values");
    if (open && !k.empty() && (!(k.front() > lo) || !(k.back() < hi)))
        raise(ErrorCode::degenerate_knots, "interior knots must lie strictly inside the domain");
}

Coordinate build_coordinate(const BasisSpec& spec, const Interval& dom, std::vector<double> column) {
    Coordinate c;
    c.family = spec.family;
    c.degree = spec.degree;
    c.order = spec.order;
    c.lo = dom.lower;
    c.hi = dom.upper;
    for (double& v : column) v = c.clip(v);
    std::sort(column.begin(), column.end());
    int K = spec.interior_knots;
    switch (spec.family) {
        case Family::polynomial:
        case Family::trigonometric: c.max_m = kCap - 1; return c;
        case Family::bspline: c.max_m = K + spec.degree; break;
        case Family::natural_spline: c.max_m = K + 1; break;
        case Family::partition: c.max_m = (K + 1) * (spec.order + 1) - 1; break;
    }
    c.max_m = std::min(c.max_m, kCap - 1);
    bool needs_data = !(spec.family == Family::bspline && c.max_m <= spec.degree) &&
                      !(spec.family == Family::natural_spline && c.max_m <= 1) &&
                      !(spec.family == Family::partition && c.max_m <= spec.order);
    if (needs_data && column.empty())
        raise(ErrorCode::degenerate_knots, "knot placement needs at least one training point");
    c.knots_by_m.resize(static_cast<std::size_t>(c.max_m + 1));
    for (int m = 1; m <= c.max_m; ++m) {
        std::vector<double>& k = c.knots_by_m[static_cast<std::size_t>(m)];
        if (spec.family == Family::bspline) {
            if (m <= spec.degree) continue;
            int interior = m - spec.degree;
            for (int j = 1; j <= interior; ++j)
                k.push_back(quantile_type7(column, static_cast<double>(j) / (interior + 1)));
            require_strict(k, c.lo, c.hi, true);
        } else if (spec.family == Family::natural_spline) {
            if (m == 1) continue;
            int total = m + 1;
            std::vector<double> t(column.size());
            for (std::size_t i = 0; i < column.size(); ++i) t[i] = (column[i] - c.lo) / (c.hi - c.lo);
            k = quantile_knots(t, total, 0.0, 1.0, total - 1);
            require_strict(k, 0.0, 1.0, false);
        } else {
            int cells = (m + 1 + spec.order) / (spec.order + 1);
            for (int j = 1; j < cells; ++j)
                k.push_back(quantile_type7(column, static_cast<double>(j) / cells));
            require_strict(k, c.lo, c.hi, true);
        }
    }
    return c;
}

}  // namespace

namespace detail {
struct BasisImpl {
    BasisSpec spec;
    std::vector<Interval> domain;
    std::vector<Coordinate> coords;
    int max_J = 1;
    // tensor mode: multi-indices in graded order
    std::vector<std::vector<int>> multi;

    // additive mode: non-constant functions per coordinate for truncation J
    std::vector<int> allocation(int J) const {
        std::vector<int> m(coords.size(), 0);
        int left = J - 1;
        while (left > 0) {
            bool any = false;
            for (std::size_t j = 0; j < coords.size() && left > 0; ++j) {
                if (m[j] < coords[j].max_m) {
                    ++m[j];
                    --left;
                    any = true;
                }
            }
            if (!any) break;
        }
        return m;
    }
};
}  // namespace detail

namespace {

void graded_indices(const std::vector<int>& bound, int cap, std::vector<std::vector<int>>& out) {
    int d = static_cast<int>(bound.size());
    int top = 0;
    for (int b : bound) top += b;
    std::vector<int> cur(static_cast<std::size_t>(d), 0);
    for (int s = 0; s <= top && static_cast<int>(out.size()) < cap; ++s) {
        // compositions of s, first coordinate largest first
        auto rec = [&](auto&& self, int j, int rest) -> void {
            if (static_cast<int>(out.size()) >= cap) return;
            if (j == d - 1) {
                if (rest <= bound[static_cast<std::size_t>(j)]) {
                    cur[static_cast<std::size_t>(j)] = rest;
                    out.push_back(cur);
                }
                return;
            }
            for (int v = std::min(rest, bound[static_cast<std::size_t>(j)]); v >= 0; --v) {
                cur[static_cast<std::size_t>(j)] = v;
                self(self, j + 1, rest - v);
            }
        };
        rec(rec, 0, s);
    }
}

}  // namespace

Family parse_family(const std::string& name) {
    if (name == "polynomial") return Family::polynomial;
    if (name == "trigonometric") return Family::trigonometric;
    if (name == "bspline") return Family::bspline;
    if (name == "natural-spline") return Family::natural_spline;
    if (name == "partition") return Family::partition;
    raise(ErrorCode::config, "unknown basis family '" + name + "'");
}

std::string family_name(Family f) {
    switch (f) {
        case Family::polynomial: return "polynomial";
        case Family::trigonometric: return "trigonometric";
        case Family::bspline: return "bspline";
        case Family::natural_spline: return "natural-spline";
        case Family::partition: return "partition";
    }
    return "?";
}

BasisSequence make_basis(const BasisSpec& spec, const RowMatrix& training) {
    if (spec.dim < 1) raise(ErrorCode::shape, "basis dimension must be at least 1");
    if (spec.family == Family::bspline && spec.degree < 1) raise(ErrorCode::config, "bspline degree must be >= 1");
    if (spec.family == Family::partition && spec.order < 0) raise(ErrorCode::config, "partition order must be >= 0");
    if (spec.interior_knots < 0) raise(ErrorCode::config, "interior knot count must be >= 0");
    if (training.rows() > 0 && training.cols() != spec.dim)
        raise(ErrorCode::shape, "training covariates have " + std::to_string(training.cols()) +
                                    " columns, basis dimension is " + std::to_string(spec.dim));
    if (!spec.domain.empty() && static_cast<int>(spec.domain.size()) != spec.dim)
        raise(ErrorCode::shape, "one domain interval per covariate dimension is required");

    auto impl = std::make_shared<detail::BasisImpl>();
    impl->spec = spec;
    for (int j = 0; j < spec.dim; ++j) {
        Interval dom;
        std::vector<double> column(static_cast<std::size_t>(training.rows()));
        for (Eigen::Index i = 0; i < training.rows(); ++i) column[static_cast<std::size_t>(i)] = training(i, j);
        if (!spec.domain.empty()) {
            dom = spec.domain[static_cast<std::size_t>(j)];
            if (!(dom.lower < dom.upper)) raise(ErrorCode::config, "domain interval must satisfy lower < upper");
        } else if (!column.empty()) {
            auto [mn, mx] = std::minmax_element(column.begin(), column.end());
            dom = {*mn, *mx};
            if (!(dom.lower < dom.upper)) dom = {dom.lower - 0.5, dom.upper + 0.5};
        }
        impl->domain.push_back(dom);
        impl->coords.push_back(build_coordinate(spec, dom, std::move(column)));
    }

    if (spec.mode == MultivariateMode::additive) {
        long total = 1;
        for (const Coordinate& c : impl->coords) total += c.max_m;
        impl->max_J = static_cast<int>(std::min<long>(total, kCap));
    } else {
        if (spec.tensor_cap < 1) raise(ErrorCode::config, "tensor cap must be >= 1");
        std::vector<int> bound;
        for (const Coordinate& c : impl->coords) bound.push_back(c.max_m);
        graded_indices(bound, std::min(spec.tensor_cap, kCap), impl->multi);
        impl->max_J = static_cast<int>(impl->multi.size());
    }

    BasisSequence out;
    out.impl_ = std::move(impl);
    return out;
}

const BasisSpec& BasisSequence::spec() const { return impl_->spec; }
int BasisSequence::dim() const { return impl_->spec.dim; }
int BasisSequence::max_J() const { return impl_->max_J; }
const std::vector<Interval>& BasisSequence::domain() const { return impl_->domain; }

std::vector<std::vector<double>> BasisSequence::knots() const {
    std::vector<std::vector<double>> out;
    for (const Coordinate& c : impl_->coords) {
        if (c.knots_by_m.empty()) {
            out.emplace_back();
            continue;
        }
        std::vector<double> k = c.knots_by_m.back();
        if (c.family == Family::natural_spline)
            for (double& v : k) v = c.lo + v * (c.hi - c.lo);
        out.push_back(std::move(k));
    }
    return out;
}

void BasisSequence::evaluate_into(int J, Point x, double* out) const {
    if (!impl_) raise(ErrorCode::shape, "basis not constructed");
    if (J < 1 || J > impl_->max_J)
        raise(ErrorCode::truncation, "J=" + std::to_string(J) + " outside [1, " + std::to_string(impl_->max_J) + "]");
    if (static_cast<int>(x.size()) != impl_->spec.dim)
        raise(ErrorCode::shape, "point has " + std::to_string(x.size()) + " coordinates, basis dimension is " +
                                    std::to_string(impl_->spec.dim));
    out[0] = 1.0;
    const auto& coords = impl_->coords;
    if (impl_->spec.mode == MultivariateMode::additive) {
        std::vector<int> m = impl_->allocation(J);
        double* p = out + 1;
        for (std::size_t j = 0; j < coords.size(); ++j) {
            coords[j].eval(m[j], x[j], p);
            p += m[j];
        }
        return;
    }
    std::size_t d = coords.size();
    std::vector<int> need(d, 0);
    for (int k = 0; k < J; ++k)
        for (std::size_t j = 0; j < d; ++j) need[j] = std::max(need[j], impl_->multi[static_cast<std::size_t>(k)][j]);
    std::vector<std::vector<double>> vals(d);
    for (std::size_t j = 0; j < d; ++j) {
        int m = coords[j].nested() ? need[j] : coords[j].max_m;
        vals[j].assign(static_cast<std::size_t>(m + 1), 1.0);
        coords[j].eval(m, x[j], vals[j].data() + 1);
    }
    for (int k = 1; k < J; ++k) {
        double v = 1.0;
        const std::vector<int>& idx = impl_->multi[static_cast<std::size_t>(k)];
        for (std::size_t j = 0; j < d; ++j) v *= vals[j][static_cast<std::size_t>(idx[j])];
        out[k] = v;
    }
}

Vector BasisSequence::evaluate(int J, Point x) const {
    if (J < 1) raise(ErrorCode::truncation, "J must be >= 1");
    Vector out(J);
    evaluate_into(J, x, out.data());
    return out;
}

Matrix BasisSequence::evaluate_matrix(int J, const RowMatrix& xs) const {
    if (J < 1) raise(ErrorCode::truncation, "J must be >= 1");
    RowMatrix out(xs.rows(), J);
    for (Eigen::Index i = 0; i < xs.rows(); ++i) evaluate_into(J, row(xs, i), out.data() + i * J);
    return out;
}

Vector evaluate(const BasisSequence& basis, int J, Point x) { return basis.evaluate(J, x); }
Matrix evaluate_matrix(const BasisSequence& basis, int J, const RowMatrix& xs) { return basis.evaluate_matrix(J, xs); }

std::vector<double> bspline_values(const std::vector<double>& t, int p, double x) {
    int nb = static_cast<int>(t.size()) - p - 1;
    std::vector<double> out(static_cast<std::size_t>(std::max(nb, 0)), 0.0);
    if (nb <= 0) return out;
    double a = t[static_cast<std::size_t>(p)];
    double b = t[static_cast<std::size_t>(nb)];
    x = std::clamp(x, a, b);
    int span;
    if (x >= b) {
        span = nb - 1;
        while (span > p && !(t[static_cast<std::size_t>(span)] < t[static_cast<std::size_t>(span + 1)])) --span;
    } else {
        span = static_cast<int>(std::upper_bound(t.begin() + p, t.begin() + nb + 1, x) - t.begin()) - 1;
    }
    // Cox-de Boor on the p+1 functions supported at x
    std::vector<double> N(static_cast<std::size_t>(p + 1), 0.0), left(N.size()), right(N.size());
    N[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[static_cast<std::size_t>(j)] = x - t[static_cast<std::size_t>(span + 1 - j)];
        right[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(span + j)] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            double denom = right[static_cast<std::size_t>(r + 1)] + left[static_cast<std::size_t>(j - r)];
            double tmp = denom > 0.0 ? N[static_cast<std::size_t>(r)] / denom : 0.0;
            N[static_cast<std::size_t>(r)] = saved + right[static_cast<std::size_t>(r + 1)] * tmp;
            saved = left[static_cast<std::size_t>(j - r)] * tmp;
        }
        N[static_cast<std::size_t>(j)] = saved;
    }
    for (int r = 0; r <= p; ++r) out[static_cast<std::size_t>(span - p + r)] = N[static_cast<std::size_t>(r)];
    return out;
}

double quantile_type7(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) raise(ErrorCode::sample_size, "quantile of an empty sample");
    double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace fwreg
