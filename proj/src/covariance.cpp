#include "hetheat/covariance.hpp"

#include <algorithm>
#include <numeric>
#include <array>
#include <cmath>
#include <exception>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "hetheat/errors.hpp"
#include "hetheat/numerics.hpp"

namespace hetheat {

namespace {

struct WeightedPoint {
    double x;
    double w;
};

void require_time(double t, const char* op) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError(std::string(op) + ": t must be > 0");
}

// ---------------------------------------------------------------------------------------------
// Closed-form z integral for the piecewise kernel.
//
// For x, y >= 0 write X = x/sqrt(a2), Y = y/sqrt(a2), D = X - Y, S = X + Y. Then
//   cov(x, y) = (Tint(D) + beta Tint(S)) / sqrt(a2) + kappa / (2 sqrt(pi)) J(D, S),
//   kappa = (1-beta)^2/sqrt(a1) - (1-beta^2)/sqrt(a2),
//   J(D, S) = int_0^sqrt(t) exp(-D^2/4v^2) erfc(S/2v) dv,
// where Tint is time_integrated_t. The z <= 0 half-line and the missing part of the z > 0
// Gaussian overlap are both the integral over Z < 0 of the pair of Gaussians, which gives J.
// Points x, y <= 0 reduce to this case by reflecting the medium.

struct ScaledMedium {
    double inv_sqrt_a2;
    double beta;
    double kappa;
};

ScaledMedium scaled(const Medium& m, bool reflect) {
    const double a1 = reflect ? m.a2 : m.a1;
    const double a2 = reflect ? m.a1 : m.a2;
    const double beta = reflect ? -m.beta : m.beta;
    ScaledMedium s;
    s.inv_sqrt_a2 = 1.0 / std::sqrt(a2);
    s.beta = beta;
    s.kappa = (1.0 - beta) * (1.0 - beta) / std::sqrt(a1) - (1.0 - beta * beta) / std::sqrt(a2);
    return s;
}

// Tint(a) - Tint(b) for a, b >= 0, without forming the O(1) values separately.
double tint_diff(double a, double b, double t) {
    const double st = std::sqrt(t);
    const double gauss = std::exp(-b * b / (4.0 * t)) * std::expm1(-(a * a - b * b) / (4.0 * t));
    return st / std::sqrt(std::numbers::pi) * gauss - 0.5 * a * std::erfc(a / (2.0 * st)) +
           0.5 * b * std::erfc(b / (2.0 * st));
}

double tint(double a, double t) { return time_integrated_t(0.0, a, t); }

// Geometric ladder of breakpoints from s/4 up to `top`, so that features at scale s near
// the origin are not stepped over by the first Kronrod panel.
std::vector<double> scale_ladder(double s, double top) {
    std::vector<double> out;
    if (!(s > 0.0)) return out;
    for (double b = 0.25 * s; b < top; b *= 4.0) out.push_back(b);
    return out;
}

// kappa part of the bilinear form: int_0^sqrt(t) sum_i w_i exp(-D_i^2/4v^2) erfc(S_i/2v) dv.
double kappa_integral(std::span<const WeightedPoint> xs, std::span<const WeightedPoint> ys, double inv_sqrt_a2,
                      double t, const QuadratureSpec& q, const char* op) {
    struct Term {
        double d2;
        double s;
        double w;
    };
    std::array<Term, 4> terms{};
    std::size_t count = 0;
    double s_min = 0.0;
    for (const auto& px : xs) {
        for (const auto& py : ys) {
            const double X = px.x * inv_sqrt_a2;
            const double Y = py.x * inv_sqrt_a2;
            terms[count++] = {(X - Y) * (X - Y), X + Y, px.w * py.w};
            if (X + Y > 0.0 && (s_min == 0.0 || X + Y < s_min)) s_min = X + Y;
        }
    }
    auto integrand_v = [&](double v) {
        double sum = 0.0;
        for (std::size_t i = 0; i < count; ++i) {
            sum += terms[i].w * std::exp(-terms[i].d2 / (4.0 * v * v)) * std::erfc(terms[i].s / (2.0 * v));
        }
        return sum;
    };
    const double st = std::sqrt(t);
    std::vector<double> breaks = scale_ladder(0.5 * s_min, st);
    if (q.time_substitution) {
        return integrate_or_throw(integrand_v, 0.0, st, q, op, breaks);
    }
    for (double& b : breaks) b *= b;
    auto integrand_u = [&](double u) {
        const double v = std::sqrt(u);
        return integrand_v(v) / (2.0 * v);
    };
    return integrate_or_throw(integrand_u, 0.0, t, q, op, breaks);
}

// Bilinear form sum_{i,j} wx_i wy_j cov(x_i, y_j) for nonnegative points (1 or 2 per side).
double bilinear_semi_analytic(const Medium& m, bool reflect, std::span<const WeightedPoint> xs,
                              std::span<const WeightedPoint> ys, double t, const QuadratureSpec& q,
                              const char* op) {
    const ScaledMedium s = scaled(m, reflect);
    double closed = 0.0;
    if (xs.size() == 2 && ys.size() == 2) {
        // Two pair differences per part; xs = {(x2,+1),(x1,-1)}, ys likewise.
        const double X2 = xs[0].x * s.inv_sqrt_a2, X1 = xs[1].x * s.inv_sqrt_a2;
        const double Y2 = ys[0].x * s.inv_sqrt_a2, Y1 = ys[1].x * s.inv_sqrt_a2;
        const double toeplitz = tint_diff(std::abs(X2 - Y2), std::abs(X2 - Y1), t) -
                                tint_diff(std::abs(X1 - Y2), std::abs(X1 - Y1), t);
        const double hankel = tint_diff(X2 + Y2, X2 + Y1, t) - tint_diff(X1 + Y2, X1 + Y1, t);
        closed = (toeplitz + s.beta * hankel) * s.inv_sqrt_a2;
    } else {
        for (const auto& px : xs) {
            for (const auto& py : ys) {
                const double X = px.x * s.inv_sqrt_a2;
                const double Y = py.x * s.inv_sqrt_a2;
                closed += px.w * py.w * (tint(std::abs(X - Y), t) + s.beta * tint(X + Y, t)) * s.inv_sqrt_a2;
            }
        }
    }
    if (s.kappa == 0.0) return closed;
    const double j = kappa_integral(xs, ys, s.inv_sqrt_a2, t, q, op);
    return closed + s.kappa / (2.0 * std::sqrt(std::numbers::pi)) * j;
}

// ---------------------------------------------------------------------------------------------
// Generic route: nested adaptive quadrature of int_0^t int (sum wx G(u,x,.)) (sum wy G(u,y,.)).

double bilinear_generic(const KernelFn& k, std::span<const WeightedPoint> xs, std::span<const WeightedPoint> ys,
                        double t, const QuadratureSpec& q, const char* op) {
    std::vector<double> points;
    for (const auto& p : xs) points.push_back(p.x);
    for (const auto& p : ys) points.push_back(p.x);
    const std::vector<double> kernel_breaks = k.breakpoints();
    const double lo = *std::min_element(points.begin(), points.end());
    const double hi = *std::max_element(points.begin(), points.end());
    const double spread = k.spread();

    QuadratureSpec inner_spec = q;
    inner_spec.rel_tol = 0.1 * q.rel_tol;
    inner_spec.abs_tol = 0.1 * q.abs_tol;
    inner_spec.max_subdivisions = std::max(q.max_subdivisions, 400);

    auto inner = [&](double u) {
        const double sigma = std::sqrt(u * spread);
        std::vector<double> breaks = kernel_breaks;
        for (double p : points) {
            for (double c : {-4.0, -1.0, 0.0, 1.0, 4.0}) breaks.push_back(p + c * sigma);
        }
        auto integrand = [&](double z) {
            double gx = 0.0;
            for (const auto& p : xs) gx += p.w * k(u, p.x, z);
            if (gx == 0.0) return 0.0;
            double gy = 0.0;
            for (const auto& p : ys) gy += p.w * k(u, p.x, z);
            return gx * gy;
        };
        return integrate_or_throw(integrand, lo - 12.0 * sigma, hi + 12.0 * sigma, inner_spec, op, breaks);
    };

    // Outer features sit at v ~ distance / sqrt(spread) for every pair of relevant points.
    std::vector<double> anchors = points;
    anchors.insert(anchors.end(), kernel_breaks.begin(), kernel_breaks.end());
    double d_min = 0.0;
    for (std::size_t i = 0; i < anchors.size(); ++i) {
        for (std::size_t j = i + 1; j < anchors.size(); ++j) {
            const double d = std::abs(anchors[i] - anchors[j]);
            if (d > 0.0 && (d_min == 0.0 || d < d_min)) d_min = d;
        }
    }
    const double st = std::sqrt(t);
    std::vector<double> breaks = scale_ladder(d_min / std::sqrt(spread), st);
    if (q.time_substitution) {
        return integrate_or_throw([&](double v) { return 2.0 * v * inner(v * v); }, 0.0, st, q, op, breaks);
    }
    for (double& b : breaks) b *= b;
    return integrate_or_throw(inner, 0.0, t, q, op, breaks);
}

double bilinear(const KernelFn& k, std::span<const WeightedPoint> xs, std::span<const WeightedPoint> ys, double t,
                const QuadratureSpec& q, const char* op) {
    require_time(t, op);
    if (q.semi_analytic) {
        if (const auto* pk = dynamic_cast<const PiecewiseKernel*>(&k)) {
            bool all_nonneg = true, all_nonpos = true;
            for (const auto* side : {&xs, &ys}) {
                for (const auto& p : *side) {
                    all_nonneg = all_nonneg && p.x >= 0.0;
                    all_nonpos = all_nonpos && p.x <= 0.0;
                }
            }
            if (all_nonneg) return bilinear_semi_analytic(pk->medium(), false, xs, ys, t, q, op);
            if (all_nonpos) {
                std::vector<WeightedPoint> rx(xs.begin(), xs.end()), ry(ys.begin(), ys.end());
                for (auto& p : rx) p.x = -p.x;
                for (auto& p : ry) p.x = -p.x;
                return bilinear_semi_analytic(pk->medium(), true, rx, ry, t, q, op);
            }
        }
    }
    return bilinear_generic(k, xs, ys, t, q, op);
}

}  // namespace

double cov_field(const KernelFn& k, double t, double x, double y, const QuadratureSpec& q) {
    const WeightedPoint px[] = {{x, 1.0}};
    const WeightedPoint py[] = {{y, 1.0}};
    return bilinear(k, px, py, t, q, "cov_field");
}

double increment_inner(const KernelFn& k, double t, double x1, double x2, double y1, double y2,
                       const QuadratureSpec& q) {
    const WeightedPoint px[] = {{x2, 1.0}, {x1, -1.0}};
    const WeightedPoint py[] = {{y2, 1.0}, {y1, -1.0}};
    return bilinear(k, px, py, t, q, "increment_inner");
}

double increment_variance(const KernelFn& k, double t, double x, double y, const QuadratureSpec& q) {
    if (x == y) return 0.0;
    return increment_inner(k, t, x, y, x, y, q);
}

double cross_increment(const KernelFn& k, double t, double x, double y, double h, const QuadratureSpec& q) {
    if (!(h > 0.0)) throw DomainError("cross_increment: h must be > 0");
    return increment_inner(k, t, x, x + h, y, y + h, q);
}

double cov_field_generic(const KernelFn& k, double t, double x, double y, const QuadratureSpec& q) {
    require_time(t, "cov_field");
    const WeightedPoint px[] = {{x, 1.0}};
    const WeightedPoint py[] = {{y, 1.0}};
    return bilinear_generic(k, px, py, t, q, "cov_field");
}

double increment_inner_generic(const KernelFn& k, double t, double x1, double x2, double y1, double y2,
                               const QuadratureSpec& q) {
    require_time(t, "increment_inner");
    const WeightedPoint px[] = {{x2, 1.0}, {x1, -1.0}};
    const WeightedPoint py[] = {{y2, 1.0}, {y1, -1.0}};
    return bilinear_generic(k, px, py, t, q, "increment_inner");
}

// ---------------------------------------------------------------------------------------------

Eigen::MatrixXd IncrementGram::correlation() const {
    const Eigen::VectorXd var = variances();
    for (Eigen::Index j = 0; j < var.size(); ++j) {
        if (!(var(j) > 0.0)) {
            throw InvalidGramError("covariance", "correlation",
                                   "nonpositive variance at index " + std::to_string(j));
        }
    }
    const Eigen::VectorXd inv_sd = var.cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd r = inv_sd.asDiagonal() * entries * inv_sd.asDiagonal();
    r.diagonal().setOnes();
    return r;
}

namespace {

double gram_entry(const KernelFn& k, double t, int n, int j, int l, const QuadratureSpec& q) {
    const double dn = static_cast<double>(n);
    try {
        return increment_inner(k, t, j / dn, (j + 1) / dn, l / dn, (l + 1) / dn, q);
    } catch (const QuadratureError& e) {
        throw QuadratureError("build_gram(" + std::to_string(j) + "," + std::to_string(l) + ")", e.estimate(),
                              e.error_bound());
    }
}

void check_gram_args(double t, int n) {
    if (n < 1) throw ValidationError("n", "grid size must be >= 1");
    if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("t", "must be > 0");
}

IncrementGram empty_gram(const KernelFn& k, double t, int n) {
    IncrementGram g;
    g.t = t;
    g.grid_n = n;
    g.kernel_id = k.id();
    g.entries.resize(n, n);
    return g;
}

}  // namespace

IncrementGram build_gram_serial(const KernelFn& k, double t, int n, const QuadratureSpec& q) {
    check_gram_args(t, n);
    q.validate();
    IncrementGram g = empty_gram(k, t, n);
    for (int j = 0; j < n; ++j) {
        for (int l = j; l < n; ++l) {
            g.entries(j, l) = g.entries(l, j) = gram_entry(k, t, n, j, l, q);
        }
    }
    return g;
}

IncrementGram build_gram(const KernelFn& k, double t, int n, const QuadratureSpec& q, GramCache* cache) {
    check_gram_args(t, n);
    q.validate();
    std::string key;
    if (cache) {
        key = GramCache::key(k.id(), t, n, q);
        if (auto hit = cache->load(key)) {
            cache->record(true);
            return *hit;
        }
        cache->record(false);
    }

    IncrementGram g = empty_gram(k, t, n);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (int j = 0; j < n; ++j) {
        for (int l = j; l < n; ++l) {
            try {
                g.entries(j, l) = g.entries(l, j) = gram_entry(k, t, n, j, l, q);
            } catch (...) {
#pragma omp critical(hetheat_gram_failure)
                if (!failure) failure = std::current_exception();
                break;
            }
        }
    }
    if (failure) std::rethrow_exception(failure);

    if (cache) cache->store(key, g, q);
    return g;
}

IncrementGram aggregate_gram(const IncrementGram& fine, int factor) {
    if (factor < 1 || fine.grid_n % factor != 0) {
        throw ValidationError("factor", "must divide the grid size");
    }
    const int n = fine.grid_n / factor;
    IncrementGram g;
    g.t = fine.t;
    g.grid_n = n;
    g.kernel_id = fine.kernel_id;
    g.entries.resize(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            double sum = 0.0;
            for (int i = 0; i < factor; ++i) {
                for (int j = 0; j < factor; ++j) sum += fine.entries(a * factor + i, b * factor + j);
            }
            g.entries(a, b) = sum;
        }
    }
    return g;
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

// ---------------------------------------------------------------------------------------------

const char* to_string(Condition c) {
    switch (c) {
        case Condition::H1: return "H1";
        case Condition::H2: return "H2";
        case Condition::H3: return "H3";
    }
    return "?";
}

std::vector<double> default_h_grid() {
    std::vector<double> h;
    for (int e = 3; e <= 11; ++e) h.push_back(std::ldexp(1.0, -e));
    return h;
}

ConditionReport verify_condition(const KernelFn& k, double t, Condition id, std::span<const double> h_grid,
                                 const QuadratureSpec& q) {
    require_time(t, "verify_condition");
    if (h_grid.empty()) throw ValidationError("h_grid", "must be nonempty");
    for (double h : h_grid) {
        if (!(h > 0.0 && h <= 1.0)) throw ValidationError("h_grid", "entries must lie in (0, 1]");
    }

    std::vector<double> base;
    for (int i = 1; i <= 13; i += 2) base.push_back(i / 16.0);

    ConditionReport r;
    r.id = id;
    r.h_grid.assign(h_grid.begin(), h_grid.end());
    for (double h : h_grid) {
        double extreme = id == Condition::H1 ? std::numeric_limits<double>::infinity() : 0.0;
        if (id == Condition::H3) {
            auto visit = [&](double x, double y) {
                extreme = std::max(extreme, std::abs(cross_increment(k, t, x, y, h, q)) / (h * h));
            };
            for (std::size_t i = 0; i < base.size(); ++i) {
                for (std::size_t j = i + 1; j < base.size(); ++j) visit(base[i], base[j]);
                visit(base[i], base[i] + h);
                visit(base[i], base[i] + 2.0 * h);
            }
        } else {
            for (double x : base) {
                const double ratio = increment_variance(k, t, x, x + h, q) / h;
                extreme = id == Condition::H1 ? std::min(extreme, ratio) : std::max(extreme, ratio);
            }
        }
        r.ratio_per_h.push_back(extreme);
    }

    const bool lower = id == Condition::H1;
    r.constant = lower ? *std::min_element(r.ratio_per_h.begin(), r.ratio_per_h.end())
                       : *std::max_element(r.ratio_per_h.begin(), r.ratio_per_h.end());
    const auto smallest_h = std::min_element(r.h_grid.begin(), r.h_grid.end()) - r.h_grid.begin();
    r.worst_ratio = r.ratio_per_h[static_cast<std::size_t>(smallest_h)];

    bool ratios_ok = true;
    for (double v : r.ratio_per_h) ratios_ok = ratios_ok && std::isfinite(v) && v > 0.0;
    // The trend is judged on the four smallest h only. Larger h are pre-asymptotic and the
    // ratios there may still be drifting towards their limit.
    std::vector<std::size_t> order(r.h_grid.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r.h_grid[a] < r.h_grid[b]; });
    std::vector<double> lx, ly;
    for (std::size_t i : order) {
        if (lx.size() == 4) break;
        const double v = r.ratio_per_h[i];
        if (v > 0.0 && std::isfinite(v)) {
            lx.push_back(std::log(r.h_grid[i]));
            ly.push_back(std::log(v));
        }
    }
    r.ratio_slope = lx.size() >= 2 ? ls_slope(lx, ly) : 0.0;
    const bool finite = std::isfinite(r.constant) && r.constant > 0.0;
    const bool trend_ok = lower ? r.ratio_slope <= 0.1 : r.ratio_slope >= -0.1;
    r.pass = finite && ratios_ok && trend_ok;
    return r;
}

SupVarianceReport sup_variance_check(const KernelFn& k, std::span<const double> t_grid,
                                     std::span<const double> x_grid, const QuadratureSpec& q) {
    if (t_grid.empty() || x_grid.empty()) throw ValidationError("grid", "t and x grids must be nonempty");
    std::vector<double> ts(t_grid.begin(), t_grid.end());
    std::sort(ts.begin(), ts.end());
    SupVarianceReport r;
    r.values.assign(ts.size(), std::vector<double>(x_grid.size()));
    for (std::size_t i = 0; i < ts.size(); ++i) {
        for (std::size_t j = 0; j < x_grid.size(); ++j) {
            const double v = cov_field(k, ts[i], x_grid[j], x_grid[j], q);
            r.values[i][j] = v;
            r.sup = std::max(r.sup, v);
            r.c4 = std::max(r.c4, v / std::sqrt(ts[i]));
            if (i > 0 && v < r.values[i - 1][j]) r.monotone_in_t = false;
        }
    }
    return r;
}

double one_minus_cos_tail() {
    QuadratureSpec q;
    q.rel_tol = 1e-14;
    q.abs_tol = 1e-16;
    const double si1 = integrate_or_throw([](double z) { return z == 0.0 ? 1.0 : std::sin(z) / z; }, 0.0, 1.0, q,
                                          "one_minus_cos_tail");
    return 1.0 - std::cos(1.0) + std::numbers::pi / 2.0 - si1;
}

double lemma_lower_constant(const Medium& m, double t, double a_bound) {
    require_time(t, "lemma_lower_constant");
    if (!(a_bound > 0.0)) throw ValidationError("a_bound", "must be > 0");
    return 2.0 / (std::sqrt(m.a2) * std::numbers::pi) * (-std::expm1(-t * m.a2 / (a_bound * a_bound))) *
           one_minus_cos_tail();
}

}  // namespace hetheat
