#include "hetheat/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "hetheat/errors.hpp"

namespace hetheat {

namespace {

void require_positive_finite(double value, const char* field) {
    if (!std::isfinite(value) || !(value > 0.0)) {
        throw ValidationError(field, "must be strictly positive and finite");
    }
}

void require_positive_time(double u, const char* op) {
    if (!(u > 0.0)) {
        throw DomainError(std::string(op) + ": time argument must be > 0");
    }
}

}  // namespace

Medium make_medium(double a1, double a2, double rho1, double rho2) {
    require_positive_finite(a1, "a1");
    require_positive_finite(a2, "a2");
    require_positive_finite(rho1, "rho1");
    require_positive_finite(rho2, "rho2");

    Medium m;
    m.a1 = a1;
    m.a2 = a2;
    m.rho1 = rho1;
    m.rho2 = rho2;
    const double left = rho1 * std::sqrt(a1);
    const double right = rho2 * std::sqrt(a2);
    m.beta = (right - left) / (right + left);
    m.satisfies_crhoa = std::max(1.0, std::sqrt(a1) / std::sqrt(a2)) <= rho2 / rho1;
    return m;
}

double f_map(const Medium& m, double z) {
    return z <= 0.0 ? z / std::sqrt(m.a1) : z / std::sqrt(m.a2);
}

double heat_kernel(double t, double x) {
    require_positive_time(t, "heat_kernel");
    return std::exp(-x * x / (2.0 * t)) / std::sqrt(2.0 * std::numbers::pi * t);
}

double e_minus(const Medium& m, double u, double x, double z) {
    require_positive_time(u, "e_minus");
    const double d = f_map(m, z) - f_map(m, x);
    return std::exp(-d * d / (2.0 * u));
}

double e_plus(const Medium& m, double u, double x, double z) {
    require_positive_time(u, "e_plus");
    const double s = std::abs(f_map(m, z)) + std::abs(f_map(m, x));
    return std::exp(-s * s / (2.0 * u));
}

double green_fn(const Medium& m, double u, double x, double z) {
    require_positive_time(u, "green_fn");
    const double em = e_minus(m, u, x, z);
    const double ep = e_plus(m, u, x, z);
    const double mu = 1.0 / std::sqrt(2.0 * std::numbers::pi * u);
    if (z <= 0.0) {
        return mu / std::sqrt(m.a1) * (em - m.beta * ep);
    }
    return mu / std::sqrt(m.a2) * (em + m.beta * ep);
}

double t_product_integral(double x, double y, double u) {
    require_positive_time(u, "t_product_integral");
    const double d = y - x;
    return std::sqrt(std::numbers::pi * u) * std::exp(-d * d / (4.0 * u));
}

double time_integrated_t(double x, double y, double t) {
    require_positive_time(t, "time_integrated_t");
    // The integral is even in y - x; the erfc form is only valid for a nonnegative argument.
    const double d = std::abs(y - x);
    const double st = std::sqrt(t);
    return st / std::sqrt(std::numbers::pi) * std::exp(-d * d / (4.0 * t)) -
           0.5 * d * std::erfc(d / (2.0 * st));
}

double erfc(double x) { return std::erfc(x); }

GaussianBound gaussian_bound_fit(const Medium& m, std::span<const double> t_grid,
                                 std::span<const double> xy_grid,
                                 std::span<const double> c2_sweep) {
    if (t_grid.empty() || xy_grid.empty()) {
        throw ValidationError("grid", "t and xy grids must be nonempty");
    }
    std::vector<double> sweep(c2_sweep.begin(), c2_sweep.end());
    if (sweep.empty()) {
        const double c2_max = 1.0 / (2.0 * m.max_diffusivity());
        for (int i = 8; i >= 1; --i) sweep.push_back(c2_max * i / 8.0);
    }

    GaussianBound best{std::numeric_limits<double>::infinity(), 0.0};
    for (double c2 : sweep) {
        double c1 = 0.0;
        for (double t : t_grid) {
            require_positive_time(t, "gaussian_bound_fit");
            const double norm = std::sqrt(2.0 * std::numbers::pi * t);
            for (double x : xy_grid) {
                for (double y : xy_grid) {
                    const double d = x - y;
                    c1 = std::max(c1, green_fn(m, t, x, y) * norm * std::exp(c2 * d * d / t));
                }
            }
        }
        if (!std::isfinite(best.c1)) {
            best = {c1, c2};
            continue;
        }
        const bool tie = std::abs(c1 - best.c1) <= 1e-12 * std::max(c1, best.c1);
        if (tie) {
            if (c2 > best.c2) best = {std::min(c1, best.c1), c2};
        } else if (c1 < best.c1) {
            best = {c1, c2};
        }
    }
    return best;
}

std::string PiecewiseKernel::id() const {
    // Hex floats keep the identifier exact.
    char buf[160];
    std::snprintf(buf, sizeof buf, "piecewise(%a,%a,%a,%a)", medium_.a1, medium_.a2, medium_.rho1,
                  medium_.rho2);
    return buf;
}

}  // namespace hetheat
