#pragma once

#include <span>
#include <string>
#include <vector>

namespace hetheat {

/// Two-phase medium: diffusivity a1 and density rho1 on z <= 0, a2 and rho2 on z > 0.
struct Medium {
    double a1 = 1.0;
    double a2 = 1.0;
    double rho1 = 1.0;
    double rho2 = 1.0;
    /// Skewness of the interface, (rho2 sqrt(a2) - rho1 sqrt(a1)) / (rho2 sqrt(a2) + rho1 sqrt(a1)).
    double beta = 0.0;
    /// max(1, sqrt(a1)/sqrt(a2)) <= rho2/rho1. Sufficient for the quadratic-variation limit theorems.
    bool satisfies_crhoa = false;

    double max_diffusivity() const { return a1 > a2 ? a1 : a2; }
};

/// Validates and builds a medium. Throws ValidationError naming the bad field.
Medium make_medium(double a1, double a2, double rho1, double rho2);

/// Piecewise-linear coordinate map: z/sqrt(a1) for z <= 0, z/sqrt(a2) for z > 0.
double f_map(const Medium& m, double z);

/// Heat kernel of (1/2) d^2/dx^2: (2 pi t)^{-1/2} exp(-x^2 / 2t).
double heat_kernel(double t, double x);

double e_minus(const Medium& m, double u, double x, double z);
double e_plus(const Medium& m, double u, double x, double z);

/// Fundamental solution of the two-phase divergence-form heat operator.
/// The interface point z = 0 belongs to the left branch.
double green_fn(const Medium& m, double u, double x, double z);

/// Closed form of  int exp(-(v-y)^2/2u) exp(-(v-x)^2/2u) dv  =  sqrt(pi u) exp(-(y-x)^2/4u).
double t_product_integral(double x, double y, double u);

/// int_0^t (2 pi u)^{-1} t_product_integral(x, y, u) du
///   = sqrt(t/pi) exp(-d^2/4t) - (d/2) erfc(d / 2 sqrt(t)),  d = |y - x|.
double time_integrated_t(double x, double y, double t);

double erfc(double x);

struct GaussianBound {
    double c1 = 0.0;
    double c2 = 0.0;
};

/// Fits G(t,x,y) <= C1 / sqrt(2 pi t) exp(-C2 (x-y)^2 / t) on the grid t_grid x xy_grid x xy_grid.
/// For every trial C2 the smallest admissible C1 is computed; the pair with the smallest C1 wins,
/// ties going to the largest C2. The default C2 sweep is {1, 7/8, ..., 1/8} / (2 max(a1, a2)).
GaussianBound gaussian_bound_fit(const Medium& m, std::span<const double> t_grid,
                                 std::span<const double> xy_grid,
                                 std::span<const double> c2_sweep = {});

/// Evaluator for a fundamental solution G(u, x, z), u > 0.
///
/// Implementations must be pure: the covariance module calls them concurrently.
class KernelFn {
public:
    virtual ~KernelFn() = default;

    virtual double operator()(double u, double x, double z) const = 0;

    /// Upper bound on the local diffusivity. Mass of G(u, x, .) is taken to lie in
    /// x +- 12 sqrt(u * spread()).
    virtual double spread() const { return 1.0; }

    /// Lower bound on the local diffusivity; sets the narrowest width of G(u, x, .).
    virtual double min_spread() const { return spread(); }

    /// Points in z where G(u, x, .) may fail to be smooth.
    virtual std::vector<double> breakpoints() const { return {}; }

    /// Stable identifier, used in cache keys and reports.
    virtual std::string id() const = 0;
};

class PiecewiseKernel final : public KernelFn {
public:
    explicit PiecewiseKernel(Medium m) : medium_(m) {}

    double operator()(double u, double x, double z) const override { return green_fn(medium_, u, x, z); }
    double spread() const override { return medium_.max_diffusivity(); }
    double min_spread() const override { return medium_.a1 < medium_.a2 ? medium_.a1 : medium_.a2; }
    std::vector<double> breakpoints() const override { return {0.0}; }
    std::string id() const override;

    const Medium& medium() const { return medium_; }

private:
    Medium medium_;
};

/// G == 0. Produces an identically zero field.
class NullKernel final : public KernelFn {
public:
    double operator()(double, double, double) const override { return 0.0; }
    std::string id() const override { return "null"; }
};

}  // namespace hetheat
