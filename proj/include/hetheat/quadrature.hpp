#pragma once

#include <functional>
#include <span>

namespace hetheat {

struct QuadratureSpec {
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int max_subdivisions = 200;
    /// Integrate covariance time integrals in v = sqrt(u), which removes the u^{-1/2} singularity.
    bool time_substitution = true;
    /// Use the closed-form z integral of the piecewise kernel when all points are >= 0.
    bool semi_analytic = true;

    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
    bool converged = false;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over [a, b].
///
/// `breaks` are interior points where the integrand may not be smooth; the initial
/// partition is split there. Bisects the interval with the largest error estimate until
/// error <= max(abs_tol, rel_tol * |value|) or max_subdivisions is reached. Never throws on
/// non-convergence; inspect `converged`.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    const QuadratureSpec& spec, std::span<const double> breaks = {});

/// As integrate_adaptive, but throws QuadratureError (tagged with `op`) when not converged.
double integrate_or_throw(const std::function<double(double)>& f, double a, double b,
                          const QuadratureSpec& spec, const char* op,
                          std::span<const double> breaks = {});

}  // namespace hetheat
