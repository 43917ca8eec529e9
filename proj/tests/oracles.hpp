#pragma once

// Reference computations used only by the tests. Everything here is deliberately written
// without the library's quadrature or trace identities so that agreement means something.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using boost::math::quadrature::gauss_kronrod;

// Integral over [a, b] (either end may be infinite) split at the given interior points.
template <class F>
double integrate(F f, double a, double b, std::vector<double> cuts = {}, double tol = 1e-13) {
    std::vector<double> pts{a};
    std::sort(cuts.begin(), cuts.end());
    for (double c : cuts) {
        if (c > pts.back() && c < b) pts.push_back(c);
    }
    pts.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        total += gauss_kronrod<double, 61>::integrate(f, pts[i], pts[i + 1], 15, tol);
    }
    return total;
}

// Two-phase kernel written directly from its definition; precise() works in 50-digit arithmetic.
struct TwoPhase {
    double a1, a2, rho1, rho2;

    double beta() const {
        const double p = rho2 * std::sqrt(a2), q = rho1 * std::sqrt(a1);
        return (p - q) / (p + q);
    }

    double operator()(double u, double x, double z) const {
        const double fx = x <= 0 ? x / std::sqrt(a1) : x / std::sqrt(a2);
        const double fz = z <= 0 ? z / std::sqrt(a1) : z / std::sqrt(a2);
        const double em = std::exp(-(fz - fx) * (fz - fx) / (2 * u));
        const double s = std::abs(fz) + std::abs(fx);
        const double ep = std::exp(-s * s / (2 * u));
        const double m = 1 / std::sqrt(2 * std::numbers::pi * u);
        return z <= 0 ? m / std::sqrt(a1) * (em - beta() * ep) : m / std::sqrt(a2) * (em + beta() * ep);
    }

    double precise(double u, double x, double z) const {
        using R = boost::multiprecision::cpp_bin_float_50;
        const R fx = x <= 0 ? R(x) / sqrt(R(a1)) : R(x) / sqrt(R(a2));
        const R fz = z <= 0 ? R(z) / sqrt(R(a1)) : R(z) / sqrt(R(a2));
        const R uu(u);
        const R em = exp(-(fz - fx) * (fz - fx) / (2 * uu));
        const R s = abs(fz) + abs(fx);
        const R ep = exp(-s * s / (2 * uu));
        const R m = 1 / sqrt(2 * boost::math::constants::pi<R>() * uu);
        const R b(beta());
        const R g = z <= 0 ? m / sqrt(R(a1)) * (em - b * ep) : m / sqrt(R(a2)) * (em + b * ep);
        return static_cast<double>(g);
    }
};

// E[u(t,x)u(t,y)] = int_0^t int G(u,x,z) G(u,y,z) dz du, with u = v^2 to tame the endpoint.
template <class K>
double cov_direct(const K& g, double t, double x, double y, double spread, double tol = 1e-11) {
    auto inner = [&](double v) {
        if (v <= 0.0) return 0.0;
        const double u = v * v;
        const double w = 14.0 * std::sqrt(u * spread);
        auto f = [&](double z) { return g(u, x, z) * g(u, y, z); };
        return 2.0 * v * integrate(f, std::min(x, y) - w, std::max(x, y) + w, {0.0, x, y}, tol);
    };
    return integrate(inner, 0.0, std::sqrt(t), {}, tol);
}

// Increment inner product from four direct covariances.
template <class K>
double increment_inner_direct(const K& g, double t, double x1, double x2, double y1, double y2, double spread) {
    return cov_direct(g, t, x2, y2, spread) - cov_direct(g, t, x2, y1, spread) -
           cov_direct(g, t, x1, y2, spread) + cov_direct(g, t, x1, y1, spread);
}

// H_q with the 1/q! normalization through repeated symbolic differentiation of exp(-x^2/2):
// d^q/dx^q exp(-x^2/2) = p_q(x) exp(-x^2/2) with p_{q+1} = p_q' - x p_q, integer coefficients.
inline double hermite_symbolic(int q, double x) {
    std::vector<long long> p{1};
    for (int k = 0; k < q; ++k) {
        std::vector<long long> next(p.size() + 1, 0);
        for (std::size_t i = 1; i < p.size(); ++i) next[i - 1] += static_cast<long long>(i) * p[i];
        for (std::size_t i = 0; i < p.size(); ++i) next[i + 1] -= p[i];
        p = std::move(next);
    }
    using R = boost::multiprecision::cpp_bin_float_50;
    R value = 0, xp = 1;
    for (long long c : p) {
        value += R(c) * xp;
        xp *= x;
    }
    R fact = 1;
    for (int k = 2; k <= q; ++k) fact *= k;
    const R sign = q % 2 == 0 ? 1 : -1;
    return static_cast<double>(sign * value / fact);
}

// Sum over all index quadruples, split by how many indices coincide.
struct QuadrupleSums {
    double all = 0.0;
    double four_equal = 0.0;
    double three_equal = 0.0;
    double pairs = 0.0;  // patterns 2+2 and 2+1+1
    double distinct = 0.0;
};

// sum_{j,k,m,l} R_jk R_ml R_jm R_kl, the quantity behind the Malliavin variance.
inline QuadrupleSums malliavin_quadruple(const Eigen::MatrixXd& r) {
    const auto n = r.rows();
    QuadrupleSums s;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index m = 0; m < n; ++m)
                for (Eigen::Index l = 0; l < n; ++l) {
                    const double v = r(j, k) * r(m, l) * r(j, m) * r(k, l);
                    s.all += v;
                    Eigen::Index idx[4] = {j, k, m, l};
                    std::sort(idx, idx + 4);
                    int distinct = 1, longest = 1, run = 1;
                    for (int i = 1; i < 4; ++i) {
                        if (idx[i] == idx[i - 1]) {
                            longest = std::max(longest, ++run);
                        } else {
                            ++distinct;
                            run = 1;
                        }
                    }
                    if (distinct == 1) s.four_equal += v;
                    else if (longest == 3) s.three_equal += v;
                    else if (distinct == 4) s.distinct += v;
                    else s.pairs += v;
                }
    return s;
}

// ||f (x)_1 f||^2 for f = c sum_j e_j (x) e_j, expanded as a quadruple sum over the contraction.
inline double contraction_quadruple(const Eigen::MatrixXd& r) {
    const auto n = r.rows();
    double sigma2 = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) sigma2 += r(j, k) * r(j, k);
    sigma2 /= static_cast<double>(n);
    double s = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index m = 0; m < n; ++m)
                for (Eigen::Index p = 0; p < n; ++p) s += r(j, k) * r(m, p) * r(j, m) * r(k, p);
    const double nn = static_cast<double>(n);
    return s / (4.0 * sigma2 * sigma2 * nn * nn);
}

// Random correlation matrix from a Gram of random vectors.
template <class Rng>
Eigen::MatrixXd random_correlation(int n, Rng& rng) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd a(n, n + 2);
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) a(i, j) = z(rng);
    Eigen::MatrixXd g = a * a.transpose();
    const Eigen::VectorXd d = g.diagonal().cwiseSqrt().cwiseInverse();
    return d.asDiagonal() * g * d.asDiagonal();
}

inline double sample_variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size() - 1);
}

}  // namespace oracle
