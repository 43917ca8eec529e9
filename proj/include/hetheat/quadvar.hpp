#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetheat/covariance.hpp"
#include "hetheat/numerics.hpp"
#include "hetheat/sampler.hpp"

namespace hetheat {

struct QuadVarStat {
    int n = 0;
    double v = 0.0;        ///< V_N = sum_j (D_j^2 / sigma_j^2 - 1)
    double v_tilde = 0.0;  ///< V_N / sqrt(2N)
};

QuadVarStat v_stat(std::span<const double> increments, const Eigen::VectorXd& variances);
QuadVarStat v_stat(const FieldSample& sample, const IncrementGram& gram);

/// sup_x |F_M(x) - Phi(x)| evaluated on both sides of every jump of the empirical CDF.
double ks_distance(std::span<const double> samples);

/// E phi(Z), Z ~ N(0,1), by adaptive quadrature against the normal density.
double normal_expectation(const std::function<double(double)>& phi, double rel_tol = 1e-12);

struct CltRow {
    int n = 0;
    int m = 0;
    double ks = 0.0;
    double mean = 0.0;
    double variance = 0.0;  ///< replica variance of V~_N
    double e_vsq = 0.0;     ///< exact E[V~_N^2] from the Gram
    double be_value = 0.0;  ///< constant-free Berry-Esseen bound value
    std::uint64_t seed = 0; ///< per-N stream key
};

struct CltReport {
    std::vector<CltRow> rows;
    double ks_slope = 0.0;  ///< slope of log KS against log N
    double be_slope = 0.0;
    /// KS distance of M exact N(0,1) draws under the first row's stream key: the Monte Carlo floor.
    double ks_null = 0.0;
};

/// Per-N stream key derived from the run seed, so every N sees an independent stream.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t n);

CltReport clt_experiment(const KernelFn& k, double t, std::span<const int> n_list, int m_replicas,
                         std::uint64_t seed, const QuadratureSpec& q = {}, GramCache* cache = nullptr);

/// KS distance of m exact standard normal draws from NormalStream(seed, 0).
double ks_null_floor(int m, std::uint64_t seed);

struct TestFunction {
    std::string name;
    std::function<double(double)> phi;
};

/// cos, sin, exp(-x^2/2) and the clamped absolute value min(|x|, 1).
std::vector<TestFunction> shipped_test_functions();

struct AscltPath {
    std::uint64_t replica = 0;
    std::vector<double> v_tilde;                ///< V~_{2^k}, k = 1..K
    std::vector<std::vector<double>> averages;  ///< averages[f][k-1] = (1/k) sum_{i<=k} phi_f(V~_{2^i})
};

/// Lacunary ASCLT check: averages over the dyadic subsequence N = 2^k with uniform weights,
/// the log-density counterpart of the harmonic weights 1/N, rather than the full average over N.
struct AscltReport {
    int K = 0;
    std::vector<std::string> names;
    std::vector<double> targets;  ///< E phi(Z)
    std::vector<AscltPath> paths;
};

AscltReport asclt_experiment(const KernelFn& k, double t, int K, const std::vector<TestFunction>& phis,
                             int n_paths, std::uint64_t seed, const QuadratureSpec& q = {},
                             GramCache* cache = nullptr);

/// Variances of every level 0..K from the 2^K Gram, by summing diagonal blocks.
std::vector<Eigen::VectorXd> dyadic_variances(const IncrementGram& finest);

/// Slope of log variance(h) against log h over h_levels.
double variogram_slope(const std::function<double(double)>& variance, std::span<const double> h_levels);

/// Spatial Hoelder estimate: half the variogram slope of E(u(t,x0+h) - u(t,x0))^2 at x0 = 1/2.
double holder_estimate(const KernelFn& k, double t, std::span<const double> h_levels, const QuadratureSpec& q = {});
double holder_estimate(const std::function<double(double)>& variance, std::span<const double> h_levels);

void write_clt_csv(std::ostream& out, const CltReport& report, std::uint64_t seed, const std::string& config_hash);
void write_asclt_csv(std::ostream& out, const AscltReport& report, std::uint64_t seed, const std::string& config_hash);

}  // namespace hetheat
