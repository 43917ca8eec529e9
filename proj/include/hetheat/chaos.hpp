#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetheat/covariance.hpp"

namespace hetheat {

/// Hermite polynomial with the 1/q! normalisation: H_q(x) = ((-1)^q / q!) e^{x^2/2} d^q/dx^q e^{-x^2/2},
/// so H_2(x) = (x^2 - 1)/2. Valid for 0 <= q <= 20.
double hermite(int q, double x);

struct VsqMoments {
    double e_vsq = 0.0;  ///< E[V~_N^2] = (T1 + T2) / 2N
    double t1 = 0.0;     ///< 2N
    double t2 = 0.0;     ///< 2 sum_{j != k} R_jk^2
};

/// The functions below take the increment correlation matrix R (unit diagonal, symmetric) or a
/// Gram matrix, which is normalised first.
VsqMoments expected_vsq(const Eigen::MatrixXd& r);
VsqMoments expected_vsq(const IncrementGram& gram);

/// ||g_N (x)_1 g_N||^2 = tr(R^4) / (4 sigma_N^4 N^2) with sigma_N^2 = E[V~_N^2].
double contraction_norm_sq(const Eigen::MatrixXd& r);
double contraction_norm_sq(const IncrementGram& gram);

/// Var(||D V~_N||^2) = (8/N^2) sum_{j,k,l,m} R_jk R_kl R_lm R_mj = 8 tr(R^4) / N^2, split by the largest
/// number of coinciding indices in (j,k,l,m): d4 all four equal, d3 exactly three equal,
/// d2 at most two equal (one or two pairs), d1 all distinct.
struct MalliavinVariance {
    double total = 0.0;
    double d4 = 0.0;
    double d3 = 0.0;
    double d2 = 0.0;
    double d1 = 0.0;
};

MalliavinVariance malliavin_variance(const Eigen::MatrixXd& r);
MalliavinVariance malliavin_variance(const IncrementGram& gram);

/// sqrt(Var ||D V~_N||^2) + sqrt(max(0, E||D V~_N||^2 - 2)), with E||D V~_N||^2 = 2 E[V~_N^2].
/// The bound's multiplicative constant is not included.
double berry_esseen_value(const Eigen::MatrixXd& r);
double berry_esseen_value(const IncrementGram& gram);

struct ChaosDiag {
    int n = 0;
    double e_vsq = 0.0;
    double t1 = 0.0;          ///< T1 / 2N, identically 1
    double t2_over_2n = 0.0;
    double d_var = 0.0;
    double d4 = 0.0, d3 = 0.0, d2 = 0.0, d1 = 0.0;
    double contraction_sq = 0.0;
    double be_bound = 0.0;
};

ChaosDiag chaos_diagnostics(const IncrementGram& gram);

void write_chaos_csv(std::ostream& out, const std::vector<ChaosDiag>& rows, std::uint64_t seed,
                     const std::string& config_hash);

/// Hypotheses of the ASCLT criterion, evaluated on the dyadic ladder l = 2^k, k = 0..K.
/// All Gram matrices come from aggregating the finest one, so cross-grid inner products are exact.
struct AscltHypotheses {
    std::vector<int> levels;                  ///< l = 2^k
    std::vector<double> contraction;          ///< ||g_l (x)_1 g_l||^2
    std::vector<double> l_times_contraction;  ///< should stay bounded
    /// sum over dyadic N <= 2^k of (1/(N log^2 N)) sum over dyadic l <= N of contraction_l / l.
    std::vector<double> cond3_partial;
    /// sum over dyadic N <= 2^k of (1/(N log^3 N)) sum over dyadic i, j <= N of |E G_i G_j| / (i j).
    std::vector<double> cond4_partial;
    /// E[G_i G_j] = 2 <g_i, g_j> for the dyadic i = 2^a, j = 2^b.
    Eigen::MatrixXd cross;
};

AscltHypotheses asclt_hypotheses(const IncrementGram& finest);

}  // namespace hetheat
