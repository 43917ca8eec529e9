#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetheat/covariance.hpp"
#include "hetheat/kernel.hpp"

namespace hetheat {

/// Increments u(t, x_{j+1}) - u(t, x_j) of one replica on the grid x_j = j/N.
struct FieldSample {
    double t = 0.0;
    int grid_n = 0;
    std::vector<double> increments;
    std::uint64_t seed = 0;
    std::uint64_t replica_id = 0;
};

/// Lower Cholesky factor of a Gram matrix, with diagonal jitter lambda I added only when needed.
/// lambda steps through {0, 1e-14, 1e-12, 1e-10} * trace / N.
class CholeskyFactor {
public:
    explicit CholeskyFactor(const IncrementGram& gram);

    const Eigen::MatrixXd& lower() const { return lower_; }
    double jitter() const { return jitter_; }
    double t() const { return t_; }
    int grid_n() const { return static_cast<int>(lower_.rows()); }

    /// L xi with xi the first N draws of NormalStream(seed, replica).
    std::vector<double> draw(std::uint64_t seed, std::uint64_t replica) const;

private:
    Eigen::MatrixXd lower_;
    double jitter_ = 0.0;
    double t_ = 0.0;
};

/// Replicas first_replica .. first_replica + n_replicas - 1, generated in parallel.
std::vector<FieldSample> cholesky_sample(const CholeskyFactor& factor, std::uint64_t seed, int n_replicas,
                                         std::uint64_t first_replica = 0);
std::vector<FieldSample> cholesky_sample(const IncrementGram& gram, std::uint64_t seed, int n_replicas);

/// Single-threaded reference; bit-identical to cholesky_sample.
std::vector<FieldSample> cholesky_sample_serial(const CholeskyFactor& factor, std::uint64_t seed, int n_replicas,
                                                std::uint64_t first_replica = 0);

/// Increments on the nested grids 2^0, ..., 2^K cells of [0, 1].
/// levels[k] has 2^k entries; levels[K] is the sampled finest level and every coarser increment is
/// the left-to-right sum of its 2^{K-k} finest descendants.
struct DyadicSample {
    int level = 0;
    std::vector<std::vector<double>> levels;
    std::uint64_t seed = 0;
    std::uint64_t replica_id = 0;
};

/// `factor` must belong to the Gram on 2^K cells.
DyadicSample dyadic_sample(const CholeskyFactor& factor, int K, std::uint64_t seed, std::uint64_t replica = 0);
DyadicSample dyadic_sample(const KernelFn& k, double t, int K, std::uint64_t seed, const QuadratureSpec& q = {},
                           GramCache* cache = nullptr);

/// Direct discretisation of the stochastic convolution u(t,x) = int int G(t-s,x,y) W(ds,dy).
///
/// Time cells are uniform in r = sqrt(t - s) (there are ceil(t/ds) of them), which puts more cells
/// where G is sharply peaked and turns the u^{-1/2} singularity of the variance into a smooth
/// integrand. In every time cell the spatial step is min(dy, sqrt(u * min_spread) / 4) so the
/// kernel is always resolved, and space is truncated to [min x - L, max x + L] intersected with
/// x +- 12 sqrt(u * spread). G is evaluated at the cell midpoint. Uses no covariance quadrature.
struct NoiseGridSpec {
    double ds = 1e-3;
    double dy = 0.02;
    double half_width = 6.0;
};

/// values(r, p) = u(t, x_grid[p]) for replica r.
Eigen::MatrixXd noise_grid_oracle(const KernelFn& k, double t, std::span<const double> x_grid,
                                  const NoiseGridSpec& spec, std::uint64_t seed, int n_replicas);

/// Single replica as a FieldSample of the increments between consecutive x_grid points.
FieldSample noise_grid_sample(const KernelFn& k, double t, std::span<const double> x_grid,
                              const NoiseGridSpec& spec, std::uint64_t seed, std::uint64_t replica);

/// One row per replica: seed, replica, config_hash, d0, ..., d{N-1}.
void write_samples_csv(std::ostream& out, std::span<const FieldSample> samples, const std::string& config_hash);

}  // namespace hetheat
