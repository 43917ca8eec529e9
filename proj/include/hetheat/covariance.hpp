#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetheat/kernel.hpp"
#include "hetheat/quadrature.hpp"

namespace hetheat {

/// E[u(t,x) u(t,y)] = int_0^t int G(u,x,z) G(u,y,z) dz du.
double cov_field(const KernelFn& k, double t, double x, double y, const QuadratureSpec& q = {});

/// <1_[x1,x2], 1_[y1,y2]>_H, i.e. E[(u(t,x2)-u(t,x1)) (u(t,y2)-u(t,y1))].
///
/// Integrated as one combination rather than four covariances, so the tolerance applies to the
/// (small) result and not to the O(1) covariances it is a difference of.
double increment_inner(const KernelFn& k, double t, double x1, double x2, double y1, double y2,
                       const QuadratureSpec& q = {});

/// E[(u(t,y) - u(t,x))^2].
double increment_variance(const KernelFn& k, double t, double x, double y, const QuadratureSpec& q = {});

/// int_0^t int D_h G(t-s,x,z) D_h G(t-s,y,z) dz ds with D_h G(.,x,.) = G(.,x+h,.) - G(.,x,.).
double cross_increment(const KernelFn& k, double t, double x, double y, double h,
                       const QuadratureSpec& q = {});

/// Same quantities, always through nested 2-D adaptive quadrature of the kernel. Independent of
/// the closed-form z integral; used as a cross-check and for kernels without one.
double cov_field_generic(const KernelFn& k, double t, double x, double y, const QuadratureSpec& q = {});
double increment_inner_generic(const KernelFn& k, double t, double x1, double x2, double y1, double y2,
                               const QuadratureSpec& q = {});

/// Increment Gram matrix on the uniform grid x_i = i/N of [0, 1].
struct IncrementGram {
    double t = 0.0;
    int grid_n = 0;
    Eigen::MatrixXd entries;
    std::string kernel_id;

    Eigen::VectorXd variances() const { return entries.diagonal(); }
    /// R_jk = g_jk / (sigma_j sigma_k). Throws InvalidGramError on a nonpositive variance.
    Eigen::MatrixXd correlation() const;
};

class GramCache;

/// Builds the Gram matrix, in parallel over rows. Looks up and fills `cache` when given.
/// A quadrature failure aborts with the failing (j,k) in the error's op.
IncrementGram build_gram(const KernelFn& k, double t, int n, const QuadratureSpec& q = {},
                         GramCache* cache = nullptr);

/// Single-threaded reference for build_gram; produces identical bits.
IncrementGram build_gram_serial(const KernelFn& k, double t, int n, const QuadratureSpec& q = {});

/// Gram of the grid with n / factor cells, obtained by summing factor x factor blocks.
/// Exact for nested grids because the indicator of a coarse cell is the sum of its children.
IncrementGram aggregate_gram(const IncrementGram& fine, int factor);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

/// Disk cache of Gram matrices: <dir>/<hash>.bin holds the raw doubles (column-major),
/// <dir>/<hash>.json the parameters. Writes go through a temporary file and a rename.
class GramCache {
public:
    explicit GramCache(std::filesystem::path dir);

    /// $HETHEAT_CACHE_DIR/gram if set, otherwise <fallback>/gram.
    static std::filesystem::path default_dir(const std::filesystem::path& fallback);

    static std::string key(const std::string& kernel_id, double t, int n, const QuadratureSpec& q);

    std::optional<IncrementGram> load(const std::string& key) const;
    void store(const std::string& key, const IncrementGram& gram, const QuadratureSpec& q) const;

    int hits() const { return hits_; }
    int misses() const { return misses_; }
    void record(bool hit) { (hit ? hits_ : misses_)++; }

    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::atomic<int> hits_{0};
    std::atomic<int> misses_{0};
};

enum class Condition { H1, H2, H3 };

const char* to_string(Condition c);

struct ConditionReport {
    Condition id = Condition::H1;
    /// Fitted C5 (H1: inf of variance/h), C6 (H2: sup of variance/h) or C7 (H3: sup of |cross|/h^2).
    double constant = 0.0;
    /// Extreme ratio at each h, same order as h_grid.
    std::vector<double> ratio_per_h;
    /// Least-squares slope of log(ratio_per_h) against log h over the four smallest h.
    double ratio_slope = 0.0;
    /// Ratio at the smallest h, the one most likely to degenerate.
    double worst_ratio = 0.0;
    bool pass = false;
    std::vector<double> h_grid;
};

/// The dyadic h grid {2^-3, ..., 2^-11}.
std::vector<double> default_h_grid();

/// Sweeps the condition over base points x in {1/16, 3/16, ..., 13/16}. For H3 every distinct pair
/// of base points is used, plus the neighbouring pairs (x, x+h) and (x, x+2h).
///
/// Passes when the fitted constant is finite and positive and the ratio does not drift towards
/// degeneracy as h -> 0: for H1 the log-log slope of the per-h minimum is <= 0.1, for H2 and H3 the
/// slope of the per-h maximum is >= -0.1.
ConditionReport verify_condition(const KernelFn& k, double t, Condition id,
                                 std::span<const double> h_grid, const QuadratureSpec& q = {});

struct SupVarianceReport {
    double sup = 0.0;
    /// max over the grid of E[u(t,x)^2] / sqrt(t); sup <= c4 sqrt(T) for T >= all grid times.
    double c4 = 0.0;
    bool monotone_in_t = true;
    /// values[i][j] = E[u(t_i, x_j)^2].
    std::vector<std::vector<double>> values;
};

SupVarianceReport sup_variance_check(const KernelFn& k, std::span<const double> t_grid,
                                     std::span<const double> x_grid, const QuadratureSpec& q = {});

/// int_1^inf (1 - cos z) / z^2 dz = 1 - cos 1 + pi/2 - Si(1).
double one_minus_cos_tail();

/// Lower-bound constant c of the E^- part of the increment variance:
/// (2 / (sqrt(a2) pi)) (1 - exp(-t a2 / A^2)) int_1^inf (1 - cos z)/z^2 dz, for |y - x| <= A.
double lemma_lower_constant(const Medium& m, double t, double a_bound);

}  // namespace hetheat
