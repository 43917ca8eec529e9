#include "hetheat/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hetheat/errors.hpp"
#include "hetheat/rng.hpp"

namespace hetheat {

CholeskyFactor::CholeskyFactor(const IncrementGram& gram) : t_(gram.t) {
    const Eigen::Index n = gram.entries.rows();
    if (n == 0) throw InvalidGramError("sampler", "cholesky", "empty Gram matrix");
    const double scale = gram.entries.trace() / static_cast<double>(n);
    for (double rel : {0.0, 1e-14, 1e-12, 1e-10}) {
        Eigen::MatrixXd a = gram.entries;
        a.diagonal().array() += rel * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() == Eigen::Success) {
            lower_ = llt.matrixL();
            jitter_ = rel * scale;
            return;
        }
    }
    std::ostringstream msg;
    msg << "factorization failed with maximal jitter; smallest eigenvalue " << min_eigenvalue(gram.entries);
    throw NumericError("sampler", "cholesky", msg.str());
}

std::vector<double> CholeskyFactor::draw(std::uint64_t seed, std::uint64_t replica) const {
    const Eigen::Index n = lower_.rows();
    Eigen::VectorXd xi(n);
    NormalStream stream(seed, replica);
    for (Eigen::Index i = 0; i < n; ++i) xi(i) = stream();
    const Eigen::VectorXd y = lower_.triangularView<Eigen::Lower>() * xi;
    return {y.data(), y.data() + n};
}

namespace {

FieldSample make_sample(const CholeskyFactor& factor, std::uint64_t seed, std::uint64_t replica) {
    FieldSample s;
    s.t = factor.t();
    s.grid_n = factor.grid_n();
    s.increments = factor.draw(seed, replica);
    s.seed = seed;
    s.replica_id = replica;
    return s;
}

}  // namespace

std::vector<FieldSample> cholesky_sample(const CholeskyFactor& factor, std::uint64_t seed, int n_replicas,
                                         std::uint64_t first_replica) {
    if (n_replicas < 0) throw ValidationError("n_replicas", "must be >= 0");
    std::vector<FieldSample> out(static_cast<std::size_t>(n_replicas));
#pragma omp parallel for schedule(static)
    for (int r = 0; r < n_replicas; ++r) {
        out[static_cast<std::size_t>(r)] = make_sample(factor, seed, first_replica + static_cast<std::uint64_t>(r));
    }
    return out;
}

std::vector<FieldSample> cholesky_sample(const IncrementGram& gram, std::uint64_t seed, int n_replicas) {
    return cholesky_sample(CholeskyFactor(gram), seed, n_replicas);
}

std::vector<FieldSample> cholesky_sample_serial(const CholeskyFactor& factor, std::uint64_t seed, int n_replicas,
                                                std::uint64_t first_replica) {
    if (n_replicas < 0) throw ValidationError("n_replicas", "must be >= 0");
    std::vector<FieldSample> out;
    out.reserve(static_cast<std::size_t>(n_replicas));
    for (int r = 0; r < n_replicas; ++r) {
        out.push_back(make_sample(factor, seed, first_replica + static_cast<std::uint64_t>(r)));
    }
    return out;
}

DyadicSample dyadic_sample(const CholeskyFactor& factor, int K, std::uint64_t seed, std::uint64_t replica) {
    if (K < 0 || K > 13) throw ValidationError("K", "must lie in [0, 13]");
    if (factor.grid_n() != (1 << K)) throw ValidationError("K", "factor does not belong to the 2^K grid");
    DyadicSample d;
    d.level = K;
    d.seed = seed;
    d.replica_id = replica;
    d.levels.resize(static_cast<std::size_t>(K) + 1);
    d.levels[static_cast<std::size_t>(K)] = factor.draw(seed, replica);
    const auto& fine = d.levels[static_cast<std::size_t>(K)];
    for (int k = 0; k < K; ++k) {
        const std::size_t block = std::size_t{1} << (K - k);
        auto& level = d.levels[static_cast<std::size_t>(k)];
        level.resize(std::size_t{1} << k);
        for (std::size_t j = 0; j < level.size(); ++j) {
            double sum = 0.0;
            for (std::size_t c = 0; c < block; ++c) sum += fine[j * block + c];
            level[j] = sum;
        }
    }
    return d;
}

DyadicSample dyadic_sample(const KernelFn& k, double t, int K, std::uint64_t seed, const QuadratureSpec& q,
                           GramCache* cache) {
    if (K < 0 || K > 13) throw ValidationError("K", "must lie in [0, 13]");
    return dyadic_sample(CholeskyFactor(build_gram(k, t, 1 << K, q, cache)), K, seed);
}

namespace {

// Kernel values times sqrt(cell area) for every retained space-time cell, row-major (cell, point).
struct NoiseTable {
    std::size_t points = 0;
    std::size_t cells = 0;
    std::vector<double> weights;
};

NoiseTable build_noise_table(const KernelFn& k, double t, std::span<const double> x_grid, const NoiseGridSpec& spec) {
    if (!(t > 0.0)) throw DomainError("noise_grid_oracle: t must be > 0");
    if (!(spec.ds > 0.0)) throw ValidationError("ds", "must be > 0");
    if (!(spec.dy > 0.0)) throw ValidationError("dy", "must be > 0");
    if (!(spec.half_width > 0.0)) throw ValidationError("L", "must be > 0");
    if (x_grid.empty()) throw ValidationError("x_grid", "must be nonempty");

    const double lo = *std::min_element(x_grid.begin(), x_grid.end());
    const double hi = *std::max_element(x_grid.begin(), x_grid.end());
    const int n_time = static_cast<int>(std::ceil(t / spec.ds - 1e-9));
    const double dr = std::sqrt(t) / n_time;

    NoiseTable table;
    table.points = x_grid.size();
    for (int i = 0; i < n_time; ++i) {
        const double r0 = i * dr;
        const double r1 = (i + 1) * dr;
        const double rm = 0.5 * (r0 + r1);
        const double u = rm * rm;
        const double du = r1 * r1 - r0 * r0;
        const double width = std::min(spec.half_width, 12.0 * std::sqrt(u * k.spread()));
        const double step = std::min(spec.dy, 0.25 * std::sqrt(u * k.min_spread()));

        // Union of the windows x_p +- width, walked on a grid anchored at lo - width.
        const double start = lo - width;
        const auto n_space = static_cast<long>(std::ceil((hi - lo + 2.0 * width) / step));
        for (long j = 0; j < n_space; ++j) {
            const double y = start + (static_cast<double>(j) + 0.5) * step;
            bool near = false;
            for (double x : x_grid) near = near || std::abs(y - x) <= width;
            if (!near) continue;
            const double w = std::sqrt(du * step);
            for (double x : x_grid) table.weights.push_back(k(u, x, y) * w);
            ++table.cells;
        }
    }
    return table;
}

void run_replica(const NoiseTable& table, std::uint64_t seed, std::uint64_t replica, double* out) {
    std::fill(out, out + table.points, 0.0);
    NormalStream stream(seed, replica);
    const double* w = table.weights.data();
    for (std::size_t c = 0; c < table.cells; ++c, w += table.points) {
        const double xi = stream();
        for (std::size_t p = 0; p < table.points; ++p) out[p] += w[p] * xi;
    }
}

}  // namespace

Eigen::MatrixXd noise_grid_oracle(const KernelFn& k, double t, std::span<const double> x_grid,
                                  const NoiseGridSpec& spec, std::uint64_t seed, int n_replicas) {
    if (n_replicas < 1) throw ValidationError("n_replicas", "must be >= 1");
    const NoiseTable table = build_noise_table(k, t, x_grid, spec);
    // Row-major so that each replica writes one contiguous row.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> values(n_replicas,
                                                                                 static_cast<Eigen::Index>(table.points));
#pragma omp parallel for schedule(static)
    for (int r = 0; r < n_replicas; ++r) {
        run_replica(table, seed, static_cast<std::uint64_t>(r), values.row(r).data());
    }
    return values;
}

FieldSample noise_grid_sample(const KernelFn& k, double t, std::span<const double> x_grid,
                              const NoiseGridSpec& spec, std::uint64_t seed, std::uint64_t replica) {
    const NoiseTable table = build_noise_table(k, t, x_grid, spec);
    std::vector<double> u(table.points);
    run_replica(table, seed, replica, u.data());
    FieldSample s;
    s.t = t;
    s.grid_n = static_cast<int>(u.size()) - 1;
    s.seed = seed;
    s.replica_id = replica;
    for (std::size_t p = 0; p + 1 < u.size(); ++p) s.increments.push_back(u[p + 1] - u[p]);
    return s;
}

void write_samples_csv(std::ostream& out, std::span<const FieldSample> samples, const std::string& config_hash) {
    const int n = samples.empty() ? 0 : samples.front().grid_n;
    out << "seed,replica,config_hash";
    for (int j = 0; j < n; ++j) out << ",d" << j;
    out << '\n';
    char buf[32];
    for (const auto& s : samples) {
        out << s.seed << ',' << s.replica_id << ',' << config_hash;
        for (double v : s.increments) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

}  // namespace hetheat
