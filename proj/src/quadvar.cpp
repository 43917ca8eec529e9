#include "hetheat/quadvar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "hetheat/chaos.hpp"
#include "hetheat/errors.hpp"
#include "hetheat/rng.hpp"

namespace hetheat {

QuadVarStat v_stat(std::span<const double> increments, const Eigen::VectorXd& variances) {
    if (static_cast<Eigen::Index>(increments.size()) != variances.size() || increments.empty()) {
        throw ValidationError("sample", "increment count does not match the Gram size");
    }
    double v = 0.0;
    for (std::size_t j = 0; j < increments.size(); ++j) {
        const double var = variances(static_cast<Eigen::Index>(j));
        if (!(var > 0.0)) {
            throw InvalidGramError("quadvar", "v_stat", "nonpositive variance at index " + std::to_string(j));
        }
        v += increments[j] * increments[j] / var - 1.0;
    }
    QuadVarStat s;
    s.n = static_cast<int>(increments.size());
    s.v = v;
    s.v_tilde = v / std::sqrt(2.0 * s.n);
    return s;
}

QuadVarStat v_stat(const FieldSample& sample, const IncrementGram& gram) {
    if (sample.grid_n != gram.grid_n || sample.t != gram.t) {
        throw ValidationError("sample", "sample and Gram do not share (t, N)");
    }
    return v_stat(sample.increments, gram.variances());
}

double ks_distance(std::span<const double> samples) {
    if (samples.empty()) throw ValidationError("samples", "KS distance needs at least one sample");
    std::vector<double> x(samples.begin(), samples.end());
    std::sort(x.begin(), x.end());
    const double m = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = normal_cdf(x[i]);
        d = std::max({d, (i + 1) / m - f, f - i / m});
    }
    return d;
}

double normal_expectation(const std::function<double(double)>& phi, double rel_tol) {
    QuadratureSpec q;
    q.rel_tol = rel_tol;
    q.abs_tol = 1e-15;
    q.max_subdivisions = 2000;
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const double breaks[] = {-1.0, 0.0, 1.0};
    return integrate_or_throw([&](double x) { return phi(x) * norm * std::exp(-0.5 * x * x); }, -40.0, 40.0, q,
                              "normal_expectation", breaks);
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t n) { return splitmix64(seed + n); }

double ks_null_floor(int m, std::uint64_t seed) {
    if (m < 1) throw ValidationError("m", "must be >= 1");
    std::vector<double> z(static_cast<std::size_t>(m));
    NormalStream stream(seed, 0);
    for (double& v : z) v = stream();
    return ks_distance(z);
}

CltReport clt_experiment(const KernelFn& k, double t, std::span<const int> n_list, int m_replicas,
                         std::uint64_t seed, const QuadratureSpec& q, GramCache* cache) {
    if (n_list.empty()) throw ValidationError("n_list", "must be nonempty");
    if (!std::is_sorted(n_list.begin(), n_list.end()) ||
        std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end()) {
        throw ValidationError("n_list", "must be strictly increasing");
    }
    if (m_replicas < 1000) throw ValidationError("m", "need at least 1000 replicas");

    CltReport report;
    for (int n : n_list) {
        const IncrementGram gram = build_gram(k, t, n, q, cache);
        const CholeskyFactor factor(gram);
        const Eigen::VectorXd var = gram.variances();
        const std::uint64_t key = sub_seed(seed, static_cast<std::uint64_t>(n));

        std::vector<double> v(static_cast<std::size_t>(m_replicas));
#pragma omp parallel for schedule(static)
        for (int r = 0; r < m_replicas; ++r) {
            v[static_cast<std::size_t>(r)] = v_stat(factor.draw(key, static_cast<std::uint64_t>(r)), var).v_tilde;
        }

        CltRow row;
        row.n = n;
        row.m = m_replicas;
        row.seed = key;
        row.ks = ks_distance(v);
        double sum = 0.0;
        for (double x : v) sum += x;
        row.mean = sum / m_replicas;
        double ss = 0.0;
        for (double x : v) ss += (x - row.mean) * (x - row.mean);
        row.variance = ss / (m_replicas - 1);
        const Eigen::MatrixXd r = gram.correlation();
        row.e_vsq = expected_vsq(r).e_vsq;
        row.be_value = berry_esseen_value(r);
        report.rows.push_back(row);
    }

    if (report.rows.size() >= 2) {
        std::vector<double> ln, lks, lbe;
        for (const auto& row : report.rows) {
            ln.push_back(std::log(row.n));
            lks.push_back(std::log(row.ks));
            lbe.push_back(std::log(row.be_value));
        }
        report.ks_slope = ls_slope(ln, lks);
        report.be_slope = ls_slope(ln, lbe);
    }
    report.ks_null = ks_null_floor(m_replicas, report.rows.front().seed ^ 0x6e756c6cull);
    return report;
}

std::vector<TestFunction> shipped_test_functions() {
    return {
        {"cos", [](double x) { return std::cos(x); }},
        {"sin", [](double x) { return std::sin(x); }},
        {"gauss", [](double x) { return std::exp(-0.5 * x * x); }},
        {"clamped_abs", [](double x) { return std::min(std::abs(x), 1.0); }},
    };
}

std::vector<Eigen::VectorXd> dyadic_variances(const IncrementGram& finest) {
    const int n = finest.grid_n;
    if (n < 1 || (n & (n - 1)) != 0) throw ValidationError("n", "finest grid must have 2^K cells");
    int K = 0;
    while ((1 << K) < n) ++K;
    std::vector<Eigen::VectorXd> out(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        const int block = n >> k;
        Eigen::VectorXd var(1 << k);
        for (int j = 0; j < (1 << k); ++j) {
            var(j) = finest.entries.block(j * block, j * block, block, block).sum();
        }
        out[static_cast<std::size_t>(k)] = var;
    }
    return out;
}

AscltReport asclt_experiment(const KernelFn& k, double t, int K, const std::vector<TestFunction>& phis,
                             int n_paths, std::uint64_t seed, const QuadratureSpec& q, GramCache* cache) {
    if (K < 1 || K > 13) throw ValidationError("K", "must lie in [1, 13]");
    if (n_paths < 1) throw ValidationError("paths", "must be >= 1");
    if (phis.empty()) throw ValidationError("phi_set", "must be nonempty");

    const IncrementGram gram = build_gram(k, t, 1 << K, q, cache);
    const CholeskyFactor factor(gram);
    const std::vector<Eigen::VectorXd> variances = dyadic_variances(gram);
    const std::uint64_t key = sub_seed(seed, static_cast<std::uint64_t>(1) << K);

    AscltReport report;
    report.K = K;
    for (const auto& f : phis) {
        report.names.push_back(f.name);
        report.targets.push_back(normal_expectation(f.phi));
    }
    report.paths.resize(static_cast<std::size_t>(n_paths));
#pragma omp parallel for schedule(static)
    for (int p = 0; p < n_paths; ++p) {
        const DyadicSample d = dyadic_sample(factor, K, key, static_cast<std::uint64_t>(p));
        AscltPath path;
        path.replica = static_cast<std::uint64_t>(p);
        for (int lvl = 1; lvl <= K; ++lvl) {
            path.v_tilde.push_back(
                v_stat(d.levels[static_cast<std::size_t>(lvl)], variances[static_cast<std::size_t>(lvl)]).v_tilde);
        }
        for (const auto& f : phis) {
            std::vector<double> avg;
            double sum = 0.0;
            for (std::size_t i = 0; i < path.v_tilde.size(); ++i) {
                sum += f.phi(path.v_tilde[i]);
                avg.push_back(sum / static_cast<double>(i + 1));
            }
            path.averages.push_back(std::move(avg));
        }
        report.paths[static_cast<std::size_t>(p)] = std::move(path);
    }
    return report;
}

double variogram_slope(const std::function<double(double)>& variance, std::span<const double> h_levels) {
    if (h_levels.size() < 2) throw ValidationError("h_levels", "need two or more levels");
    std::vector<double> lx, ly;
    for (double h : h_levels) {
        const double v = variance(h);
        if (!(v > 0.0)) throw InvalidGramError("quadvar", "variogram_slope", "nonpositive increment variance");
        lx.push_back(std::log(h));
        ly.push_back(std::log(v));
    }
    return ls_slope(lx, ly);
}

double holder_estimate(const std::function<double(double)>& variance, std::span<const double> h_levels) {
    return 0.5 * variogram_slope(variance, h_levels);
}

double holder_estimate(const KernelFn& k, double t, std::span<const double> h_levels, const QuadratureSpec& q) {
    const double x0 = 0.5;
    return holder_estimate([&](double h) { return increment_variance(k, t, x0, x0 + h, q); }, h_levels);
}

void write_clt_csv(std::ostream& out, const CltReport& report, std::uint64_t seed, const std::string& config_hash) {
    out << "n,m,ks,mean,variance,e_vsq,be_value,ks_slope,be_slope,ks_null,seed,config_hash\n";
    char buf[512];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,", r.n, r.m, r.ks,
                      r.mean, r.variance, r.e_vsq, r.be_value, report.ks_slope, report.be_slope, report.ks_null);
        out << buf << seed << ',' << config_hash << '\n';
    }
}

void write_asclt_csv(std::ostream& out, const AscltReport& report, std::uint64_t seed, const std::string& config_hash) {
    out << "path,k,n,v_tilde,phi,average,target,abs_error,seed,config_hash\n";
    char buf[512];
    for (const auto& p : report.paths) {
        for (std::size_t f = 0; f < report.names.size(); ++f) {
            for (std::size_t i = 0; i < p.v_tilde.size(); ++i) {
                const double avg = p.averages[f][i];
                std::snprintf(buf, sizeof buf, "%llu,%zu,%d,%.17g,%s,%.17g,%.17g,%.17g,",
                              static_cast<unsigned long long>(p.replica), i + 1, 1 << (i + 1), p.v_tilde[i],
                              report.names[f].c_str(), avg, report.targets[f], std::abs(avg - report.targets[f]));
                out << buf << seed << ',' << config_hash << '\n';
            }
        }
    }
}

}  // namespace hetheat
