#include "hetheat/chaos.hpp"

#include <cmath>
#include <cstdio>

#include "hetheat/errors.hpp"

namespace hetheat {

double hermite(int q, double x) {
    if (q < 0) throw DomainError("hermite: degree must be >= 0");
    if (q > 20) throw DomainError("hermite: degree must be <= 20");
    if (q == 0) return 1.0;
    double prev = 1.0;
    double cur = x;
    // (q+1) H_{q+1} = x H_q - H_{q-1} in this normalisation.
    for (int n = 1; n < q; ++n) {
        const double next = (x * cur - prev) / (n + 1);
        prev = cur;
        cur = next;
    }
    return cur;
}

namespace {

void check_correlation(const Eigen::MatrixXd& r, const char* op) {
    if (r.rows() == 0 || r.rows() != r.cols()) {
        throw InvalidGramError("chaos", op, "correlation matrix must be square and nonempty");
    }
}

double off_diagonal_sum_sq(const Eigen::MatrixXd& r) {
    return r.squaredNorm() - r.diagonal().squaredNorm();
}

}  // namespace

VsqMoments expected_vsq(const Eigen::MatrixXd& r) {
    check_correlation(r, "expected_vsq");
    const double n = static_cast<double>(r.rows());
    VsqMoments m;
    m.t1 = 2.0 * n;
    m.t2 = 2.0 * off_diagonal_sum_sq(r);
    m.e_vsq = (m.t1 + m.t2) / (2.0 * n);
    return m;
}

VsqMoments expected_vsq(const IncrementGram& gram) { return expected_vsq(gram.correlation()); }

double contraction_norm_sq(const Eigen::MatrixXd& r) {
    check_correlation(r, "contraction_norm_sq");
    const double n = static_cast<double>(r.rows());
    const double sigma2 = expected_vsq(r).e_vsq;
    const Eigen::MatrixXd r2 = r * r;
    return r2.squaredNorm() / (4.0 * sigma2 * sigma2 * n * n);
}

double contraction_norm_sq(const IncrementGram& gram) { return contraction_norm_sq(gram.correlation()); }

MalliavinVariance malliavin_variance(const Eigen::MatrixXd& r) {
    check_correlation(r, "malliavin_variance");
    const Eigen::Index n = r.rows();
    const double dn = static_cast<double>(n);
    const Eigen::MatrixXd r2 = r * r;
    const double trace4 = r2.squaredNorm();  // tr(R^4), R symmetric
    const double trace3 = r2.cwiseProduct(r).sum();

    Eigen::MatrixXd off = r;
    off.diagonal().setZero();
    const Eigen::MatrixXd off2 = off.cwiseProduct(off);
    const double sum_sq = off2.sum();                   // sum_{a != b} R_ab^2
    const double sum_4 = off2.cwiseProduct(off2).sum();  // sum_{a != b} R_ab^4
    const Eigen::VectorXd row_sq = off2.rowwise().sum();
    const Eigen::VectorXd row_4 = off2.cwiseProduct(off2).rowwise().sum();
    const double q = row_sq.squaredNorm() - row_4.sum();

    // Index tuples of the cyclic sum, grouped by coincidence pattern.
    const double s4 = dn;
    const double s3 = 4.0 * sum_sq;
    const double s22 = 2.0 * sum_sq + sum_4;
    const double triangles = trace3 - dn - 3.0 * sum_sq;  // distinct a, b, c
    const double s211 = 4.0 * triangles + 2.0 * q;
    const double s1 = trace4 - s4 - s3 - s22 - s211;

    const double scale = 8.0 / (dn * dn);
    MalliavinVariance v;
    v.total = scale * trace4;
    v.d4 = scale * s4;
    v.d3 = scale * s3;
    v.d2 = scale * (s22 + s211);
    v.d1 = scale * s1;
    return v;
}

MalliavinVariance malliavin_variance(const IncrementGram& gram) { return malliavin_variance(gram.correlation()); }

double berry_esseen_value(const Eigen::MatrixXd& r) {
    const double var = malliavin_variance(r).total;
    const double mean_excess = 2.0 * expected_vsq(r).e_vsq - 2.0;
    return std::sqrt(std::max(0.0, var)) + std::sqrt(std::max(0.0, mean_excess));
}

double berry_esseen_value(const IncrementGram& gram) { return berry_esseen_value(gram.correlation()); }

ChaosDiag chaos_diagnostics(const IncrementGram& gram) {
    const Eigen::MatrixXd r = gram.correlation();
    const VsqMoments m = expected_vsq(r);
    const MalliavinVariance mv = malliavin_variance(r);
    ChaosDiag d;
    d.n = gram.grid_n;
    d.e_vsq = m.e_vsq;
    d.t1 = m.t1 / (2.0 * d.n);
    d.t2_over_2n = m.t2 / (2.0 * d.n);
    d.d_var = mv.total;
    d.d4 = mv.d4;
    d.d3 = mv.d3;
    d.d2 = mv.d2;
    d.d1 = mv.d1;
    d.contraction_sq = contraction_norm_sq(r);
    d.be_bound = std::sqrt(std::max(0.0, mv.total)) + std::sqrt(std::max(0.0, 2.0 * m.e_vsq - 2.0));
    return d;
}

void write_chaos_csv(std::ostream& out, const std::vector<ChaosDiag>& rows, std::uint64_t seed,
                     const std::string& config_hash) {
    out << "n,e_vsq,t1,t2_over_2n,d_var,d4,d3,d2,d1,contraction_sq,be_bound,seed,config_hash\n";
    char buf[512];
    for (const auto& d : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,", d.n,
                      d.e_vsq, d.t1, d.t2_over_2n, d.d_var, d.d4, d.d3, d.d2, d.d1, d.contraction_sq, d.be_bound);
        out << buf << seed << ',' << config_hash << '\n';
    }
}

namespace {

// Sum of consecutive row (column) pairs: one step of dyadic coarsening.
Eigen::MatrixXd halve_rows(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out(m.rows() / 2, m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < out.rows(); ++r) out(r, c) = m(2 * r, c) + m(2 * r + 1, c);
    }
    return out;
}

Eigen::MatrixXd halve_cols(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out(m.rows(), m.cols() / 2);
    for (Eigen::Index c = 0; c < out.cols(); ++c) out.col(c) = m.col(2 * c) + m.col(2 * c + 1);
    return out;
}

}  // namespace

AscltHypotheses asclt_hypotheses(const IncrementGram& finest) {
    const int n = finest.grid_n;
    if (n < 1 || (n & (n - 1)) != 0) throw ValidationError("n", "finest grid must have 2^K cells");
    int K = 0;
    while ((1 << K) < n) ++K;
    const auto level = [](int a) { return static_cast<std::size_t>(a); };

    // Cross-level blocks C_ab = A_a^T G A_b, walked by halving so that at most two N x N sized
    // matrices are alive at once. E[G_i G_j] = E[V~_i V~_j] / (sigma_i sigma_j) with
    // E[V~_i V~_j] = (1/sqrt(ij)) sum rho_ab^2 over the cells of both grids.
    std::vector<Eigen::VectorXd> sd(level(K) + 1);
    std::vector<double> sigma(level(K) + 1);
    std::vector<double> contraction(level(K) + 1);
    Eigen::MatrixXd rho_sq = Eigen::MatrixXd::Zero(K + 1, K + 1);

    // Diagonal blocks first: they fix the standard deviations of every level.
    {
        Eigen::MatrixXd g = finest.entries;
        for (int a = K; a >= 0; --a) {
            const Eigen::VectorXd var = g.diagonal();
            if ((var.array() <= 0.0).any()) {
                throw InvalidGramError("chaos", "asclt_hypotheses", "nonpositive variance");
            }
            sd[level(a)] = var.cwiseSqrt();
            const Eigen::VectorXd inv = sd[level(a)].cwiseInverse();
            Eigen::MatrixXd r = inv.asDiagonal() * g * inv.asDiagonal();
            r.diagonal().setOnes();
            sigma[level(a)] = std::sqrt(expected_vsq(r).e_vsq);
            contraction[level(a)] = contraction_norm_sq(r);
            if (a > 0) g = halve_cols(halve_rows(g));
        }
    }
    {
        Eigen::MatrixXd by_col = finest.entries;  // G A_b
        for (int b = K; b >= 0; --b) {
            Eigen::MatrixXd block = by_col;  // A_a^T G A_b
            for (int a = K; a >= 0; --a) {
                if (a <= b) {
                    const Eigen::VectorXd ia = sd[level(a)].cwiseInverse();
                    const Eigen::VectorXd ib = sd[level(b)].cwiseInverse();
                    rho_sq(a, b) = rho_sq(b, a) = (ia.asDiagonal() * block * ib.asDiagonal()).squaredNorm();
                }
                if (a > 0) block = halve_rows(block);
            }
            if (b > 0) by_col = halve_cols(by_col);
        }
    }

    AscltHypotheses h;
    h.cross.resize(K + 1, K + 1);
    for (int a = 0; a <= K; ++a) {
        h.levels.push_back(1 << a);
        h.contraction.push_back(contraction[level(a)]);
        h.l_times_contraction.push_back(contraction[level(a)] * (1 << a));
        for (int b = 0; b <= K; ++b) {
            const double i = 1 << a, j = 1 << b;
            h.cross(a, b) = rho_sq(a, b) / std::sqrt(i * j) / (sigma[level(a)] * sigma[level(b)]);
        }
    }

    double cond3 = 0.0, cond4 = 0.0;
    for (int k = 0; k <= K; ++k) {
        if (k == 0) {  // N = 1 carries log N = 0 and is excluded from both series
            h.cond3_partial.push_back(0.0);
            h.cond4_partial.push_back(0.0);
            continue;
        }
        const double big_n = 1 << k;
        const double log_n = std::log(big_n);
        double inner3 = 0.0, inner4 = 0.0;
        for (int a = 0; a <= k; ++a) {
            inner3 += h.contraction[static_cast<std::size_t>(a)] / (1 << a);
            for (int b = 0; b <= k; ++b) inner4 += std::abs(h.cross(a, b)) / (double(1 << a) * double(1 << b));
        }
        cond3 += inner3 / (big_n * log_n * log_n);
        cond4 += inner4 / (big_n * log_n * log_n * log_n);
        h.cond3_partial.push_back(cond3);
        h.cond4_partial.push_back(cond4);
    }
    return h;
}

}  // namespace hetheat
