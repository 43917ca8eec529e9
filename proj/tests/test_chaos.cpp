#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hetheat/chaos.hpp"
#include "hetheat/covariance.hpp"
#include "hetheat/errors.hpp"
#include "hetheat/numerics.hpp"
#include "oracles.hpp"

using namespace hetheat;

namespace {

IncrementGram identity_gram(int n) {
    IncrementGram g;
    g.t = 1.0;
    g.grid_n = n;
    g.entries = Eigen::MatrixXd::Identity(n, n);
    return g;
}

}  // namespace

TEST_CASE("hermite polynomials") {
    CHECK(hermite(0, 2.5) == 1.0);
    CHECK(hermite(1, 2.5) == 2.5);
    CHECK(hermite(2, 3.0) == 4.0);
    CHECK(hermite(5, 1.3) == doctest::Approx(oracle::hermite_symbolic(5, 1.3)).epsilon(1e-14));
    for (int q = 0; q <= 20; ++q)
        for (double x : {-3.1, -0.7, 0.0, 0.4, 2.2}) {
            CAPTURE(q);
            CAPTURE(x);
            const double ref = oracle::hermite_symbolic(q, x);
            CHECK(std::abs(hermite(q, x) - ref) <= 1e-12 * std::max(1e-3, std::abs(ref)));
        }
    CHECK_THROWS_AS(hermite(-1, 0.0), DomainError);
    CHECK_THROWS(hermite(21, 0.0));
}

TEST_CASE("second moment of the normalized quadratic variation") {
    const VsqMoments d = expected_vsq(identity_gram(10));
    CHECK(d.e_vsq == 1.0);
    CHECK(d.t1 == 20.0);
    CHECK(d.t2 == 0.0);

    const double rho = 0.37;
    const Eigen::MatrixXd r{{1.0, rho}, {rho, 1.0}};
    CHECK(expected_vsq(r).e_vsq == doctest::Approx(1 + rho * rho).epsilon(1e-15));

    IncrementGram zero = identity_gram(3);
    zero.entries(1, 1) = 0.0;
    CHECK_THROWS_AS(expected_vsq(zero), InvalidGramError);
}

TEST_CASE("trace formulas equal quadruple-loop sums") {
    std::mt19937_64 rng(2024);
    for (int n = 1; n <= 8; ++n) {
        for (int rep = 0; rep < 5; ++rep) {
            const Eigen::MatrixXd r = oracle::random_correlation(n, rng);
            const auto brute = oracle::malliavin_quadruple(r);
            const double scale = 8.0 / (n * n);
            const MalliavinVariance mv = malliavin_variance(r);
            CHECK(mv.total == doctest::Approx(scale * brute.all).epsilon(1e-10));
            CHECK(mv.d4 == doctest::Approx(scale * brute.four_equal).epsilon(1e-10));
            CHECK(std::abs(mv.d3 - scale * brute.three_equal) <= 1e-10 * mv.total);
            CHECK(std::abs(mv.d2 - scale * brute.pairs) <= 1e-10 * mv.total);
            CHECK(std::abs(mv.d1 - scale * brute.distinct) <= 1e-10 * mv.total);
            CHECK(contraction_norm_sq(r) == doctest::Approx(oracle::contraction_quadruple(r)).epsilon(1e-10));
        }
    }
}

TEST_CASE("independent increments") {
    for (int n : {1, 4, 32}) {
        const IncrementGram g = identity_gram(n);
        CHECK(contraction_norm_sq(g) == doctest::Approx(1.0 / (4.0 * n)).epsilon(1e-15));
        const MalliavinVariance mv = malliavin_variance(g);
        CHECK(mv.d4 == doctest::Approx(8.0 / n).epsilon(1e-15));
        CHECK(mv.d3 == 0.0);
        CHECK(mv.d2 == 0.0);
        CHECK(mv.d1 == 0.0);
        CHECK(berry_esseen_value(g) == doctest::Approx(std::sqrt(8.0 / n)).epsilon(1e-15));
    }
}

TEST_CASE("malliavin variance against simulation") {
    // For a second-chaos variable Var(||DF||^2) = (2/3) kappa_4(F); also ||DV||^2 = (2/N) X^T R X.
    std::mt19937_64 rng(8);
    const int n = 6;
    const Eigen::MatrixXd r = oracle::random_correlation(n, rng);
    const Eigen::MatrixXd l = Eigen::LLT<Eigen::MatrixXd>(r).matrixL();
    std::normal_distribution<double> z;
    const int reps = 100000;
    std::vector<double> f(reps), dnorm(reps);
    for (int i = 0; i < reps; ++i) {
        Eigen::VectorXd xi(n);
        for (int j = 0; j < n; ++j) xi(j) = z(rng);
        const Eigen::VectorXd x = l * xi;
        f[static_cast<std::size_t>(i)] = (x.squaredNorm() - n) / std::sqrt(2.0 * n);
        dnorm[static_cast<std::size_t>(i)] = 2.0 / n * x.dot(r * x);
    }
    const double total = malliavin_variance(r).total;

    const double vd = oracle::sample_variance(dnorm);
    double m4d = 0.0, mean_d = 0.0;
    for (double d : dnorm) mean_d += d / reps;
    for (double d : dnorm) m4d += std::pow(d - mean_d, 4) / reps;
    CHECK(std::abs(vd - total) <= 4 * std::sqrt((m4d - vd * vd) / reps));

    double m2 = 0.0, m4 = 0.0;
    for (double v : f) {
        m2 += v * v / reps;
        m4 += v * v * v * v / reps;
    }
    const double k4 = m4 - 3 * m2 * m2;
    double psi_var = 0.0;
    for (double v : f) {
        const double psi = (v * v * v * v - m4) - 6 * m2 * (v * v - m2);
        psi_var += psi * psi / reps;
    }
    CHECK(std::abs(2.0 / 3.0 * k4 - total) <= 4 * 2.0 / 3.0 * std::sqrt(psi_var / reps));
}

TEST_CASE("diagnostics along a grid ladder") {
    const PiecewiseKernel k(make_medium(1, 4, 1, 2));
    std::vector<double> ln, lbe;
    double prev_e = 2.0;
    for (int n : {16, 32, 64, 128, 256, 512}) {
        const ChaosDiag d = chaos_diagnostics(build_gram(k, 1.0, n));
        CHECK(d.t1 == 1.0);
        CHECK(d.e_vsq == doctest::Approx(1.0 + d.t2_over_2n).epsilon(1e-15));
        CHECK(d.e_vsq >= 1.0);
        CHECK(d.e_vsq < prev_e);
        prev_e = d.e_vsq;
        CHECK(n * (d.e_vsq - 1.0) < 0.1);
        CHECK(d.d_var >= 0.0);
        CHECK(d.d_var == doctest::Approx(d.d4 + d.d3 + d.d2 + d.d1).epsilon(1e-12));
        CHECK(n * d.d_var < 8.5);
        CHECK(d.contraction_sq >= 0.0);
        CHECK(n * d.contraction_sq < 0.3);
        ln.push_back(std::log(n));
        lbe.push_back(std::log(d.be_bound));
    }
    CHECK(ls_slope(ln, lbe) == doctest::Approx(-0.5).epsilon(0.1));

    std::ostringstream out;
    write_chaos_csv(out, {chaos_diagnostics(identity_gram(4))}, 7, "h");
    CHECK(out.str().rfind("n,e_vsq,t1,t2_over_2n,d_var,d4,d3,d2,d1,contraction_sq,be_bound,seed,config_hash\n4,1,1,0,", 0) == 0);
}

TEST_CASE("asclt hypotheses on independent increments") {
    const int K = 6;
    const AscltHypotheses h = asclt_hypotheses(identity_gram(1 << K));
    REQUIRE(h.levels.size() == K + 1);
    for (int a = 0; a <= K; ++a) {
        CHECK(h.contraction[static_cast<std::size_t>(a)] == doctest::Approx(1.0 / (4.0 * (1 << a))).epsilon(1e-14));
        for (int b = 0; b <= K; ++b) CHECK(h.cross(a, b) == doctest::Approx(std::pow(2.0, -std::abs(a - b) / 2.0)).epsilon(1e-13));
    }
    double cond3 = 0.0;
    for (int k = 1; k <= K; ++k) {
        double inner = 0.0;
        for (int a = 0; a <= k; ++a) inner += std::pow(4.0, -a) / 4.0;
        const double ln = k * std::log(2.0);
        cond3 += inner / (std::ldexp(1.0, k) * ln * ln);
        CHECK(h.cond3_partial[static_cast<std::size_t>(k)] == doctest::Approx(cond3).epsilon(1e-13));
    }
    CHECK(h.cond3_partial[0] == 0.0);
    CHECK_THROWS_AS(asclt_hypotheses(identity_gram(6)), ValidationError);
}

TEST_CASE("asclt hypotheses for the heat equation") {
    const AscltHypotheses h = asclt_hypotheses(build_gram(PiecewiseKernel(make_medium(1, 1, 2, 2)), 1.0, 256));
    for (std::size_t i = 1; i < h.levels.size(); ++i) {
        CHECK(h.contraction[i] < h.contraction[i - 1]);
        CHECK(h.l_times_contraction[i] < 0.3);
        CHECK(h.cond4_partial[i] >= h.cond4_partial[i - 1]);
    }
    const auto n = h.cond4_partial.size();
    const double last = h.cond4_partial[n - 1] - h.cond4_partial[n - 2];
    const double first = h.cond4_partial[2] - h.cond4_partial[1];
    CHECK(last < first);
    for (Eigen::Index a = 0; a < h.cross.rows(); ++a) CHECK(h.cross(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}
