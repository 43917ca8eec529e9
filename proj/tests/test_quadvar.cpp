#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hetheat/chaos.hpp"
#include "hetheat/covariance.hpp"
#include "hetheat/errors.hpp"
#include "hetheat/numerics.hpp"
#include "hetheat/quadvar.hpp"
#include "hetheat/sampler.hpp"
#include "oracles.hpp"

using namespace hetheat;

namespace {

const PiecewiseKernel kHomog(make_medium(1, 1, 2, 2));
const PiecewiseKernel kTwoPhase(make_medium(1, 4, 1, 2));

}  // namespace

TEST_CASE("quadratic variation statistic") {
    const Eigen::VectorXd var = Eigen::VectorXd::Constant(1, 4.0);
    const double d[] = {3.0};
    const QuadVarStat s = v_stat(d, var);
    CHECK(s.n == 1);
    CHECK(s.v == doctest::Approx(9.0 / 4.0 - 1.0));
    CHECK(s.v_tilde == doctest::Approx((9.0 / 4.0 - 1.0) / std::sqrt(2.0)));

    const double two[] = {1.0, 2.0};
    CHECK_THROWS_AS(v_stat(two, var), ValidationError);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    CHECK_THROWS_AS(v_stat(d, zero), InvalidGramError);
}

TEST_CASE("replica moments of the statistic") {
    const IncrementGram g = build_gram(kTwoPhase, 1.0, 16);
    const int reps = 100000;
    const auto samples = cholesky_sample(g, 41, reps);
    std::vector<double> v;
    for (const auto& s : samples) v.push_back(v_stat(s, g).v_tilde);
    double mean = 0.0;
    for (double x : v) mean += x / reps;
    const double var = oracle::sample_variance(v);
    const double e_vsq = expected_vsq(g).e_vsq;
    CHECK(std::abs(mean) <= 4 * std::sqrt(e_vsq / reps));
    // The fourth moment of a second-chaos variable is close to 3 sigma^4 plus a small cumulant.
    double m4 = 0.0;
    for (double x : v) m4 += std::pow(x - mean, 4) / reps;
    CHECK(std::abs(var - e_vsq) <= 4 * std::sqrt((m4 - var * var) / reps));
}

TEST_CASE("kolmogorov-smirnov distance") {
    const double zero[] = {0.0};
    CHECK(ks_distance(zero) == 0.5);

    const int m = 1000;
    std::vector<double> q;
    for (int i = 1; i <= m; ++i) {
        const double p = (i - 0.5) / m;
        // Invert the normal cdf by bisection.
        double lo = -10, hi = 10;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (normal_cdf(mid) < p ? lo : hi) = mid;
        }
        q.push_back(0.5 * (lo + hi));
    }
    CHECK(ks_distance(q) == doctest::Approx(0.5 / m).epsilon(1e-6));
    CHECK_THROWS_AS(ks_distance(std::span<const double>{}), ValidationError);

    // Null calibration: exact normal draws sit at the M^(-1/2) scale.
    for (int mm : {1000, 10000, 100000}) {
        const double d = ks_null_floor(mm, 3);
        CHECK(d * std::sqrt(mm) < 1.63);  // 99% point of the Kolmogorov distribution
        CHECK(d * std::sqrt(mm) > 0.3);
    }
}

TEST_CASE("gaussian expectations") {
    CHECK(normal_expectation([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(normal_expectation([](double x) { return std::cos(x); }) == doctest::Approx(std::exp(-0.5)).epsilon(1e-13));
    CHECK(normal_expectation([](double x) { return x * x; }) == doctest::Approx(1.0).epsilon(1e-13));
    const auto shipped = shipped_test_functions();
    REQUIRE(shipped.size() == 4);
    for (const auto& f : shipped) CHECK(std::isfinite(f.phi(0.3)));
    // E min(|Z|, 1) = 2 (phi(0) - phi(1)) + 2 (1 - Phi(1)).
    const double pdf0 = 1 / std::sqrt(2 * std::numbers::pi), pdf1 = pdf0 * std::exp(-0.5);
    CHECK(normal_expectation(shipped[3].phi) == doctest::Approx(2 * (pdf0 - pdf1) + 2 * (1 - normal_cdf(1.0))).epsilon(1e-12));
}

TEST_CASE("clt experiment in a homogeneous medium") {
    const int ns[] = {16, 64, 256};
    const CltReport r = clt_experiment(kHomog, 1.0, ns, 10000, 7);
    REQUIRE(r.rows.size() == 3);
    CHECK(r.rows[0].ks > r.rows[1].ks);
    CHECK(r.rows[1].ks > r.rows[2].ks);
    CHECK(r.ks_slope >= -0.8);
    CHECK(r.ks_slope <= -0.3);
    CHECK(r.ks_null > 0.0);
    for (const auto& row : r.rows) {
        CHECK(row.e_vsq == doctest::Approx(expected_vsq(build_gram(kHomog, 1.0, row.n)).e_vsq).epsilon(1e-14));
        CHECK(row.seed == sub_seed(7, static_cast<std::uint64_t>(row.n)));
    }

    const CltReport again = clt_experiment(kHomog, 1.0, ns, 10000, 7);
    CHECK(again.rows[2].ks == r.rows[2].ks);

    const int unsorted[] = {64, 16};
    CHECK_THROWS_AS(clt_experiment(kHomog, 1.0, unsorted, 10000, 7), ValidationError);
    CHECK_THROWS_AS(clt_experiment(kHomog, 1.0, ns, 999, 7), ValidationError);

    std::ostringstream out;
    write_clt_csv(out, r, 7, "cafe");
    CHECK(out.str().rfind("n,m,ks,mean,variance,e_vsq,be_value,ks_slope,be_slope,ks_null,seed,config_hash\n16,10000,", 0) == 0);
}

TEST_CASE("lacunary log averages") {
    const std::vector<TestFunction> one{{"one", [](double) { return 1.0; }}};
    const AscltReport r = asclt_experiment(kTwoPhase, 1.0, 6, one, 3, 7);
    REQUIRE(r.paths.size() == 3);
    CHECK(r.targets[0] == doctest::Approx(1.0).epsilon(1e-14));
    for (const auto& p : r.paths) {
        REQUIRE(p.v_tilde.size() == 6);
        for (double a : p.averages[0]) CHECK(a == 1.0);
    }

    // Averages are running means of phi over the dyadic levels of one path.
    const AscltReport c = asclt_experiment(kTwoPhase, 1.0, 6, shipped_test_functions(), 2, 7);
    for (const auto& p : c.paths) {
        double sum = 0.0;
        for (std::size_t k = 0; k < p.v_tilde.size(); ++k) {
            sum += std::cos(p.v_tilde[k]);
            CHECK(p.averages[0][k] == doctest::Approx(sum / static_cast<double>(k + 1)).epsilon(1e-14));
        }
    }
    CHECK(c.names[0] == "cos");
    CHECK(c.targets[0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-13));

    std::ostringstream out;
    write_asclt_csv(out, c, 7, "cafe");
    CHECK(out.str().rfind("path,k,n,v_tilde,phi,average,target,abs_error,seed,config_hash\n0,1,2,", 0) == 0);
    CHECK_THROWS_AS(asclt_experiment(kTwoPhase, 1.0, 0, one, 1, 7), ValidationError);
}

TEST_CASE("dyadic variances") {
    const IncrementGram fine = build_gram(kTwoPhase, 1.0, 16);
    const auto v = dyadic_variances(fine);
    REQUIRE(v.size() == 5);
    for (int k = 0; k <= 4; ++k) {
        const IncrementGram g = build_gram(kTwoPhase, 1.0, 1 << k);
        CHECK((v[static_cast<std::size_t>(k)] - g.variances()).cwiseAbs().maxCoeff() <= 1e-9 * g.variances().maxCoeff());
    }
}

TEST_CASE("holder exponent from the variogram") {
    std::vector<double> h;
    for (int e = 4; e <= 10; ++e) h.push_back(std::ldexp(1.0, -e));
    CHECK(std::abs(holder_estimate(kHomog, 1.0, h) - 0.5) <= 0.03);
    CHECK(std::abs(holder_estimate(kTwoPhase, 1.0, h) - 0.5) <= 0.05);

    auto var = [&](double hh) { return increment_variance(kTwoPhase, 1.0, 0.5, 0.5 + hh); };
    auto squared = [&](double hh) { return var(hh) * var(hh); };
    CHECK(holder_estimate(squared, h) == doctest::Approx(2 * holder_estimate(var, h)).epsilon(1e-12));
    const double one_h[] = {0.1};
    CHECK_THROWS_AS(variogram_slope(var, one_h), ValidationError);
}
