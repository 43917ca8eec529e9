#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hetheat/covariance.hpp"
#include "hetheat/errors.hpp"
#include "hetheat/sampler.hpp"
#include "oracles.hpp"

using namespace hetheat;

namespace {

const PiecewiseKernel kHomog(make_medium(1, 1, 2, 2));
const PiecewiseKernel kTwoPhase(make_medium(1, 4, 1, 2));

}  // namespace

TEST_CASE("single increment is a centred gaussian with the right variance") {
    const IncrementGram g = build_gram(kTwoPhase, 1.0, 1);
    const auto samples = cholesky_sample(g, 17, 100000);
    std::vector<double> v;
    for (const auto& s : samples) v.push_back(s.increments.at(0));
    CHECK(oracle::sample_variance(v) == doctest::Approx(g.entries(0, 0)).epsilon(0.02));
}

TEST_CASE("empirical covariance matches the gram") {
    const IncrementGram g = build_gram(kTwoPhase, 1.0, 8);
    const int n = 100000;
    const auto samples = cholesky_sample(g, 23, n);
    Eigen::MatrixXd x(n, 8);
    for (int r = 0; r < n; ++r)
        for (int j = 0; j < 8; ++j) x(r, j) = samples[static_cast<std::size_t>(r)].increments[static_cast<std::size_t>(j)];
    const Eigen::MatrixXd c = x.transpose() * x / n;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j) {
            const double se = std::sqrt((g.entries(i, i) * g.entries(j, j) + g.entries(i, j) * g.entries(i, j)) / n);
            CAPTURE(i);
            CAPTURE(j);
            CHECK(std::abs(c(i, j) - g.entries(i, j)) <= 4 * se);
        }
}

TEST_CASE("draws depend only on seed and replica") {
    const CholeskyFactor f(build_gram(kTwoPhase, 1.0, 16));
    const auto par = cholesky_sample(f, 5, 64);
    const auto ser = cholesky_sample_serial(f, 5, 64);
    const auto tail = cholesky_sample(f, 5, 32, 32);
    for (int r = 0; r < 64; ++r) {
        CHECK(par[static_cast<std::size_t>(r)].increments == ser[static_cast<std::size_t>(r)].increments);
        CHECK(par[static_cast<std::size_t>(r)].replica_id == static_cast<std::uint64_t>(r));
    }
    for (int r = 0; r < 32; ++r) CHECK(tail[static_cast<std::size_t>(r)].increments == par[static_cast<std::size_t>(r + 32)].increments);
    CHECK(f.draw(5, 3) == par[3].increments);
    CHECK(f.draw(6, 3) != par[3].increments);
}

TEST_CASE("factorization failure is reported") {
    IncrementGram bad;
    bad.t = 1.0;
    bad.grid_n = 2;
    bad.entries = Eigen::MatrixXd{{1.0, 2.0}, {2.0, 1.0}};
    try {
        CholeskyFactor f(bad);
        FAIL("expected failure");
    } catch (const NumericError& e) {
        CHECK(e.module() == "sampler");
        CHECK(e.op() == "cholesky");
    }

    IncrementGram singular = bad;
    singular.entries = Eigen::MatrixXd{{1.0, 1.0}, {1.0, 1.0}};
    const CholeskyFactor f(singular);
    CHECK(f.jitter() > 0.0);
}

TEST_CASE("dyadic levels are nested sums") {
    const DyadicSample d = dyadic_sample(kTwoPhase, 1.0, 5, 99);
    REQUIRE(d.levels.size() == 6);
    for (int k = 0; k <= 5; ++k) CHECK(d.levels[static_cast<std::size_t>(k)].size() == (std::size_t{1} << k));
    const auto& fine = d.levels[5];
    const auto& next = d.levels[4];
    for (std::size_t j = 0; j < next.size(); ++j) CHECK(next[j] == fine[2 * j] + fine[2 * j + 1]);

    const DyadicSample zero = dyadic_sample(kTwoPhase, 1.0, 0, 99);
    REQUIRE(zero.levels.size() == 1);
    CHECK(zero.levels[0].size() == 1);
    CHECK_THROWS_AS(dyadic_sample(kTwoPhase, 1.0, 14, 1), ValidationError);
}

TEST_CASE("coarse level variances match the coarse gram") {
    const int K = 4, reps = 20000;
    const CholeskyFactor f(build_gram(kTwoPhase, 1.0, 1 << K));
    const IncrementGram coarse = build_gram(kTwoPhase, 1.0, 1 << 2);
    std::vector<std::vector<double>> col(4);
    for (int r = 0; r < reps; ++r) {
        const DyadicSample d = dyadic_sample(f, K, 31, static_cast<std::uint64_t>(r));
        for (int j = 0; j < 4; ++j) col[static_cast<std::size_t>(j)].push_back(d.levels[2][static_cast<std::size_t>(j)]);
    }
    for (int j = 0; j < 4; ++j) {
        const double v = oracle::sample_variance(col[static_cast<std::size_t>(j)]);
        const double se = coarse.entries(j, j) * std::sqrt(2.0 / (reps - 1));
        CHECK(std::abs(v - coarse.entries(j, j)) <= 4 * se);
    }
}

TEST_CASE("noise grid oracle") {
    const double x[] = {0.3};
    const NoiseGridSpec spec{0.5 / 400, 0.02, 5.0};

    const Eigen::MatrixXd zero = noise_grid_oracle(NullKernel(), 0.5, x, spec, 1, 10);
    CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

    const int reps = 2000;
    const Eigen::MatrixXd u = noise_grid_oracle(kHomog, 0.5, x, spec, 77, reps);
    const double m2 = u.col(0).squaredNorm() / reps;
    const double exact = cov_field(kHomog, 0.5, 0.3, 0.3);
    const double se = exact * std::sqrt(2.0 / reps);
    CHECK(std::abs(m2 - exact) <= 3 * se);

    NoiseGridSpec wide = spec;
    wide.half_width = 10.0;
    const Eigen::MatrixXd uw = noise_grid_oracle(kHomog, 0.5, x, wide, 78, reps);
    CHECK(std::abs(uw.col(0).squaredNorm() / reps - m2) <= 3 * std::sqrt(2.0) * se);

    const FieldSample s = noise_grid_sample(kHomog, 0.5, std::vector<double>{0.0, 0.5, 1.0}, spec, 77, 4);
    CHECK(s.increments.size() == 2);
    CHECK_THROWS_AS(noise_grid_oracle(kHomog, 0.5, x, NoiseGridSpec{0.0, 0.02, 5.0}, 1, 1), ValidationError);
}

TEST_CASE("sample csv layout") {
    const auto samples = cholesky_sample(build_gram(kTwoPhase, 1.0, 2), 3, 2);
    std::ostringstream out;
    write_samples_csv(out, samples, "abc");
    std::istringstream in(out.str());
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "seed,replica,config_hash,d0,d1");
    CHECK(row.rfind("3,0,abc,", 0) == 0);
}
