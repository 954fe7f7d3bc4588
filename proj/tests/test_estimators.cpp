#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lfgp/clustering.hpp"
#include "lfgp/datasets.hpp"
#include "lfgp/errors.hpp"
#include "lfgp/estimators.hpp"
#include "lfgp/rng.hpp"

using namespace lfgp;

TEST_SUITE("estimators") {

TEST_CASE("hand-evaluated statistics") {
    const std::vector<double> v123{1.0, 2.0, 3.0};
    const std::vector<double> v1234{1.0, 2.0, 3.0, 4.0};

    CHECK(estimate_statistic(v123, StatisticKind::mean()) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(estimate_statistic(v1234, StatisticKind::median()) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(estimate_statistic(v123, StatisticKind::median()) == doctest::Approx(2.0).epsilon(1e-15));
    // unbiased sample variance of {1,2,3,4}: 5/3
    CHECK(estimate_statistic(v1234, StatisticKind::variance()) ==
          doctest::Approx(5.0 / 3.0).epsilon(1e-15));
    // symmetric sample has zero skew
    CHECK(estimate_statistic(v123, StatisticKind::skew()) == doctest::Approx(0.0).epsilon(1e-12));
    // linear interpolation at rank q (n-1): h = 0.75 -> 17.5
    const std::vector<double> deciles{10.0, 20.0, 30.0, 40.0};
    CHECK(estimate_statistic(deciles, StatisticKind::percentile(0.25)) ==
          doctest::Approx(17.5).epsilon(1e-15));
}

TEST_CASE("insufficient data raises") {
    const std::vector<double> one{1.0};
    const std::vector<double> two{1.0, 2.0};
    CHECK_THROWS_AS(estimate_statistic({}, StatisticKind::mean()), InsufficientDataError);
    CHECK_THROWS_AS(estimate_statistic(one, StatisticKind::variance()), InsufficientDataError);
    CHECK_THROWS_AS(estimate_statistic(two, StatisticKind::skew()), InsufficientDataError);
    CHECK_THROWS_AS(estimate_variance(one, StatisticKind::variance(), 100, 1), InsufficientDataError);
    CHECK_THROWS_AS(estimate_variance(two, StatisticKind::median(), 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(StatisticKind::percentile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(StatisticKind::percentile(1.0), std::invalid_argument);
}

TEST_CASE("Beta(2,1) sample mean lands within 3 standard errors") {
    Rng rng(2024);
    const int n = 100000;
    std::vector<double> ys(n);
    for (double& y : ys) y = rng.beta(2.0, 1.0);
    const double mean = estimate_statistic(ys, StatisticKind::mean());
    const double sd = std::sqrt(estimate_statistic(ys, StatisticKind::variance()));
    CHECK(std::fabs(mean - 2.0 / 3.0) <= 3.0 * sd / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("estimator variance: analytic mean path") {
    const std::vector<double> zeros{0.0, 0.0, 0.0, 0.0};
    CHECK(estimate_variance(zeros, StatisticKind::mean(), 1, 0) == 0.0);

    Rng rng(5);
    const int n = 10000;
    std::vector<double> xs(n);
    for (double& x : xs) x = rng.normal();
    const double v = estimate_variance(xs, StatisticKind::mean(), 1, 0);
    CHECK(v == doctest::Approx(1.0 / n).epsilon(0.1));
}

TEST_CASE("bootstrap variance of the median tracks the asymptotic formula") {
    // Median of n U(0,1) draws: var ~ 1/(4 n f(1/2)^2) = 1/(4n).
    Rng rng(7);
    const int n = 10000;
    std::vector<double> xs(n);
    for (double& x : xs) x = rng.uniform01();
    const double v = estimate_variance(xs, StatisticKind::median(), 400, 11);
    const double asymptotic = 1.0 / (4.0 * n);
    CHECK(v >= asymptotic / 2.0);
    CHECK(v <= asymptotic * 2.0);
}

TEST_CASE("percentile(0.5) equals median exactly on odd lengths") {
    Rng rng(13);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 1 + 2 * static_cast<int>(rng.uniform_int(40));
        std::vector<double> xs(static_cast<std::size_t>(n));
        for (double& x : xs) x = rng.normal();
        CHECK(estimate_statistic(xs, StatisticKind::percentile(0.5)) ==
              estimate_statistic(xs, StatisticKind::median()));
    }
}

TEST_CASE("estimators are permutation invariant") {
    Rng rng(17);
    std::vector<double> xs(101);
    for (double& x : xs) x = rng.normal();
    std::vector<double> shuffled = xs;
    rng.shuffle(shuffled);
    for (const auto& kind : {StatisticKind::mean(), StatisticKind::median(),
                             StatisticKind::variance(), StatisticKind::skew(),
                             StatisticKind::percentile(0.123)}) {
        const double a = estimate_statistic(xs, kind);
        const double b = estimate_statistic(shuffled, kind);
        CHECK(a == doctest::Approx(b).epsilon(1e-12));
    }
}

TEST_CASE("summarize_clusters basics") {
    // one cluster holding everything equals the global statistic
    Dataset d;
    d.X = Eigen::MatrixXd::Zero(5, 1);
    d.y.resize(5);
    d.y << 5.0, 1.0, 3.0, 2.0, 4.0;
    Clustering whole;
    whole.assignments = {0, 0, 0, 0, 0};
    whole.centroids = Eigen::MatrixXd::Zero(1, 1);
    whole.sizes = {5};
    const ClusterSummary s = summarize_clusters(d, whole, StatisticKind::median(), 1);
    CHECK(s.estimates.size() == 1);
    CHECK(s.estimates[0] == doctest::Approx(3.0));

    // two constant-valued clusters
    Dataset d2;
    d2.X = Eigen::MatrixXd::Zero(6, 1);
    d2.y.resize(6);
    d2.y << 7.0, 7.0, 7.0, -1.0, -1.0, -1.0;
    Clustering two;
    two.assignments = {0, 0, 0, 1, 1, 1};
    two.centroids = Eigen::MatrixXd::Zero(2, 1);
    two.sizes = {3, 3};
    const ClusterSummary sm = summarize_clusters(d2, two, StatisticKind::mean(), 1);
    CHECK(sm.estimates[0] == doctest::Approx(7.0));
    CHECK(sm.estimates[1] == doctest::Approx(-1.0));
    const ClusterSummary sv = summarize_clusters(d2, two, StatisticKind::variance(), 1);
    CHECK(sv.estimates[0] == doctest::Approx(0.0));
    CHECK(sv.estimates[1] == doctest::Approx(0.0));
    CHECK(sv.variances.minCoeff() >= 0.0);
}

TEST_CASE("cluster means on Cube stay within 4 sigma of the Beta truth") {
    const Eigen::Index n = 10000;
    const Dataset d = gen_cube(n, 314);
    Eigen::VectorXd scales(3);
    for (int j = 0; j < 3; ++j) {
        const double mu = d.X.col(j).mean();
        scales[j] = std::sqrt((d.X.col(j).array() - mu).square().sum() / static_cast<double>(n - 1));
    }
    const Clustering c = recursive_cluster(d.X, 1000, ClusterMetric::rescaled_rbf(scales), 7);
    const ClusterSummary s = summarize_clusters(d, c, StatisticKind::mean(), 7);
    for (int h = 0; h < c.cluster_count(); ++h) {
        // centroid x1 maps back to the Beta parameters of its band
        const double u = (c.centroids(h, 0) + 1.0) / 2.0;
        const double true_mean = (1.0 + u) / (5.0 - 2.0 * u);
        CHECK(std::fabs(s.estimates[h] - true_mean) <= 4.0 * std::sqrt(s.variances[h]));
    }
}

TEST_CASE("statistic kind parsing round trip") {
    CHECK(StatisticKind::parse("mean") == StatisticKind::mean());
    CHECK(StatisticKind::parse("skew") == StatisticKind::skew());
    const StatisticKind p = StatisticKind::parse("percentile:0.25");
    CHECK(p.tag() == StatisticKind::Tag::Percentile);
    CHECK(p.q() == doctest::Approx(0.25));
    CHECK_THROWS_AS(StatisticKind::parse("mode"), std::invalid_argument);
}

} // TEST_SUITE
