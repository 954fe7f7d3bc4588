#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "lfgp/dataset.hpp"
#include "lfgp/estimators.hpp"

namespace lfgp {

enum class SyntheticKind { Cube, Roll };

SyntheticKind parse_synthetic_kind(const std::string& text);

/// Beta(a, b) response-law parameters; for index i of an n-point synthetic
/// set, a = (n+i)/n and b = (4n-3i)/n.
struct BetaParams {
    double a = 1.0;
    double b = 1.0;

    static BetaParams at_index(Eigen::Index i, Eigen::Index n) {
        const auto nd = static_cast<double>(n);
        const auto id = static_cast<double>(i);
        return {(nd + id) / nd, (4.0 * nd - 3.0 * id) / nd};
    }
};

/// x1 = (-n+2i)/n, x2, x3 ~ U(0,1), y ~ Beta((n+i)/n, (4n-3i)/n), i = 1..n.
/// Per-index counter RNG streams keep the output reproducible bit for bit.
Dataset gen_cube(Eigen::Index n, std::uint64_t seed);

/// x1 = (i/n) cos(2 pi i/n), x2 = (i/n) sin(2 pi i/n), x3 ~ U(0,1), same y law.
Dataset gen_roll(Eigen::Index n, std::uint64_t seed);

/// Exact value of the statistic under Beta(a, b): closed forms for mean,
/// variance and skew; bisection on the regularized incomplete beta for
/// median and percentiles.
double true_statistic(const BetaParams& params, const StatisticKind& kind);

/// Deterministic evaluation grid: the synthetic feature construction at
/// i = 1..n_star with the uniform columns pinned to 0.5.
Eigen::MatrixXd test_grid(SyntheticKind kind, Eigen::Index n_star);

/// Beta parameters implied by the first feature coordinate of a grid row
/// (both families put i/n = (x1+1)/2 for Cube, i/n = radius for Roll).
BetaParams grid_beta_params(SyntheticKind kind, Eigen::Index i, Eigen::Index n_star);

} // namespace lfgp
