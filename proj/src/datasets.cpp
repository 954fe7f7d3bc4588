#include "lfgp/datasets.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lfgp/rng.hpp"
#include "lfgp/special.hpp"

namespace lfgp {

SyntheticKind parse_synthetic_kind(const std::string& text) {
    if (text == "cube") return SyntheticKind::Cube;
    if (text == "roll") return SyntheticKind::Roll;
    throw std::invalid_argument("unknown dataset kind '" + text + "' (cube|roll)");
}

namespace {

Dataset gen_synthetic(SyntheticKind kind, Eigen::Index n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generator: n must be positive");
    Dataset data;
    data.X.resize(n, 3);
    data.y.resize(n);
    data.meta.generator = kind == SyntheticKind::Cube ? "cube" : "roll";
    data.meta.seed = seed;
    data.meta.n = n;

    const Rng root(seed);
    const auto nd = static_cast<double>(n);
    for (Eigen::Index i = 1; i <= n; ++i) {
        Rng rng = root.stream(static_cast<std::uint64_t>(i));
        const auto id = static_cast<double>(i);
        if (kind == SyntheticKind::Cube) {
            data.X(i - 1, 0) = (-nd + 2.0 * id) / nd;
            data.X(i - 1, 1) = rng.uniform01();
            data.X(i - 1, 2) = rng.uniform01();
        } else {
            const double r = id / nd;
            const double angle = 2.0 * std::numbers::pi * r;
            data.X(i - 1, 0) = r * std::cos(angle);
            data.X(i - 1, 1) = r * std::sin(angle);
            data.X(i - 1, 2) = rng.uniform01();
        }
        const BetaParams bp = BetaParams::at_index(i, n);
        data.y[i - 1] = rng.beta(bp.a, bp.b);
    }
    return data;
}

} // namespace

Dataset gen_cube(Eigen::Index n, std::uint64_t seed) { return gen_synthetic(SyntheticKind::Cube, n, seed); }

Dataset gen_roll(Eigen::Index n, std::uint64_t seed) { return gen_synthetic(SyntheticKind::Roll, n, seed); }

double true_statistic(const BetaParams& params, const StatisticKind& kind) {
    const double a = params.a, b = params.b;
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("true_statistic: invalid Beta parameters");
    switch (kind.tag()) {
        case StatisticKind::Tag::Mean:
            return a / (a + b);
        case StatisticKind::Tag::Variance:
            return a * b / ((a + b) * (a + b) * (a + b + 1.0));
        case StatisticKind::Tag::Skew:
            return 2.0 * (b - a) * std::sqrt(a + b + 1.0) / ((a + b + 2.0) * std::sqrt(a * b));
        case StatisticKind::Tag::Median:
            return beta_quantile(a, b, 0.5);
        case StatisticKind::Tag::Percentile:
            return beta_quantile(a, b, kind.q());
    }
    throw std::logic_error("unreachable statistic kind");
}

Eigen::MatrixXd test_grid(SyntheticKind kind, Eigen::Index n_star) {
    if (n_star < 1) throw std::invalid_argument("test_grid: n_star must be positive");
    Eigen::MatrixXd grid(n_star, 3);
    const auto nd = static_cast<double>(n_star);
    for (Eigen::Index i = 1; i <= n_star; ++i) {
        const auto id = static_cast<double>(i);
        if (kind == SyntheticKind::Cube) {
            grid(i - 1, 0) = (-nd + 2.0 * id) / nd;
            grid(i - 1, 1) = 0.5;
            grid(i - 1, 2) = 0.5;
        } else {
            const double r = id / nd;
            const double angle = 2.0 * std::numbers::pi * r;
            grid(i - 1, 0) = r * std::cos(angle);
            grid(i - 1, 1) = r * std::sin(angle);
            grid(i - 1, 2) = 0.5;
        }
    }
    return grid;
}

BetaParams grid_beta_params(SyntheticKind, Eigen::Index i, Eigen::Index n_star) {
    return BetaParams::at_index(i, n_star);
}

} // namespace lfgp
