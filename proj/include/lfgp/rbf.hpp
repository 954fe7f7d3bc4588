#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace lfgp {

/// Hyperparameters of the anisotropic RBF covariance
///   k(x_s, x_t) = C * exp(-A(x_s, x_t) / 2),
///   A(x_s, x_t) = sum_j ((x_{s,j} - x_{t,j}) / l_j)^2.
struct RbfHyperparams {
    double amplitude = 1.0;          // C
    Eigen::VectorXd length_scales;   // l, one per feature dimension

    Eigen::Index dim() const { return length_scales.size(); }

    void validate() const {
        if (!(amplitude > 0.0) || !std::isfinite(amplitude))
            throw std::invalid_argument("RbfHyperparams: amplitude must be positive");
        if (length_scales.size() == 0)
            throw std::invalid_argument("RbfHyperparams: empty length scales");
        for (Eigen::Index j = 0; j < length_scales.size(); ++j)
            if (!(length_scales[j] > 0.0) || !std::isfinite(length_scales[j]))
                throw std::invalid_argument("RbfHyperparams: length scales must be positive");
    }
};

/// Length-scale weighted squared distance A(x_s, x_t).
inline double rbf_scaled_sqdist(const Eigen::VectorXd& xs, const Eigen::VectorXd& xt,
                                const Eigen::VectorXd& length_scales) {
    if (xs.size() != xt.size() || xs.size() != length_scales.size())
        throw std::invalid_argument("rbf_scaled_sqdist: dimension mismatch");
    double a = 0.0;
    for (Eigen::Index j = 0; j < xs.size(); ++j) {
        const double t = (xs[j] - xt[j]) / length_scales[j];
        a += t * t;
    }
    return a;
}

inline double rbf_kernel(const Eigen::VectorXd& xs, const Eigen::VectorXd& xt,
                         const RbfHyperparams& params) {
    return params.amplitude * std::exp(-0.5 * rbf_scaled_sqdist(xs, xt, params.length_scales));
}

} // namespace lfgp
