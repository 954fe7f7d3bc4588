#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace lfgp {

/// Raw observations D = {X, y}: n feature vectors paired with n scalar
/// responses, plus generator provenance.
struct Dataset {
    Eigen::MatrixXd X; // n x d
    Eigen::VectorXd y; // n

    struct Meta {
        std::string generator; // "cube", "roll", "rounds", "external", ...
        std::uint64_t seed = 0;
        Eigen::Index n = 0;
    } meta;

    Eigen::Index size() const { return X.rows(); }
    Eigen::Index dim() const { return X.cols(); }

    void validate() const;
};

/// CSV with header x1,...,xd,y; values printed with 17 significant digits so
/// re-reading restores every double exactly. A sidecar "<path>.meta.txt"
/// records the generator metadata.
void save_dataset_csv(const Dataset& data, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

/// Feature-only CSV (header x1,...,xd); a trailing y column, when present,
/// is ignored. Used for prediction grids and joint-embedding extras.
void save_points_csv(const Eigen::MatrixXd& points, const std::string& path);
Eigen::MatrixXd load_points_csv(const std::string& path);

/// Format helpers shared by the CSV writers: shortest decimal that
/// round-trips the double.
std::string format_double(double v);

} // namespace lfgp
