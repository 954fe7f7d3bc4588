#pragma once

#include <stdexcept>
#include <string>

namespace lfgp {

/// Kernel matrix could not be factorized even after jitter escalation.
class IllConditionedKernelError : public std::runtime_error {
public:
    explicit IllConditionedKernelError(const std::string& what) : std::runtime_error(what) {}
};

/// An estimator was asked for more information than the sample carries.
class InsufficientDataError : public std::runtime_error {
public:
    explicit InsufficientDataError(const std::string& what) : std::runtime_error(what) {}
};

/// The k-NN graph splits into several components, geodesics are undefined.
class GraphConnectivityError : public std::runtime_error {
public:
    GraphConnectivityError(const std::string& what, int component_count)
        : std::runtime_error(what), components(component_count) {}
    int components;
};

/// Eigen-solver or weight-solver breakdown inside a manifold embedding.
class EmbeddingFailureError : public std::runtime_error {
public:
    explicit EmbeddingFailureError(const std::string& what) : std::runtime_error(what) {}
};

/// Corrupt or misaligned market data (duplicate/backward timestamps and the like).
class DataIntegrityError : public std::runtime_error {
public:
    explicit DataIntegrityError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace lfgp
