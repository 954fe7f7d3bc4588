#include "lfgp/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace lfgp {

void Dataset::validate() const {
    if (X.rows() != y.size()) throw std::invalid_argument("Dataset: X row count differs from y length");
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
    data.validate();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (Eigen::Index j = 0; j < data.dim(); ++j) out << 'x' << (j + 1) << ',';
    out << "y\n";
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < data.dim(); ++j) out << format_double(data.X(i, j)) << ',';
        out << format_double(data.y[i]) << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);

    std::ofstream meta(path + ".meta.txt");
    if (!meta) throw std::runtime_error("cannot open for writing: " + path + ".meta.txt");
    meta << "generator=" << data.meta.generator << '\n'
         << "n=" << data.size() << '\n'
         << "d=" << data.dim() << '\n'
         << "seed=" << data.meta.seed << '\n';
}

void save_points_csv(const Eigen::MatrixXd& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (Eigen::Index j = 0; j < points.cols(); ++j) out << (j ? "," : "") << 'x' << (j + 1);
    out << '\n';
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index j = 0; j < points.cols(); ++j)
            out << (j ? "," : "") << format_double(points(i, j));
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

Eigen::MatrixXd load_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty points file: " + path);
    std::size_t cols = 1;
    for (char c : line) cols += c == ',' ? 1 : 0;
    const bool has_y = line.size() >= 2 && line.rfind(",y") == line.size() - 2;
    const auto d = static_cast<Eigen::Index>(has_y ? cols - 1 : cols);

    std::vector<double> xs;
    Eigen::Index rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        Eigen::Index col = 0;
        while (std::getline(ss, tok, ',')) {
            if (col < d) xs.push_back(std::strtod(tok.c_str(), nullptr));
            ++col;
        }
        if (col != static_cast<Eigen::Index>(cols)) throw std::runtime_error("ragged points row in " + path);
        ++rows;
    }
    Eigen::MatrixXd points(rows, d);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < d; ++j) points(i, j) = xs[static_cast<std::size_t>(i * d + j)];
    return points;
}

Dataset load_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset file: " + path);

    // Header x1,...,xd,y fixes the dimension.
    Eigen::Index d = 0;
    {
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
        if (cols.empty() || cols.back() != "y")
            throw std::runtime_error("dataset header must end with 'y': " + path);
        d = static_cast<Eigen::Index>(cols.size()) - 1;
    }

    std::vector<double> xs, ys;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        Eigen::Index col = 0;
        while (std::getline(ss, tok, ',')) {
            const double v = std::strtod(tok.c_str(), nullptr);
            if (col < d) xs.push_back(v); else ys.push_back(v);
            ++col;
        }
        if (col != d + 1) throw std::runtime_error("ragged dataset row in " + path);
    }

    Dataset data;
    const Eigen::Index n = static_cast<Eigen::Index>(ys.size());
    data.X.resize(n, d);
    data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) data.X(i, j) = xs[static_cast<std::size_t>(i * d + j)];
        data.y[i] = ys[static_cast<std::size_t>(i)];
    }
    data.meta.generator = "external";
    data.meta.n = n;
    return data;
}

} // namespace lfgp
