#include "lfgp/model_io.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace lfgp {

using nlohmann::json;

std::string double_to_hex(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double hex_to_double(const std::string& s) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw std::runtime_error("model_io: bad hex float '" + s + "'");
    return v;
}

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(double_to_hex(v[i]));
    return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v[i] = hex_to_double(arr[static_cast<std::size_t>(i)].get<std::string>());
    return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(double_to_hex(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, Eigen::Index expect_cols = -1) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    Eigen::Index c = expect_cols;
    if (r > 0) c = static_cast<Eigen::Index>(rows[0].size());
    if (c < 0) c = 0;
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (static_cast<Eigen::Index>(row.size()) != c)
            throw std::runtime_error("model_io: ragged matrix");
        for (Eigen::Index j = 0; j < c; ++j)
            m(i, j) = hex_to_double(row[static_cast<std::size_t>(j)].get<std::string>());
    }
    return m;
}

json statistic_to_json(const StatisticKind& kind) {
    json j;
    switch (kind.tag()) {
        case StatisticKind::Tag::Mean: j["kind"] = "mean"; break;
        case StatisticKind::Tag::Median: j["kind"] = "median"; break;
        case StatisticKind::Tag::Variance: j["kind"] = "variance"; break;
        case StatisticKind::Tag::Skew: j["kind"] = "skew"; break;
        case StatisticKind::Tag::Percentile:
            j["kind"] = "percentile";
            j["q"] = double_to_hex(kind.q());
            break;
    }
    return j;
}

StatisticKind statistic_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "mean") return StatisticKind::mean();
    if (kind == "median") return StatisticKind::median();
    if (kind == "variance") return StatisticKind::variance();
    if (kind == "skew") return StatisticKind::skew();
    if (kind == "percentile") return StatisticKind::percentile(hex_to_double(j.at("q").get<std::string>()));
    throw std::runtime_error("model_io: unknown statistic kind '" + kind + "'");
}

} // namespace

std::string model_to_string(const LfgpModel& model) {
    json doc;
    doc["format"] = "lfgp-model";
    doc["version"] = 1;
    doc["statistic"] = statistic_to_json(model.statistic());
    doc["amplitude"] = double_to_hex(model.hyperparams().amplitude);
    doc["length_scales"] = vector_to_json(model.hyperparams().length_scales);
    doc["jitter"] = double_to_hex(model.jitter());
    doc["centroids"] = matrix_to_json(model.centroids());
    doc["pseudo_observations"] = vector_to_json(model.pseudo_observations());
    if (model.embedding()) {
        const EmbeddingTable& t = *model.embedding();
        json e;
        e["method"] = t.config.method_name();
        e["k_neighbors"] = t.config.k_neighbors;
        e["target_dim"] = t.config.target_dim;
        e["source_points"] = matrix_to_json(t.source_points);
        e["embedded_points"] = matrix_to_json(t.embedded_points);
        doc["embedding"] = std::move(e);
    } else {
        doc["embedding"] = nullptr;
    }
    return doc.dump(2) + "\n";
}

LfgpModel model_from_string(const std::string& text) {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "lfgp-model")
        throw std::runtime_error("model_io: not an lfgp model document");
    if (doc.at("version").get<int>() != 1)
        throw std::runtime_error("model_io: unsupported model version");

    RbfHyperparams params;
    params.amplitude = hex_to_double(doc.at("amplitude").get<std::string>());
    params.length_scales = vector_from_json(doc.at("length_scales"));

    std::optional<EmbeddingTable> embedding;
    if (!doc.at("embedding").is_null()) {
        const json& e = doc.at("embedding");
        EmbeddingTable t;
        t.config.method = EmbeddingConfig::parse_method(e.at("method").get<std::string>());
        t.config.k_neighbors = e.at("k_neighbors").get<int>();
        t.config.target_dim = e.at("target_dim").get<int>();
        t.source_points = matrix_from_json(e.at("source_points"));
        t.embedded_points = matrix_from_json(e.at("embedded_points"));
        embedding = std::move(t);
    }

    Eigen::MatrixXd centroids = matrix_from_json(doc.at("centroids"), params.length_scales.size());
    Eigen::VectorXd yhat = vector_from_json(doc.at("pseudo_observations"));
    const double jitter = hex_to_double(doc.at("jitter").get<std::string>());
    const StatisticKind statistic = statistic_from_json(doc.at("statistic"));
    return LfgpModel::build(std::move(params), std::move(centroids), std::move(yhat), jitter,
                            statistic, std::move(embedding));
}

void save_model(const LfgpModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << model_to_string(model);
    if (!out) throw std::runtime_error("write failed: " + path);
}

LfgpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return model_from_string(text);
}

} // namespace lfgp
