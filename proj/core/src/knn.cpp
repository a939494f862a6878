#include "edastress/errors.hpp"
#include "learner_impls.hpp"

#include <algorithm>
#include <cmath>

namespace edastress::detail {

std::unique_ptr<ModelImpl> train_knn(const Matrix& x, std::span<const std::uint8_t> y,
                                     int k, KnnWeighting weighting) {
    Matrix copy = x;
    std::vector<std::uint8_t> labels(y.begin(), y.end());
    return std::make_unique<KnnModel>(std::move(copy), std::move(labels), k, weighting);
}

std::vector<std::uint8_t> KnnModel::predict(const Matrix& x) const {
    const std::size_t n_train = x_.rows;
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(k_), n_train);

    std::vector<std::uint8_t> out(x.rows);
    std::vector<std::pair<double, std::size_t>> dist(n_train);

    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row(i);
        for (std::size_t t = 0; t < n_train; ++t) {
            const double* xt = x_.row(t);
            double d2 = 0.0;
            for (std::size_t j = 0; j < x.cols; ++j) d2 += (xi[j] - xt[j]) * (xi[j] - xt[j]);
            dist[t] = {d2, t};
        }
        // Tie on distance resolved by training index for determinism.
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

        double vote0 = 0.0, vote1 = 0.0;
        bool exact = false;
        for (std::size_t j = 0; j < k; ++j) {
            if (dist[j].first <= 0.0) exact = true;
        }
        for (std::size_t j = 0; j < k; ++j) {
            const auto& [d2, idx] = dist[j];
            double w = 1.0;
            if (exact) {
                // An exact feature match dominates distance weighting.
                if (d2 > 0.0) continue;
            } else if (weighting_ == KnnWeighting::distance) {
                w = 1.0 / std::sqrt(d2);
            }
            (y_[idx] ? vote1 : vote0) += w;
        }
        out[i] = vote1 > vote0 ? 1 : 0;
    }
    return out;
}

nlohmann::ordered_json KnnModel::params_json() const {
    nlohmann::ordered_json j;
    j["kind"] = "knn";
    j["k"] = k_;
    j["weighting"] = weighting_ == KnnWeighting::uniform ? "uniform" : "distance";
    j["n_features"] = x_.cols;
    j["train_x"] = x_.data;
    j["train_y"] = y_;
    return j;
}

std::unique_ptr<ModelImpl> knn_from_json(const nlohmann::json& j) {
    Matrix x;
    x.cols = j.at("n_features").get<std::size_t>();
    x.data = j.at("train_x").get<std::vector<double>>();
    x.rows = x.cols ? x.data.size() / x.cols : 0;
    return std::make_unique<KnnModel>(std::move(x),
                                      j.at("train_y").get<std::vector<std::uint8_t>>(),
                                      j.at("k").get<int>(),
                                      j.at("weighting").get<std::string>() == "uniform"
                                          ? KnnWeighting::uniform
                                          : KnnWeighting::distance);
}

} // namespace edastress::detail
