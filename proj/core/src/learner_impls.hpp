#pragma once

#include "edastress/learners.hpp"

#include <cstdint>
#include <span>

namespace edastress::detail {

// Linear decision function w.x + b shared by LR and linear SVM.
class LinearModel : public ModelImpl {
public:
    LinearModel(std::vector<double> w, double b) : w_(std::move(w)), b_(b) {}

    std::vector<std::uint8_t> predict(const Matrix& x) const override;
    nlohmann::ordered_json params_json() const override;

    const std::vector<double>& weights() const { return w_; }
    double bias() const { return b_; }

private:
    std::vector<double> w_;
    double b_ = 0.0;
};

class RbfSvmModel : public ModelImpl {
public:
    RbfSvmModel(Matrix support, std::vector<double> alpha_y, double gamma)
        : support_(std::move(support)), alpha_y_(std::move(alpha_y)), gamma_(gamma) {}

    std::vector<std::uint8_t> predict(const Matrix& x) const override;
    nlohmann::ordered_json params_json() const override;

private:
    Matrix support_;
    std::vector<double> alpha_y_;
    double gamma_;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double p1 = 0.0; // leaf: weighted probability of class 1
};

class ForestModel : public ModelImpl {
public:
    explicit ForestModel(std::vector<std::vector<TreeNode>> trees)
        : trees_(std::move(trees)) {}

    std::vector<std::uint8_t> predict(const Matrix& x) const override;
    nlohmann::ordered_json params_json() const override;

    const std::vector<std::vector<TreeNode>>& trees() const { return trees_; }

private:
    std::vector<std::vector<TreeNode>> trees_;
};

class MlpModel : public ModelImpl {
public:
    MlpModel(std::vector<double> params, int hidden, std::size_t d)
        : params_(std::move(params)), hidden_(hidden), d_(d) {}

    std::vector<std::uint8_t> predict(const Matrix& x) const override;
    nlohmann::ordered_json params_json() const override;

private:
    std::vector<double> params_;
    int hidden_;
    std::size_t d_;
};

class KnnModel : public ModelImpl {
public:
    KnnModel(Matrix train_x, std::vector<std::uint8_t> train_y, int k, KnnWeighting weighting)
        : x_(std::move(train_x)), y_(std::move(train_y)), k_(k), weighting_(weighting) {}

    std::vector<std::uint8_t> predict(const Matrix& x) const override;
    nlohmann::ordered_json params_json() const override;

private:
    Matrix x_;
    std::vector<std::uint8_t> y_;
    int k_;
    KnnWeighting weighting_;
};

// Trainers. X is already standardized where applicable; sw holds per-sample
// weights derived from the class-weight mode.
std::unique_ptr<ModelImpl> train_logistic(const Matrix& x, std::span<const std::uint8_t> y,
                                          std::span<const double> sw, double c,
                                          const std::string& grid_point);
std::unique_ptr<ModelImpl> train_linear_svm(const Matrix& x, std::span<const std::uint8_t> y,
                                            std::span<const double> sw, double c,
                                            std::uint64_t seed);
std::unique_ptr<ModelImpl> train_rbf_svm(const Matrix& x, std::span<const std::uint8_t> y,
                                         std::span<const double> sw, double c,
                                         std::uint64_t seed);
std::unique_ptr<ModelImpl> train_forest(const Matrix& x, std::span<const std::uint8_t> y,
                                        const ClassWeights& cw, const ModelSpec& spec,
                                        std::uint64_t seed);
std::unique_ptr<ModelImpl> train_mlp(const Matrix& x, std::span<const std::uint8_t> y,
                                     std::span<const double> sw, int hidden,
                                     std::uint64_t seed, const std::string& grid_point);
std::unique_ptr<ModelImpl> train_knn(const Matrix& x, std::span<const std::uint8_t> y,
                                     int k, KnnWeighting weighting);

// JSON deserializers matching each params_json() layout.
std::unique_ptr<ModelImpl> linear_from_json(const nlohmann::json& j);
std::unique_ptr<ModelImpl> rbf_from_json(const nlohmann::json& j);
std::unique_ptr<ModelImpl> forest_from_json(const nlohmann::json& j);
std::unique_ptr<ModelImpl> mlp_from_json(const nlohmann::json& j);
std::unique_ptr<ModelImpl> knn_from_json(const nlohmann::json& j);

} // namespace edastress::detail
