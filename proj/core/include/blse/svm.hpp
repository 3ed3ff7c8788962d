#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace blse {

// One-vs-rest linear SVM over dense feature vectors.
struct LinearSvm {
  Eigen::MatrixXd weights;  // d x c
  Eigen::VectorXd bias;     // c
  double c_param = 1.0;

  int class_count() const { return static_cast<int>(weights.cols()); }
  Eigen::Index dim() const { return weights.rows(); }
};

struct SvmTrainInfo {
  // Objective of the retained iterate at each epoch end, non-increasing by
  // best-so-far tracking.
  std::vector<double> checkpoint_objectives;
};

// Pegasos-style deterministic subgradient descent on the hinge loss with
// L2 regularization (lambda = 1 / (c_param * n), bias as an augmented
// constant-1 feature, iterates projected onto the 1/sqrt(lambda) ball).
// Per class the retained parameters are the best-objective iterate among
// the per-epoch current and averaged candidates. class_count 0 infers
// max(label)+1.
LinearSvm svm_train(const Eigen::MatrixXd& X, std::span<const int> labels,
                    double c_param, std::uint64_t seed, int class_count = 0,
                    int epochs = 30, SvmTrainInfo* info = nullptr);

Eigen::MatrixXd svm_margins(const LinearSvm& model, const Eigen::MatrixXd& X);
// Argmax of the per-class margins, ties to the lowest class id.
int svm_predict(const LinearSvm& model, const Eigen::VectorXd& x);
std::vector<int> svm_predict(const LinearSvm& model, const Eigen::MatrixXd& X);
// Softmax over margins; a monotone surrogate, not a calibrated posterior.
Eigen::MatrixXd svm_probabilities(const LinearSvm& model, const Eigen::MatrixXd& X);

// Summed one-vs-rest primal objective at the model's own c_param.
double svm_objective(const LinearSvm& model, const Eigen::MatrixXd& X,
                     std::span<const int> labels);

inline const std::vector<double>& svm_c_grid() {
  static const std::vector<double> grid = {0.001, 0.003, 0.01, 0.03, 0.1,
                                           0.3,   1.0,   3.0,  10.0, 30.0};
  return grid;
}

// Grid search on dev macro F1; ties keep the smaller C. grid_scores, when
// given, receives (C, dev F1) per grid point.
double tune_svm_c(const Eigen::MatrixXd& X_train, std::span<const int> y_train,
                  const Eigen::MatrixXd& X_dev, std::span<const int> y_dev,
                  int class_count, std::uint64_t seed, int epochs = 30,
                  std::vector<std::pair<double, double>>* grid_scores = nullptr);

// Text format: "SVM 1 <d> <c> <c_param>", weights row-major (d lines), one
// bias line, 17 significant digits.
void save_svm(const LinearSvm& model, const std::string& path);
LinearSvm load_svm(const std::string& path);

}  // namespace blse
