#include "blse/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "blse/eval.hpp"
#include "blse/rng.hpp"
#include "blse/util.hpp"

namespace blse {

namespace {

int infer_class_count(std::span<const int> labels, int requested) {
  int mx = -1;
  for (int y : labels) {
    require(y >= 0, "svm: negative label");
    mx = std::max(mx, y);
  }
  if (requested > 0) {
    require(mx < requested, "svm: label outside the requested class count");
    return requested;
  }
  return std::max(mx + 1, 2);
}

// Primal objective of one binary machine over augmented features.
double binary_objective(const Eigen::VectorXd& w, const Eigen::MatrixXd& Xa,
                        const Eigen::VectorXd& y, double lambda) {
  Eigen::ArrayXd margins = (Xa * w).array() * y.array();
  double hinge = (1.0 - margins).max(0.0).sum() / static_cast<double>(Xa.rows());
  return 0.5 * lambda * w.squaredNorm() + hinge;
}

}  // namespace

LinearSvm svm_train(const Eigen::MatrixXd& X, std::span<const int> labels,
                    double c_param, std::uint64_t seed, int class_count,
                    int epochs, SvmTrainInfo* info) {
  require(X.rows() > 0, "svm_train: empty feature matrix");
  require(static_cast<size_t>(X.rows()) == labels.size(),
          "svm_train: feature/label count mismatch");
  require(c_param > 0.0, "svm_train: c_param must be positive");
  require(epochs >= 1, "svm_train: epochs must be >= 1");
  const int c = infer_class_count(labels, class_count);
  bool multi = false;
  for (size_t i = 1; i < labels.size(); ++i)
    if (labels[i] != labels[0]) {
      multi = true;
      break;
    }
  require(multi, "svm_train: all labels identical, need at least two classes");

  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const double lambda = 1.0 / (c_param * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);

  Eigen::MatrixXd Xa(n, d + 1);
  Xa.leftCols(d) = X;
  Xa.col(d).setOnes();

  LinearSvm model;
  model.weights.resize(d, c);
  model.bias.resize(c);
  model.c_param = c_param;

  std::vector<double> checkpoints(static_cast<size_t>(epochs), 0.0);
  Rng master(seed);

  for (int j = 0; j < c; ++j) {
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i)
      y[i] = labels[static_cast<size_t>(i)] == j ? 1.0 : -1.0;

    Rng rng = master.derive(static_cast<std::uint64_t>(j));
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d + 1);
    Eigen::VectorXd wsum = Eigen::VectorXd::Zero(d + 1);
    long long t = 0;

    Eigen::VectorXd best = w;
    double best_obj = binary_objective(w, Xa, y, lambda);

    for (int epoch = 0; epoch < epochs; ++epoch) {
      std::vector<size_t> order = shuffled_indices(static_cast<size_t>(n), rng);
      for (size_t idx : order) {
        ++t;
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        const Eigen::Index i = static_cast<Eigen::Index>(idx);
        const double margin = y[i] * Xa.row(i).dot(w);
        w *= 1.0 - eta * lambda;
        if (margin < 1.0) w += (eta * y[i]) * Xa.row(i).transpose();
        const double norm = w.norm();
        if (norm > radius) w *= radius / norm;
        wsum += w;
      }
      Eigen::VectorXd wavg = wsum / static_cast<double>(t);
      for (const Eigen::VectorXd& cand : {w, wavg}) {
        const double obj = binary_objective(cand, Xa, y, lambda);
        if (obj < best_obj) {
          best_obj = obj;
          best = cand;
        }
      }
      checkpoints[static_cast<size_t>(epoch)] += best_obj;
    }

    model.weights.col(j) = best.head(d);
    model.bias[j] = best[d];
  }

  require(model.weights.allFinite() && model.bias.allFinite(),
          "svm_train: non-finite parameters");
  if (info) info->checkpoint_objectives = std::move(checkpoints);
  return model;
}

Eigen::MatrixXd svm_margins(const LinearSvm& model, const Eigen::MatrixXd& X) {
  require(X.cols() == model.weights.rows(), "svm: feature dim does not match the model");
  return (X * model.weights).rowwise() + model.bias.transpose();
}

int svm_predict(const LinearSvm& model, const Eigen::VectorXd& x) {
  Eigen::MatrixXd m = svm_margins(model, x.transpose());
  int best = 0;
  for (int j = 1; j < model.class_count(); ++j)
    if (m(0, j) > m(0, best)) best = j;
  return best;
}

std::vector<int> svm_predict(const LinearSvm& model, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd m = svm_margins(model, X);
  std::vector<int> out(static_cast<size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    int best = 0;
    for (int j = 1; j < model.class_count(); ++j)
      if (m(i, j) > m(i, best)) best = j;
    out[static_cast<size_t>(i)] = best;
  }
  return out;
}

Eigen::MatrixXd svm_probabilities(const LinearSvm& model, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd m = svm_margins(model, X);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::ArrayXd e = (m.row(i).array() - m.row(i).maxCoeff()).exp();
    m.row(i) = e / e.sum();
  }
  return m;
}

double svm_objective(const LinearSvm& model, const Eigen::MatrixXd& X,
                     std::span<const int> labels) {
  require(static_cast<size_t>(X.rows()) == labels.size(),
          "svm_objective: feature/label count mismatch");
  const Eigen::Index n = X.rows();
  const Eigen::Index d = X.cols();
  const double lambda = 1.0 / (model.c_param * static_cast<double>(n));
  Eigen::MatrixXd Xa(n, d + 1);
  Xa.leftCols(d) = X;
  Xa.col(d).setOnes();
  double total = 0.0;
  for (int j = 0; j < model.class_count(); ++j) {
    Eigen::VectorXd w(d + 1);
    w.head(d) = model.weights.col(j);
    w[d] = model.bias[j];
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i)
      y[i] = labels[static_cast<size_t>(i)] == j ? 1.0 : -1.0;
    total += binary_objective(w, Xa, y, lambda);
  }
  return total;
}

double tune_svm_c(const Eigen::MatrixXd& X_train, std::span<const int> y_train,
                  const Eigen::MatrixXd& X_dev, std::span<const int> y_dev,
                  int class_count, std::uint64_t seed, int epochs,
                  std::vector<std::pair<double, double>>* grid_scores) {
  require(X_dev.rows() > 0, "tune_svm_c: empty dev set");
  double best_c = svm_c_grid().front();
  double best_f1 = -1.0;
  for (double c : svm_c_grid()) {
    LinearSvm model = svm_train(X_train, y_train, c, seed, class_count, epochs);
    std::vector<int> pred = svm_predict(model, X_dev);
    const double f1 = macro_f1(y_dev, pred, model.class_count());
    if (grid_scores) grid_scores->emplace_back(c, f1);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_c = c;
    }
  }
  return best_c;
}

void save_svm(const LinearSvm& model, const std::string& path) {
  std::string out = "SVM 1 " + std::to_string(model.weights.rows()) + ' ' +
                    std::to_string(model.class_count()) + ' ' +
                    format_g17(model.c_param) + '\n';
  for (Eigen::Index r = 0; r < model.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.weights.cols(); ++c) {
      if (c) out += ' ';
      out += format_g17(model.weights(r, c));
    }
    out += '\n';
  }
  for (Eigen::Index c = 0; c < model.bias.size(); ++c) {
    if (c) out += ' ';
    out += format_g17(model.bias[c]);
  }
  out += '\n';
  write_file(path, out);
}

LinearSvm load_svm(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "svm file: empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto head = split_whitespace(line);
  require(head.size() == 5 && head[0] == "SVM" && head[1] == "1",
          "svm file: bad header, expected 'SVM 1 <d> <c> <c_param>'");
  long long d = 0, c = 0;
  double c_param = 0.0;
  require(try_parse_long(head[2], d) && try_parse_long(head[3], c) &&
              try_parse_double(head[4], c_param),
          "svm file: non-numeric header field");
  require(d > 0 && c > 1 && c_param > 0.0, "svm file: invalid header values");

  LinearSvm model;
  model.c_param = c_param;
  model.weights.resize(d, c);
  auto parse_row = [&](Eigen::Index expected, const char* what) {
    require(static_cast<bool>(std::getline(in, line)),
            std::string("svm file: truncated ") + what);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_whitespace(line);
    require(static_cast<Eigen::Index>(fields.size()) == expected,
            std::string("svm file: wrong column count in ") + what);
    Eigen::VectorXd row(expected);
    for (Eigen::Index i = 0; i < expected; ++i) {
      double v = 0.0;
      require(try_parse_double(fields[static_cast<size_t>(i)], v),
              std::string("svm file: non-numeric value in ") + what);
      row[i] = v;
    }
    return row;
  };
  for (Eigen::Index r = 0; r < d; ++r)
    model.weights.row(r) = parse_row(c, "weights").transpose();
  model.bias = parse_row(c, "bias");
  require(model.weights.allFinite() && model.bias.allFinite(),
          "svm file: non-finite parameters");
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(split_whitespace(line).empty(), "svm file: trailing data");
  }
  return model;
}

}  // namespace blse
