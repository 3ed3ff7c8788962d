#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace blse {

struct EvalReport {
  Eigen::MatrixXi confusion;  // rows gold, columns predicted
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  int class_count = 0;
  int example_count = 0;

  std::string to_csv() const;
  std::string to_table() const;
};

// Per-class precision/recall/F1 with the 0-when-undefined convention.
// Macro scores average over the classes present in gold.
EvalReport score(std::span<const int> gold, std::span<const int> pred,
                 int class_count);

double macro_f1(std::span<const int> gold, std::span<const int> pred,
                int class_count);

struct SignificanceResult {
  double p_value = 1.0;
  int runs = 0;
  double observed_diff = 0.0;
};

// Approximate randomization over paired predictions: each run swaps each
// position's pair with probability 0.5; the statistic is the absolute macro
// F1 difference; p uses the add-one estimator.
SignificanceResult approx_randomization(std::span<const int> gold,
                                        std::span<const int> pred_a,
                                        std::span<const int> pred_b,
                                        int class_count, int runs,
                                        std::uint64_t seed);

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Mean cosine over all unordered pairs of distinct rows.
double mean_pairwise_cosine(const Eigen::MatrixXd& rows);
// Mean cosine over the full cross product of rows.
double mean_cross_cosine(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);
// Mean cosine over row-aligned pairs (a.row(i), b.row(i)).
double mean_paired_cosine(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace blse
