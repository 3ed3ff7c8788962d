#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace blse {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  Eigen::VectorXd dist;  // class distribution, sums to 1
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root

  const Eigen::VectorXd& leaf_dist(const Eigen::VectorXd& x) const;
};

struct ForestConfig {
  int tree_count = 200;
  int max_depth = 0;  // 0 = unlimited
  std::uint64_t seed = 1;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  int arity = 0;
  int class_count = 0;
  int max_depth = 0;
  std::uint64_t seed = 1;
  double oob_accuracy = 0.0;  // filled by forest_train, not serialized
};

// Bootstrap-sampled Gini trees with a random feature subset of size
// ceil(sqrt(arity)) per node; per-tree rng derives from the master seed, so
// trees are order-independent and the forest is reproducible.
RandomForest forest_train(const Eigen::MatrixXd& X, std::span<const int> labels,
                          const ForestConfig& config, int class_count = 0);

// Majority vote over trees, ties to the lowest class id.
int forest_predict(const RandomForest& model, const Eigen::VectorXd& x);
std::vector<int> forest_predict(const RandomForest& model, const Eigen::MatrixXd& X);
// Mean of the reached leaf distributions.
Eigen::MatrixXd forest_probabilities(const RandomForest& model, const Eigen::MatrixXd& X);

// Text format: "RF 1 <arity> <classes> <tree_count> <max_depth>", then per
// tree a "tree <node_count>" line and one node per line:
// "<feature> <threshold> <left> <right> <dist...>".
void save_forest(const RandomForest& model, const std::string& path);
RandomForest load_forest(const std::string& path);

}  // namespace blse
