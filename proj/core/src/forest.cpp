#include "blse/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "blse/rng.hpp"
#include "blse/util.hpp"

namespace blse {

namespace {

int infer_class_count(std::span<const int> labels, int requested) {
  int mx = -1;
  for (int y : labels) {
    require(y >= 0, "forest: negative label");
    mx = std::max(mx, y);
  }
  if (requested > 0) {
    require(mx < requested, "forest: label outside the requested class count");
    return requested;
  }
  return std::max(mx + 1, 2);
}

double gini(const std::vector<int>& counts, int total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (int n : counts) {
    const double p = static_cast<double>(n) / static_cast<double>(total);
    g -= p * p;
  }
  return g;
}

struct TreeBuilder {
  const Eigen::MatrixXd& X;
  std::span<const int> y;
  int classes;
  int max_depth;
  int subset;
  Rng& rng;
  std::vector<TreeNode> nodes;

  Eigen::VectorXd distribution(const std::vector<int>& counts, int total) const {
    Eigen::VectorXd dist(classes);
    for (int c = 0; c < classes; ++c)
      dist[c] = static_cast<double>(counts[static_cast<size_t>(c)]) /
                static_cast<double>(total);
    return dist;
  }

  int build(std::vector<Eigen::Index>& idx, int depth) {
    std::vector<int> counts(static_cast<size_t>(classes), 0);
    for (Eigen::Index i : idx) ++counts[static_cast<size_t>(y[static_cast<size_t>(i)])];
    const int total = static_cast<int>(idx.size());

    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes.back().dist = distribution(counts, total);

    const bool pure =
        *std::max_element(counts.begin(), counts.end()) == total;
    if (pure || total < 2 || (max_depth > 0 && depth >= max_depth)) return node_id;

    // Candidate features: a fresh without-replacement draw per node.
    std::vector<int> feats(static_cast<size_t>(X.cols()));
    std::iota(feats.begin(), feats.end(), 0);
    for (int i = 0; i < subset; ++i) {
      const size_t j =
          static_cast<size_t>(i) +
          static_cast<size_t>(rng.below(static_cast<std::uint64_t>(X.cols() - i)));
      std::swap(feats[static_cast<size_t>(i)], feats[j]);
    }
    feats.resize(static_cast<size_t>(subset));

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = std::numeric_limits<double>::infinity();

    std::vector<Eigen::Index> sorted;
    std::vector<int> left_counts(static_cast<size_t>(classes));
    for (int f : feats) {
      sorted = idx;
      std::sort(sorted.begin(), sorted.end(), [&](Eigen::Index a, Eigen::Index b) {
        return X(a, f) < X(b, f);
      });
      std::fill(left_counts.begin(), left_counts.end(), 0);
      for (size_t i = 0; i + 1 < sorted.size(); ++i) {
        ++left_counts[static_cast<size_t>(y[static_cast<size_t>(sorted[i])])];
        const double lo = X(sorted[i], f);
        const double hi = X(sorted[i + 1], f);
        if (!(hi > lo)) continue;
        const int nl = static_cast<int>(i) + 1;
        const int nr = total - nl;
        std::vector<int> right_counts(static_cast<size_t>(classes));
        for (int c = 0; c < classes; ++c)
          right_counts[static_cast<size_t>(c)] =
              counts[static_cast<size_t>(c)] - left_counts[static_cast<size_t>(c)];
        const double score = (nl * gini(left_counts, nl) + nr * gini(right_counts, nr)) /
                             static_cast<double>(total);
        if (score < best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (lo + hi);
        }
      }
    }
    if (best_feature < 0) return node_id;  // every candidate is constant here

    std::vector<Eigen::Index> left, right;
    for (Eigen::Index i : idx)
      (X(i, best_feature) <= best_threshold ? left : right).push_back(i);
    // Midpoint thresholds always separate, but guard against degenerate
    // arithmetic on adjacent floats.
    if (left.empty() || right.empty()) return node_id;

    idx.clear();
    idx.shrink_to_fit();
    nodes[static_cast<size_t>(node_id)].feature = best_feature;
    nodes[static_cast<size_t>(node_id)].threshold = best_threshold;
    const int l = build(left, depth + 1);
    nodes[static_cast<size_t>(node_id)].left = l;
    const int r = build(right, depth + 1);
    nodes[static_cast<size_t>(node_id)].right = r;
    return node_id;
  }
};

int dist_argmax(const Eigen::VectorXd& dist) {
  int best = 0;
  for (int c = 1; c < dist.size(); ++c)
    if (dist[c] > dist[best]) best = c;
  return best;
}

}  // namespace

const Eigen::VectorXd& DecisionTree::leaf_dist(const Eigen::VectorXd& x) const {
  int node = 0;
  while (nodes[static_cast<size_t>(node)].feature >= 0) {
    const TreeNode& nd = nodes[static_cast<size_t>(node)];
    node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return nodes[static_cast<size_t>(node)].dist;
}

RandomForest forest_train(const Eigen::MatrixXd& X, std::span<const int> labels,
                          const ForestConfig& config, int class_count) {
  require(X.rows() > 0 && X.cols() > 0, "forest_train: empty feature matrix");
  require(static_cast<size_t>(X.rows()) == labels.size(),
          "forest_train: feature/label count mismatch");
  require(config.tree_count >= 1, "forest_train: tree_count must be >= 1");
  require(config.max_depth >= 0, "forest_train: max_depth must be >= 0");
  const int c = infer_class_count(labels, class_count);
  bool multi = false;
  for (size_t i = 1; i < labels.size(); ++i)
    if (labels[i] != labels[0]) {
      multi = true;
      break;
    }
  require(multi, "forest_train: all labels identical, need at least two classes");

  const Eigen::Index n = X.rows();
  const int subset = static_cast<int>(
      std::ceil(std::sqrt(static_cast<double>(X.cols()))));

  RandomForest forest;
  forest.arity = static_cast<int>(X.cols());
  forest.class_count = c;
  forest.max_depth = config.max_depth;
  forest.seed = config.seed;
  forest.trees.reserve(static_cast<size_t>(config.tree_count));

  Rng master(config.seed);
  Eigen::MatrixXi oob_votes = Eigen::MatrixXi::Zero(n, c);

  for (int t = 0; t < config.tree_count; ++t) {
    Rng rng = master.derive(static_cast<std::uint64_t>(t));
    std::vector<Eigen::Index> sample(static_cast<size_t>(n));
    std::vector<bool> in_bag(static_cast<size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index pick =
          static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
      sample[static_cast<size_t>(i)] = pick;
      in_bag[static_cast<size_t>(pick)] = true;
    }

    TreeBuilder builder{X, labels, c, config.max_depth, subset, rng, {}};
    builder.build(sample, 0);
    forest.trees.push_back(DecisionTree{std::move(builder.nodes)});

    const DecisionTree& tree = forest.trees.back();
    for (Eigen::Index i = 0; i < n; ++i)
      if (!in_bag[static_cast<size_t>(i)])
        ++oob_votes(i, dist_argmax(tree.leaf_dist(X.row(i).transpose())));
  }

  int voted = 0, correct = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (oob_votes.row(i).sum() == 0) continue;
    ++voted;
    int best = 0;
    for (int j = 1; j < c; ++j)
      if (oob_votes(i, j) > oob_votes(i, best)) best = j;
    if (best == labels[static_cast<size_t>(i)]) ++correct;
  }
  forest.oob_accuracy =
      voted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(voted);
  return forest;
}

int forest_predict(const RandomForest& model, const Eigen::VectorXd& x) {
  require(x.size() == model.arity, "forest_predict: feature arity mismatch");
  std::vector<int> votes(static_cast<size_t>(model.class_count), 0);
  for (const DecisionTree& tree : model.trees)
    ++votes[static_cast<size_t>(dist_argmax(tree.leaf_dist(x)))];
  int best = 0;
  for (int j = 1; j < model.class_count; ++j)
    if (votes[static_cast<size_t>(j)] > votes[static_cast<size_t>(best)]) best = j;
  return best;
}

std::vector<int> forest_predict(const RandomForest& model, const Eigen::MatrixXd& X) {
  std::vector<int> out(static_cast<size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Eigen::VectorXd x = X.row(i).transpose();
    out[static_cast<size_t>(i)] = forest_predict(model, x);
  }
  return out;
}

Eigen::MatrixXd forest_probabilities(const RandomForest& model, const Eigen::MatrixXd& X) {
  require(X.cols() == model.arity, "forest_probabilities: feature arity mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.rows(), model.class_count);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const Eigen::VectorXd x = X.row(i).transpose();
    for (const DecisionTree& tree : model.trees) out.row(i) += tree.leaf_dist(x);
    out.row(i) /= static_cast<double>(model.trees.size());
  }
  return out;
}

void save_forest(const RandomForest& model, const std::string& path) {
  std::string out = "RF 1 " + std::to_string(model.arity) + ' ' +
                    std::to_string(model.class_count) + ' ' +
                    std::to_string(model.trees.size()) + ' ' +
                    std::to_string(model.max_depth) + '\n';
  for (const DecisionTree& tree : model.trees) {
    out += "tree " + std::to_string(tree.nodes.size()) + '\n';
    for (const TreeNode& nd : tree.nodes) {
      out += std::to_string(nd.feature);
      out += ' ';
      out += format_g17(nd.threshold);
      out += ' ';
      out += std::to_string(nd.left);
      out += ' ';
      out += std::to_string(nd.right);
      for (Eigen::Index c = 0; c < nd.dist.size(); ++c) {
        out += ' ';
        out += format_g17(nd.dist[c]);
      }
      out += '\n';
    }
  }
  write_file(path, out);
}

RandomForest load_forest(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  auto next_fields = [&](const char* what) {
    require(static_cast<bool>(std::getline(in, line)),
            std::string("forest file: truncated ") + what);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return split_whitespace(line);
  };

  auto head = next_fields("header");
  require(head.size() == 6 && head[0] == "RF" && head[1] == "1",
          "forest file: bad header, expected 'RF 1 <arity> <classes> <trees> <max_depth>'");
  long long arity = 0, classes = 0, tree_count = 0, max_depth = 0;
  require(try_parse_long(head[2], arity) && try_parse_long(head[3], classes) &&
              try_parse_long(head[4], tree_count) && try_parse_long(head[5], max_depth),
          "forest file: non-numeric header field");
  require(arity > 0 && classes > 1 && tree_count > 0 && max_depth >= 0,
          "forest file: invalid header values");

  RandomForest model;
  model.arity = static_cast<int>(arity);
  model.class_count = static_cast<int>(classes);
  model.max_depth = static_cast<int>(max_depth);
  model.trees.reserve(static_cast<size_t>(tree_count));

  for (long long t = 0; t < tree_count; ++t) {
    auto fields = next_fields("tree header");
    require(fields.size() == 2 && fields[0] == "tree", "forest file: bad tree header");
    long long node_count = 0;
    require(try_parse_long(fields[1], node_count) && node_count > 0,
            "forest file: bad node count");
    DecisionTree tree;
    tree.nodes.resize(static_cast<size_t>(node_count));
    for (long long nidx = 0; nidx < node_count; ++nidx) {
      fields = next_fields("node");
      require(static_cast<long long>(fields.size()) == 4 + classes,
              "forest file: wrong field count in a node line");
      TreeNode& nd = tree.nodes[static_cast<size_t>(nidx)];
      long long feature = 0, left = 0, right = 0;
      require(try_parse_long(fields[0], feature) && try_parse_double(fields[1], nd.threshold) &&
                  try_parse_long(fields[2], left) && try_parse_long(fields[3], right),
              "forest file: non-numeric node field");
      require(feature >= -1 && feature < arity, "forest file: feature index out of range");
      nd.feature = static_cast<int>(feature);
      nd.left = static_cast<int>(left);
      nd.right = static_cast<int>(right);
      if (nd.feature >= 0) {
        require(left >= 0 && left < node_count && right >= 0 && right < node_count,
                "forest file: child index out of range");
      } else {
        require(left == -1 && right == -1, "forest file: leaf with children");
      }
      nd.dist.resize(classes);
      double sum = 0.0;
      for (long long c = 0; c < classes; ++c) {
        double v = 0.0;
        require(try_parse_double(fields[static_cast<size_t>(4 + c)], v) && v >= 0.0,
                "forest file: bad distribution value");
        nd.dist[c] = v;
        sum += v;
      }
      require(std::abs(sum - 1.0) < 1e-9, "forest file: leaf distribution does not sum to 1");
    }
    model.trees.push_back(std::move(tree));
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(split_whitespace(line).empty(), "forest file: trailing data");
  }
  return model;
}

}  // namespace blse
