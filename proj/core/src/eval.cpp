#include "blse/eval.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "blse/rng.hpp"
#include "blse/util.hpp"

namespace blse {

EvalReport score(std::span<const int> gold, std::span<const int> pred,
                 int class_count) {
  require(gold.size() == pred.size(), "score: gold/pred length mismatch");
  require(!gold.empty(), "score: empty inputs");
  require(class_count >= 2, "score: need at least two classes");

  EvalReport report;
  report.class_count = class_count;
  report.example_count = static_cast<int>(gold.size());
  report.confusion = Eigen::MatrixXi::Zero(class_count, class_count);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    require(gold[i] >= 0 && gold[i] < class_count, "score: gold label out of range");
    require(pred[i] >= 0 && pred[i] < class_count, "score: predicted label out of range");
    ++report.confusion(gold[i], pred[i]);
  }

  report.precision.resize(static_cast<std::size_t>(class_count), 0.0);
  report.recall.resize(static_cast<std::size_t>(class_count), 0.0);
  report.f1.resize(static_cast<std::size_t>(class_count), 0.0);

  int present = 0;
  for (int c = 0; c < class_count; ++c) {
    double tp = report.confusion(c, c);
    double fp = report.confusion.col(c).sum() - tp;
    double fn = report.confusion.row(c).sum() - tp;
    double p = (tp + fp) > 0 ? tp / (tp + fp) : 0.0;
    double r = (tp + fn) > 0 ? tp / (tp + fn) : 0.0;
    double f = (p + r) > 0 ? 2.0 * p * r / (p + r) : 0.0;
    report.precision[static_cast<std::size_t>(c)] = p;
    report.recall[static_cast<std::size_t>(c)] = r;
    report.f1[static_cast<std::size_t>(c)] = f;
    if (report.confusion.row(c).sum() > 0) {
      ++present;
      report.macro_precision += p;
      report.macro_recall += r;
      report.macro_f1 += f;
    }
  }
  // macro over classes present in gold; classes the gold never uses do not
  // dilute the mean
  report.macro_precision /= present;
  report.macro_recall /= present;
  report.macro_f1 /= present;
  return report;
}

double macro_f1(std::span<const int> gold, std::span<const int> pred,
                int class_count) {
  return score(gold, pred, class_count).macro_f1;
}

SignificanceResult approx_randomization(std::span<const int> gold,
                                        std::span<const int> pred_a,
                                        std::span<const int> pred_b,
                                        int class_count, int runs,
                                        std::uint64_t seed) {
  require(gold.size() == pred_a.size() && gold.size() == pred_b.size(),
          "approx_randomization: length mismatch");
  require(runs >= 1, "approx_randomization: runs must be >= 1");

  SignificanceResult result;
  result.runs = runs;
  result.observed_diff = std::abs(macro_f1(gold, pred_a, class_count) -
                                  macro_f1(gold, pred_b, class_count));

  Rng rng(seed);
  std::vector<int> a(pred_a.begin(), pred_a.end());
  std::vector<int> b(pred_b.begin(), pred_b.end());
  long long at_least = 0;
  for (int run = 0; run < runs; ++run) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = pred_a[i];
      b[i] = pred_b[i];
      if (rng.bernoulli(0.5)) std::swap(a[i], b[i]);
    }
    double stat = std::abs(macro_f1(gold, a, class_count) -
                           macro_f1(gold, b, class_count));
    if (stat >= result.observed_diff) ++at_least;
  }
  result.p_value = static_cast<double>(at_least + 1) / (runs + 1);
  return result;
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "class,precision,recall,f1,support\n";
  for (int c = 0; c < class_count; ++c) {
    out << c << ',' << format_g17(precision[static_cast<std::size_t>(c)]) << ','
        << format_g17(recall[static_cast<std::size_t>(c)]) << ','
        << format_g17(f1[static_cast<std::size_t>(c)]) << ','
        << confusion.row(c).sum() << '\n';
  }
  out << "macro," << format_g17(macro_precision) << ',' << format_g17(macro_recall)
      << ',' << format_g17(macro_f1) << ',' << example_count << '\n';
  return out.str();
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "class     precision  recall     f1         support\n";
  for (int c = 0; c < class_count; ++c) {
    out << std::left << std::setw(10) << c << std::setw(11)
        << precision[static_cast<std::size_t>(c)] << std::setw(11)
        << recall[static_cast<std::size_t>(c)] << std::setw(11)
        << f1[static_cast<std::size_t>(c)] << confusion.row(c).sum() << '\n';
  }
  out << std::left << std::setw(10) << "macro" << std::setw(11) << macro_precision
      << std::setw(11) << macro_recall << std::setw(11) << macro_f1
      << example_count << '\n';
  out << "confusion (rows gold, cols pred):\n";
  for (int r = 0; r < class_count; ++r) {
    for (int c = 0; c < class_count; ++c) {
      out << std::right << std::setw(8) << confusion(r, c);
    }
    out << '\n';
  }
  return out.str();
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

double mean_pairwise_cosine(const Eigen::MatrixXd& rows) {
  require(rows.rows() >= 2, "mean_pairwise_cosine: need at least two rows");
  double sum = 0.0;
  long long count = 0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < rows.rows(); ++j) {
      sum += cosine(rows.row(i).transpose(), rows.row(j).transpose());
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

double mean_cross_cosine(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require(a.rows() >= 1 && b.rows() >= 1, "mean_cross_cosine: empty input");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      sum += cosine(a.row(i).transpose(), b.row(j).transpose());
    }
  }
  return sum / static_cast<double>(a.rows() * b.rows());
}

double mean_paired_cosine(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  require(a.rows() == b.rows() && a.rows() >= 1,
          "mean_paired_cosine: row counts differ or empty");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    sum += cosine(a.row(i).transpose(), b.row(i).transpose());
  }
  return sum / static_cast<double>(a.rows());
}

}  // namespace blse
