#include "peranno/metrics.hpp"

#include <array>
#include <cmath>

#include "peranno/error.hpp"

namespace peranno {

double krippendorff_alpha_nominal(const AnnotationMatrix& matrix) {
  // Coincidence counts o[c][k] for the binary value domain.
  std::array<std::array<double, 2>, 2> o = {{{0.0, 0.0}, {0.0, 0.0}}};
  bool pairable = false;
  for (int i = 0; i < matrix.rows; ++i) {
    std::array<int, 2> counts = {0, 0};
    int m = 0;
    for (int k = 0; k < matrix.cols; ++k) {
      if (!matrix.present(i, k)) continue;
      ++counts[matrix.value(i, k)];
      ++m;
    }
    if (m < 2) continue;
    pairable = true;
    const double w = 1.0 / static_cast<double>(m - 1);
    // Ordered pairs of distinct slots: c twice with itself counts
    // count_c * (count_c - 1) times, c with k counts count_c * count_k.
    for (int c = 0; c < 2; ++c) {
      for (int k = 0; k < 2; ++k) {
        const double pairs =
            (c == k) ? static_cast<double>(counts[c]) * (counts[c] - 1)
                     : static_cast<double>(counts[c]) * counts[k];
        o[c][k] += w * pairs;
      }
    }
  }
  if (!pairable) {
    throw Error("krippendorff_alpha_nominal: no unit with two or more values");
  }
  const double disagree = o[0][1] + o[1][0];
  if (disagree == 0.0) return 1.0;
  const std::array<double, 2> n_c = {o[0][0] + o[0][1], o[1][0] + o[1][1]};
  const double n = n_c[0] + n_c[1];
  const double d_o = disagree / n;
  const double d_e = (n_c[0] * n_c[1] + n_c[1] * n_c[0]) / (n * (n - 1.0));
  return 1.0 - d_o / d_e;
}

double micro_f1(std::span<const int> predictions, std::span<const int> golds) {
  if (predictions.size() != golds.size()) {
    throw Error("micro_f1: length mismatch");
  }
  if (predictions.empty()) {
    throw Error("micro_f1: empty input");
  }
  // Pooled confusion counts over both classes.
  double tp = 0.0, fp = 0.0, fn = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    for (int c = 0; c < 2; ++c) {
      const bool pred_c = predictions[i] == c;
      const bool gold_c = golds[i] == c;
      tp += pred_c && gold_c;
      fp += pred_c && !gold_c;
      fn += !pred_c && gold_c;
    }
  }
  const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
  const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

namespace {

double item_cross_entropy(const SoftLabel& gold, const SoftLabel& pred,
                          double epsilon) {
  double ce = 0.0;
  if (gold.v0 != 0.0) ce -= gold.v0 * std::log(std::max(pred.v0, epsilon));
  if (gold.v1 != 0.0) ce -= gold.v1 * std::log(std::max(pred.v1, epsilon));
  return ce;
}

}  // namespace

double soft_cross_entropy(std::span<const SoftLabel> pred,
                          std::span<const SoftLabel> gold, double epsilon) {
  if (pred.size() != gold.size()) {
    throw Error("soft_cross_entropy: length mismatch");
  }
  if (pred.empty()) {
    throw Error("soft_cross_entropy: empty input");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    total += item_cross_entropy(gold[i], pred[i], epsilon);
  }
  return total / static_cast<double>(pred.size());
}

double individual_cross_entropy(
    const std::vector<std::vector<SoftLabel>>& head_probs,
    const AnnotationMatrix& matrix, double epsilon) {
  if (static_cast<int>(head_probs.size()) != matrix.rows) {
    throw Error("individual_cross_entropy: row count mismatch");
  }
  if (matrix.rows == 0) {
    throw Error("individual_cross_entropy: empty input");
  }
  double total = 0.0;
  for (int i = 0; i < matrix.rows; ++i) {
    if (static_cast<int>(head_probs[i].size()) != matrix.cols) {
      throw Error("individual_cross_entropy: column count mismatch at row " +
                  std::to_string(i));
    }
    for (int k = 0; k < matrix.cols; ++k) {
      if (!matrix.present(i, k)) continue;
      const auto& p = head_probs[i][k];
      const double correct = matrix.value(i, k) == 1 ? p.v1 : p.v0;
      total -= std::log(std::max(correct, epsilon));
    }
  }
  return total / static_cast<double>(matrix.rows);
}

std::map<std::string, double> per_annotator_accuracy(
    const std::vector<std::vector<int>>& head_argmax,
    const AnnotationMatrix& matrix, std::span<const std::string> ids) {
  if (static_cast<int>(head_argmax.size()) != matrix.rows ||
      static_cast<int>(ids.size()) != matrix.cols) {
    throw Error("per_annotator_accuracy: shape mismatch");
  }
  std::vector<std::int64_t> hits(matrix.cols, 0);
  std::vector<std::int64_t> totals(matrix.cols, 0);
  for (int i = 0; i < matrix.rows; ++i) {
    if (static_cast<int>(head_argmax[i].size()) != matrix.cols) {
      throw Error("per_annotator_accuracy: shape mismatch at row " +
                  std::to_string(i));
    }
    for (int k = 0; k < matrix.cols; ++k) {
      if (!matrix.present(i, k)) continue;
      ++totals[k];
      hits[k] += head_argmax[i][k] == matrix.value(i, k);
    }
  }
  std::map<std::string, double> accuracy;
  for (int k = 0; k < matrix.cols; ++k) {
    if (totals[k] == 0) continue;
    accuracy[ids[k]] =
        static_cast<double>(hits[k]) / static_cast<double>(totals[k]);
  }
  return accuracy;
}

}  // namespace peranno
