#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "peranno/corpus.hpp"

namespace peranno {

// Clamp constant for every cross-entropy in the toolkit.
inline constexpr double kCrossEntropyEpsilon = 1e-12;

// Nominal-data Krippendorff's alpha over an incomplete annotation matrix.
// Each unit (row) with m >= 2 present values contributes every ordered pair
// of distinct slots with weight 1/(m-1) to the coincidence matrix; rows with
// fewer than two values are skipped. Returns exactly 1.0 when no disagreeing
// pair exists. Throws when no row is pairable.
double krippendorff_alpha_nominal(const AnnotationMatrix& matrix);

// Micro-averaged F1 over both classes. For complete single-label binary
// predictions this equals plain accuracy (each error is one false positive
// and one false negative, so pooled precision = pooled recall = accuracy).
double micro_f1(std::span<const int> predictions, std::span<const int> golds);

// Mean over items of -sum_c gold_c * ln(max(pred_c, epsilon)). Natural log,
// clamp only (no renormalization).
double soft_cross_entropy(std::span<const SoftLabel> pred,
                          std::span<const SoftLabel> gold,
                          double epsilon = kCrossEntropyEpsilon);

// Per instance, sums -ln(max(p_k(y_k), epsilon)) over present annotators
// only; returns the mean over rows.
double individual_cross_entropy(
    const std::vector<std::vector<SoftLabel>>& head_probs,
    const AnnotationMatrix& matrix, double epsilon = kCrossEntropyEpsilon);

// Fraction of each annotator's present annotations matched by the head
// argmax. Annotators with no present annotations are omitted.
std::map<std::string, double> per_annotator_accuracy(
    const std::vector<std::vector<int>>& head_argmax,
    const AnnotationMatrix& matrix, std::span<const std::string> ids);

struct EvalReport {
  double micro_f1 = 0.0;
  double soft_ce = 0.0;
  double individual_ce = 0.0;
  std::map<std::string, double> per_annotator_accuracy;
  std::int64_t n_evaluated = 0;
};

}  // namespace peranno
