#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "peranno/corpus.hpp"
#include "peranno/features.hpp"

namespace peranno {

// Primal linear SVM trained with the Pegasos stochastic-subgradient
// schedule, plus a Platt sigmoid fitted on the dev margins so the model
// also emits a probability pair.
struct SvmModel {
  std::vector<double> w;
  double b = 0.0;
  double lambda = 0.0;
  double platt_a = 0.0;  // constrained >= 0: higher margin => higher p(1)
  double platt_b = 0.0;
  std::uint64_t seed = 0;
};

// Hinge-loss + L2 minimization with step size 1/(lambda * t); the bias is
// updated by the subgradient but not regularized. Labels are {0, 1}.
// Throws when the training set is single-class. `on_epoch`, when set, sees
// the model after every pass (it must not mutate it).
SvmModel svm_train(
    const std::vector<SparseVector>& features, std::span<const int> labels,
    double lambda, int epochs, std::uint64_t seed,
    const std::function<void(int, const SvmModel&)>& on_epoch = {});

// Fits (A, B) of sigmoid(A * margin + B) on dev margins by damped Newton
// iterations, with Platt's smoothed targets so separable dev sets keep the
// optimum finite.
void fit_platt(SvmModel& model, const std::vector<SparseVector>& dev_features,
               std::span<const int> dev_labels);

double svm_margin(const SvmModel& model, const SparseVector& x);

// Hard label: margin > 0 maps to 1, margin <= 0 (including exactly 0) to 0.
// Soft label: (1 - sigma, sigma) with sigma = sigmoid(A * margin + B).
std::pair<HardLabel, SoftLabel> svm_predict(const SvmModel& model,
                                            const SparseVector& x);

}  // namespace peranno
