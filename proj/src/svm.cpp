#include "peranno/svm.hpp"

#include <cmath>

#include "peranno/error.hpp"
#include "peranno/rng.hpp"

namespace peranno {

namespace {

double dot_sparse(const std::vector<double>& w, const SparseVector& x) {
  double acc = 0.0;
  for (const auto& [idx, value] : x.entries) acc += w[idx] * value;
  return acc;
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

SvmModel svm_train(
    const std::vector<SparseVector>& features, std::span<const int> labels,
    double lambda, int epochs, std::uint64_t seed,
    const std::function<void(int, const SvmModel&)>& on_epoch) {
  if (features.size() != labels.size() || features.empty()) {
    throw Error("svm_train: empty training set or length mismatch");
  }
  if (lambda <= 0.0) throw Error("svm_train: lambda must be positive");
  if (epochs < 1) throw Error("svm_train: epochs must be >= 1");
  bool has_pos = false, has_neg = false;
  for (int y : labels) {
    (y == 1 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) {
    throw Error("svm_train: training set contains a single class");
  }

  SvmModel model;
  model.w.assign(features.front().dim, 0.0);
  model.lambda = lambda;
  model.seed = seed;

  Rng rng(seed);
  const int n = static_cast<int>(features.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  std::int64_t t = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (int i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double y = labels[i] == 1 ? 1.0 : -1.0;
      const SparseVector& x = features[i];
      const double margin = y * (dot_sparse(model.w, x) + model.b);
      const double shrink = 1.0 - eta * lambda;
      for (double& w : model.w) w *= shrink;
      if (margin < 1.0) {
        for (const auto& [idx, value] : x.entries) {
          model.w[idx] += eta * y * value;
        }
        model.b += eta * y;
      }
    }
    if (on_epoch) on_epoch(epoch + 1, model);
  }
  return model;
}

void fit_platt(SvmModel& model, const std::vector<SparseVector>& dev_features,
               std::span<const int> dev_labels) {
  if (dev_features.size() != dev_labels.size() || dev_features.empty()) {
    throw Error("fit_platt: empty dev set or length mismatch");
  }
  const int n = static_cast<int>(dev_features.size());
  std::vector<double> margins(n);
  for (int i = 0; i < n; ++i) {
    margins[i] = svm_margin(model, dev_features[i]);
  }

  // Platt's smoothed targets keep the optimum finite on separable data.
  double n_pos = 0.0, n_neg = 0.0;
  for (int y : dev_labels) {
    (y == 1 ? n_pos : n_neg) += 1.0;
  }
  const double t_pos = (n_pos + 1.0) / (n_pos + 2.0);
  const double t_neg = 1.0 / (n_neg + 2.0);

  double a = 0.0;
  double b = std::log((n_pos + 1.0) / (n_neg + 1.0));
  const auto objective = [&](double aa, double bb) {
    double obj = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = dev_labels[i] == 1 ? t_pos : t_neg;
      const double z = aa * margins[i] + bb;
      // -t ln p - (1-t) ln (1-p) written in a numerically safe form.
      if (z >= 0.0) {
        obj += (1.0 - t) * z + std::log1p(std::exp(-z));
      } else {
        obj += -t * z + std::log1p(std::exp(z));
      }
    }
    return obj;
  };

  double obj = objective(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double g_a = 0.0, g_b = 0.0, h_aa = 0.0, h_ab = 0.0, h_bb = 0.0;
    for (int i = 0; i < n; ++i) {
      const double t = dev_labels[i] == 1 ? t_pos : t_neg;
      const double p = sigmoid(a * margins[i] + b);
      const double d = p - t;
      const double w = std::max(p * (1.0 - p), 1e-12);
      g_a += d * margins[i];
      g_b += d;
      h_aa += w * margins[i] * margins[i];
      h_ab += w * margins[i];
      h_bb += w;
    }
    h_aa += 1e-12;
    h_bb += 1e-12;
    const double det = h_aa * h_bb - h_ab * h_ab;
    if (std::abs(det) < 1e-300) break;
    double step_a = (h_bb * g_a - h_ab * g_b) / det;
    double step_b = (h_aa * g_b - h_ab * g_a) / det;

    // Damping: halve the step until the objective improves.
    double scale = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 40; ++halving) {
      const double na = a - scale * step_a;
      const double nb = b - scale * step_b;
      const double nobj = objective(na, nb);
      if (nobj < obj) {
        a = na;
        b = nb;
        obj = nobj;
        moved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!moved) break;
    if (std::abs(g_a) < 1e-10 && std::abs(g_b) < 1e-10) break;
  }

  if (a < 0.0) a = 0.0;  // higher margin must mean higher p(1)
  model.platt_a = a;
  model.platt_b = b;
}

double svm_margin(const SvmModel& model, const SparseVector& x) {
  if (x.dim != static_cast<std::int32_t>(model.w.size())) {
    throw Error("svm: feature dimension mismatch");
  }
  return dot_sparse(model.w, x) + model.b;
}

std::pair<HardLabel, SoftLabel> svm_predict(const SvmModel& model,
                                            const SparseVector& x) {
  const double margin = svm_margin(model, x);
  HardLabel hard;
  hard.label = margin > 0.0 ? 1 : 0;
  hard.tie = margin == 0.0;
  const double sigma = sigmoid(model.platt_a * margin + model.platt_b);
  return {hard, SoftLabel{1.0 - sigma, sigma}};
}

}  // namespace peranno
