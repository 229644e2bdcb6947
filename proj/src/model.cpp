#include "peranno/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "peranno/error.hpp"
#include "peranno/metrics.hpp"
#include "peranno/rng.hpp"

namespace peranno {

FeatureSet build_features(const Dataset& dataset, FeatureKind kind,
                          int min_df) {
  std::vector<std::string> train_texts;
  train_texts.reserve(dataset.split(Split::kTrain).size());
  for (const auto& instance : dataset.split(Split::kTrain)) {
    train_texts.push_back(instance.text);
  }
  FeatureSet features;
  features.kind = kind;
  features.vocab = Vocabulary::build(train_texts, min_df);
  for (int s = 0; s < 3; ++s) {
    const auto& instances = dataset.splits[s];
    features.vectors[s].reserve(instances.size());
    for (const auto& instance : instances) {
      features.vectors[s].push_back(
          vectorize_text(instance.text, features.vocab, kind));
    }
  }
  return features;
}

SparseVector vectorize_text(const std::string& text, const Vocabulary& vocab,
                            FeatureKind kind) {
  const auto tokens = tokenize(text);
  return kind == FeatureKind::kTfidf ? tfidf_vectorize(tokens, vocab)
                                     : bow_vectorize(tokens, vocab);
}

void EncoderConfig::validate() const {
  if (hidden_dims.empty()) {
    throw Error("encoder config: hidden_dims must be non-empty");
  }
  for (int d : hidden_dims) {
    if (d < 1) throw Error("encoder config: hidden dims must be >= 1");
  }
}

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw Error("train config: lr must be positive");
  if (batch_size < 1) throw Error("train config: batch_size must be >= 1");
  if (max_epochs < 1) throw Error("train config: max_epochs must be >= 1");
  if (patience < 1) throw Error("train config: patience must be >= 1");
  if (patience > max_epochs) {
    throw Error("train config: patience must be <= max_epochs");
  }
  if (epsilon <= 0.0) throw Error("train config: epsilon must be positive");
  if (adam_beta1 <= 0.0 || adam_beta1 >= 1.0 || adam_beta2 <= 0.0 ||
      adam_beta2 >= 1.0) {
    throw Error("train config: adam betas must lie in (0, 1)");
  }
  if (adam_epsilon <= 0.0) {
    throw Error("train config: adam_epsilon must be positive");
  }
}

namespace {

DenseLayer init_layer(int in, int out, Rng& rng) {
  DenseLayer layer;
  layer.in = in;
  layer.out = out;
  layer.w.resize(static_cast<std::size_t>(in) * out);
  layer.b.assign(out, 0.0);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (auto& w : layer.w) w = rng.uniform(-bound, bound);
  return layer;
}

DenseLayer zeros_like(const DenseLayer& layer) {
  DenseLayer out;
  out.in = layer.in;
  out.out = layer.out;
  out.w.assign(layer.w.size(), 0.0);
  out.b.assign(layer.b.size(), 0.0);
  return out;
}

}  // namespace

MultiTaskModel init_model(const EncoderConfig& encoder, int input_dim,
                          std::span<const std::string> head_ids,
                          std::uint64_t seed) {
  encoder.validate();
  if (input_dim < 1) throw Error("init_model: input_dim must be >= 1");
  if (head_ids.empty()) throw Error("init_model: need at least one head");

  MultiTaskModel model;
  model.init_seed = seed;
  model.head_ids.assign(head_ids.begin(), head_ids.end());
  Rng rng(seed);
  int in = input_dim;
  for (int dim : encoder.hidden_dims) {
    model.trunk.push_back(init_layer(in, dim, rng));
    in = dim;
  }
  for (std::size_t k = 0; k < head_ids.size(); ++k) {
    model.heads.push_back(init_layer(in, 2, rng));
  }
  return model;
}

namespace {

// out = b + W^T x for a sparse input row.
void affine_sparse(const DenseLayer& layer, const SparseVector& x,
                   std::vector<double>& out) {
  out.assign(layer.b.begin(), layer.b.end());
  for (const auto& [idx, value] : x.entries) {
    const double* row = layer.w.data() + static_cast<std::size_t>(idx) *
                                             layer.out;
    for (int o = 0; o < layer.out; ++o) out[o] += value * row[o];
  }
}

void affine_dense(const DenseLayer& layer, std::span<const double> h,
                  std::vector<double>& out) {
  out.assign(layer.b.begin(), layer.b.end());
  for (int i = 0; i < layer.in; ++i) {
    const double hi = h[i];
    if (hi == 0.0) continue;
    const double* row = layer.w.data() + static_cast<std::size_t>(i) *
                                             layer.out;
    for (int o = 0; o < layer.out; ++o) out[o] += hi * row[o];
  }
}

void relu_inplace(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

SoftLabel softmax2(double l0, double l1) {
  const double m = std::max(l0, l1);
  const double e0 = std::exp(l0 - m);
  const double e1 = std::exp(l1 - m);
  const double z = e0 + e1;
  return {e0 / z, e1 / z};
}

// Trunk activations for one input; acts[l] holds the post-rectifier output
// of trunk layer l.
void run_trunk(const MultiTaskModel& model, const SparseVector& x,
               std::vector<std::vector<double>>& acts) {
  acts.resize(model.trunk.size());
  affine_sparse(model.trunk.front(), x, acts[0]);
  relu_inplace(acts[0]);
  for (std::size_t l = 1; l < model.trunk.size(); ++l) {
    affine_dense(model.trunk[l], acts[l - 1], acts[l]);
    relu_inplace(acts[l]);
  }
}

}  // namespace

std::vector<double> encode(const MultiTaskModel& model,
                           const SparseVector& x) {
  if (x.dim != model.input_dim()) {
    throw Error("encode: feature dimension mismatch");
  }
  std::vector<std::vector<double>> acts;
  run_trunk(model, x, acts);
  return std::move(acts.back());
}

SoftLabel head_output(const MultiTaskModel& model, int head,
                      std::span<const double> hidden) {
  const DenseLayer& layer = model.heads[head];
  double l0 = layer.b[0];
  double l1 = layer.b[1];
  for (int i = 0; i < layer.in; ++i) {
    const double hi = hidden[i];
    if (hi == 0.0) continue;
    l0 += hi * layer.w[static_cast<std::size_t>(i) * 2];
    l1 += hi * layer.w[static_cast<std::size_t>(i) * 2 + 1];
  }
  return softmax2(l0, l1);
}

std::vector<SoftLabel> forward(const MultiTaskModel& model,
                               const SparseVector& x) {
  const auto hidden = encode(model, x);
  std::vector<SoftLabel> out(model.num_heads());
  for (int k = 0; k < model.num_heads(); ++k) {
    out[k] = head_output(model, k, hidden);
  }
  return out;
}

Gradients zero_gradients(const MultiTaskModel& model) {
  Gradients grads;
  for (const auto& layer : model.trunk) grads.trunk.push_back(zeros_like(layer));
  for (const auto& layer : model.heads) grads.heads.push_back(zeros_like(layer));
  return grads;
}

namespace {

// One target for the batch pass: head index plus target distribution
// (one-hot for hard annotations).
struct HeadTarget {
  int head;
  SoftLabel target;
};

// Shared forward/backward core. Returns the summed loss over the listed
// rows; when grads != nullptr accumulates d(sum)/d(params). The caller
// scales both by 1/batch.
double batch_pass(const MultiTaskModel& model,
                  const std::vector<SparseVector>& features,
                  std::span<const int> rows,
                  const std::vector<std::vector<HeadTarget>>& targets_by_row,
                  double epsilon, Gradients* grads) {
  double loss = 0.0;
  std::vector<std::vector<double>> acts;
  std::vector<double> dh, da;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int row = rows[r];
    const auto& targets = targets_by_row[r];
    if (targets.empty()) continue;
    const SparseVector& x = features[row];
    if (x.dim != model.input_dim()) {
      throw Error("multitask_loss: feature dimension mismatch");
    }
    run_trunk(model, x, acts);
    const auto& h_top = acts.back();

    dh.assign(h_top.size(), 0.0);
    for (const auto& [head, target] : targets) {
      const DenseLayer& hl = model.heads[head];
      double l0 = hl.b[0];
      double l1 = hl.b[1];
      for (int i = 0; i < hl.in; ++i) {
        const double hi = h_top[i];
        if (hi == 0.0) continue;
        l0 += hi * hl.w[static_cast<std::size_t>(i) * 2];
        l1 += hi * hl.w[static_cast<std::size_t>(i) * 2 + 1];
      }
      const SoftLabel p = softmax2(l0, l1);
      const double probs[2] = {p.v0, p.v1};
      const double tgt[2] = {target.v0, target.v1};
      for (int c = 0; c < 2; ++c) {
        if (tgt[c] != 0.0) {
          loss -= tgt[c] * std::log(std::max(probs[c], epsilon));
        }
      }
      if (grads == nullptr) continue;
      // d(-t_c ln max(p_c, eps))/dlogits = t_c (p - e_c); the clamped branch
      // is locally constant and contributes nothing.
      double dl[2] = {0.0, 0.0};
      for (int c = 0; c < 2; ++c) {
        if (tgt[c] == 0.0 || probs[c] < epsilon) continue;
        dl[0] += tgt[c] * (probs[0] - (c == 0 ? 1.0 : 0.0));
        dl[1] += tgt[c] * (probs[1] - (c == 1 ? 1.0 : 0.0));
      }
      DenseLayer& hg = grads->heads[head];
      for (int i = 0; i < hl.in; ++i) {
        const double hi = h_top[i];
        if (hi != 0.0) {
          hg.w[static_cast<std::size_t>(i) * 2] += hi * dl[0];
          hg.w[static_cast<std::size_t>(i) * 2 + 1] += hi * dl[1];
        }
        dh[i] += hl.w[static_cast<std::size_t>(i) * 2] * dl[0] +
                 hl.w[static_cast<std::size_t>(i) * 2 + 1] * dl[1];
      }
      hg.b[0] += dl[0];
      hg.b[1] += dl[1];
    }
    if (grads == nullptr) continue;

    // Trunk backward pass.
    for (int l = static_cast<int>(model.trunk.size()) - 1; l >= 0; --l) {
      const DenseLayer& layer = model.trunk[l];
      DenseLayer& lg = grads->trunk[l];
      da.assign(layer.out, 0.0);
      for (int o = 0; o < layer.out; ++o) {
        if (acts[l][o] > 0.0) da[o] = dh[o];
      }
      for (int o = 0; o < layer.out; ++o) lg.b[o] += da[o];
      if (l > 0) {
        const auto& h_in = acts[l - 1];
        dh.assign(layer.in, 0.0);
        for (int i = 0; i < layer.in; ++i) {
          const double hi = h_in[i];
          const double* wrow =
              layer.w.data() + static_cast<std::size_t>(i) * layer.out;
          double* grow = lg.w.data() + static_cast<std::size_t>(i) * layer.out;
          double acc = 0.0;
          for (int o = 0; o < layer.out; ++o) {
            if (hi != 0.0) grow[o] += hi * da[o];
            acc += wrow[o] * da[o];
          }
          dh[i] = acc;
        }
      } else {
        for (const auto& [idx, value] : x.entries) {
          double* grow =
              lg.w.data() + static_cast<std::size_t>(idx) * layer.out;
          for (int o = 0; o < layer.out; ++o) grow[o] += value * da[o];
        }
      }
    }
  }
  return loss;
}

void scale_gradients(Gradients& grads, double factor) {
  for (auto& layer : grads.trunk) {
    for (double& w : layer.w) w *= factor;
    for (double& b : layer.b) b *= factor;
  }
  for (auto& layer : grads.heads) {
    for (double& w : layer.w) w *= factor;
    for (double& b : layer.b) b *= factor;
  }
}

}  // namespace

double multitask_loss(const MultiTaskModel& model,
                      const std::vector<SparseVector>& features,
                      const AnnotationMatrix& matrix,
                      std::span<const int> rows, double epsilon,
                      Gradients* grads) {
  if (matrix.cols != model.num_heads()) {
    throw Error("multitask_loss: head count does not match matrix columns");
  }
  if (rows.empty()) {
    throw Error("multitask_loss: empty batch");
  }
  std::vector<std::vector<HeadTarget>> targets(rows.size());
  std::size_t total = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int row = rows[r];
    if (row < 0 || row >= matrix.rows ||
        row >= static_cast<int>(features.size())) {
      throw Error("multitask_loss: batch row out of range");
    }
    for (int k = 0; k < matrix.cols; ++k) {
      if (!matrix.present(row, k)) continue;
      const SoftLabel one_hot = matrix.value(row, k) == 1
                                    ? SoftLabel{0.0, 1.0}
                                    : SoftLabel{1.0, 0.0};
      targets[r].push_back({k, one_hot});
      ++total;
    }
  }
  if (total == 0) {
    throw Error("multitask_loss: batch has zero present annotations");
  }
  if (grads != nullptr) *grads = zero_gradients(model);
  const double loss =
      batch_pass(model, features, rows, targets, epsilon, grads);
  const double scale = 1.0 / static_cast<double>(rows.size());
  if (grads != nullptr) scale_gradients(*grads, scale);
  return loss * scale;
}

double soft_target_loss(const MultiTaskModel& model,
                        const std::vector<SparseVector>& features,
                        std::span<const SoftLabel> targets,
                        std::span<const int> rows, double epsilon,
                        Gradients* grads) {
  if (model.num_heads() != 1) {
    throw Error("soft_target_loss: requires a single head");
  }
  if (rows.empty()) {
    throw Error("soft_target_loss: empty batch");
  }
  std::vector<std::vector<HeadTarget>> by_row(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int row = rows[r];
    if (row < 0 || row >= static_cast<int>(targets.size()) ||
        row >= static_cast<int>(features.size())) {
      throw Error("soft_target_loss: batch row out of range");
    }
    by_row[r].push_back({0, targets[row]});
  }
  if (grads != nullptr) *grads = zero_gradients(model);
  const double loss =
      batch_pass(model, features, rows, by_row, epsilon, grads);
  const double scale = 1.0 / static_cast<double>(rows.size());
  if (grads != nullptr) scale_gradients(*grads, scale);
  return loss * scale;
}

AdamState init_adam(const MultiTaskModel& model) {
  AdamState state;
  for (const auto& layer : model.trunk) {
    state.m_trunk.push_back(zeros_like(layer));
    state.v_trunk.push_back(zeros_like(layer));
  }
  for (const auto& layer : model.heads) {
    state.m_heads.push_back(zeros_like(layer));
    state.v_heads.push_back(zeros_like(layer));
  }
  return state;
}

namespace {

void adam_update_block(std::vector<double>& param,
                       const std::vector<double>& grad, std::vector<double>& m,
                       std::vector<double>& v, const TrainConfig& cfg,
                       double bias1, double bias2, const std::string& name) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i];
    if (!std::isfinite(g)) {
      throw Error("adam_step: non-finite gradient in block " + name);
    }
    m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g;
    v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g * g;
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    param[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) +
                                             cfg.adam_epsilon);
  }
}

}  // namespace

void adam_step(MultiTaskModel& model, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg) {
  state.t += 1;
  const double bias1 =
      1.0 - std::pow(cfg.adam_beta1, static_cast<double>(state.t));
  const double bias2 =
      1.0 - std::pow(cfg.adam_beta2, static_cast<double>(state.t));
  for (std::size_t l = 0; l < model.trunk.size(); ++l) {
    const std::string name = "trunk" + std::to_string(l);
    adam_update_block(model.trunk[l].w, grads.trunk[l].w, state.m_trunk[l].w,
                      state.v_trunk[l].w, cfg, bias1, bias2, name + ".w");
    adam_update_block(model.trunk[l].b, grads.trunk[l].b, state.m_trunk[l].b,
                      state.v_trunk[l].b, cfg, bias1, bias2, name + ".b");
  }
  for (std::size_t k = 0; k < model.heads.size(); ++k) {
    const std::string name = "head" + std::to_string(k);
    adam_update_block(model.heads[k].w, grads.heads[k].w, state.m_heads[k].w,
                      state.v_heads[k].w, cfg, bias1, bias2, name + ".w");
    adam_update_block(model.heads[k].b, grads.heads[k].b, state.m_heads[k].b,
                      state.v_heads[k].b, cfg, bias1, bias2, name + ".b");
  }
}

SoftLabel fallback_distribution(std::span<const SoftLabel> head_probs) {
  if (head_probs.empty()) {
    throw Error("fallback_distribution: no heads");
  }
  double v1 = 0.0;
  for (const auto& p : head_probs) v1 += p.v1;
  v1 /= static_cast<double>(head_probs.size());
  return {1.0 - v1, v1};
}

namespace {

// Resolves the distributions that vote for one instance.
std::vector<SoftLabel> selected_distributions(
    std::span<const SoftLabel> head_probs, PredictionMode mode,
    std::span<const int> instance_heads) {
  std::vector<SoftLabel> selected;
  if (mode == PredictionMode::kUnconstrained) {
    selected.assign(head_probs.begin(), head_probs.end());
    return selected;
  }
  if (instance_heads.empty()) {
    throw Error("predict: constrained mode with zero resolvable annotators");
  }
  SoftLabel fallback{};
  bool have_fallback = false;
  for (int slot : instance_heads) {
    if (slot >= 0) {
      selected.push_back(head_probs[slot]);
    } else {
      if (!have_fallback) {
        fallback = fallback_distribution(head_probs);
        have_fallback = true;
      }
      selected.push_back(fallback);
    }
  }
  return selected;
}

}  // namespace

HardLabel predict_hard(std::span<const SoftLabel> head_probs,
                       PredictionMode mode, std::span<const int> instance_heads,
                       int tie_break) {
  const auto selected = selected_distributions(head_probs, mode,
                                               instance_heads);
  int ones = 0;
  for (const auto& p : selected) ones += argmax_label(p);
  const int zeros = static_cast<int>(selected.size()) - ones;
  HardLabel out;
  if (ones == zeros) {
    out.label = tie_break;
    out.tie = true;
  } else {
    out.label = ones > zeros ? 1 : 0;
  }
  return out;
}

SoftLabel predict_soft(std::span<const SoftLabel> head_probs,
                       PredictionMode mode, std::span<const int> instance_heads,
                       Aggregation aggregation) {
  const auto selected = selected_distributions(head_probs, mode,
                                               instance_heads);
  double v1 = 0.0;
  if (aggregation == Aggregation::kArgmaxCount) {
    for (const auto& p : selected) v1 += argmax_label(p);
  } else {
    for (const auto& p : selected) v1 += p.v1;
  }
  v1 /= static_cast<double>(selected.size());
  return {1.0 - v1, v1};
}

namespace {

MultiTaskModel clone_parameters(const MultiTaskModel& model) { return model; }

}  // namespace

TrainedModel train(ModelKind kind, const Dataset& dataset,
                   const FeatureSet& features, const EncoderConfig& encoder,
                   const TrainConfig& cfg, const TrainOptions& opts) {
  if (kind == ModelKind::kSvm) {
    throw Error("train: the svm baseline trains through svm_train");
  }
  cfg.validate();
  encoder.validate();
  const auto& train_instances = dataset.split(Split::kTrain);
  const auto& dev_instances = dataset.split(Split::kDev);
  if (train_instances.empty()) throw Error("train: empty train split");
  if (dev_instances.empty()) throw Error("train: empty dev split");

  const AnnotationMatrix full_train = build_matrix(dataset, Split::kTrain);
  const AnnotationMatrix full_dev = build_matrix(dataset, Split::kDev);

  // Heads: annotators with at least one train annotation. Annotators seen
  // only in dev/test get no head and are served by the fallback.
  std::vector<std::string> head_ids;
  std::vector<int> head_column;  // registry column per head
  if (kind == ModelKind::kMultitask) {
    for (int k = 0; k < dataset.registry.size(); ++k) {
      if (dataset.registry.seen_in(k, Split::kTrain)) {
        head_ids.push_back(dataset.registry.ids()[k]);
        head_column.push_back(k);
      }
    }
    if (head_ids.empty()) {
      throw Error("train: no annotator has annotations in the train split");
    }
  } else {
    head_ids.push_back("*");
  }

  // Training targets.
  AnnotationMatrix train_matrix;
  std::vector<SoftLabel> soft_targets;
  const bool soft_mode = kind == ModelKind::kSingletask &&
                         opts.singletask_target == SingletaskTarget::kSoft;
  if (kind == ModelKind::kMultitask) {
    train_matrix = AnnotationMatrix::zeros(full_train.rows,
                                           static_cast<int>(head_ids.size()));
    for (int i = 0; i < full_train.rows; ++i) {
      for (std::size_t h = 0; h < head_column.size(); ++h) {
        if (full_train.present(i, head_column[h])) {
          train_matrix.set(i, static_cast<int>(h),
                           full_train.value(i, head_column[h]));
        }
      }
    }
  } else if (soft_mode) {
    soft_targets.reserve(full_train.rows);
    for (int i = 0; i < full_train.rows; ++i) {
      soft_targets.push_back(derive_soft_label(full_train, i));
    }
  } else {
    train_matrix = AnnotationMatrix::zeros(full_train.rows, 1);
    for (int i = 0; i < full_train.rows; ++i) {
      train_matrix.set(i, 0,
                       derive_hard_label(full_train, i, opts.tie_break).label);
    }
  }

  // Dev gold labels and head slots for constrained selection.
  std::vector<SoftLabel> dev_gold_soft;
  std::vector<int> dev_gold_hard;
  for (int i = 0; i < full_dev.rows; ++i) {
    dev_gold_soft.push_back(derive_soft_label(full_dev, i));
    dev_gold_hard.push_back(derive_hard_label(full_dev, i, opts.tie_break)
                                .label);
  }
  std::unordered_map<std::string, int> head_of;
  for (std::size_t h = 0; h < head_ids.size(); ++h) {
    head_of.emplace(head_ids[h], static_cast<int>(h));
  }
  std::vector<std::vector<int>> dev_slots(dev_instances.size());
  for (std::size_t i = 0; i < dev_instances.size(); ++i) {
    for (const auto& [annotator, label] : dev_instances[i].annotations) {
      const auto it = head_of.find(annotator);
      dev_slots[i].push_back(it == head_of.end() ? -1 : it->second);
    }
  }

  MultiTaskModel model =
      init_model(encoder, features.vocab.size(), head_ids, cfg.seed);
  AdamState adam = init_adam(model);
  Rng shuffle_rng(derive_seed(cfg.seed, 1));

  const auto& train_x = features.split(Split::kTrain);
  const auto& dev_x = features.split(Split::kDev);
  const int n_train = static_cast<int>(train_instances.size());

  TrainedModel result;
  double best_ce = std::numeric_limits<double>::infinity();
  int since_improvement = 0;

  std::vector<int> order(n_train);
  for (int i = 0; i < n_train; ++i) order[i] = i;
  Gradients grads;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (int start = 0; start < n_train; start += cfg.batch_size) {
      const int count = std::min(cfg.batch_size, n_train - start);
      const std::span<const int> rows(order.data() + start,
                                      static_cast<std::size_t>(count));
      double loss;
      if (soft_mode) {
        loss = soft_target_loss(model, train_x, soft_targets, rows,
                                cfg.epsilon, &grads);
      } else {
        loss = multitask_loss(model, train_x, train_matrix, rows, cfg.epsilon,
                              &grads);
      }
      adam_step(model, grads, adam, cfg);
      epoch_loss += loss * count;
    }
    epoch_loss /= static_cast<double>(n_train);

    std::vector<SoftLabel> dev_soft(dev_instances.size());
    std::vector<int> dev_hard(dev_instances.size());
    for (std::size_t i = 0; i < dev_instances.size(); ++i) {
      const auto probs = forward(model, dev_x[i]);
      dev_soft[i] =
          predict_soft(probs, opts.dev_mode, dev_slots[i], opts.dev_aggregation);
      dev_hard[i] =
          predict_hard(probs, opts.dev_mode, dev_slots[i], opts.tie_break)
              .label;
    }
    const double dev_ce =
        soft_cross_entropy(dev_soft, dev_gold_soft, cfg.epsilon);
    const double dev_f1 = micro_f1(dev_hard, dev_gold_hard);
    result.history.push_back({epoch, epoch_loss, dev_ce, dev_f1});
    result.stopping_epoch = epoch;

    if (dev_ce < best_ce) {
      best_ce = dev_ce;
      result.best_epoch = epoch;
      result.model = clone_parameters(model);
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (since_improvement >= cfg.patience) break;
  }
  return result;
}

}  // namespace peranno
