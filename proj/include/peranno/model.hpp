#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "peranno/corpus.hpp"
#include "peranno/features.hpp"

namespace peranno {

enum class FeatureKind { kTfidf, kBow };
enum class ModelKind { kMultitask, kSingletask, kSvm };
enum class PredictionMode { kUnconstrained, kConstrained };
enum class Aggregation { kArgmaxCount, kMeanProb };
enum class SingletaskTarget { kHard, kSoft };

// Vocabulary plus vectorized splits; the vocabulary is built from the train
// split only, so dev/test texts never influence feature indices or idf.
struct FeatureSet {
  Vocabulary vocab;
  FeatureKind kind = FeatureKind::kTfidf;
  std::array<std::vector<SparseVector>, 3> vectors;

  const std::vector<SparseVector>& split(Split s) const {
    return vectors[static_cast<int>(s)];
  }
};

FeatureSet build_features(const Dataset& dataset, FeatureKind kind,
                          int min_df = 1);
SparseVector vectorize_text(const std::string& text, const Vocabulary& vocab,
                            FeatureKind kind);

struct EncoderConfig {
  std::vector<int> hidden_dims = {768};

  void validate() const;
};

struct TrainConfig {
  double learning_rate = 1e-8;
  int batch_size = 64;
  int max_epochs = 100;
  int patience = 40;
  double epsilon = 1e-12;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

// Row-major [in][out] weight matrix plus bias; doubles throughout.
struct DenseLayer {
  int in = 0;
  int out = 0;
  std::vector<double> w;
  std::vector<double> b;
};

// Shared rectifier trunk over the lexical feature vector plus one linear
// softmax head per annotator. The single-task model is the K=1 special case
// with the placeholder head id "*" (matching no dataset annotator).
struct MultiTaskModel {
  std::vector<DenseLayer> trunk;
  std::vector<DenseLayer> heads;
  std::vector<std::string> head_ids;
  std::uint64_t init_seed = 0;

  int input_dim() const { return trunk.empty() ? 0 : trunk.front().in; }
  int hidden_dim() const { return trunk.empty() ? 0 : trunk.back().out; }
  int num_heads() const { return static_cast<int>(heads.size()); }
};

// Weights uniform on (-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero,
// bit-reproducible for a given seed.
MultiTaskModel init_model(const EncoderConfig& encoder, int input_dim,
                          std::span<const std::string> head_ids,
                          std::uint64_t seed);

// Trunk activations for one input.
std::vector<double> encode(const MultiTaskModel& model, const SparseVector& x);
SoftLabel head_output(const MultiTaskModel& model, int head,
                      std::span<const double> hidden);
// All K head distributions for one input.
std::vector<SoftLabel> forward(const MultiTaskModel& model,
                               const SparseVector& x);

// Same shape as the model; w/b hold gradient accumulators.
struct Gradients {
  std::vector<DenseLayer> trunk;
  std::vector<DenseLayer> heads;
};
Gradients zero_gradients(const MultiTaskModel& model);

// Masked multi-task objective over the batch rows `rows` of `matrix`:
// per instance the cross entropies of present heads are summed, then the
// mean over the batch is taken. When `grads` is non-null the analytic
// gradient of that value is accumulated into it (starting from zero).
double multitask_loss(const MultiTaskModel& model,
                      const std::vector<SparseVector>& features,
                      const AnnotationMatrix& matrix,
                      std::span<const int> rows, double epsilon,
                      Gradients* grads = nullptr);

// Distribution-target variant used by the single-task soft-target mode;
// requires a single head.
double soft_target_loss(const MultiTaskModel& model,
                        const std::vector<SparseVector>& features,
                        std::span<const SoftLabel> targets,
                        std::span<const int> rows, double epsilon,
                        Gradients* grads = nullptr);

struct AdamState {
  std::vector<DenseLayer> m_trunk, v_trunk, m_heads, v_heads;
  std::int64_t t = 0;
};
AdamState init_adam(const MultiTaskModel& model);

// Bias-corrected adaptive-moment update. Throws on non-finite gradients,
// naming the offending parameter block.
void adam_step(MultiTaskModel& model, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg);

// Mean of all head distributions; stands in for annotators without a head.
SoftLabel fallback_distribution(std::span<const SoftLabel> head_probs);
inline int argmax_label(const SoftLabel& p) { return p.v1 > p.v0 ? 1 : 0; }

// `instance_heads` lists, for each annotator of the instance, the model head
// index or -1 for annotators without a head (resolved via the fallback).
// Unconstrained mode votes all heads and ignores `instance_heads`.
HardLabel predict_hard(std::span<const SoftLabel> head_probs,
                       PredictionMode mode, std::span<const int> instance_heads,
                       int tie_break = 0);
SoftLabel predict_soft(std::span<const SoftLabel> head_probs,
                       PredictionMode mode, std::span<const int> instance_heads,
                       Aggregation aggregation);

struct EpochRecord {
  int epoch = 0;
  double train_individual_ce = 0.0;
  double dev_soft_ce = 0.0;
  double dev_micro_f1 = 0.0;
};

struct TrainOptions {
  PredictionMode dev_mode = PredictionMode::kUnconstrained;
  Aggregation dev_aggregation = Aggregation::kArgmaxCount;
  int tie_break = 0;
  SingletaskTarget singletask_target = SingletaskTarget::kHard;
};

struct TrainedModel {
  MultiTaskModel model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;      // epoch with minimal dev soft CE
  int stopping_epoch = 0;  // last epoch that ran
};

// Mini-batch training with per-epoch dev evaluation, best-checkpoint
// selection on dev soft-label CE and early stopping after `patience`
// epochs without improvement. Multi-task heads cover the annotators with
// at least one train-split annotation; the single-task model trains one
// head against the aggregated labels.
TrainedModel train(ModelKind kind, const Dataset& dataset,
                   const FeatureSet& features, const EncoderConfig& encoder,
                   const TrainConfig& cfg, const TrainOptions& opts = {});

}  // namespace peranno
