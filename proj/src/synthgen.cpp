#include "peranno/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>

#include "peranno/error.hpp"
#include "peranno/features.hpp"
#include "peranno/rng.hpp"

namespace peranno {

namespace {

// Rejection threshold on |cluster score| during instance sampling. Keeps
// every cluster rule decisively on one side, which is what makes the
// recovery experiment solvable from a few hundred training instances.
constexpr double kMinRuleMargin = 5.0;
constexpr int kMaxInstanceRetries = 2000;
constexpr double kPowerLawExponent = 1.5;

std::string token_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "w%05d", index);
  return buf;
}

std::string annotator_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "a%04d", index);
  return buf;
}

std::string instance_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "i%06d", index);
  return buf;
}

// Sorted (vocab index, count) pairs.
using TermCounts = std::vector<std::pair<int, double>>;

double cluster_score(const Population& population, int cluster,
                     const TermCounts& counts) {
  const auto& w = population.cluster_weights[cluster];
  double score = 0.0;
  for (const auto& [idx, count] : counts) score += w[idx] * count;
  return score;
}

TermCounts counts_from_tokens(const std::vector<int>& token_indices) {
  std::vector<int> sorted = token_indices;
  std::sort(sorted.begin(), sorted.end());
  TermCounts counts;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    counts.emplace_back(sorted[i], static_cast<double>(j - i));
    i = j;
  }
  return counts;
}

TermCounts counts_from_text(const std::string& text, int vocab_size) {
  std::vector<int> indices;
  for (const auto& token : tokenize(text)) {
    if (token.size() < 2 || token[0] != 'w') continue;
    int value = 0;
    bool numeric = true;
    for (std::size_t i = 1; i < token.size(); ++i) {
      if (token[i] < '0' || token[i] > '9') {
        numeric = false;
        break;
      }
      value = value * 10 + (token[i] - '0');
    }
    if (numeric && value < vocab_size) indices.push_back(value);
  }
  return counts_from_tokens(indices);
}

}  // namespace

void GenConfig::validate() const {
  if (instances < 1) throw Error("gen config: instances must be >= 1");
  if (vocab_size < 1 || vocab_size > 99999) {
    throw Error("gen config: vocab_size must lie in [1, 99999]");
  }
  if (annotators < 1 || annotators > 9999) {
    throw Error("gen config: annotators must lie in [1, 9999]");
  }
  if (clusters < 1) throw Error("gen config: clusters must be >= 1");
  if (clusters > annotators) {
    throw Error("gen config: clusters must not exceed annotators");
  }
  if (annotators_per_instance < 1 || annotators_per_instance > annotators) {
    throw Error(
        "gen config: annotators_per_instance must lie in [1, annotators]");
  }
  if (flip_rate < 0.0 || flip_rate >= 0.5) {
    throw Error("gen config: flip_rate must lie in [0, 0.5)");
  }
  if (unseen_fraction < 0.0 || unseen_fraction > 1.0) {
    throw Error("gen config: unseen_fraction must lie in [0, 1]");
  }
  if (train_frac < 0.0 || dev_frac < 0.0 || test_frac < 0.0 ||
      std::abs(train_frac + dev_frac + test_frac - 1.0) > 1e-9) {
    throw Error("gen config: split fractions must be nonnegative and sum to 1");
  }
}

Population generate_population(const GenConfig& cfg) {
  cfg.validate();
  Population population;
  population.vocab_size = cfg.vocab_size;
  Rng rng(derive_seed(cfg.seed, 0));

  std::vector<std::vector<double>> raw(cfg.clusters);
  for (auto& w : raw) {
    w.resize(cfg.vocab_size);
    for (double& v : w) v = rng.normal();
  }
  if (cfg.clusters >= 2) {
    for (int v = 0; v < cfg.vocab_size; ++v) {
      double mean = 0.0;
      for (int c = 0; c < cfg.clusters; ++c) mean += raw[c][v];
      mean /= static_cast<double>(cfg.clusters);
      for (int c = 0; c < cfg.clusters; ++c) raw[c][v] -= mean;
    }
  }
  population.cluster_weights = std::move(raw);

  for (int a = 0; a < cfg.annotators; ++a) {
    population.annotators.push_back(
        {annotator_name(a), a % cfg.clusters, cfg.flip_rate});
  }
  return population;
}

int cluster_rule_label(const Population& population, int cluster,
                       const std::string& text) {
  if (cluster < 0 ||
      cluster >= static_cast<int>(population.cluster_weights.size())) {
    throw Error("cluster_rule_label: cluster out of range");
  }
  const auto counts = counts_from_text(text, population.vocab_size);
  return cluster_score(population, cluster, counts) > 0.0 ? 1 : 0;
}

namespace {

// Weighted sample without replacement; `candidates` shrinks in place.
int draw_weighted(std::vector<int>& candidates,
                  const std::vector<double>& weight_of, Rng& rng) {
  double total = 0.0;
  for (int c : candidates) total += weight_of[c];
  const double r = rng.next_double() * total;
  double acc = 0.0;
  std::size_t pick = candidates.size() - 1;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    acc += weight_of[candidates[i]];
    if (r < acc) {
      pick = i;
      break;
    }
  }
  const int chosen = candidates[pick];
  candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(pick));
  return chosen;
}

}  // namespace

Dataset generate_dataset(const Population& population, const GenConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(population.annotators.size()) != cfg.annotators) {
    throw Error("generate_dataset: population size does not match config");
  }
  Rng rng(derive_seed(cfg.seed, 1));
  const int n = cfg.instances;
  const int k = cfg.annotators;
  const int m = cfg.annotators_per_instance;

  // Instance content, margin-rejected so every cluster rule has a clear
  // decision on every instance.
  struct Draft {
    std::string text;
    TermCounts counts;
    std::vector<int> rule_labels;  // per cluster
  };
  std::vector<Draft> drafts(n);
  const int clusters = static_cast<int>(population.cluster_weights.size());
  for (int i = 0; i < n; ++i) {
    Draft best;
    double best_margin = -1.0;
    for (int attempt = 0; attempt < kMaxInstanceRetries; ++attempt) {
      const int len = 8 + static_cast<int>(rng.bounded(9));
      std::vector<int> tokens(len);
      for (int& t : tokens) {
        t = static_cast<int>(rng.bounded(cfg.vocab_size));
      }
      Draft draft;
      draft.counts = counts_from_tokens(tokens);
      double min_margin = std::numeric_limits<double>::infinity();
      draft.rule_labels.resize(clusters);
      for (int c = 0; c < clusters; ++c) {
        const double score = cluster_score(population, c, draft.counts);
        min_margin = std::min(min_margin, std::abs(score));
        draft.rule_labels[c] = score > 0.0 ? 1 : 0;
      }
      if (min_margin > best_margin) {
        std::string text;
        for (std::size_t t = 0; t < tokens.size(); ++t) {
          if (t > 0) text += ' ';
          text += token_name(tokens[t]);
        }
        draft.text = std::move(text);
        best = std::move(draft);
        best_margin = min_margin;
      }
      if (best_margin >= kMinRuleMargin) break;
    }
    drafts[i] = std::move(best);
  }

  // Split assignment.
  const int n_dev = static_cast<int>(std::llround(cfg.dev_frac * n));
  const int n_test = static_cast<int>(std::llround(cfg.test_frac * n));
  const int n_train = n - n_dev - n_test;
  if (n_train < 0) {
    throw Error("generate_dataset: split fractions leave no train instances");
  }
  std::vector<int> shuffled(n);
  for (int i = 0; i < n; ++i) shuffled[i] = i;
  rng.shuffle(shuffled);
  std::array<std::vector<int>, 3> members;
  members[0].assign(shuffled.begin(), shuffled.begin() + n_train);
  members[1].assign(shuffled.begin() + n_train,
                    shuffled.begin() + n_train + n_dev);
  members[2].assign(shuffled.begin() + n_train + n_dev, shuffled.end());
  for (auto& list : members) std::sort(list.begin(), list.end());

  // Unseen enforcement: each selected annotator is barred from one split.
  std::array<std::vector<bool>, 3> barred;
  for (auto& b : barred) b.assign(k, false);
  const int n_excluded =
      static_cast<int>(std::llround(cfg.unseen_fraction * k));
  std::vector<int> annotator_order(k);
  for (int a = 0; a < k; ++a) annotator_order[a] = a;
  rng.shuffle(annotator_order);
  for (int j = 0; j < n_excluded; ++j) {
    barred[j % 3][annotator_order[j]] = true;
  }

  std::array<std::vector<int>, 3> eligible;
  for (int s = 0; s < 3; ++s) {
    for (int a = 0; a < k; ++a) {
      if (!barred[s][a]) eligible[s].push_back(a);
    }
    if (!members[s].empty() &&
        static_cast<int>(eligible[s].size()) < m) {
      throw Error(
          "generate_dataset: infeasible annotators_per_instance after "
          "unseen exclusions in split " +
          std::string(kSplitNames[s]));
    }
  }

  std::vector<double> weight_of(k, 1.0);
  if (cfg.participation == Participation::kPowerLaw) {
    for (int a = 0; a < k; ++a) {
      weight_of[a] = std::pow(static_cast<double>(a + 1), -kPowerLawExponent);
    }
  }

  Dataset dataset;
  for (int s = 0; s < 3; ++s) {
    // Coverage queue: every eligible annotator lands in this split at least
    // once while the split has spare instances.
    std::vector<int> queue = eligible[s];
    rng.shuffle(queue);
    std::size_t queue_pos = 0;

    for (int idx : members[s]) {
      std::vector<int> chosen;
      if (queue_pos < queue.size()) {
        chosen.push_back(queue[queue_pos++]);
      }
      std::vector<int> candidates;
      for (int a : eligible[s]) {
        if (chosen.empty() || a != chosen.front()) candidates.push_back(a);
      }
      while (static_cast<int>(chosen.size()) < m) {
        chosen.push_back(draw_weighted(candidates, weight_of, rng));
      }
      std::sort(chosen.begin(), chosen.end());

      Instance instance;
      instance.id = instance_name(idx);
      instance.text = drafts[idx].text;
      for (int a : chosen) {
        const auto& spec = population.annotators[a];
        int label = drafts[idx].rule_labels[spec.cluster];
        if (rng.next_double() < spec.flip_rate) label = 1 - label;
        instance.annotations.emplace_back(spec.id, label);
      }
      dataset.splits[s].push_back(std::move(instance));
    }
  }
  dataset.registry = AnnotatorRegistry::build(dataset.splits);
  return dataset;
}

SoftLabel oracle_soft_label(const Population& population,
                            const Instance& instance) {
  if (instance.annotations.empty()) {
    throw Error("oracle_soft_label: instance has no annotators");
  }
  std::unordered_map<std::string, const AnnotatorSpec*> by_id;
  for (const auto& spec : population.annotators) by_id.emplace(spec.id, &spec);
  const auto counts = counts_from_text(instance.text, population.vocab_size);

  double v1 = 0.0;
  for (const auto& [annotator, label] : instance.annotations) {
    const auto it = by_id.find(annotator);
    if (it == by_id.end()) {
      throw Error("oracle_soft_label: annotator '" + annotator +
                  "' not in population");
    }
    const AnnotatorSpec& spec = *it->second;
    const int rule =
        cluster_score(population, spec.cluster, counts) > 0.0 ? 1 : 0;
    v1 += rule == 1 ? 1.0 - spec.flip_rate : spec.flip_rate;
  }
  v1 /= static_cast<double>(instance.annotations.size());
  return {1.0 - v1, v1};
}

}  // namespace peranno
