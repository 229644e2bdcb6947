#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "peranno/corpus.hpp"

namespace peranno {

enum class Participation { kUniform, kPowerLaw };

// Annotator behavior: the sign of the cluster's weight vector on the
// instance's term counts, flipped with probability flip_rate.
struct AnnotatorSpec {
  std::string id;
  int cluster = 0;
  double flip_rate = 0.0;
};

struct GenConfig {
  int instances = 100;
  int vocab_size = 50;
  int annotators = 3;
  int clusters = 1;
  int annotators_per_instance = 3;
  double flip_rate = 0.0;
  double unseen_fraction = 0.0;
  double train_frac = 0.7;
  double dev_frac = 0.15;
  double test_frac = 0.15;
  Participation participation = Participation::kUniform;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Population {
  std::vector<AnnotatorSpec> annotators;
  // One weight vector per cluster over the generator vocabulary. For two or
  // more clusters the vectors are centered so they sum to zero: every
  // instance then has at least one dissenting cluster, which keeps the
  // count-based soft labels away from the degenerate one-hot corners.
  std::vector<std::vector<double>> cluster_weights;
  int vocab_size = 0;
};

// Deterministic in (config, seed); annotators are assigned to clusters
// round-robin.
Population generate_population(const GenConfig& cfg);

// Synthetic token sequences annotated by sampled annotator subsets.
// Annotators chosen by `unseen_fraction` are barred from one split each;
// every split guarantees each remaining eligible annotator at least one
// annotation (capacity permitting), so the unseen percentage matches the
// requested fraction.
Dataset generate_dataset(const Population& population, const GenConfig& cfg);

// Exact expected annotation distribution for a generated instance: the
// mixture over its annotators of rule output under flip noise.
SoftLabel oracle_soft_label(const Population& population,
                            const Instance& instance);

// Deterministic label the cluster rule assigns to this text.
int cluster_rule_label(const Population& population, int cluster,
                       const std::string& text);

}  // namespace peranno
