#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace peranno {

enum class Split { kTrain = 0, kDev = 1, kTest = 2 };
inline constexpr std::array<const char*, 3> kSplitNames = {"train", "dev",
                                                           "test"};
std::optional<Split> split_from_name(const std::string& name);

enum class LabelMapping { kAlreadyBinary, kConvAbuseScale };

// One annotated text. Annotations keep the file order of the annotator map.
struct Instance {
  std::string id;
  std::string text;
  std::vector<std::pair<std::string, int>> annotations;
};

struct Turn {
  std::string speaker;
  std::string text;
};

struct HardLabel {
  int label = 0;
  bool tie = false;
};

struct SoftLabel {
  double v0 = 1.0;
  double v1 = 0.0;
};

// Stable annotator-id -> head-index bijection, ordered lexicographically.
class AnnotatorRegistry {
 public:
  static AnnotatorRegistry build(
      const std::array<std::vector<Instance>, 3>& splits);

  int size() const { return static_cast<int>(ids_.size()); }
  const std::vector<std::string>& ids() const { return ids_; }
  std::optional<int> index_of(const std::string& id) const;
  bool seen_in(int annotator, Split split) const {
    return seen_[annotator][static_cast<int>(split)];
  }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::array<bool, 3>> seen_;
};

// Dense N x K store of binary labels plus a presence mask. Entries with
// mask == 0 are never read.
struct AnnotationMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> values;
  std::vector<std::uint8_t> mask;

  static AnnotationMatrix zeros(int rows, int cols);
  bool present(int i, int k) const { return mask[idx(i, k)] != 0; }
  int value(int i, int k) const { return values[idx(i, k)]; }
  void set(int i, int k, int label) {
    values[idx(i, k)] = static_cast<std::uint8_t>(label);
    mask[idx(i, k)] = 1;
  }
  int present_in_row(int i) const;

 private:
  std::size_t idx(int i, int k) const {
    return static_cast<std::size_t>(i) * cols + k;
  }
};

struct Dataset {
  std::array<std::vector<Instance>, 3> splits;
  AnnotatorRegistry registry;

  const std::vector<Instance>& split(Split s) const {
    return splits[static_cast<int>(s)];
  }
  std::vector<Instance>& split(Split s) { return splits[static_cast<int>(s)]; }
};

// ConvAbuse raw scale is {-3,...,1}; negative severities mean abuse.
int binarize_convabuse(int raw);

// Final user turn, verbatim. Throws when the conversation has no user turn.
std::string extract_last_user_utterance(std::span<const Turn> turns);

// Majority label over present annotations. Exact ties take `tie_break`
// (0 by default) and set the tie flag.
HardLabel derive_hard_label(std::span<const std::uint8_t> values,
                            std::span<const std::uint8_t> mask,
                            int tie_break = 0);
HardLabel derive_hard_label(const AnnotationMatrix& m, int row,
                            int tie_break = 0);

// Empirical annotation distribution: v1 = (# present 1s) / (# present).
SoftLabel derive_soft_label(std::span<const std::uint8_t> values,
                            std::span<const std::uint8_t> mask);
SoftLabel derive_soft_label(const AnnotationMatrix& m, int row);

// Loads the interchange files train.json and dev.json (test.json optional)
// from `dir`. Accepted document forms: an array of records, an object with
// a "records" array, or an object mapping id -> record.
Dataset load_dataset(const std::filesystem::path& dir, LabelMapping mapping);

// Writes train.json/dev.json/test.json in the emitted interchange form
// ({"config": {...}, "records": [...]}). `config` may be empty.
void save_dataset(
    const Dataset& dataset, const std::filesystem::path& dir,
    const std::vector<std::pair<std::string, std::string>>& config = {});

AnnotationMatrix build_matrix(const Dataset& dataset, Split split);

enum class AlphaSplit { kTrain, kAll };

struct StatsReport {
  std::array<std::int64_t, 3> instance_count = {0, 0, 0};
  double utterance_len_mean = 0.0;
  double utterance_len_std = 0.0;
  double annotators_per_instance_mean = 0.0;
  int total_annotators = 0;
  double unseen_pct = 0.0;
  double alpha = 0.0;
  AlphaSplit alpha_split = AlphaSplit::kTrain;
  std::int64_t annotator_instances_min = 0;
  std::int64_t annotator_instances_max = 0;
  double annotator_instances_mean = 0.0;
  double annotator_instances_std = 0.0;
};

StatsReport dataset_stats(const Dataset& dataset,
                          AlphaSplit alpha_split = AlphaSplit::kTrain);

}  // namespace peranno
