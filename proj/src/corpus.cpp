#include "peranno/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "peranno/error.hpp"
#include "peranno/features.hpp"
#include "peranno/metrics.hpp"

namespace peranno {

using ordered_json = nlohmann::ordered_json;

std::optional<Split> split_from_name(const std::string& name) {
  for (int i = 0; i < 3; ++i) {
    if (name == kSplitNames[i]) return static_cast<Split>(i);
  }
  return std::nullopt;
}

AnnotatorRegistry AnnotatorRegistry::build(
    const std::array<std::vector<Instance>, 3>& splits) {
  std::set<std::string> unique;
  for (const auto& split : splits) {
    for (const auto& instance : split) {
      for (const auto& [annotator, label] : instance.annotations) {
        unique.insert(annotator);
      }
    }
  }
  AnnotatorRegistry registry;
  registry.ids_.assign(unique.begin(), unique.end());  // lexicographic
  for (std::size_t i = 0; i < registry.ids_.size(); ++i) {
    registry.index_.emplace(registry.ids_[i], static_cast<int>(i));
  }
  registry.seen_.assign(registry.ids_.size(), {false, false, false});
  for (int s = 0; s < 3; ++s) {
    for (const auto& instance : splits[s]) {
      for (const auto& [annotator, label] : instance.annotations) {
        registry.seen_[registry.index_.at(annotator)][s] = true;
      }
    }
  }
  return registry;
}

std::optional<int> AnnotatorRegistry::index_of(const std::string& id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

AnnotationMatrix AnnotationMatrix::zeros(int rows, int cols) {
  AnnotationMatrix m;
  m.rows = rows;
  m.cols = cols;
  m.values.assign(static_cast<std::size_t>(rows) * cols, 0);
  m.mask.assign(static_cast<std::size_t>(rows) * cols, 0);
  return m;
}

int AnnotationMatrix::present_in_row(int i) const {
  int count = 0;
  for (int k = 0; k < cols; ++k) {
    if (present(i, k)) ++count;
  }
  return count;
}

int binarize_convabuse(int raw) {
  if (raw < -3 || raw > 1) {
    throw Error("binarize_convabuse: raw label " + std::to_string(raw) +
                " outside [-3, 1]");
  }
  return raw < 0 ? 1 : 0;
}

std::string extract_last_user_utterance(std::span<const Turn> turns) {
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (it->speaker == "user") return it->text;
  }
  throw Error("extract_last_user_utterance: conversation has no user turn");
}

HardLabel derive_hard_label(std::span<const std::uint8_t> values,
                            std::span<const std::uint8_t> mask,
                            int tie_break) {
  int ones = 0;
  int total = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!mask[k]) continue;
    ++total;
    ones += values[k] != 0;
  }
  if (total == 0) {
    throw Error("derive_hard_label: no present annotations");
  }
  const int zeros = total - ones;
  HardLabel out;
  if (ones == zeros) {
    out.label = tie_break;
    out.tie = true;
  } else {
    out.label = ones > zeros ? 1 : 0;
  }
  return out;
}

HardLabel derive_hard_label(const AnnotationMatrix& m, int row,
                            int tie_break) {
  const std::size_t off = static_cast<std::size_t>(row) * m.cols;
  return derive_hard_label({m.values.data() + off, (std::size_t)m.cols},
                           {m.mask.data() + off, (std::size_t)m.cols},
                           tie_break);
}

SoftLabel derive_soft_label(std::span<const std::uint8_t> values,
                            std::span<const std::uint8_t> mask) {
  int ones = 0;
  int total = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!mask[k]) continue;
    ++total;
    ones += values[k] != 0;
  }
  if (total == 0) {
    throw Error("derive_soft_label: no present annotations");
  }
  SoftLabel out;
  out.v1 = static_cast<double>(ones) / static_cast<double>(total);
  out.v0 = 1.0 - out.v1;
  return out;
}

SoftLabel derive_soft_label(const AnnotationMatrix& m, int row) {
  const std::size_t off = static_cast<std::size_t>(row) * m.cols;
  return derive_soft_label({m.values.data() + off, (std::size_t)m.cols},
                           {m.mask.data() + off, (std::size_t)m.cols});
}

namespace {

int binarize_label(int raw, LabelMapping mapping, const std::string& id,
                   const std::string& annotator) {
  if (mapping == LabelMapping::kConvAbuseScale) {
    if (raw < -3 || raw > 1) {
      throw Error("load_dataset: instance '" + id + "' annotator '" +
                  annotator + "': label " + std::to_string(raw) +
                  " outside the ConvAbuse scale [-3, 1]");
    }
    return binarize_convabuse(raw);
  }
  if (raw != 0 && raw != 1) {
    throw Error("load_dataset: instance '" + id + "' annotator '" + annotator +
                "': label " + std::to_string(raw) + " is not binary");
  }
  return raw;
}

Instance parse_record(const ordered_json& record, const std::string& file,
                      LabelMapping mapping, const std::string& fallback_id) {
  if (!record.is_object()) {
    throw Error("load_dataset: " + file + ": record for '" + fallback_id +
                "' is not an object");
  }
  Instance instance;
  if (record.contains("id")) {
    if (!record["id"].is_string()) {
      throw Error("load_dataset: " + file + ": instance '" + fallback_id +
                  "': field 'id' must be a string");
    }
    instance.id = record["id"].get<std::string>();
  } else if (!fallback_id.empty()) {
    instance.id = fallback_id;
  } else {
    throw Error("load_dataset: " + file + ": record missing field 'id'");
  }

  if (!record.contains("text")) {
    throw Error("load_dataset: instance '" + instance.id +
                "': missing field 'text'");
  }
  const auto& text = record["text"];
  if (text.is_string()) {
    instance.text = text.get<std::string>();
  } else if (text.is_object() && text.contains("turns") &&
             text["turns"].is_array()) {
    std::vector<Turn> turns;
    for (const auto& t : text["turns"]) {
      if (!t.is_object() || !t.contains("speaker") || !t.contains("text") ||
          !t["speaker"].is_string() || !t["text"].is_string()) {
        throw Error("load_dataset: instance '" + instance.id +
                    "': malformed turn in field 'text'");
      }
      turns.push_back(
          {t["speaker"].get<std::string>(), t["text"].get<std::string>()});
    }
    try {
      instance.text = extract_last_user_utterance(turns);
    } catch (const Error&) {
      throw Error("load_dataset: instance '" + instance.id +
                  "': conversation has no user turn");
    }
  } else {
    throw Error("load_dataset: instance '" + instance.id +
                "': field 'text' must be a string or {\"turns\": [...]}");
  }

  if (!record.contains("annotations") || !record["annotations"].is_object()) {
    throw Error("load_dataset: instance '" + instance.id +
                "': missing or malformed field 'annotations'");
  }
  for (const auto& [annotator, label] : record["annotations"].items()) {
    if (!label.is_number_integer()) {
      throw Error("load_dataset: instance '" + instance.id + "' annotator '" +
                  annotator + "': label must be an integer");
    }
    instance.annotations.emplace_back(
        annotator, binarize_label(label.get<int>(), mapping, instance.id,
                                  annotator));
  }
  return instance;
}

std::vector<Instance> load_split_file(const std::filesystem::path& path,
                                      LabelMapping mapping, bool required,
                                      bool annotations_required) {
  std::vector<Instance> instances;
  if (!std::filesystem::exists(path)) {
    if (required) {
      throw Error("load_dataset: missing split file " + path.string());
    }
    return instances;
  }
  std::ifstream in(path);
  if (!in) {
    throw Error("load_dataset: cannot open " + path.string());
  }
  ordered_json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error("load_dataset: " + path.string() + ": " + e.what());
  }

  const std::string file = path.filename().string();
  if (doc.is_array()) {
    for (const auto& record : doc) {
      instances.push_back(parse_record(record, file, mapping, ""));
    }
  } else if (doc.is_object() && doc.contains("records") &&
             doc["records"].is_array()) {
    for (const auto& record : doc["records"]) {
      instances.push_back(parse_record(record, file, mapping, ""));
    }
  } else if (doc.is_object()) {
    for (const auto& [key, record] : doc.items()) {
      instances.push_back(parse_record(record, file, mapping, key));
    }
  } else {
    throw Error("load_dataset: " + file +
                ": document must be an array or object of records");
  }

  std::set<std::string> ids;
  for (const auto& instance : instances) {
    if (!ids.insert(instance.id).second) {
      throw Error("load_dataset: " + file + ": duplicate instance id '" +
                  instance.id + "'");
    }
    if (annotations_required && instance.annotations.empty()) {
      throw Error("load_dataset: " + file + ": instance '" + instance.id +
                  "' has no annotations");
    }
  }
  return instances;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir, LabelMapping mapping) {
  Dataset dataset;
  dataset.splits[0] =
      load_split_file(dir / "train.json", mapping, true, true);
  dataset.splits[1] = load_split_file(dir / "dev.json", mapping, true, true);
  dataset.splits[2] =
      load_split_file(dir / "test.json", mapping, false, false);
  dataset.registry = AnnotatorRegistry::build(dataset.splits);
  return dataset;
}

void save_dataset(
    const Dataset& dataset, const std::filesystem::path& dir,
    const std::vector<std::pair<std::string, std::string>>& config) {
  std::filesystem::create_directories(dir);
  for (int s = 0; s < 3; ++s) {
    ordered_json doc = ordered_json::object();
    ordered_json cfg = ordered_json::object();
    for (const auto& [key, value] : config) cfg[key] = value;
    doc["config"] = std::move(cfg);
    ordered_json records = ordered_json::array();
    for (const auto& instance : dataset.splits[s]) {
      ordered_json record = ordered_json::object();
      record["id"] = instance.id;
      record["text"] = instance.text;
      ordered_json annotations = ordered_json::object();
      for (const auto& [annotator, label] : instance.annotations) {
        annotations[annotator] = label;
      }
      record["annotations"] = std::move(annotations);
      records.push_back(std::move(record));
    }
    doc["records"] = std::move(records);
    const auto path = dir / (std::string(kSplitNames[s]) + ".json");
    std::ofstream out(path);
    if (!out) {
      throw Error("save_dataset: cannot write " + path.string());
    }
    out << doc.dump(2) << "\n";
  }
}

AnnotationMatrix build_matrix(const Dataset& dataset, Split split) {
  const auto& instances = dataset.split(split);
  auto matrix = AnnotationMatrix::zeros(static_cast<int>(instances.size()),
                                        dataset.registry.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    for (const auto& [annotator, label] : instances[i].annotations) {
      const auto k = dataset.registry.index_of(annotator);
      if (!k) {
        throw Error("build_matrix: annotator '" + annotator +
                    "' missing from registry");
      }
      matrix.set(static_cast<int>(i), *k, label);
    }
  }
  return matrix;
}

namespace {

std::pair<double, double> mean_and_sample_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / static_cast<double>(xs.size() - 1))};
}

}  // namespace

StatsReport dataset_stats(const Dataset& dataset, AlphaSplit alpha_split) {
  StatsReport report;
  report.alpha_split = alpha_split;
  report.total_annotators = dataset.registry.size();

  std::vector<double> lengths;
  std::vector<double> per_instance;
  std::vector<std::int64_t> per_annotator(dataset.registry.size(), 0);
  for (int s = 0; s < 3; ++s) {
    const auto& instances = dataset.splits[s];
    report.instance_count[s] = static_cast<std::int64_t>(instances.size());
    for (const auto& instance : instances) {
      lengths.push_back(static_cast<double>(tokenize(instance.text).size()));
      per_instance.push_back(static_cast<double>(instance.annotations.size()));
      for (const auto& [annotator, label] : instance.annotations) {
        ++per_annotator[*dataset.registry.index_of(annotator)];
      }
    }
  }
  std::tie(report.utterance_len_mean, report.utterance_len_std) =
      mean_and_sample_std(lengths);
  if (!per_instance.empty()) {
    double sum = 0.0;
    for (double v : per_instance) sum += v;
    report.annotators_per_instance_mean =
        sum / static_cast<double>(per_instance.size());
  }

  // Unseen = missing from at least one split. Empty splits are not counted
  // against anyone (a dataset without a test file would otherwise report
  // every annotator as unseen).
  int unseen = 0;
  for (int k = 0; k < dataset.registry.size(); ++k) {
    bool everywhere = true;
    for (int s = 0; s < 3; ++s) {
      if (dataset.splits[s].empty()) continue;
      everywhere = everywhere && dataset.registry.seen_in(k, (Split)s);
    }
    if (!everywhere) ++unseen;
  }
  report.unseen_pct = dataset.registry.size() == 0
                          ? 0.0
                          : 100.0 * unseen / dataset.registry.size();

  if (!per_annotator.empty()) {
    report.annotator_instances_min =
        *std::min_element(per_annotator.begin(), per_annotator.end());
    report.annotator_instances_max =
        *std::max_element(per_annotator.begin(), per_annotator.end());
    std::vector<double> counts(per_annotator.begin(), per_annotator.end());
    std::tie(report.annotator_instances_mean, report.annotator_instances_std) =
        mean_and_sample_std(counts);
  }

  if (alpha_split == AlphaSplit::kTrain) {
    report.alpha = krippendorff_alpha_nominal(build_matrix(dataset,
                                                           Split::kTrain));
  } else {
    AnnotationMatrix all = AnnotationMatrix::zeros(0, dataset.registry.size());
    for (int s = 0; s < 3; ++s) {
      const auto part = build_matrix(dataset, static_cast<Split>(s));
      all.rows += part.rows;
      all.values.insert(all.values.end(), part.values.begin(),
                        part.values.end());
      all.mask.insert(all.mask.end(), part.mask.begin(), part.mask.end());
    }
    report.alpha = krippendorff_alpha_nominal(all);
  }
  return report;
}

}  // namespace peranno
