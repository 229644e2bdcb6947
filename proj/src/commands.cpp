#include "peranno/commands.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_map>

#include "peranno/checkpoint.hpp"
#include "peranno/corpus.hpp"
#include "peranno/error.hpp"
#include "peranno/metrics.hpp"
#include "peranno/model.hpp"
#include "peranno/report.hpp"
#include "peranno/svm.hpp"
#include "peranno/synthgen.hpp"

namespace peranno {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  RunConfig cfg;
  std::istringstream is(read_text_file(path));
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error("config " + path.string() + ":" + std::to_string(line_no) +
                  ": expected key=value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw Error("config " + path.string() + ":" + std::to_string(line_no) +
                  ": empty key");
    }
    if (cfg.items_.count(key)) {
      throw Error("config " + path.string() + ": duplicate key '" + key + "'");
    }
    cfg.items_.emplace(key, value);
  }
  return cfg;
}

RunConfig RunConfig::from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  RunConfig cfg;
  for (const auto& [key, value] : pairs) cfg.set(key, value);
  return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  items_[key] = value;
}

bool RunConfig::has(const std::string& key) const {
  return items_.count(key) != 0;
}

namespace {

// ---------------------------------------------------------------------------
// Config resolution
// ---------------------------------------------------------------------------

// Resolved view of a command's configuration: canonical string per key,
// echoed verbatim into the outputs.
class Resolver {
 public:
  Resolver(const RunConfig& cfg, const std::set<std::string>& allowed,
           const std::string& command)
      : cfg_(cfg) {
    for (const auto& [key, value] : cfg.items()) {
      if (!allowed.count(key)) {
        throw Error(command + ": unknown config key '" + key + "'");
      }
    }
  }

  std::string str(const std::string& key, const std::string& fallback) {
    return put(key, raw(key).value_or(fallback));
  }

  std::string required(const std::string& key) {
    const auto v = raw(key);
    if (!v || v->empty()) {
      throw Error("config: missing required key '" + key + "'");
    }
    return put(key, *v);
  }

  int integer(const std::string& key, int fallback) {
    const auto v = raw(key);
    int value = fallback;
    if (v) value = parse_int(key, *v);
    put(key, std::to_string(value));
    return value;
  }

  double real(const std::string& key, double fallback) {
    const auto v = raw(key);
    double value = fallback;
    if (v) value = parse_double(key, *v);
    put(key, format_double(value));
    return value;
  }

  bool boolean(const std::string& key, bool fallback) {
    const auto v = raw(key);
    bool value = fallback;
    if (v) {
      if (*v == "true") {
        value = true;
      } else if (*v == "false") {
        value = false;
      } else {
        throw Error("config: key '" + key + "' must be true or false");
      }
    }
    put(key, value ? "true" : "false");
    return value;
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) {
    const auto v = raw(key);
    std::uint64_t value = fallback;
    if (v) {
      try {
        std::size_t used = 0;
        value = std::stoull(*v, &used);
        if (used != v->size()) throw std::invalid_argument("");
      } catch (...) {
        throw Error("config: key '" + key + "' must be an unsigned integer");
      }
    }
    put(key, std::to_string(value));
    return value;
  }

  // Enumerated value; `options` maps canonical spellings to values.
  template <typename T>
  T choice(const std::string& key,
           const std::vector<std::pair<std::string, T>>& options,
           const std::string& fallback) {
    const std::string v = raw(key).value_or(fallback);
    for (const auto& [name, value] : options) {
      if (name == v) {
        put(key, name);
        return value;
      }
    }
    std::string expected;
    for (const auto& [name, value] : options) {
      if (!expected.empty()) expected += ", ";
      expected += name;
    }
    throw Error("config: key '" + key + "' must be one of: " + expected);
  }

  std::vector<int> int_list(const std::string& key,
                            const std::string& fallback) {
    const std::string v = raw(key).value_or(fallback);
    std::vector<int> values;
    std::string canonical;
    std::istringstream is(v);
    std::string part;
    while (std::getline(is, part, ',')) {
      const std::string p = trim(part);
      if (p.empty()) continue;
      values.push_back(parse_int(key, p));
      if (!canonical.empty()) canonical += ',';
      canonical += std::to_string(values.back());
    }
    if (values.empty()) {
      throw Error("config: key '" + key + "' needs at least one integer");
    }
    put(key, canonical);
    return values;
  }

  // Sorted resolved pairs for echoing.
  const std::map<std::string, std::string>& resolved() const {
    return resolved_;
  }

  std::vector<std::pair<std::string, std::string>> echo_pairs(
      const std::string& prefix = "config.") const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& [key, value] : resolved_) {
      out.emplace_back(prefix + key, value);
    }
    return out;
  }

  std::string echo_text() const {
    std::string out;
    for (const auto& [key, value] : resolved_) {
      out += key;
      out += '=';
      out += value;
      out += '\n';
    }
    return out;
  }

 private:
  std::optional<std::string> raw(const std::string& key) const {
    const auto it = cfg_.items().find(key);
    if (it == cfg_.items().end()) return std::nullopt;
    return it->second;
  }

  std::string put(const std::string& key, const std::string& canonical) {
    resolved_[key] = canonical;
    return canonical;
  }

  static int parse_int(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const int value = std::stoi(v, &used);
      if (used != v.size()) throw std::invalid_argument("");
      return value;
    } catch (...) {
      throw Error("config: key '" + key + "' must be an integer");
    }
  }

  static double parse_double(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double value = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument("");
      return value;
    } catch (...) {
      throw Error("config: key '" + key + "' must be a number");
    }
  }

  const RunConfig& cfg_;
  std::map<std::string, std::string> resolved_;
};

const std::vector<std::pair<std::string, LabelMapping>> kLabelMappings = {
    {"already_binary", LabelMapping::kAlreadyBinary},
    {"convabuse_scale", LabelMapping::kConvAbuseScale}};
const std::vector<std::pair<std::string, AlphaSplit>> kAlphaSplits = {
    {"train", AlphaSplit::kTrain}, {"all", AlphaSplit::kAll}};
const std::vector<std::pair<std::string, FeatureKind>> kFeatureKinds = {
    {"tfidf", FeatureKind::kTfidf}, {"bow", FeatureKind::kBow}};
const std::vector<std::pair<std::string, ModelKind>> kModelKinds = {
    {"multitask", ModelKind::kMultitask},
    {"singletask", ModelKind::kSingletask},
    {"svm", ModelKind::kSvm}};
const std::vector<std::pair<std::string, int>> kTieBreaks = {{"zero", 0},
                                                             {"one", 1}};
const std::vector<std::pair<std::string, Aggregation>> kAggregations = {
    {"argmax-count", Aggregation::kArgmaxCount},
    {"mean-prob", Aggregation::kMeanProb}};
const std::vector<std::pair<std::string, Participation>> kParticipations = {
    {"uniform", Participation::kUniform},
    {"powerlaw", Participation::kPowerLaw}};
const std::vector<std::pair<std::string, SingletaskTarget>>
    kSingletaskTargets = {{"hard", SingletaskTarget::kHard},
                          {"soft", SingletaskTarget::kSoft}};
const std::vector<std::pair<std::string, Split>> kSplits = {
    {"train", Split::kTrain}, {"dev", Split::kDev}, {"test", Split::kTest}};

std::string model_kind_name(ModelKind kind) {
  for (const auto& [name, value] : kModelKinds) {
    if (value == kind) return name;
  }
  return "unknown";
}

void ensure_out_dir(const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
}

}  // namespace

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

void cmd_stats(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  Resolver r(cfg, {"dataset", "label_mapping", "alpha_split"}, "stats");
  const std::string dataset_path = r.required("dataset");
  const auto mapping =
      r.choice<LabelMapping>("label_mapping", kLabelMappings,
                             "already_binary");
  const auto alpha_split =
      r.choice<AlphaSplit>("alpha_split", kAlphaSplits, "train");

  const Dataset dataset = load_dataset(dataset_path, mapping);
  const StatsReport stats = dataset_stats(dataset, alpha_split);

  KvFile out;
  for (const auto& [key, value] : r.echo_pairs()) out.add(key, value);
  for (int s = 0; s < 3; ++s) {
    out.add(std::string("instances.") + kSplitNames[s],
            stats.instance_count[s]);
  }
  out.add("utterance_length.mean", stats.utterance_len_mean);
  out.add("utterance_length.std", stats.utterance_len_std);
  out.add("annotators.total",
          static_cast<std::int64_t>(stats.total_annotators));
  out.add("annotators_per_instance.mean", stats.annotators_per_instance_mean);
  out.add("unseen_annotators.pct", stats.unseen_pct);
  out.add("krippendorff_alpha", stats.alpha);
  out.add("annotator_instances.min", stats.annotator_instances_min);
  out.add("annotator_instances.max", stats.annotator_instances_max);
  out.add("annotator_instances.mean", stats.annotator_instances_mean);
  out.add("annotator_instances.std", stats.annotator_instances_std);

  ensure_out_dir(out_dir);
  out.write(out_dir / "stats.txt");
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

void cmd_synth(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  Resolver r(cfg,
             {"instances", "vocab_size", "annotators", "clusters",
              "annotators_per_instance", "flip_rate", "unseen_fraction",
              "train_frac", "dev_frac", "test_frac", "participation", "seed"},
             "synth");
  GenConfig gen;
  gen.instances = r.integer("instances", gen.instances);
  gen.vocab_size = r.integer("vocab_size", gen.vocab_size);
  gen.annotators = r.integer("annotators", gen.annotators);
  gen.clusters = r.integer("clusters", gen.clusters);
  gen.annotators_per_instance =
      r.integer("annotators_per_instance", gen.annotators_per_instance);
  gen.flip_rate = r.real("flip_rate", gen.flip_rate);
  gen.unseen_fraction = r.real("unseen_fraction", gen.unseen_fraction);
  gen.train_frac = r.real("train_frac", gen.train_frac);
  gen.dev_frac = r.real("dev_frac", gen.dev_frac);
  gen.test_frac = r.real("test_frac", gen.test_frac);
  gen.participation =
      r.choice<Participation>("participation", kParticipations, "uniform");
  gen.seed = r.seed("seed", 0);
  gen.validate();

  const Population population = generate_population(gen);
  const Dataset dataset = generate_dataset(population, gen);

  ensure_out_dir(out_dir);
  std::vector<std::pair<std::string, std::string>> echo;
  for (const auto& [key, value] : r.resolved()) echo.emplace_back(key, value);
  save_dataset(dataset, out_dir, echo);

  std::string oracle;
  for (const auto& [key, value] : r.echo_pairs()) {
    oracle += "# " + key + "=" + value + "\n";
  }
  oracle += "id\tv0\tv1\n";
  for (int s = 0; s < 3; ++s) {
    for (const auto& instance : dataset.splits[s]) {
      const SoftLabel soft = oracle_soft_label(population, instance);
      oracle += instance.id + "\t" + format_double(soft.v0) + "\t" +
                format_double(soft.v1) + "\n";
    }
  }
  write_text_file(out_dir / "oracle.tsv", oracle);
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

namespace {

const std::set<std::string> kTrainKeys = {
    "dataset",      "label_mapping", "model",         "features",
    "min_df",       "hidden",        "lr",            "batch_size",
    "max_epochs",   "patience",      "epsilon",       "adam_beta1",
    "adam_beta2",   "adam_epsilon",  "seed",          "tie_break",
    "aggregation",  "constrained",   "singletask_target",
    "svm_lambda",   "svm_epochs"};

struct HistoryRow {
  int epoch;
  double train_loss;
  double dev_soft_ce;
  double dev_micro_f1;
};

void write_history(const std::filesystem::path& path, const Resolver& r,
                   int best_epoch, int stopping_epoch,
                   const std::vector<HistoryRow>& rows) {
  std::string text;
  for (const auto& [key, value] : r.echo_pairs()) {
    text += "# " + key + "=" + value + "\n";
  }
  text += "# best_epoch=" + std::to_string(best_epoch) + "\n";
  text += "# stopping_epoch=" + std::to_string(stopping_epoch) + "\n";
  text += "epoch\ttrain_loss\tdev_soft_ce\tdev_micro_f1\n";
  for (const auto& row : rows) {
    text += std::to_string(row.epoch) + "\t" + format_double(row.train_loss) +
            "\t" + format_double(row.dev_soft_ce) + "\t" +
            format_double(row.dev_micro_f1) + "\n";
  }
  write_text_file(path, text);
}

}  // namespace

void cmd_train(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  Resolver r(cfg, kTrainKeys, "train");
  const std::string dataset_path = r.required("dataset");
  const auto mapping = r.choice<LabelMapping>("label_mapping", kLabelMappings,
                                              "already_binary");
  const auto kind = r.choice<ModelKind>("model", kModelKinds, "");
  const auto feature_kind =
      r.choice<FeatureKind>("features", kFeatureKinds, "tfidf");
  const int min_df = r.integer("min_df", 1);
  const auto hidden = r.int_list("hidden", "768");
  TrainConfig train_cfg;
  train_cfg.learning_rate = r.real("lr", 1e-2);
  train_cfg.batch_size = r.integer("batch_size", 64);
  train_cfg.max_epochs = r.integer("max_epochs", 100);
  train_cfg.patience = r.integer("patience", 40);
  train_cfg.epsilon = r.real("epsilon", 1e-12);
  train_cfg.adam_beta1 = r.real("adam_beta1", 0.9);
  train_cfg.adam_beta2 = r.real("adam_beta2", 0.999);
  train_cfg.adam_epsilon = r.real("adam_epsilon", 1e-8);
  train_cfg.seed = r.seed("seed", 0);
  TrainOptions opts;
  opts.tie_break = r.choice<int>("tie_break", kTieBreaks, "zero");
  opts.dev_aggregation =
      r.choice<Aggregation>("aggregation", kAggregations, "argmax-count");
  opts.dev_mode = r.boolean("constrained", false)
                      ? PredictionMode::kConstrained
                      : PredictionMode::kUnconstrained;
  opts.singletask_target = r.choice<SingletaskTarget>(
      "singletask_target", kSingletaskTargets, "hard");
  const double svm_lambda = r.real("svm_lambda", 1e-4);
  const int svm_epochs = r.integer("svm_epochs", 50);

  const Dataset dataset = load_dataset(dataset_path, mapping);
  if (dataset.split(Split::kTrain).empty()) {
    throw Error("train: dataset has an empty train split");
  }
  if (dataset.split(Split::kDev).empty()) {
    throw Error("train: dataset has an empty dev split");
  }
  const FeatureSet features = build_features(dataset, feature_kind, min_df);

  Checkpoint checkpoint;
  checkpoint.kind = kind;
  checkpoint.feature_kind = feature_kind;
  checkpoint.seed = train_cfg.seed;
  checkpoint.config_echo = r.echo_text();
  checkpoint.vocab = features.vocab;
  std::vector<HistoryRow> history;

  if (kind == ModelKind::kSvm) {
    const AnnotationMatrix train_matrix = build_matrix(dataset, Split::kTrain);
    const AnnotationMatrix dev_matrix = build_matrix(dataset, Split::kDev);
    std::vector<int> train_hard(train_matrix.rows);
    for (int i = 0; i < train_matrix.rows; ++i) {
      train_hard[i] = derive_hard_label(train_matrix, i, opts.tie_break).label;
    }
    std::vector<int> dev_hard(dev_matrix.rows);
    std::vector<SoftLabel> dev_gold_soft(dev_matrix.rows);
    for (int i = 0; i < dev_matrix.rows; ++i) {
      dev_hard[i] = derive_hard_label(dev_matrix, i, opts.tie_break).label;
      dev_gold_soft[i] = derive_soft_label(dev_matrix, i);
    }
    const auto& train_x = features.split(Split::kTrain);
    const auto& dev_x = features.split(Split::kDev);

    const auto on_epoch = [&](int epoch, const SvmModel& snapshot) {
      SvmModel probe = snapshot;
      fit_platt(probe, dev_x, dev_hard);
      double hinge = 0.0;
      for (std::size_t i = 0; i < train_x.size(); ++i) {
        const double y = train_hard[i] == 1 ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - y * svm_margin(probe, train_x[i]));
      }
      hinge /= static_cast<double>(train_x.size());
      std::vector<SoftLabel> dev_soft(dev_x.size());
      std::vector<int> dev_pred(dev_x.size());
      for (std::size_t i = 0; i < dev_x.size(); ++i) {
        const auto [hard, soft] = svm_predict(probe, dev_x[i]);
        dev_pred[i] = hard.label;
        dev_soft[i] = soft;
      }
      history.push_back(
          {epoch, hinge,
           soft_cross_entropy(dev_soft, dev_gold_soft, train_cfg.epsilon),
           micro_f1(dev_pred, dev_hard)});
    };

    SvmModel svm = svm_train(train_x, train_hard, svm_lambda, svm_epochs,
                             train_cfg.seed, on_epoch);
    fit_platt(svm, dev_x, dev_hard);
    checkpoint.svm = std::move(svm);
    checkpoint.best_epoch = svm_epochs;
    checkpoint.stopping_epoch = svm_epochs;
  } else {
    EncoderConfig encoder;
    encoder.hidden_dims = hidden;
    const TrainedModel trained =
        train(kind, dataset, features, encoder, train_cfg, opts);
    for (const auto& rec : trained.history) {
      history.push_back({rec.epoch, rec.train_individual_ce, rec.dev_soft_ce,
                         rec.dev_micro_f1});
    }
    checkpoint.model = trained.model;
    checkpoint.best_epoch = trained.best_epoch;
    checkpoint.stopping_epoch = trained.stopping_epoch;
  }

  ensure_out_dir(out_dir);
  save_checkpoint(checkpoint, out_dir / "model.ckpt");
  write_history(out_dir / "history.tsv", r, checkpoint.best_epoch,
                checkpoint.stopping_epoch, history);
  std::string vocab_text;
  for (const auto& [key, value] : r.echo_pairs()) {
    vocab_text += "# " + key + "=" + value + "\n";
  }
  vocab_text += features.vocab.to_text();
  write_text_file(out_dir / "vocab.txt", vocab_text);
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

void cmd_eval(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  Resolver r(cfg,
             {"checkpoint", "dataset", "label_mapping", "split", "constrained",
              "aggregation", "tie_break", "epsilon", "debug_oracle"},
             "eval");
  const bool oracle_mode =
      r.choice<bool>("debug_oracle",
                     {{"none", false}, {"gold", true}}, "none");
  std::string checkpoint_path;
  if (oracle_mode) {
    checkpoint_path = r.str("checkpoint", "");
  } else {
    checkpoint_path = r.required("checkpoint");
  }
  const std::string dataset_path = r.required("dataset");
  const auto mapping = r.choice<LabelMapping>("label_mapping", kLabelMappings,
                                              "already_binary");
  const auto split = r.choice<Split>("split", kSplits, "dev");
  const auto mode = r.boolean("constrained", false)
                        ? PredictionMode::kConstrained
                        : PredictionMode::kUnconstrained;
  const auto aggregation =
      r.choice<Aggregation>("aggregation", kAggregations, "argmax-count");
  const int tie_break = r.choice<int>("tie_break", kTieBreaks, "zero");
  const double epsilon = r.real("epsilon", 1e-12);

  const Dataset dataset = load_dataset(dataset_path, mapping);
  const auto& instances = dataset.split(split);

  Checkpoint checkpoint;
  std::string kind_name = "oracle";
  if (!oracle_mode) {
    checkpoint = load_checkpoint(checkpoint_path);
    kind_name = model_kind_name(checkpoint.kind);
    if (checkpoint.kind == ModelKind::kMultitask) {
      for (const auto& id : checkpoint.model.head_ids) {
        if (!dataset.registry.index_of(id)) {
          throw Error("eval: registry mismatch: checkpoint head '" + id +
                      "' is not an annotator of this dataset");
        }
      }
    }
  }

  // Rows with at least one annotation are evaluable; others carry no gold.
  std::vector<int> evaluated_rows;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!instances[i].annotations.empty()) {
      evaluated_rows.push_back(static_cast<int>(i));
    }
  }
  if (evaluated_rows.empty()) {
    throw Error("eval: split '" + std::string(kSplitNames[(int)split]) +
                "' has no annotated instances");
  }

  const int n = static_cast<int>(evaluated_rows.size());
  const int k = dataset.registry.size();
  AnnotationMatrix matrix = AnnotationMatrix::zeros(n, k);
  std::vector<SoftLabel> gold_soft(n);
  std::vector<int> gold_hard(n);
  for (int row = 0; row < n; ++row) {
    const Instance& instance = instances[evaluated_rows[row]];
    for (const auto& [annotator, label] : instance.annotations) {
      matrix.set(row, *dataset.registry.index_of(annotator), label);
    }
    gold_soft[row] = derive_soft_label(matrix, row);
    gold_hard[row] = derive_hard_label(matrix, row, tie_break).label;
  }

  std::vector<SoftLabel> pred_soft(n);
  std::vector<int> pred_hard(n);
  std::vector<std::vector<SoftLabel>> prob_matrix(
      n, std::vector<SoftLabel>(k, SoftLabel{1.0, 0.0}));
  std::vector<std::vector<int>> argmax_matrix(n, std::vector<int>(k, 0));

  if (oracle_mode) {
    for (int row = 0; row < n; ++row) {
      pred_soft[row] = gold_soft[row];
      pred_hard[row] = gold_hard[row];
      for (int col = 0; col < k; ++col) {
        if (matrix.present(row, col)) {
          prob_matrix[row][col] = matrix.value(row, col) == 1
                                      ? SoftLabel{0.0, 1.0}
                                      : SoftLabel{1.0, 0.0};
          argmax_matrix[row][col] = matrix.value(row, col);
        }
      }
    }
  } else if (checkpoint.kind == ModelKind::kSvm) {
    for (int row = 0; row < n; ++row) {
      const Instance& instance = instances[evaluated_rows[row]];
      const SparseVector x = vectorize_text(instance.text, checkpoint.vocab,
                                            checkpoint.feature_kind);
      const auto [hard, soft] = svm_predict(checkpoint.svm, x);
      pred_hard[row] = hard.label;
      pred_soft[row] = soft;
      // The single margin-based decision stands in for every annotator.
      for (int col = 0; col < k; ++col) {
        prob_matrix[row][col] = soft;
        argmax_matrix[row][col] = hard.label;
      }
    }
  } else {
    std::unordered_map<std::string, int> head_of;
    for (std::size_t h = 0; h < checkpoint.model.head_ids.size(); ++h) {
      head_of.emplace(checkpoint.model.head_ids[h], static_cast<int>(h));
    }
    for (int row = 0; row < n; ++row) {
      const Instance& instance = instances[evaluated_rows[row]];
      const SparseVector x = vectorize_text(instance.text, checkpoint.vocab,
                                            checkpoint.feature_kind);
      const auto probs = forward(checkpoint.model, x);
      std::vector<int> slots;
      slots.reserve(instance.annotations.size());
      for (const auto& [annotator, label] : instance.annotations) {
        const auto it = head_of.find(annotator);
        slots.push_back(it == head_of.end() ? -1 : it->second);
      }
      pred_hard[row] = predict_hard(probs, mode, slots, tie_break).label;
      pred_soft[row] = predict_soft(probs, mode, slots, aggregation);
      const SoftLabel fallback = fallback_distribution(probs);
      for (int col = 0; col < k; ++col) {
        const auto it = head_of.find(dataset.registry.ids()[col]);
        prob_matrix[row][col] = it == head_of.end() ? fallback
                                                    : probs[it->second];
        argmax_matrix[row][col] = argmax_label(prob_matrix[row][col]);
      }
    }
  }

  EvalReport report;
  report.micro_f1 = micro_f1(pred_hard, gold_hard);
  report.soft_ce = soft_cross_entropy(pred_soft, gold_soft, epsilon);
  report.individual_ce = individual_cross_entropy(prob_matrix, matrix,
                                                  epsilon);
  report.per_annotator_accuracy =
      per_annotator_accuracy(argmax_matrix, matrix, dataset.registry.ids());
  report.n_evaluated = n;

  KvFile out;
  for (const auto& [key, value] : r.echo_pairs()) out.add(key, value);
  out.add("model_kind", kind_name);
  out.add("n_evaluated", report.n_evaluated);
  out.add("micro_f1", report.micro_f1);
  out.add("soft_ce", report.soft_ce);
  out.add("individual_ce", report.individual_ce);
  for (const auto& [annotator, accuracy] : report.per_annotator_accuracy) {
    out.add("per_annotator_accuracy." + annotator, accuracy);
  }
  ensure_out_dir(out_dir);
  out.write(out_dir / "eval.txt");
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

void cmd_compare(const std::vector<std::filesystem::path>& report_paths,
                 const std::filesystem::path& out_dir) {
  if (report_paths.size() < 2) {
    throw Error("compare: need at least two eval reports");
  }
  struct Row {
    std::string label;
    double micro_f1;
    double soft_ce;
  };
  std::vector<Row> rows;
  std::string dataset_id, split_id;
  std::set<std::string> used_labels;
  for (const auto& path : report_paths) {
    const KvFile report = KvFile::read(path);
    const std::string ds = report.get("config.dataset");
    const std::string sp = report.get("config.split");
    if (rows.empty()) {
      dataset_id = ds;
      split_id = sp;
    } else if (ds != dataset_id || sp != split_id) {
      throw Error("compare: report " + path.string() +
                  " evaluates a different dataset/split (" + ds + "#" + sp +
                  " vs " + dataset_id + "#" + split_id + ")");
    }
    std::string label = report.get("model_kind");
    if (used_labels.count(label)) {
      label += "." + std::to_string(rows.size() + 1);
    }
    used_labels.insert(label);
    rows.push_back({label, report.get_double("micro_f1"),
                    report.get_double("soft_ce")});
  }

  double best_f1 = rows.front().micro_f1;
  double best_ce = rows.front().soft_ce;
  for (const auto& row : rows) {
    best_f1 = std::max(best_f1, row.micro_f1);
    best_ce = std::min(best_ce, row.soft_ce);
  }
  std::string best_f1_labels, best_ce_labels;
  for (const auto& row : rows) {
    if (row.micro_f1 == best_f1) {
      if (!best_f1_labels.empty()) best_f1_labels += ',';
      best_f1_labels += row.label;
    }
    if (row.soft_ce == best_ce) {
      if (!best_ce_labels.empty()) best_ce_labels += ',';
      best_ce_labels += row.label;
    }
  }

  std::string text;
  std::string joined;
  for (const auto& path : report_paths) {
    if (!joined.empty()) joined += ',';
    joined += path.string();
  }
  text += "config.reports=" + joined + "\n";
  text += "dataset=" + dataset_id + "\n";
  text += "split=" + split_id + "\n";
  text += "best_f1=" + best_f1_labels + "\n";
  text += "best_ce=" + best_ce_labels + "\n";
  for (const auto& row : rows) {
    text += "row." + row.label + ".micro_f1=" + format_double(row.micro_f1) +
            "\n";
    text += "row." + row.label + ".soft_ce=" + format_double(row.soft_ce) +
            "\n";
  }

  // Human-readable table as comment lines; best F1 and best (lowest) CE
  // flagged with '*'.
  std::size_t label_width = 5;
  for (const auto& row : rows) {
    label_width = std::max(label_width, row.label.size());
  }
  std::ostringstream table;
  table << std::left;
  table << "# ";
  table.width(static_cast<std::streamsize>(label_width + 2));
  table << "model";
  table << "micro_f1 (up)          soft_ce (down)\n";
  for (const auto& row : rows) {
    table << "# ";
    table.width(static_cast<std::streamsize>(label_width + 2));
    table << row.label;
    std::string f1 = format_double(row.micro_f1);
    if (row.micro_f1 == best_f1) f1 += " *";
    f1.resize(23, ' ');
    table << f1;
    std::string ce = format_double(row.soft_ce);
    if (row.soft_ce == best_ce) ce += " *";
    table << ce << "\n";
  }
  text += table.str();

  ensure_out_dir(out_dir);
  write_text_file(out_dir / "compare.txt", text);
}

}  // namespace peranno
