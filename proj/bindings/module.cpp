#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "peranno/commands.hpp"
#include "peranno/corpus.hpp"
#include "peranno/error.hpp"
#include "peranno/features.hpp"
#include "peranno/metrics.hpp"
#include "peranno/report.hpp"
#include "peranno/synthgen.hpp"

namespace py = pybind11;

namespace {

using peranno::AnnotationMatrix;
using peranno::SoftLabel;

// (values, mask) nested lists -> AnnotationMatrix. An empty mask means
// fully observed.
AnnotationMatrix matrix_from_lists(
    const std::vector<std::vector<int>>& values,
    const std::vector<std::vector<int>>& mask) {
  const int rows = static_cast<int>(values.size());
  const int cols = rows == 0 ? 0 : static_cast<int>(values[0].size());
  auto matrix = AnnotationMatrix::zeros(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (static_cast<int>(values[i].size()) != cols ||
        (!mask.empty() && static_cast<int>(mask[i].size()) != cols)) {
      throw peranno::Error("annotation matrix rows have unequal lengths");
    }
    for (int k = 0; k < cols; ++k) {
      if (mask.empty() || mask[i][k] != 0) {
        matrix.set(i, k, values[i][k] != 0 ? 1 : 0);
      }
    }
  }
  return matrix;
}

std::vector<SoftLabel> soft_labels_from_pairs(
    const std::vector<std::pair<double, double>>& pairs) {
  std::vector<SoftLabel> labels;
  labels.reserve(pairs.size());
  for (const auto& [v0, v1] : pairs) labels.push_back({v0, v1});
  return labels;
}

peranno::RunConfig config_from_dict(
    const std::map<std::string, std::string>& cfg) {
  std::vector<std::pair<std::string, std::string>> pairs(cfg.begin(),
                                                         cfg.end());
  return peranno::RunConfig::from_pairs(pairs);
}

std::map<std::string, std::string> stats_dict(const peranno::StatsReport& s) {
  std::map<std::string, std::string> out;
  using peranno::format_double;
  out["instances.train"] = std::to_string(s.instance_count[0]);
  out["instances.dev"] = std::to_string(s.instance_count[1]);
  out["instances.test"] = std::to_string(s.instance_count[2]);
  out["utterance_length.mean"] = format_double(s.utterance_len_mean);
  out["utterance_length.std"] = format_double(s.utterance_len_std);
  out["annotators.total"] = std::to_string(s.total_annotators);
  out["annotators_per_instance.mean"] =
      format_double(s.annotators_per_instance_mean);
  out["unseen_annotators.pct"] = format_double(s.unseen_pct);
  out["krippendorff_alpha"] = format_double(s.alpha);
  out["annotator_instances.min"] = std::to_string(s.annotator_instances_min);
  out["annotator_instances.max"] = std::to_string(s.annotator_instances_max);
  out["annotator_instances.mean"] = format_double(s.annotator_instances_mean);
  out["annotator_instances.std"] = format_double(s.annotator_instances_std);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Per-annotator disagreement modeling toolkit (C++ core)";

  py::register_exception<peranno::Error>(m, "PerannoError");

  m.def("tokenize",
        [](const std::string& text) { return peranno::tokenize(text); },
        py::arg("text"),
        "Deterministic tokenizer: case-fold, split on whitespace, strip "
        "edge punctuation.");

  m.def("binarize_convabuse", &peranno::binarize_convabuse, py::arg("raw"),
        "Map a ConvAbuse raw label in [-3, 1] to the binary abuse label.");

  m.def(
      "derive_hard_label",
      [](const std::vector<int>& labels, int tie_break) {
        std::vector<std::uint8_t> values(labels.begin(), labels.end());
        std::vector<std::uint8_t> mask(labels.size(), 1);
        const auto hard = peranno::derive_hard_label(values, mask, tie_break);
        return std::make_pair(hard.label, hard.tie);
      },
      py::arg("labels"), py::arg("tie_break") = 0,
      "Majority label over annotations; returns (label, tie).");

  m.def(
      "derive_soft_label",
      [](const std::vector<int>& labels) {
        std::vector<std::uint8_t> values(labels.begin(), labels.end());
        std::vector<std::uint8_t> mask(labels.size(), 1);
        const auto soft = peranno::derive_soft_label(values, mask);
        return std::make_pair(soft.v0, soft.v1);
      },
      py::arg("labels"),
      "Empirical annotation distribution; returns (v0, v1).");

  m.def(
      "krippendorff_alpha",
      [](const std::vector<std::vector<int>>& values,
         const std::vector<std::vector<int>>& mask) {
        return peranno::krippendorff_alpha_nominal(
            matrix_from_lists(values, mask));
      },
      py::arg("values"), py::arg("mask") = std::vector<std::vector<int>>{},
      "Nominal Krippendorff's alpha over a (values, mask) matrix.");

  m.def(
      "micro_f1",
      [](const std::vector<int>& predictions, const std::vector<int>& golds) {
        return peranno::micro_f1(predictions, golds);
      },
      py::arg("predictions"), py::arg("golds"));

  m.def(
      "soft_cross_entropy",
      [](const std::vector<std::pair<double, double>>& pred,
         const std::vector<std::pair<double, double>>& gold, double epsilon) {
        return peranno::soft_cross_entropy(soft_labels_from_pairs(pred),
                                           soft_labels_from_pairs(gold),
                                           epsilon);
      },
      py::arg("pred"), py::arg("gold"), py::arg("epsilon") = 1e-12);

  py::class_<peranno::Vocabulary>(m, "Vocabulary")
      .def_static("build", &peranno::Vocabulary::build, py::arg("train_texts"),
                  py::arg("min_df") = 1)
      .def("size", &peranno::Vocabulary::size)
      .def("num_docs", &peranno::Vocabulary::num_docs)
      .def("index_of",
           [](const peranno::Vocabulary& v, const std::string& term) {
             return v.index_of(term);
           })
      .def("tfidf",
           [](const peranno::Vocabulary& v, const std::string& text) {
             return peranno::tfidf_vectorize(peranno::tokenize(text), v)
                 .entries;
           })
      .def("bow", [](const peranno::Vocabulary& v, const std::string& text) {
        return peranno::bow_vectorize(peranno::tokenize(text), v).entries;
      });

  m.def(
      "dataset_stats",
      [](const std::string& dataset_dir, const std::string& label_mapping,
         const std::string& alpha_split) {
        const auto mapping = label_mapping == "convabuse_scale"
                                 ? peranno::LabelMapping::kConvAbuseScale
                                 : peranno::LabelMapping::kAlreadyBinary;
        const auto split = alpha_split == "all" ? peranno::AlphaSplit::kAll
                                                : peranno::AlphaSplit::kTrain;
        const auto dataset = peranno::load_dataset(dataset_dir, mapping);
        return stats_dict(peranno::dataset_stats(dataset, split));
      },
      py::arg("dataset_dir"), py::arg("label_mapping") = "already_binary",
      py::arg("alpha_split") = "train",
      "Load an interchange dataset and return its descriptive statistics.");

  // Batch commands: config dict in, files out. Same behavior as the CLI.
  m.def(
      "run_stats",
      [](const std::map<std::string, std::string>& cfg,
         const std::string& out) {
        peranno::cmd_stats(config_from_dict(cfg), out);
      },
      py::arg("config"), py::arg("out"));
  m.def(
      "run_synth",
      [](const std::map<std::string, std::string>& cfg,
         const std::string& out) {
        peranno::cmd_synth(config_from_dict(cfg), out);
      },
      py::arg("config"), py::arg("out"));
  m.def(
      "run_train",
      [](const std::map<std::string, std::string>& cfg,
         const std::string& out) {
        peranno::cmd_train(config_from_dict(cfg), out);
      },
      py::arg("config"), py::arg("out"));
  m.def(
      "run_eval",
      [](const std::map<std::string, std::string>& cfg,
         const std::string& out) {
        peranno::cmd_eval(config_from_dict(cfg), out);
      },
      py::arg("config"), py::arg("out"));
  m.def(
      "run_compare",
      [](const std::vector<std::string>& reports, const std::string& out) {
        std::vector<std::filesystem::path> paths(reports.begin(),
                                                 reports.end());
        peranno::cmd_compare(paths, out);
      },
      py::arg("reports"), py::arg("out"));
}
