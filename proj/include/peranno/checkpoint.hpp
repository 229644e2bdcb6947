#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "peranno/features.hpp"
#include "peranno/model.hpp"
#include "peranno/svm.hpp"

namespace peranno {

// Self-contained trained-model file: vocabulary, parameters, seed and the
// resolved run configuration. Flat little-endian binary layout, documented
// in the README.
struct Checkpoint {
  ModelKind kind = ModelKind::kMultitask;
  FeatureKind feature_kind = FeatureKind::kTfidf;
  std::uint64_t seed = 0;
  std::string config_echo;
  Vocabulary vocab;
  MultiTaskModel model;  // multitask / singletask kinds
  SvmModel svm;          // svm kind
  int best_epoch = 0;
  int stopping_epoch = 0;
};

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace peranno
