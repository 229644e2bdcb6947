#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace peranno {

// Flat key=value run configuration ('#' comments allowed). Each command
// validates its keys against an allowed set and echoes the fully resolved
// configuration into every file it writes, so any output can be reproduced
// from its own header.
class RunConfig {
 public:
  RunConfig() = default;
  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_pairs(
      const std::vector<std::pair<std::string, std::string>>& pairs);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  const std::map<std::string, std::string>& items() const { return items_; }

 private:
  std::map<std::string, std::string> items_;
};

// Commands throw Error on failure; the CLI maps that to a nonzero exit.
// Output filenames per command:
//   stats   -> stats.txt
//   synth   -> train.json dev.json test.json oracle.tsv
//   train   -> model.ckpt history.tsv vocab.txt
//   eval    -> eval.txt
//   compare -> compare.txt
void cmd_stats(const RunConfig& cfg, const std::filesystem::path& out_dir);
void cmd_synth(const RunConfig& cfg, const std::filesystem::path& out_dir);
void cmd_train(const RunConfig& cfg, const std::filesystem::path& out_dir);
void cmd_eval(const RunConfig& cfg, const std::filesystem::path& out_dir);
void cmd_compare(const std::vector<std::filesystem::path>& report_paths,
                 const std::filesystem::path& out_dir);

}  // namespace peranno
