#pragma once

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "peranno/corpus.hpp"
#include "peranno/rng.hpp"

namespace peranno::testutil {

// Scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("peranno_" + tag + "_" + std::to_string(++counter) + "_" +
             std::to_string(static_cast<unsigned>(::getpid())));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// Literal pair-enumeration Krippendorff's alpha, independent of the
// coincidence-matrix implementation: walks every ordered pair of present
// slots per unit with weight 1/(m-1).
inline double alpha_bruteforce(const AnnotationMatrix& matrix) {
  double o[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  bool pairable = false;
  for (int i = 0; i < matrix.rows; ++i) {
    std::vector<int> values;
    for (int k = 0; k < matrix.cols; ++k) {
      if (matrix.present(i, k)) values.push_back(matrix.value(i, k));
    }
    const int m = static_cast<int>(values.size());
    if (m < 2) continue;
    pairable = true;
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        if (a == b) continue;
        o[values[a]][values[b]] += 1.0 / (m - 1);
      }
    }
  }
  if (!pairable) return std::numeric_limits<double>::quiet_NaN();
  const double n0 = o[0][0] + o[0][1];
  const double n1 = o[1][0] + o[1][1];
  const double n = n0 + n1;
  const double d_o = (o[0][1] + o[1][0]) / n;
  if (d_o == 0.0) return 1.0;
  const double d_e = 2.0 * n0 * n1 / (n * (n - 1.0));
  return 1.0 - d_o / d_e;
}

// Random annotation matrix with missing entries; every matrix has at least
// one pairable unit.
inline AnnotationMatrix random_matrix(Rng& rng, int max_rows = 10,
                                      int max_cols = 5) {
  while (true) {
    const int rows = 1 + static_cast<int>(rng.bounded(max_rows));
    const int cols = 2 + static_cast<int>(rng.bounded(max_cols - 1));
    auto matrix = AnnotationMatrix::zeros(rows, cols);
    bool pairable = false;
    for (int i = 0; i < rows; ++i) {
      int present = 0;
      for (int k = 0; k < cols; ++k) {
        if (rng.next_double() < 0.7) {
          matrix.set(i, k, static_cast<int>(rng.bounded(2)));
          ++present;
        }
      }
      if (present >= 2) pairable = true;
    }
    if (pairable) return matrix;
  }
}

// In-memory dataset builder for corpus-level tests.
inline Instance make_instance(
    const std::string& id, const std::string& text,
    const std::vector<std::pair<std::string, int>>& annotations) {
  Instance instance;
  instance.id = id;
  instance.text = text;
  instance.annotations = annotations;
  return instance;
}

inline Dataset make_dataset(const std::vector<Instance>& train,
                            const std::vector<Instance>& dev,
                            const std::vector<Instance>& test = {}) {
  Dataset dataset;
  dataset.splits[0] = train;
  dataset.splits[1] = dev;
  dataset.splits[2] = test;
  dataset.registry = AnnotatorRegistry::build(dataset.splits);
  return dataset;
}

}  // namespace peranno::testutil
