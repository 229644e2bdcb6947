#include <doctest.h>

#include <cmath>

#include "peranno/error.hpp"
#include "peranno/features.hpp"
#include "peranno/rng.hpp"
#include "peranno/svm.hpp"

using namespace peranno;

namespace {

// Two token populations with disjoint vocabularies: trivially separable
// TF-IDF clusters.
struct ToySet {
  Vocabulary vocab;
  std::vector<SparseVector> x;
  std::vector<int> y;
};

ToySet make_separable(int per_class, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::string> neg_terms = {"calm", "fine", "nice", "okay"};
  const std::vector<std::string> pos_terms = {"angry", "rude", "mean",
                                              "nasty"};
  std::vector<std::string> texts;
  std::vector<int> labels;
  for (int i = 0; i < per_class; ++i) {
    std::string neg, pos;
    const int len = 3 + static_cast<int>(rng.bounded(4));
    for (int t = 0; t < len; ++t) {
      neg += neg_terms[rng.bounded(neg_terms.size())] + " ";
      pos += pos_terms[rng.bounded(pos_terms.size())] + " ";
    }
    texts.push_back(neg);
    labels.push_back(0);
    texts.push_back(pos);
    labels.push_back(1);
  }
  ToySet set;
  set.vocab = Vocabulary::build(texts, 1);
  for (const auto& text : texts) {
    set.x.push_back(tfidf_vectorize(tokenize(text), set.vocab));
  }
  set.y = labels;
  return set;
}

// Plain perceptron: an independent check that the toy set really is
// linearly separable.
bool perceptron_separates(const std::vector<SparseVector>& xs,
                          const std::vector<int>& ys, int max_epochs) {
  std::vector<double> w(xs.front().dim, 0.0);
  double b = 0.0;
  for (int epoch = 0; epoch < max_epochs; ++epoch) {
    int mistakes = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double score = b;
      for (const auto& [idx, v] : xs[i].entries) score += w[idx] * v;
      const double y = ys[i] == 1 ? 1.0 : -1.0;
      if (y * score <= 0.0) {
        for (const auto& [idx, v] : xs[i].entries) w[idx] += y * v;
        b += y;
        ++mistakes;
      }
    }
    if (mistakes == 0) return true;
  }
  return false;
}

double training_accuracy(const SvmModel& model,
                         const std::vector<SparseVector>& xs,
                         const std::vector<int>& ys) {
  int correct = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    correct += svm_predict(model, xs[i]).first.label == ys[i];
  }
  return static_cast<double>(correct) / static_cast<double>(xs.size());
}

}  // namespace

TEST_CASE("pegasos reaches full accuracy on a separable toy set") {
  const auto set = make_separable(20, 4);
  REQUIRE(perceptron_separates(set.x, set.y, 100));  // oracle: separable
  const auto model = svm_train(set.x, set.y, 1e-3, 50, 12);
  CHECK(training_accuracy(model, set.x, set.y) == 1.0);
}

TEST_CASE("margins >= 1 mean zero hinge loss") {
  const auto set = make_separable(10, 8);
  // Hand-built separator: +10 on positive-class terms, -10 on the rest.
  SvmModel manual;
  manual.w.assign(set.vocab.size(), 0.0);
  for (int t = 0; t < set.vocab.size(); ++t) {
    const std::string& term = set.vocab.term(t);
    const bool positive = term == "angry" || term == "rude" ||
                          term == "mean" || term == "nasty";
    manual.w[t] = positive ? 10.0 : -10.0;
  }
  double hinge = 0.0;
  bool all_clear = true;
  for (std::size_t i = 0; i < set.x.size(); ++i) {
    const double y = set.y[i] == 1 ? 1.0 : -1.0;
    const double margin = y * svm_margin(manual, set.x[i]);
    all_clear = all_clear && margin >= 1.0;
    hinge += std::max(0.0, 1.0 - margin);
  }
  REQUIRE(all_clear);
  CHECK(hinge == 0.0);
}

TEST_CASE("svm training is deterministic in the seed") {
  const auto set = make_separable(15, 2);
  const auto a = svm_train(set.x, set.y, 1e-3, 20, 99);
  const auto b = svm_train(set.x, set.y, 1e-3, 20, 99);
  CHECK(a.w == b.w);
  CHECK(a.b == b.b);
  const auto c = svm_train(set.x, set.y, 1e-3, 20, 100);
  CHECK(a.w != c.w);
}

TEST_CASE("svm rejects single-class training sets") {
  const auto set = make_separable(5, 3);
  std::vector<int> ones(set.y.size(), 1);
  CHECK_THROWS_AS(svm_train(set.x, ones, 1e-3, 5, 1), Error);
}

TEST_CASE("platt probabilities are monotone in the margin") {
  const auto set = make_separable(20, 6);
  auto model = svm_train(set.x, set.y, 1e-3, 50, 12);
  fit_platt(model, set.x, set.y);
  CHECK(model.platt_a >= 0.0);

  // sigma strictly increases with the margin whenever A > 0.
  std::vector<std::pair<double, double>> margin_sigma;
  for (const auto& x : set.x) {
    margin_sigma.emplace_back(svm_margin(model, x),
                              svm_predict(model, x).second.v1);
  }
  std::sort(margin_sigma.begin(), margin_sigma.end());
  for (std::size_t i = 1; i < margin_sigma.size(); ++i) {
    CHECK(margin_sigma[i].second >= margin_sigma[i - 1].second);
  }

  // A duplicate of a training point deep in the positive region.
  int best = 0;
  for (std::size_t i = 0; i < set.x.size(); ++i) {
    if (svm_margin(model, set.x[i]) > svm_margin(model, set.x[best])) {
      best = static_cast<int>(i);
    }
  }
  const auto [hard, soft] = svm_predict(model, set.x[best]);
  CHECK(hard.label == 1);
  CHECK(soft.v1 > 0.5);
}

TEST_CASE("zero margin maps to the benign class") {
  SvmModel model;
  model.w = {1.0, -1.0};
  model.b = 0.0;
  model.platt_a = 2.0;
  model.platt_b = 0.1;
  SparseVector x;
  x.dim = 2;  // empty vector: margin is exactly b = 0
  const auto [hard, soft] = svm_predict(model, x);
  CHECK(hard.label == 0);
  CHECK(hard.tie);
  CHECK(soft.v1 == doctest::Approx(1.0 / (1.0 + std::exp(-0.1))));
}
