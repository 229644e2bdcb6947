#include <doctest.h>

#include <cmath>
#include <set>

#include "peranno/error.hpp"
#include "peranno/metrics.hpp"
#include "peranno/rng.hpp"
#include "peranno/synthgen.hpp"

using namespace peranno;

TEST_CASE("population assignment is round-robin and deterministic") {
  GenConfig cfg;
  cfg.annotators = 3;
  cfg.clusters = 3;
  cfg.vocab_size = 10;
  const auto armis = generate_population(cfg);
  REQUIRE(armis.annotators.size() == 3);
  std::set<int> clusters;
  for (const auto& spec : armis.annotators) clusters.insert(spec.cluster);
  CHECK(clusters.size() == 3);  // one annotator per cluster

  cfg.annotators = 6;
  cfg.clusters = 2;
  const auto brexit = generate_population(cfg);
  int group0 = 0;
  for (const auto& spec : brexit.annotators) group0 += spec.cluster == 0;
  CHECK(group0 == 3);  // 3 + 3

  const auto again = generate_population(cfg);
  for (std::size_t c = 0; c < brexit.cluster_weights.size(); ++c) {
    CHECK(brexit.cluster_weights[c] == again.cluster_weights[c]);
  }

  cfg.clusters = 7;
  CHECK_THROWS_AS(generate_population(cfg), Error);
}

TEST_CASE("balanced cluster rules never agree unanimously") {
  GenConfig cfg;
  cfg.instances = 150;
  cfg.vocab_size = 60;
  cfg.annotators = 3;
  cfg.clusters = 3;
  cfg.annotators_per_instance = 3;
  cfg.seed = 9;
  const auto population = generate_population(cfg);
  const auto dataset = generate_dataset(population, cfg);
  for (int s = 0; s < 3; ++s) {
    for (const auto& instance : dataset.splits[s]) {
      std::set<int> labels;
      for (int c = 0; c < cfg.clusters; ++c) {
        labels.insert(cluster_rule_label(population, c, instance.text));
      }
      CHECK(labels.size() == 2);
    }
  }
}

TEST_CASE("flip-rate zero with full annotation matches the oracle exactly") {
  GenConfig cfg;
  cfg.instances = 80;
  cfg.vocab_size = 40;
  cfg.annotators = 4;
  cfg.clusters = 2;
  cfg.annotators_per_instance = 4;
  cfg.flip_rate = 0.0;
  cfg.seed = 31;
  const auto population = generate_population(cfg);
  const auto dataset = generate_dataset(population, cfg);
  for (int s = 0; s < 3; ++s) {
    const auto matrix = build_matrix(dataset, static_cast<Split>(s));
    for (std::size_t i = 0; i < dataset.splits[s].size(); ++i) {
      const auto empirical = derive_soft_label(matrix, static_cast<int>(i));
      const auto oracle =
          oracle_soft_label(population, dataset.splits[s][i]);
      CHECK(empirical.v0 == oracle.v0);
      CHECK(empirical.v1 == oracle.v1);
    }
  }
}

TEST_CASE("single deterministic cluster gives alpha of exactly 1") {
  GenConfig cfg;
  cfg.instances = 50;
  cfg.vocab_size = 30;
  cfg.annotators = 4;
  cfg.clusters = 1;
  cfg.annotators_per_instance = 4;
  cfg.flip_rate = 0.0;
  cfg.seed = 13;
  const auto dataset = generate_dataset(generate_population(cfg), cfg);
  CHECK(krippendorff_alpha_nominal(build_matrix(dataset, Split::kTrain)) ==
        1.0);
}

TEST_CASE("oracle soft label closed forms") {
  // Hand-built population over a single-token vocabulary: cluster 0 says 1,
  // cluster 1 says 0 on the text "w00000".
  Population population;
  population.vocab_size = 1;
  population.cluster_weights = {{2.0}, {-2.0}};

  SUBCASE("three deterministic annotators voting [1,1,0]") {
    population.annotators = {{"a", 0, 0.0}, {"b", 0, 0.0}, {"c", 1, 0.0}};
    Instance instance;
    instance.text = "w00000";
    instance.annotations = {{"a", 1}, {"b", 1}, {"c", 0}};
    const auto oracle = oracle_soft_label(population, instance);
    CHECK(oracle.v0 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(oracle.v1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }

  SUBCASE("one annotator with flip rate p whose rule says 1") {
    population.annotators = {{"a", 0, 0.2}};
    Instance instance;
    instance.text = "w00000";
    instance.annotations = {{"a", 1}};
    const auto oracle = oracle_soft_label(population, instance);
    CHECK(oracle.v0 == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(oracle.v1 == doctest::Approx(0.8).epsilon(1e-15));
  }

  SUBCASE("two annotators, rules [1,0], flip 0.1: verified by monte carlo") {
    population.annotators = {{"a", 0, 0.1}, {"b", 1, 0.1}};
    Instance instance;
    instance.text = "w00000";
    instance.annotations = {{"a", 1}, {"b", 0}};
    const auto oracle = oracle_soft_label(population, instance);
    CHECK(oracle.v1 == doctest::Approx(0.5).epsilon(1e-15));

    Rng rng(123);
    const int draws = 200000;
    double mean_v1 = 0.0;
    for (int d = 0; d < draws; ++d) {
      int ones = 0;
      ones += rng.next_double() < 0.1 ? 0 : 1;  // rule 1, maybe flipped
      ones += rng.next_double() < 0.1 ? 1 : 0;  // rule 0, maybe flipped
      mean_v1 += ones / 2.0;
    }
    mean_v1 /= draws;
    CHECK(std::abs(mean_v1 - oracle.v1) < 0.005);  // ~6 sigma
  }

  SUBCASE("unknown annotator is an error") {
    population.annotators = {{"a", 0, 0.0}};
    Instance instance;
    instance.text = "w00000";
    instance.annotations = {{"z", 1}};
    CHECK_THROWS_AS(oracle_soft_label(population, instance), Error);
  }
}

TEST_CASE("generation is a pure function of config and seed") {
  GenConfig cfg;
  cfg.instances = 60;
  cfg.vocab_size = 25;
  cfg.annotators = 10;
  cfg.clusters = 3;
  cfg.annotators_per_instance = 4;
  cfg.flip_rate = 0.1;
  cfg.unseen_fraction = 0.3;
  cfg.participation = Participation::kPowerLaw;
  cfg.seed = 77;
  const auto d1 = generate_dataset(generate_population(cfg), cfg);
  const auto d2 = generate_dataset(generate_population(cfg), cfg);
  for (int s = 0; s < 3; ++s) {
    REQUIRE(d1.splits[s].size() == d2.splits[s].size());
    for (std::size_t i = 0; i < d1.splits[s].size(); ++i) {
      CHECK(d1.splits[s][i].id == d2.splits[s][i].id);
      CHECK(d1.splits[s][i].text == d2.splits[s][i].text);
      CHECK(d1.splits[s][i].annotations == d2.splits[s][i].annotations);
    }
  }

  cfg.seed = 78;
  const auto d3 = generate_dataset(generate_population(cfg), cfg);
  bool any_diff = false;
  for (int s = 0; s < 3 && !any_diff; ++s) {
    for (std::size_t i = 0; i < d1.splits[s].size() && !any_diff; ++i) {
      any_diff = d1.splits[s][i].text != d3.splits[s][i].text ||
                 d1.splits[s][i].annotations != d3.splits[s][i].annotations;
    }
  }
  CHECK(any_diff);
}

TEST_CASE("unseen fraction is enforced within one percentage point") {
  GenConfig cfg;
  cfg.instances = 400;
  cfg.vocab_size = 50;
  cfg.annotators = 100;
  cfg.clusters = 4;
  cfg.annotators_per_instance = 5;
  cfg.unseen_fraction = 0.91;
  cfg.seed = 3;
  const auto dataset = generate_dataset(generate_population(cfg), cfg);
  const auto stats = dataset_stats(dataset);
  CHECK(stats.total_annotators == 100);
  CHECK(std::abs(stats.unseen_pct - 91.0) <= 1.0);
}

TEST_CASE("infeasible annotator demand after exclusions is an error") {
  GenConfig cfg;
  cfg.instances = 30;
  cfg.vocab_size = 10;
  cfg.annotators = 3;
  cfg.clusters = 1;
  cfg.annotators_per_instance = 3;
  cfg.unseen_fraction = 1.0;
  CHECK_THROWS_WITH_AS(generate_dataset(generate_population(cfg), cfg),
                       doctest::Contains("infeasible"), Error);
}

TEST_CASE("config validation") {
  GenConfig cfg;
  cfg.flip_rate = 0.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = GenConfig{};
  cfg.annotators_per_instance = 10;
  cfg.annotators = 3;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = GenConfig{};
  cfg.train_frac = 0.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("expected alpha decreases as flip rate grows") {
  // Single-cluster regime: agreement starts at 1 and noise erodes it.
  const std::vector<double> flips = {0.0, 0.1, 0.3};
  const std::vector<std::uint64_t> seeds = {11, 22, 33};
  std::vector<double> mean_alpha;
  for (double flip : flips) {
    double total = 0.0;
    for (std::uint64_t seed : seeds) {
      GenConfig cfg;
      cfg.instances = 120;
      cfg.vocab_size = 30;
      cfg.annotators = 5;
      cfg.clusters = 1;
      cfg.annotators_per_instance = 5;
      cfg.flip_rate = flip;
      cfg.seed = seed;
      const auto dataset = generate_dataset(generate_population(cfg), cfg);
      total +=
          krippendorff_alpha_nominal(build_matrix(dataset, Split::kTrain));
    }
    mean_alpha.push_back(total / seeds.size());
  }
  CHECK(mean_alpha[0] > mean_alpha[1]);
  CHECK(mean_alpha[1] > mean_alpha[2]);
  CHECK(mean_alpha[0] == 1.0);
}
