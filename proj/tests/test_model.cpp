#include "fds/model.hpp"

#include <cmath>

#include "doctest.h"
#include "fds/error.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace fds;
using fds::test::TempDir;

namespace {

FdsModel tiny_model(int dim, int card) {
  FdsModel model;
  model.config = SpaceConfig{dim, card};
  model.vocab.add("dog_n", Role::Noun, 5);
  model.vocab.add("chase_v", Role::Verb, 5);
  model.functions.resize(2);
  for (SemanticFunction& f : model.functions) f.weights.assign(dim, 0.0);
  model.arg1 = LinkMatrix(LinkLabel::Arg1, dim);
  model.arg2 = LinkMatrix(LinkLabel::Arg2, dim);
  return model;
}

}  // namespace

TEST_CASE("truth_probability basics") {
  SemanticFunction zero;
  zero.weights.assign(4, 0.0);
  CHECK(truth_probability(zero, Pixie{{0, 1}}) == 0.5);

  // Terms cancel: 2 + (-1) - 1 = 0.
  SemanticFunction cancel;
  cancel.weights = {2.0, -1.0, 5.0, 5.0};
  cancel.bias = -1.0;
  CHECK(truth_probability(cancel, Pixie{{0, 1}}) == 0.5);

  // sigmoid(10), checked against a high-precision scalar computation.
  SemanticFunction ten;
  ten.weights = {10.0, 10.0, 0.0, 0.0};
  ten.bias = -10.0;
  CHECK(truth_probability(ten, Pixie{{0, 1}}) ==
        doctest::Approx(0.9999546021312976).epsilon(1e-15));
}

TEST_CASE("truth_probability stays inside the open unit interval") {
  SemanticFunction extreme;
  extreme.weights = {1000.0, 1000.0, -1000.0, -1000.0};
  extreme.bias = 0.0;
  double high = truth_probability(extreme, Pixie{{0, 1}});
  double low = truth_probability(extreme, Pixie{{2, 3}});
  CHECK(high < 1.0);
  CHECK(high > 0.0);
  CHECK(low > 0.0);
  CHECK(low < 1.0);
}

TEST_CASE("truth_probability is strictly monotone in bias") {
  fds::test::FixtureRng rng(101);
  for (int trial = 0; trial < 20; ++trial) {
    SemanticFunction f;
    for (int i = 0; i < 6; ++i) f.weights.push_back(rng.normal(0.0, 2.0));
    f.bias = rng.normal(0.0, 2.0);
    Pixie x{{0, 3, 5}};
    double base = truth_probability(f, x);
    f.bias += 0.1;
    CHECK(truth_probability(f, x) > base);
  }
}

TEST_CASE("truth_probability checks dimensions") {
  SemanticFunction f;
  f.weights.assign(3, 0.0);
  CHECK_THROWS_AS(truth_probability(f, Pixie{{0, 5}}), Error);
}

TEST_CASE("truth_probability_mf basics") {
  SemanticFunction zero;
  zero.weights.assign(10, 0.0);
  CHECK(truth_probability_mf(zero, uniform_mean_field({10, 2})) == 0.5);

  // A degenerate mean field (an indicator) reproduces truth_probability.
  SemanticFunction f;
  f.weights = {0.3, -0.7, 1.1, 0.0};
  f.bias = 0.2;
  Pixie x{{1, 2}};
  MeanFieldVector indicator;
  indicator.probs = {0.0, 1.0, 1.0, 0.0};
  CHECK(truth_probability_mf(f, indicator) == truth_probability(f, x));

  MeanFieldVector wrong;
  wrong.probs = {0.5, 0.5};
  CHECK_THROWS_AS(truth_probability_mf(f, wrong), Error);
}

TEST_CASE("plug-in mean-field truth vs exact expectation: gap is finite") {
  // The plug-in value is a surrogate for E[sigmoid(w.x + b)]; measure the
  // gap on a small space rather than assuming it away.
  fds::test::FixtureRng rng(77);
  SemanticFunction f;
  for (int i = 0; i < 6; ++i) f.weights.push_back(rng.normal(0.0, 1.5));
  f.bias = rng.normal(0.0, 0.5);

  auto masks = oracle::masks(6, 2);
  // Uniform prior over the space.
  double expectation = 0.0;
  MeanFieldVector mean;
  mean.probs.assign(6, 0.0);
  for (std::uint32_t m : masks) {
    expectation += oracle::truth_of_mask(f, m, 6);
    for (int i = 0; i < 6; ++i) {
      if (m & (1u << i)) mean.probs[i] += 1.0;
    }
  }
  expectation /= static_cast<double>(masks.size());
  for (double& p : mean.probs) p /= static_cast<double>(masks.size());

  double plug_in = truth_probability_mf(f, mean);
  double gap = std::abs(plug_in - expectation);
  CHECK(gap >= 0.0);
  CHECK(gap < 0.5);  // same order, no equality claim
  MESSAGE("plug-in vs exact expectation gap: ", gap);
}

TEST_CASE("situation_score selects link matrix entries") {
  FdsModel model = tiny_model(3, 1);

  SituationGraph graph({GraphNode{"y", std::nullopt}, GraphNode{"x", std::nullopt}},
                       {GraphLink{0, 1, LinkLabel::Arg1}});

  SUBCASE("all-zero weights score zero for every assignment") {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        std::vector<Pixie> assignment{Pixie{{i}}, Pixie{{j}}};
        CHECK(situation_score(model, graph, assignment) == 0.0);
      }
    }
  }

  SUBCASE("a hand-filled matrix exposes single entries") {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        model.arg1.at(i, j) = 10.0 * i + j;
      }
    }
    std::vector<Pixie> assignment{Pixie{{0}}, Pixie{{2}}};
    CHECK(situation_score(model, graph, assignment) == 2.0);  // entry (0,2)
  }

  SUBCASE("single-node graph scores zero") {
    SituationGraph lone({GraphNode{"x", std::nullopt}}, {});
    std::vector<Pixie> assignment{Pixie{{1}}};
    CHECK(situation_score(model, lone, assignment) == 0.0);
  }
}

TEST_CASE("situation_score is additive over links") {
  FdsModel model = tiny_model(4, 2);
  fds::test::FixtureRng rng(5);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      model.arg1.at(i, j) = rng.normal();
      model.arg2.at(i, j) = rng.normal();
    }
  }
  std::vector<GraphNode> nodes{GraphNode{"x", std::nullopt},
                               GraphNode{"y", std::nullopt},
                               GraphNode{"z", std::nullopt}};
  SituationGraph both(nodes, {GraphLink{1, 0, LinkLabel::Arg1},
                              GraphLink{1, 2, LinkLabel::Arg2}});
  std::vector<GraphNode> sub_nodes{GraphNode{"x", std::nullopt},
                                   GraphNode{"y", std::nullopt}};

  std::vector<Pixie> assignment{Pixie{{0, 2}}, Pixie{{1, 3}}, Pixie{{0, 1}}};
  double full = situation_score(model, both, assignment);

  // Deleting the ARG2 link removes exactly its pairwise sum.
  double arg2_sum = 0.0;
  for (std::int32_t i : assignment[1].active) {
    for (std::int32_t j : assignment[2].active) {
      arg2_sum += model.arg2.at(i, j);
    }
  }
  SituationGraph only_arg1(sub_nodes, {GraphLink{1, 0, LinkLabel::Arg1}});
  std::vector<Pixie> sub_assignment{assignment[0], assignment[1]};
  CHECK(situation_score(model, only_arg1, sub_assignment) ==
        doctest::Approx(full - arg2_sum).epsilon(1e-12));
}

TEST_CASE("situation_score by node id reports missing nodes") {
  FdsModel model = tiny_model(3, 1);
  SituationGraph graph({GraphNode{"y", std::nullopt}, GraphNode{"x", std::nullopt}},
                       {GraphLink{0, 1, LinkLabel::Arg1}});
  std::unordered_map<std::string, Pixie> assignment{{"y", Pixie{{0}}}};
  try {
    situation_score(model, graph, assignment);
    FAIL("expected query error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Query);
    CHECK(std::string(e.what()).find("x") != std::string::npos);
  }
}

TEST_CASE("model save/load round-trip is bit exact") {
  TempDir dir;
  FdsModel model = tiny_model(5, 2);
  fds::test::FixtureRng rng(9);
  for (SemanticFunction& f : model.functions) {
    for (double& w : f.weights) w = rng.normal(0.0, 0.718281828);
    f.bias = rng.normal();
  }
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      model.arg1.at(i, j) = rng.normal() / 3.0;
      model.arg2.at(i, j) = rng.normal() * 1e-17;
    }
  }
  std::string path = dir.file("m.json");
  save_model(model, path);
  FdsModel loaded = load_model(path);
  CHECK(loaded.config.dim == model.config.dim);
  CHECK(loaded.config.card == model.config.card);
  REQUIRE(loaded.functions.size() == model.functions.size());
  for (std::size_t i = 0; i < model.functions.size(); ++i) {
    CHECK(loaded.functions[i].weights == model.functions[i].weights);
    CHECK(loaded.functions[i].bias == model.functions[i].bias);
  }
  CHECK(loaded.arg1.values() == model.arg1.values());
  CHECK(loaded.arg2.values() == model.arg2.values());
  CHECK(loaded.vocab.size() == model.vocab.size());

  // Saving the loaded model reproduces the file byte for byte.
  std::string again = dir.file("m2.json");
  save_model(loaded, again);
  CHECK(fds::test::read_file(path) == fds::test::read_file(again));
}

TEST_CASE("model file error paths are distinct") {
  TempDir dir;
  FdsModel model = tiny_model(3, 1);
  std::string path = dir.file("m.json");
  save_model(model, path);
  std::string text = fds::test::read_file(path);

  SUBCASE("truncated file is corrupt") {
    fds::test::write_file(path, text.substr(0, text.size() / 2));
    try {
      load_model(path);
      FAIL("expected corrupt-file error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Corrupt);
    }
  }
  SUBCASE("version 0 names the supported version") {
    std::string v0 = text;
    v0.replace(v0.find("\"version\":1"), 11, "\"version\":0");
    fds::test::write_file(path, v0);
    try {
      load_model(path);
      FAIL("expected version error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Version);
      CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
  }
  SUBCASE("function/vocab mismatch is inconsistent") {
    std::string swapped = text;
    swapped.replace(swapped.find("\"pred\":\"dog_n\""), 14,
                    "\"pred\":\"cat_n\"");
    fds::test::write_file(path, swapped);
    try {
      load_model(path);
      FAIL("expected inconsistency error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Inconsistent);
    }
  }
}
