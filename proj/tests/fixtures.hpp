#ifndef FDS_TESTS_FIXTURES_HPP
#define FDS_TESTS_FIXTURES_HPP

#include <string>
#include <vector>

#include "fds/model.hpp"
#include "test_util.hpp"

namespace fds::test {

struct RandomModelSpec {
  int dim = 6;
  int card = 2;
  int nouns = 3;
  int verbs = 2;
  double weight_sd = 1.0;
  double bias_sd = 0.5;
  double link_sd = 0.3;
};

// A seeded random model with the vocabulary n0..nk / v0..vk.
inline fds::FdsModel random_model(const RandomModelSpec& spec,
                                  std::uint64_t seed) {
  FixtureRng rng(seed);
  fds::FdsModel model;
  model.config = fds::SpaceConfig{spec.dim, spec.card};
  for (int i = 0; i < spec.nouns; ++i) {
    model.vocab.add("n" + std::to_string(i), fds::Role::Noun, 10);
  }
  for (int i = 0; i < spec.verbs; ++i) {
    model.vocab.add("v" + std::to_string(i), fds::Role::Verb, 10);
  }
  model.functions.resize(model.vocab.size());
  for (auto& f : model.functions) {
    f.weights.resize(spec.dim);
    for (double& w : f.weights) w = rng.normal(0.0, spec.weight_sd);
    f.bias = rng.normal(0.0, spec.bias_sd);
  }
  model.arg1 = fds::LinkMatrix(fds::LinkLabel::Arg1, spec.dim);
  model.arg2 = fds::LinkMatrix(fds::LinkLabel::Arg2, spec.dim);
  for (int i = 0; i < spec.dim; ++i) {
    for (int j = 0; j < spec.dim; ++j) {
      model.arg1.at(i, j) = rng.normal(0.0, spec.link_sd);
      model.arg2.at(i, j) = rng.normal(0.0, spec.link_sd);
    }
  }
  return model;
}

// Transitive / intransitive situation graphs over the random-model
// vocabulary, with observations attached to the nodes.
inline fds::SituationGraph chain_graph(const fds::FdsModel& model,
                                       int nodes) {
  using namespace fds;
  PredicateId n0 = *model.vocab.find("n0", Role::Noun);
  PredicateId n1 = *model.vocab.find("n1", Role::Noun);
  PredicateId v0 = *model.vocab.find("v0", Role::Verb);
  if (nodes == 1) {
    return SituationGraph({GraphNode{"x", n0}}, {});
  }
  if (nodes == 2) {
    return SituationGraph({GraphNode{"x", n0}, GraphNode{"y", v0}},
                          {GraphLink{1, 0, LinkLabel::Arg1}});
  }
  return SituationGraph(
      {GraphNode{"x", n0}, GraphNode{"y", v0}, GraphNode{"z", n1}},
      {GraphLink{1, 0, LinkLabel::Arg1}, GraphLink{1, 2, LinkLabel::Arg2}});
}

// Applies a dimension permutation to every parameter of a model.
inline fds::FdsModel permute_dimensions(const fds::FdsModel& model,
                                        const std::vector<int>& perm) {
  fds::FdsModel out = model;
  for (std::size_t f = 0; f < model.functions.size(); ++f) {
    for (int i = 0; i < model.config.dim; ++i) {
      out.functions[f].weights[perm[i]] = model.functions[f].weights[i];
    }
  }
  for (int i = 0; i < model.config.dim; ++i) {
    for (int j = 0; j < model.config.dim; ++j) {
      out.arg1.at(perm[i], perm[j]) = model.arg1.at(i, j);
      out.arg2.at(perm[i], perm[j]) = model.arg2.at(i, j);
    }
  }
  return out;
}

}  // namespace fds::test

#endif  // FDS_TESTS_FIXTURES_HPP
