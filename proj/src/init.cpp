#include "fds/init.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fds/error.hpp"
#include "fds/util.hpp"

namespace fds {

const char* context_role_name(ContextRole role) {
  switch (role) {
    case ContextRole::Arg1Head:
      return "ARG1-head";
    case ContextRole::Arg1Dependent:
      return "ARG1-dependent";
    case ContextRole::Arg2Head:
      return "ARG2-head";
    case ContextRole::Arg2Dependent:
      return "ARG2-dependent";
  }
  return "?";
}

ProjectionMap::ProjectionMap(const Vocabulary& vocab,
                             const SpaceConfig& config, std::uint64_t seed)
    : seed_(seed), dim_(config.dim) {
  validate(config);
  dims_.resize(vocab.size());
  for (std::uint32_t index = 0; index < vocab.size(); ++index) {
    const VocabEntry& e = vocab.entries()[index];
    for (int r = 0; r < 4; ++r) {
      // Key on the surface form, its role namespace, and the context
      // role, so the map is a function of (seed, vocabulary, D) only.
      std::string key = e.form;
      key += '\x1f';
      key += role_name(e.role);
      key += '\x1f';
      key += context_role_name(static_cast<ContextRole>(r));
      dims_[index][r] =
          static_cast<std::uint32_t>(stable_hash64(key, seed) % dim_);
    }
  }
}

std::uint32_t ProjectionMap::dimension(PredicateId context,
                                       ContextRole role) const {
  if (context.index >= dims_.size()) {
    raise(ErrorKind::Vocab, "context predicate index out of range");
  }
  return dims_[context.index][static_cast<int>(role)];
}

ProjectionMap build_projection(const Vocabulary& vocab,
                               const SpaceConfig& config, std::uint64_t seed) {
  return ProjectionMap(vocab, config, seed);
}

CountTable::CountTable(std::size_t vocab_size, int dim)
    : dim_(dim),
      counts_(vocab_size * static_cast<std::size_t>(dim), 0),
      target_totals_(vocab_size, 0),
      dimension_totals_(dim, 0) {}

void CountTable::add(PredicateId target, std::uint32_t dimension,
                     std::uint64_t n) {
  counts_[target.index * static_cast<std::size_t>(dim_) + dimension] += n;
  target_totals_[target.index] += n;
  dimension_totals_[dimension] += n;
  grand_total_ += n;
}

std::uint64_t CountTable::count(PredicateId target, int dimension) const {
  return counts_[target.index * static_cast<std::size_t>(dim_) + dimension];
}

std::uint64_t CountTable::target_total(PredicateId target) const {
  return target_totals_[target.index];
}

std::uint64_t CountTable::dimension_total(int dimension) const {
  return dimension_totals_[dimension];
}

CountTable accumulate_counts(std::span<const SvoTriple> triples,
                             const ProjectionMap& projection) {
  CountTable table(projection.vocab_size(), projection.dim());
  for (const SvoTriple& t : triples) {
    if (t.subject) {
      // The verb heads the ARG1 link; the subject is its dependent.
      table.add(*t.subject,
                projection.dimension(t.verb, ContextRole::Arg1Head));
      table.add(t.verb,
                projection.dimension(*t.subject, ContextRole::Arg1Dependent));
    }
    if (t.object) {
      table.add(*t.object,
                projection.dimension(t.verb, ContextRole::Arg2Head));
      table.add(t.verb,
                projection.dimension(*t.object, ContextRole::Arg2Dependent));
    }
  }
  return table;
}

std::vector<double> ppmi_vector(const CountTable& table, PredicateId target) {
  std::uint64_t target_total = table.target_total(target);
  if (target_total == 0) {
    raise(ErrorKind::UndefinedTarget,
          "predicate index " + std::to_string(target.index) +
              " has no context counts");
  }
  const double n = static_cast<double>(table.grand_total());
  std::vector<double> out(table.dim(), 0.0);
  for (int i = 0; i < table.dim(); ++i) {
    std::uint64_t joint = table.count(target, i);
    if (joint == 0) continue;
    double pmi = std::log((static_cast<double>(joint) * n) /
                          (static_cast<double>(target_total) *
                           static_cast<double>(table.dimension_total(i))));
    out[i] = std::max(0.0, pmi);
  }
  return out;
}

std::vector<SemanticFunction> init_semantic_functions(const CountTable& table,
                                                      const SpaceConfig& config,
                                                      double scale,
                                                      double target_truth) {
  validate(config);
  if (!(scale > 0.0)) {
    raise(ErrorKind::Dimension, "scale must be positive");
  }
  if (!(target_truth > 0.0 && target_truth < 1.0)) {
    raise(ErrorKind::Dimension, "target truth must lie strictly in (0,1)");
  }
  const double uniform = static_cast<double>(config.card) / config.dim;
  std::vector<SemanticFunction> functions;
  functions.reserve(table.targets());
  for (std::uint32_t index = 0; index < table.targets(); ++index) {
    PredicateId id{index, Role::Noun};  // role irrelevant to the table
    std::vector<double> ppmi = ppmi_vector(table, id);
    SemanticFunction f;
    f.weights.resize(config.dim);
    double ppmi_sum = 0.0;
    for (int i = 0; i < config.dim; ++i) {
      f.weights[i] = scale * ppmi[i];
      ppmi_sum += ppmi[i];
    }
    // Calibrate the bias so the uniform mean field maps to target_truth.
    f.bias = logit(target_truth) - scale * uniform * ppmi_sum;
    functions.push_back(std::move(f));
  }
  return functions;
}

MeanFieldVector no_context_mean_field(const FdsModel& model, PredicateId pred,
                                      const MeanFieldOptions& opts) {
  model.function(pred);  // range check
  SituationGraph graph({GraphNode{"x", pred}}, {});
  Observation obs{"x", pred};
  MeanFieldResult result =
      mean_field(model, graph, std::span<const Observation>(&obs, 1), opts);
  return std::move(result.node_fields[0]);
}

double link_ppmi(double activation_ratio) {
  return std::max(0.0, std::log(activation_ratio));
}

LinkInit init_links(const FdsModel& model, std::span<const SvoTriple> triples,
                    const MeanFieldOptions& opts) {
  LinkInit out;
  out.arg1 = LinkMatrix(LinkLabel::Arg1, model.config.dim);
  out.arg2 = LinkMatrix(LinkLabel::Arg2, model.config.dim);

  // Distinct (source, target) predicate pairs with multiplicities, per
  // label. Sorted map iteration keeps the accumulation order fixed.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> arg1_pairs;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> arg2_pairs;
  for (const SvoTriple& t : triples) {
    if (t.subject) ++arg1_pairs[{t.verb.index, t.subject->index}];
    if (t.object) ++arg2_pairs[{t.verb.index, t.object->index}];
  }

  // No-context mean fields, computed once per predicate that occurs in a
  // link.
  std::vector<MeanFieldVector> fields(model.vocab.size());
  std::vector<char> have(model.vocab.size(), 0);
  auto field_of = [&](std::uint32_t index) -> const MeanFieldVector& {
    if (!have[index]) {
      PredicateId id{index, model.vocab.entries()[index].role};
      fields[index] = no_context_mean_field(model, id, opts);
      have[index] = 1;
    }
    return fields[index];
  };

  const int dim = model.config.dim;
  const double uniform = static_cast<double>(model.config.card) / dim;
  // Expected co-activation of a dimension pair under two random sparse
  // vectors; the PPMI zero point.
  const double expected = uniform * uniform;

  auto fill = [&](const auto& pairs, LinkMatrix& matrix, const char* label) {
    if (pairs.empty()) {
      out.warnings.push_back(std::string("no ") + label +
                             " links in corpus; matrix left at zero");
      return;
    }
    std::uint64_t total = 0;
    for (const auto& [pair, count] : pairs) total += count;
    // Average of q_src (x) q_tgt over links, expressed relative to the
    // expected activation so that uniform fields give a ratio of exactly
    // one and hence a PPMI of exactly zero.
    std::vector<double> ratio(static_cast<std::size_t>(dim) * dim, 0.0);
    for (const auto& [pair, count] : pairs) {
      const MeanFieldVector& qs = field_of(pair.first);
      const MeanFieldVector& qt = field_of(pair.second);
      const double weight = static_cast<double>(count);
      for (int i = 0; i < dim; ++i) {
        double qi = qs.probs[i];
        for (int j = 0; j < dim; ++j) {
          ratio[static_cast<std::size_t>(i) * dim + j] +=
              weight * ((qi * qt.probs[j]) / expected);
        }
      }
    }
    const double denom = static_cast<double>(total);
    for (int i = 0; i < dim; ++i) {
      for (int j = 0; j < dim; ++j) {
        matrix.at(i, j) =
            link_ppmi(ratio[static_cast<std::size_t>(i) * dim + j] / denom);
      }
    }
  };
  fill(arg1_pairs, out.arg1, "ARG1");
  fill(arg2_pairs, out.arg2, "ARG2");
  return out;
}

InitResult init_model(const TripleCorpus& corpus, const InitParams& params) {
  validate(params.config);
  ProjectionMap projection =
      build_projection(corpus.vocab, params.config, params.seed);
  CountTable table = accumulate_counts(corpus.triples, projection);
  InitResult result;
  result.model.config = params.config;
  result.model.vocab = corpus.vocab;
  result.model.functions = init_semantic_functions(
      table, params.config, params.scale, params.target_truth);
  result.model.arg1 = LinkMatrix(LinkLabel::Arg1, params.config.dim);
  result.model.arg2 = LinkMatrix(LinkLabel::Arg2, params.config.dim);
  LinkInit links = init_links(result.model, corpus.triples, params.mf);
  result.model.arg1 = std::move(links.arg1);
  result.model.arg2 = std::move(links.arg2);
  result.warnings = std::move(links.warnings);
  validate(result.model);
  return result;
}

}  // namespace fds
