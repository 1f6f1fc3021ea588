#ifndef FDS_INIT_HPP
#define FDS_INIT_HPP

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fds/inference.hpp"
#include "fds/model.hpp"

namespace fds {

/// How a neighbouring predicate relates to a target: the neighbour is the
/// head or the dependent of an ARG1 or ARG2 link. Direction tagging keeps
/// the asymmetry the graphical model encodes.
enum class ContextRole : std::uint8_t {
  Arg1Head = 0,       // neighbour heads an ARG1 link into the target
  Arg1Dependent = 1,  // neighbour is the ARG1 of the target
  Arg2Head = 2,
  Arg2Dependent = 3,
};

const char* context_role_name(ContextRole role);

/// Random positive-only projection: every (context predicate, context
/// role) pair is deterministically hashed to one dimension. Many contexts
/// share a dimension by design; that is the point of the technique.
class ProjectionMap {
 public:
  ProjectionMap(const Vocabulary& vocab, const SpaceConfig& config,
                std::uint64_t seed);

  std::uint32_t dimension(PredicateId context, ContextRole role) const;

  std::uint64_t seed() const { return seed_; }
  int dim() const { return dim_; }
  std::size_t vocab_size() const { return dims_.size(); }

 private:
  std::uint64_t seed_;
  int dim_;
  std::vector<std::array<std::uint32_t, 4>> dims_;  // per predicate, per role
};

ProjectionMap build_projection(const Vocabulary& vocab,
                               const SpaceConfig& config, std::uint64_t seed);

/// Target-by-dimension co-occurrence counts with cached marginals.
class CountTable {
 public:
  CountTable(std::size_t vocab_size, int dim);

  void add(PredicateId target, std::uint32_t dimension, std::uint64_t n = 1);

  std::uint64_t count(PredicateId target, int dimension) const;
  std::uint64_t target_total(PredicateId target) const;
  std::uint64_t dimension_total(int dimension) const;
  std::uint64_t grand_total() const { return grand_total_; }
  int dim() const { return dim_; }
  std::size_t targets() const { return target_totals_.size(); }

 private:
  int dim_;
  std::vector<std::uint64_t> counts_;  // row-major [target][dimension]
  std::vector<std::uint64_t> target_totals_;
  std::vector<std::uint64_t> dimension_totals_;
  std::uint64_t grand_total_ = 0;
};

/// Counts projected context dimensions. Each predicate of each triple is
/// a target once, with its graph neighbours (tagged by link label and
/// direction) as contexts.
CountTable accumulate_counts(std::span<const SvoTriple> triples,
                             const ProjectionMap& projection);

/// Standard PPMI row: component i = max(0, log(count(t,i) * N /
/// (count(t) * count(i)))). No negative offset is applied. Throws
/// Error(UndefinedTarget) when the target has no counts at all.
std::vector<double> ppmi_vector(const CountTable& table, PredicateId target);

/// Semantic functions from the count table: weights are scale * PPMI and
/// the bias is calibrated so that the function's mean-field truth
/// probability at the uniform mean field equals target_truth.
std::vector<SemanticFunction> init_semantic_functions(const CountTable& table,
                                                      const SpaceConfig& config,
                                                      double scale,
                                                      double target_truth);

/// The mean-field posterior for a single-node situation observing only
/// this predicate: the predicate's context-free occasion meaning.
MeanFieldVector no_context_mean_field(const FdsModel& model, PredicateId pred,
                                      const MeanFieldOptions& opts = {});

struct LinkInit {
  LinkMatrix arg1;
  LinkMatrix arg2;
  std::vector<std::string> warnings;
};

/// PPMI of a mean co-activation f expressed relative to the chance level
/// (C/D)^2 of two random sparse vectors: max(0, log(f / (C/D)^2)),
/// clamped like ordinary PPMI. Takes the ratio f / (C/D)^2 directly so
/// that chance-level activation maps to exactly zero.
double link_ppmi(double activation_ratio);

/// Link matrices from the corpus: for each label, the mean co-activation
/// f of each dimension pair under the linked predicates' no-context mean
/// fields, scored as max(0, log(f / (C/D)^2)) — PPMI against the expected
/// activation of a random pair. A label with no corpus links yields a
/// zero matrix and a warning.
LinkInit init_links(const FdsModel& model, std::span<const SvoTriple> triples,
                    const MeanFieldOptions& opts = {});

struct InitParams {
  SpaceConfig config;
  std::uint64_t seed = 0;
  double scale = 1.0;
  double target_truth = 0.5;
  MeanFieldOptions mf;
};

struct InitResult {
  FdsModel model;
  std::vector<std::string> warnings;
};

/// The whole fitting pipeline: projection, counts, semantic functions,
/// link matrices. A pure function of (corpus, params); two runs produce
/// bit-identical models.
InitResult init_model(const TripleCorpus& corpus, const InitParams& params);

}  // namespace fds

#endif  // FDS_INIT_HPP
