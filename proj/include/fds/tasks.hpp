#ifndef FDS_TASKS_HPP
#define FDS_TASKS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fds/inference.hpp"
#include "fds/model.hpp"

namespace fds {

struct SimilarityPair {
  PredicateId word1, word2;
  double gold = 0.0;
};

struct SvoComparison {
  PredicateId subject, object;  // nouns
  PredicateId verb1, verb2;     // verbs
  double gold = 0.0;
};

enum class ClauseKind { Subject, Object };

struct RelpronProperty {
  PredicateId term;
  ClauseKind kind = ClauseKind::Subject;  // where the hypernym sits
  PredicateId hypernym, verb, argument;
};

/// Symmetric similarity of two predicates: the product of the mean-field
/// conditional truth probabilities in both directions, each computed on a
/// single-node situation.
double lexical_similarity(const FdsModel& model, PredicateId a, PredicateId b,
                          const MeanFieldOptions& opts = {});

/// Contextual verb similarity: condition the verb node on all three
/// predicates of (subject, verb1, object), apply verb2's function to that
/// mean field, repeat with the verbs swapped, and multiply.
double contextual_verb_similarity(const FdsModel& model,
                                  const SvoComparison& cmp,
                                  const MeanFieldOptions& opts = {});

/// Mean-field score of a term against one property: build the transitive
/// situation with the hypernym in ARG1 (subject clause) or ARG2 (object
/// clause) position, condition on all three predicates, and apply the
/// term's function to the hypernym node's mean field.
double relpron_property_score(const FdsModel& model, PredicateId term,
                              const RelpronProperty& property,
                              const MeanFieldOptions& opts = {});

struct RankedProperty {
  std::size_t index;  // position in the input property list
  double score;
};

/// All properties scored against one term, sorted by descending score,
/// ties broken by input order.
std::vector<RankedProperty> relpron_rank(const FdsModel& model,
                                         PredicateId term,
                                         std::span<const RelpronProperty> properties,
                                         const MeanFieldOptions& opts = {});

/// Spearman rank correlation with average-rank tie handling. Throws
/// Error(Metric) when either side has zero rank variance.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Mean over queries of average precision. `rankings[t]` is query t's
/// ranked candidate list (best first); `gold[t]` its correct candidates.
double mean_average_precision(
    const std::vector<std::vector<std::size_t>>& rankings,
    const std::vector<std::unordered_set<std::size_t>>& gold);

class ExternalEmbeddings {
 public:
  // Text format: an optional `count dim` header line, then
  // `word v1 ... vD` per line. Dimensions must agree and norms must be
  // nonzero.
  static ExternalEmbeddings load(const std::string& path);

  const std::vector<double>* find(const std::string& word) const;
  int dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

 private:
  int dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

ExternalEmbeddings load_embeddings(const std::string& path);

double cosine(const ExternalEmbeddings& embeddings, const std::string& w1,
              const std::string& w2);

/// z-score both lists over the candidate set and mix them:
/// alpha * z_a + (1 - alpha) * z_b.
std::vector<double> ensemble_score(std::span<const double> scores_a,
                                   std::span<const double> scores_b,
                                   double alpha);

// ---------------------------------------------------------------------
// File-level evaluation drivers used by the CLI. Items with unknown
// predicates (or, with an ensemble, missing embeddings) are skipped and
// counted; coverage is reported next to the metric.

struct EvalOptions {
  MeanFieldOptions mf;
  int threads = 1;
  const ExternalEmbeddings* embeddings = nullptr;  // enables the ensemble
  double alpha = 0.5;
  Role role = Role::Noun;  // namespace for eval-sim datasets
};

struct SimilarityReport {
  double metric = 0.0;  // Spearman
  std::size_t n = 0;    // scored items
  std::size_t total = 0;
  double coverage = 0.0;
};

SimilarityReport eval_similarity_file(const FdsModel& model,
                                      const std::string& path,
                                      const EvalOptions& opts);

SimilarityReport eval_svo_file(const FdsModel& model, const std::string& path,
                               const EvalOptions& opts);

struct RelpronReport {
  double metric = 0.0;  // MAP
  std::size_t n = 0;    // properties in the ranking pool
  std::size_t total = 0;
  double coverage = 0.0;
  std::vector<std::pair<std::string, double>> per_term;  // term, AP
};

RelpronReport eval_relpron_file(const FdsModel& model, const std::string& path,
                                const EvalOptions& opts);

}  // namespace fds

#endif  // FDS_TASKS_HPP
