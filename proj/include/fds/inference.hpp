#ifndef FDS_INFERENCE_HPP
#define FDS_INFERENCE_HPP

#include <span>
#include <string>
#include <vector>

#include "fds/model.hpp"

namespace fds {

/// A predicate observed true of a graph node's pixie.
struct Observation {
  std::string node;
  PredicateId pred;
};

// Observations attached to the graph's own nodes.
std::vector<Observation> graph_observations(const SituationGraph& graph);

/// Joint posterior over pixie assignments, by exhaustive enumeration.
/// `support` lists every joint assignment of the space exactly once (in
/// node order x lexicographic pixie order); `probs` matches it.
struct PosteriorTable {
  std::vector<std::vector<Pixie>> support;  // assignment per graph node
  std::vector<double> probs;
};

/// Exact posterior over situations given observed-true predicates:
/// P(assignment) proportional to exp(situation_score) times the product
/// of the observed predicates' truth probabilities. Feasible only while
/// binomial(D,C)^nodes stays under `cap`; beyond that Error(TooLarge).
PosteriorTable exact_posterior(const FdsModel& model,
                               const SituationGraph& graph,
                               std::span<const Observation> observations,
                               double cap = kEnumerationCap);

// Per-node activation marginals of a posterior table: element [n][i] is
// the probability that dimension i of node n's pixie is active.
std::vector<std::vector<double>> posterior_marginals(
    const PosteriorTable& table, int dim);

/// Exact P(query predicate true of query node | observations). The truth
/// variables form a set: querying an already-observed predicate is
/// conditioning twice on the same variable and yields exactly 1.
double exact_conditional_truth(const FdsModel& model,
                               const SituationGraph& graph,
                               std::span<const Observation> observations,
                               const Observation& query,
                               double cap = kEnumerationCap);

struct MeanFieldOptions {
  double tolerance = 1e-4;
  int max_iters = 50;
};

struct MeanFieldResult {
  std::vector<MeanFieldVector> node_fields;  // graph node order
  int iterations = 0;
  double max_delta = 0.0;
  bool converged = false;

  const MeanFieldVector& at(const SituationGraph& graph,
                            std::string_view node_id) const;
};

/// Projects logits onto the expected-cardinality family: returns
/// q_i = sigmoid(logit_i + s) with the shift s chosen by bisection so that
/// the components sum to C (within 1e-9). Strictly order-preserving.
MeanFieldVector cardinality_project(std::span<const double> logits, int card);

/// Mean-field occasion meanings by coordinate ascent. Nodes update in
/// graph order, each from the current state of the others:
///
///   logit_i = sum over links at this node of the link-matrix row/column
///             weighted by the neighbour's mean activations
///           + sum over observations p here of w_p,i * (1 - sigmoid(w_p.q + b_p))
///
/// followed by cardinality projection. A dimension earns probability by
/// being tied to probable dimensions of neighbours or by making an
/// observed predicate more likely; the fixed total C makes dimensions
/// compete. Non-convergence is flagged, never thrown.
MeanFieldResult mean_field(const FdsModel& model, const SituationGraph& graph,
                           std::span<const Observation> observations,
                           const MeanFieldOptions& opts = {});

/// P(query true | observations), mean-field approximation: the query
/// predicate's function applied to the query node's mean field vector.
double conditional_truth_mf(const FdsModel& model, const SituationGraph& graph,
                            std::span<const Observation> observations,
                            const Observation& query,
                            const MeanFieldOptions& opts = {});

}  // namespace fds

#endif  // FDS_INFERENCE_HPP
