#include "fds/inference.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fds/error.hpp"
#include "fds/util.hpp"

namespace fds {

namespace {

std::uint32_t resolve_node(const SituationGraph& graph,
                           const std::string& id) {
  auto index = graph.node_index(id);
  if (!index) raise(ErrorKind::Query, "unknown node id: " + id);
  return *index;
}

void check_enumerable(const FdsModel& model, const SituationGraph& graph,
                      double cap) {
  double log_total =
      count_pixies_log10(model.config) * static_cast<double>(graph.nodes().size());
  if (log_total > std::log10(cap)) {
    std::ostringstream msg;
    msg << "joint space too large to enumerate: log10(count) = " << log_total
        << " exceeds cap " << cap;
    raise(ErrorKind::TooLarge, msg.str());
  }
}

// (node index, predicate) pairs, deduplicated: truth values are a set of
// random variables, so observing one twice is observing it once.
std::vector<std::pair<std::uint32_t, PredicateId>> resolve_observations(
    const FdsModel& model, const SituationGraph& graph,
    std::span<const Observation> observations) {
  std::vector<std::pair<std::uint32_t, PredicateId>> out;
  for (const Observation& obs : observations) {
    model.function(obs.pred);  // range check
    out.emplace_back(resolve_node(graph, obs.node), obs.pred);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first
                              : a.second.index < b.second.index;
  });
  out.erase(std::unique(out.begin(), out.end(),
                        [](const auto& a, const auto& b) {
                          return a.first == b.first &&
                                 a.second.index == b.second.index;
                        }),
            out.end());
  return out;
}

// Log normalizer of the unnormalized joint over assignments restricted to
// the given observed truths. Enumerates the full product space.
double log_partition(
    const FdsModel& model, const SituationGraph& graph,
    const std::vector<std::pair<std::uint32_t, PredicateId>>& observed,
    const std::vector<Pixie>& pixies) {
  const std::size_t n = graph.nodes().size();
  std::vector<std::size_t> odometer(n, 0);
  std::vector<Pixie> assignment(n, pixies[0]);
  std::vector<double> log_weights;
  bool done = false;
  while (!done) {
    for (std::size_t k = 0; k < n; ++k) assignment[k] = pixies[odometer[k]];
    double lw = situation_score(model, graph, assignment);
    for (const auto& [node, pred] : observed) {
      lw += std::log(truth_probability(model.function(pred), assignment[node]));
    }
    log_weights.push_back(lw);
    // Advance the odometer, last node fastest.
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++odometer[k] < pixies.size()) break;
      odometer[k] = 0;
      if (k == 0) done = true;
    }
  }
  double max_lw = *std::max_element(log_weights.begin(), log_weights.end());
  double sum = 0.0;
  for (double lw : log_weights) sum += std::exp(lw - max_lw);
  return max_lw + std::log(sum);
}

}  // namespace

std::vector<Observation> graph_observations(const SituationGraph& graph) {
  std::vector<Observation> out;
  for (const GraphNode& n : graph.nodes()) {
    if (n.pred) out.push_back(Observation{n.id, *n.pred});
  }
  return out;
}

PosteriorTable exact_posterior(const FdsModel& model,
                               const SituationGraph& graph,
                               std::span<const Observation> observations,
                               double cap) {
  check_enumerable(model, graph, cap);
  auto observed = resolve_observations(model, graph, observations);
  std::vector<Pixie> pixies = enumerate_pixies(model.config, cap);

  const std::size_t n = graph.nodes().size();
  PosteriorTable table;
  std::vector<std::size_t> odometer(n, 0);
  std::vector<Pixie> assignment(n, pixies[0]);
  std::vector<double> log_weights;
  bool done = false;
  while (!done) {
    for (std::size_t k = 0; k < n; ++k) assignment[k] = pixies[odometer[k]];
    double lw = situation_score(model, graph, assignment);
    for (const auto& [node, pred] : observed) {
      lw += std::log(truth_probability(model.function(pred), assignment[node]));
    }
    table.support.push_back(assignment);
    log_weights.push_back(lw);
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (++odometer[k] < pixies.size()) break;
      odometer[k] = 0;
      if (k == 0) done = true;
    }
  }

  double max_lw = *std::max_element(log_weights.begin(), log_weights.end());
  double z = 0.0;
  for (double lw : log_weights) z += std::exp(lw - max_lw);
  table.probs.resize(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    table.probs[i] = std::exp(log_weights[i] - max_lw) / z;
    total += table.probs[i];
  }
  // Kill residual rounding so the table sums to 1 tightly.
  for (double& p : table.probs) p /= total;
  return table;
}

std::vector<std::vector<double>> posterior_marginals(
    const PosteriorTable& table, int dim) {
  if (table.support.empty()) return {};
  std::size_t n = table.support.front().size();
  std::vector<std::vector<double>> marginals(n, std::vector<double>(dim, 0.0));
  for (std::size_t a = 0; a < table.support.size(); ++a) {
    for (std::size_t k = 0; k < n; ++k) {
      for (std::int32_t i : table.support[a][k].active) {
        marginals[k][i] += table.probs[a];
      }
    }
  }
  return marginals;
}

double exact_conditional_truth(const FdsModel& model,
                               const SituationGraph& graph,
                               std::span<const Observation> observations,
                               const Observation& query, double cap) {
  check_enumerable(model, graph, cap);
  auto observed = resolve_observations(model, graph, observations);

  std::vector<Observation> with_query(observations.begin(),
                                      observations.end());
  with_query.push_back(query);
  auto observed_union = resolve_observations(model, graph, with_query);

  std::vector<Pixie> pixies = enumerate_pixies(model.config, cap);
  double log_num = log_partition(model, graph, observed_union, pixies);
  double log_den = log_partition(model, graph, observed, pixies);
  // When the query is already observed the two sets are identical, the
  // logs cancel exactly, and the result is exactly 1.
  return std::exp(log_num - log_den);
}

const MeanFieldVector& MeanFieldResult::at(const SituationGraph& graph,
                                           std::string_view node_id) const {
  auto index = graph.node_index(node_id);
  if (!index) raise(ErrorKind::Query, "unknown node id: " + std::string(node_id));
  return node_fields[*index];
}

MeanFieldVector cardinality_project(std::span<const double> logits, int card) {
  const int dim = static_cast<int>(logits.size());
  if (card <= 0 || card >= dim) {
    raise(ErrorKind::Dimension, "cardinality must satisfy 0 < C < D");
  }
  MeanFieldVector q;
  q.probs.resize(dim);

  auto [min_it, max_it] = std::minmax_element(logits.begin(), logits.end());
  if (*min_it == *max_it) {
    // Symmetric case: the projection is exactly uniform.
    std::fill(q.probs.begin(), q.probs.end(),
              static_cast<double>(card) / dim);
    return q;
  }

  // Sum of sigmoid(logit + s) is continuous and strictly increasing in s
  // with range (0, D), so a bracket around the C crossing always exists.
  double base = logit(static_cast<double>(card) / dim);
  double lo = base - *max_it;
  double hi = base - *min_it;
  auto excess = [&](double s) {
    double sum = 0.0;
    for (double l : logits) sum += sigmoid(l + s);
    return sum - card;
  };
  double shift = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    shift = 0.5 * (lo + hi);
    double e = excess(shift);
    if (std::abs(e) <= 1e-12) break;
    if (e > 0.0)
      hi = shift;
    else
      lo = shift;
  }
  for (int i = 0; i < dim; ++i) q.probs[i] = sigmoid(logits[i] + shift);
  return q;
}

MeanFieldResult mean_field(const FdsModel& model, const SituationGraph& graph,
                           std::span<const Observation> observations,
                           const MeanFieldOptions& opts) {
  if (opts.tolerance <= 0.0 || opts.max_iters <= 0) {
    raise(ErrorKind::Query, "mean field options must be positive");
  }
  auto observed = resolve_observations(model, graph, observations);
  const int dim = model.config.dim;
  const std::size_t n = graph.nodes().size();

  MeanFieldResult result;
  result.node_fields.assign(n, uniform_mean_field(model.config));

  // Observations grouped per node.
  std::vector<std::vector<PredicateId>> obs_at(n);
  for (const auto& [node, pred] : observed) obs_at[node].push_back(pred);

  std::vector<double> logits(dim);
  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    double max_delta = 0.0;
    for (std::size_t node = 0; node < n; ++node) {
      std::fill(logits.begin(), logits.end(), 0.0);
      for (const GraphLink& l : graph.links()) {
        const LinkMatrix& w = model.link(l.label);
        if (l.source == node) {
          const std::vector<double>& qm = result.node_fields[l.target].probs;
          for (int i = 0; i < dim; ++i) {
            std::span<const double> row = w.row(i);
            double acc = 0.0;
            for (int j = 0; j < dim; ++j) acc += row[j] * qm[j];
            logits[i] += acc;
          }
        }
        if (l.target == node) {
          const std::vector<double>& qm = result.node_fields[l.source].probs;
          for (int j = 0; j < dim; ++j) {
            std::span<const double> row = w.row(j);
            double acc = qm[j];
            for (int i = 0; i < dim; ++i) logits[i] += acc * row[i];
          }
        }
      }
      for (PredicateId pred : obs_at[node]) {
        const SemanticFunction& f = model.function(pred);
        double slack =
            1.0 - truth_probability_mf(f, result.node_fields[node]);
        for (int i = 0; i < dim; ++i) logits[i] += f.weights[i] * slack;
      }
      MeanFieldVector updated = cardinality_project(logits, model.config.card);
      for (int i = 0; i < dim; ++i) {
        max_delta = std::max(
            max_delta,
            std::abs(updated.probs[i] - result.node_fields[node].probs[i]));
      }
      result.node_fields[node] = std::move(updated);
    }
    result.iterations = iter;
    result.max_delta = max_delta;
    if (max_delta < opts.tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

double conditional_truth_mf(const FdsModel& model, const SituationGraph& graph,
                            std::span<const Observation> observations,
                            const Observation& query,
                            const MeanFieldOptions& opts) {
  std::uint32_t node = resolve_node(graph, query.node);
  MeanFieldResult mf = mean_field(model, graph, observations, opts);
  return truth_probability_mf(model.function(query.pred),
                              mf.node_fields[node]);
}

}  // namespace fds
