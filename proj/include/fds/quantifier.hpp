#ifndef FDS_QUANTIFIER_HPP
#define FDS_QUANTIFIER_HPP

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fds/model.hpp"

namespace fds {

enum class QuantifierKind { Every, Some, Most, No, Few, Many };

const char* quantifier_kind_name(QuantifierKind kind);

struct Quantifier {
  QuantifierKind kind = QuantifierKind::Some;
  // Fuzzy-kind parameters; ignored by the sharp kinds.
  double theta = 0.5;
  double tau = 0.1;
};

inline constexpr double kDefaultManyTheta = 0.5;
inline constexpr double kDefaultFewTheta = 0.25;
inline constexpr double kDefaultFuzzyTau = 0.1;

struct Predication {
  PredicateId pred;
  std::string var;
};

/// A node of a fully scoped tree: either a quantifier binding `var` with
/// restriction and body subtrees, or a leaf conjunction of predications.
/// A leaf with no predications is the empty restriction (identically
/// true).
struct ScopeNode {
  std::optional<Quantifier> quant;
  std::string var;  // quantifier nodes only
  std::unique_ptr<ScopeNode> restriction;
  std::unique_ptr<ScopeNode> body;
  std::vector<Predication> predications;  // leaves only

  bool is_leaf() const { return !quant.has_value(); }
};

/// A scope tree together with the situation's links (a graph without
/// observations). There is exactly one quantifier per graph node, and
/// every leaf variable is bound by an ancestor quantifier.
struct ScopedQuery {
  std::unique_ptr<ScopeNode> root;
  SituationGraph graph;
};

/// Fallback fuzzy-quantifier parameters for tree nodes that do not carry
/// their own "theta"/"tau" fields.
struct QuantifierDefaults {
  double many_theta = kDefaultManyTheta;
  double few_theta = kDefaultFewTheta;
  double tau = kDefaultFuzzyTau;
};

ScopedQuery parse_scope_tree(const std::string& path, const Vocabulary& vocab,
                             const QuantifierDefaults& defaults = {});
ScopedQuery parse_scope_tree_json(const std::string& text,
                                  const Vocabulary& vocab,
                                  const QuantifierDefaults& defaults = {});
std::string scope_tree_to_json(const ScopedQuery& query,
                               const Vocabulary& vocab);

/// The probability that the quantified expression is true given the
/// restriction/body conditional q. Sharp kinds use a 1e-9 tolerance at
/// their cutoffs: truth probabilities are never exactly 0 or 1, so
/// literal cutoffs would make EVERY vacuously false everywhere.
double quantifier_truth(const Quantifier& quantifier, double q);

struct QTraceEntry {
  std::string var;  // the quantifier's bound variable
  double q;         // P(body | restriction, outer assignment)
};

/// q(V) = P(body | restriction, V) at one quantifier node, with the
/// node's own variable marginalized over the prior (conditioned on the
/// assignment V of the node's free variables via the links, with all
/// remaining variables marginalized out of the full joint).
double q_value(const FdsModel& model, const ScopedQuery& query,
               const ScopeNode& node,
               const std::unordered_map<std::string, Pixie>& free_assignment,
               double cap = kEnumerationCap);

/// Bottom-up evaluation of the whole tree: at each quantifier and each
/// assignment of its free variables, compute q then the quantifier's
/// truth probability; each quantifier removes a free variable, and the
/// root yields a single probabilistic truth value.
double evaluate(const FdsModel& model, const ScopedQuery& query,
                double cap = kEnumerationCap,
                std::vector<QTraceEntry>* trace = nullptr);

}  // namespace fds

#endif  // FDS_QUANTIFIER_HPP
