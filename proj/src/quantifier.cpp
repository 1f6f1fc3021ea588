#include "fds/quantifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fds/error.hpp"
#include "fds/util.hpp"
#include "json.hpp"

namespace fds {

namespace {

using nlohmann::json;

QuantifierKind parse_kind(const std::string& name) {
  if (name == "every") return QuantifierKind::Every;
  if (name == "some" || name == "exists" || name == "a")
    return QuantifierKind::Some;
  if (name == "most") return QuantifierKind::Most;
  if (name == "no") return QuantifierKind::No;
  if (name == "few") return QuantifierKind::Few;
  if (name == "many") return QuantifierKind::Many;
  raise(ErrorKind::Parse, "unknown quantifier kind: " + name);
}

Role leaf_role(const SituationGraph& graph, const std::string& var) {
  auto index = graph.node_index(var);
  if (!index) return Role::Noun;
  for (const GraphLink& l : graph.links()) {
    if (l.source == *index) return Role::Verb;
  }
  return Role::Noun;
}

std::unique_ptr<ScopeNode> parse_node(const json& j, const Vocabulary& vocab,
                                      const SituationGraph& graph,
                                      const QuantifierDefaults& defaults) {
  auto node = std::make_unique<ScopeNode>();
  if (j.contains("quant")) {
    Quantifier q;
    q.kind = parse_kind(j.at("quant").get<std::string>());
    if (q.kind == QuantifierKind::Many) q.theta = defaults.many_theta;
    if (q.kind == QuantifierKind::Few) q.theta = defaults.few_theta;
    q.tau = defaults.tau;
    if (j.contains("theta")) q.theta = j.at("theta").get<double>();
    if (j.contains("tau")) q.tau = j.at("tau").get<double>();
    if (!(q.theta > 0.0 && q.theta < 1.0) || !(q.tau > 0.0)) {
      raise(ErrorKind::Parse, "fuzzy quantifier needs theta in (0,1), tau > 0");
    }
    node->quant = q;
    node->var = j.at("var").get<std::string>();
    node->restriction = parse_node(j.at("restriction"), vocab, graph, defaults);
    node->body = parse_node(j.at("body"), vocab, graph, defaults);
    return node;
  }
  if (!j.contains("preds")) {
    raise(ErrorKind::Parse,
          "scope tree node needs either \"quant\" or \"preds\": " + j.dump());
  }
  for (const json& p : j.at("preds")) {
    if (!p.is_array() || p.size() != 2) {
      raise(ErrorKind::Parse, "predication must be [form, var]: " + p.dump());
    }
    std::string form = p[0].get<std::string>();
    std::string var = p[1].get<std::string>();
    auto id = vocab.resolve(form, leaf_role(graph, var));
    if (!id) raise(ErrorKind::Vocab, "unknown predicate: " + form);
    node->predications.push_back(Predication{*id, var});
  }
  return node;
}

// One quantifier per graph node, every leaf variable bound by an
// ancestor.
void validate_tree(const ScopeNode& node, const SituationGraph& graph,
                   std::set<std::string>& bound,
                   std::set<std::string>& quantified) {
  if (node.is_leaf()) {
    for (const Predication& p : node.predications) {
      if (!graph.node_index(p.var)) {
        raise(ErrorKind::Structure,
              "predication variable " + p.var + " is not a graph node");
      }
      if (!bound.count(p.var)) {
        raise(ErrorKind::Structure, "unbound variable in leaf: " + p.var);
      }
    }
    return;
  }
  if (!graph.node_index(node.var)) {
    raise(ErrorKind::Structure,
          "quantified variable " + node.var + " is not a graph node");
  }
  if (!quantified.insert(node.var).second) {
    raise(ErrorKind::Structure,
          "duplicate quantifier for variable: " + node.var);
  }
  bound.insert(node.var);
  validate_tree(*node.restriction, graph, bound, quantified);
  validate_tree(*node.body, graph, bound, quantified);
  bound.erase(node.var);
}

json node_to_json(const ScopeNode& node, const Vocabulary& vocab) {
  if (node.is_leaf()) {
    json preds = json::array();
    for (const Predication& p : node.predications) {
      preds.push_back(json::array({vocab.form(p.pred), p.var}));
    }
    return json{{"preds", preds}};
  }
  json j;
  j["quant"] = quantifier_kind_name(node.quant->kind);
  j["var"] = node.var;
  if (node.quant->kind == QuantifierKind::Few ||
      node.quant->kind == QuantifierKind::Many) {
    j["theta"] = node.quant->theta;
    j["tau"] = node.quant->tau;
  }
  j["restriction"] = node_to_json(*node.restriction, vocab);
  j["body"] = node_to_json(*node.body, vocab);
  return j;
}

void collect_bound(const ScopeNode& node, std::set<std::string>& bound) {
  if (node.is_leaf()) return;
  bound.insert(node.var);
  collect_bound(*node.restriction, bound);
  collect_bound(*node.body, bound);
}

void collect_leaf_vars(const ScopeNode& node, std::set<std::string>& vars) {
  if (node.is_leaf()) {
    for (const Predication& p : node.predications) vars.insert(p.var);
    return;
  }
  collect_leaf_vars(*node.restriction, vars);
  collect_leaf_vars(*node.body, vars);
}

// The node's free variables: leaf variables bound outside the subtree,
// plus graph neighbours of the subtree's bound variables. The links are
// part of the quantified expression, so a variable reached by an ARG link
// is free in it even when no leaf mentions it.
std::set<std::string> free_variables(const ScopeNode& node,
                                     const SituationGraph& graph) {
  std::set<std::string> bound;
  collect_bound(node, bound);
  std::set<std::string> free;
  std::set<std::string> leaf_vars;
  collect_leaf_vars(node, leaf_vars);
  for (const std::string& var : leaf_vars) {
    if (!bound.count(var)) free.insert(var);
  }
  for (const GraphLink& l : graph.links()) {
    const std::string& source = graph.nodes()[l.source].id;
    const std::string& target = graph.nodes()[l.target].id;
    if (bound.count(source) && !bound.count(target)) free.insert(target);
    if (bound.count(target) && !bound.count(source)) free.insert(source);
  }
  return free;
}

class Evaluator {
 public:
  Evaluator(const FdsModel& model, const ScopedQuery& query, double cap,
            std::vector<QTraceEntry>* trace)
      : model_(model), query_(query), trace_(trace) {
    const std::size_t n = query.graph.nodes().size();
    double log_total = count_pixies_log10(model.config) * static_cast<double>(n);
    if (log_total > std::log10(cap)) {
      std::ostringstream msg;
      msg << "joint space too large for quantifier evaluation: log10(count) = "
          << log_total << " exceeds cap " << cap;
      raise(ErrorKind::TooLarge, msg.str());
    }
    pixies_ = enumerate_pixies(model.config, cap);

    strides_.assign(n, 1);
    for (std::size_t k = n; k-- > 1;) {
      strides_[k - 1] = strides_[k] * pixies_.size();
    }

    // Unnormalized prior over full assignments; the scale cancels in
    // every q ratio.
    prior_.resize(strides_[0] * pixies_.size());
    std::vector<std::size_t> odometer(n, 0);
    std::vector<Pixie> assignment(n, pixies_[0]);
    std::vector<double> scores(prior_.size());
    double max_score = -std::numeric_limits<double>::infinity();
    for (std::size_t idx = 0; idx < prior_.size(); ++idx) {
      for (std::size_t k = 0; k < n; ++k) assignment[k] = pixies_[odometer[k]];
      scores[idx] = situation_score(model, query.graph, assignment);
      max_score = std::max(max_score, scores[idx]);
      std::size_t k = n;
      while (k > 0) {
        --k;
        if (++odometer[k] < pixies_.size()) break;
        odometer[k] = 0;
      }
    }
    for (std::size_t idx = 0; idx < prior_.size(); ++idx) {
      prior_[idx] = std::exp(scores[idx] - max_score);
    }
  }

  const std::vector<Pixie>& pixies() const { return pixies_; }

  double eval(const ScopeNode& node, std::vector<int>& sel) const {
    if (node.is_leaf()) {
      std::set<PredKey> keys;
      leaf_keys(node, keys);
      return key_product(keys, sel);
    }
    double q = q_at(node, sel);
    if (trace_) trace_->push_back(QTraceEntry{node.var, q});
    return quantifier_truth(*node.quant, q);
  }

  double q_at(const ScopeNode& node, std::vector<int>& sel) const {
    std::size_t k = *query_.graph.node_index(node.var);
    const bool both_leaves =
        node.restriction->is_leaf() && node.body->is_leaf();
    double numerator = 0.0;
    double denominator = 0.0;
    for (std::size_t v = 0; v < pixies_.size(); ++v) {
      sel[k] = static_cast<int>(v);
      double w = marginal_weight(sel);
      if (both_leaves) {
        // Truth values form a set of random variables: a predication
        // shared by restriction and body is a single variable, so the
        // conjunction dedups instead of squaring (P(B|B) is exactly 1).
        std::set<PredKey> restriction_keys;
        leaf_keys(*node.restriction, restriction_keys);
        std::set<PredKey> joint_keys = restriction_keys;
        leaf_keys(*node.body, joint_keys);
        numerator += w * key_product(joint_keys, sel);
        denominator += w * key_product(restriction_keys, sel);
      } else {
        double r = eval(*node.restriction, sel);
        double b = eval(*node.body, sel);
        numerator += w * r * b;
        denominator += w * r;
      }
    }
    sel[k] = -1;
    // Truth probabilities are strictly positive, so the denominator
    // cannot vanish.
    return numerator / denominator;
  }

 private:
  // A truth-value random variable: (semantic function, graph node).
  using PredKey = std::pair<std::uint32_t, std::size_t>;

  void leaf_keys(const ScopeNode& leaf, std::set<PredKey>& keys) const {
    for (const Predication& p : leaf.predications) {
      keys.insert({p.pred.index, *query_.graph.node_index(p.var)});
    }
  }

  double key_product(const std::set<PredKey>& keys,
                     const std::vector<int>& sel) const {
    double out = 1.0;
    for (const auto& [function, node] : keys) {
      out *= truth_probability(model_.functions[function],
                               pixies_[static_cast<std::size_t>(sel[node])]);
    }
    return out;
  }

  // Prior weight of a partial assignment: all unselected variables
  // marginalized out of the full joint.
  double marginal_weight(const std::vector<int>& sel) const {
    return sum_prior(sel, 0, 0);
  }

  double sum_prior(const std::vector<int>& sel, std::size_t k,
                   std::size_t base) const {
    if (k == sel.size()) return prior_[base];
    if (sel[k] >= 0) {
      return sum_prior(sel, k + 1,
                       base + static_cast<std::size_t>(sel[k]) * strides_[k]);
    }
    double sum = 0.0;
    for (std::size_t v = 0; v < pixies_.size(); ++v) {
      sum += sum_prior(sel, k + 1, base + v * strides_[k]);
    }
    return sum;
  }

  const FdsModel& model_;
  const ScopedQuery& query_;
  std::vector<QTraceEntry>* trace_;
  std::vector<Pixie> pixies_;
  std::vector<double> prior_;
  std::vector<std::size_t> strides_;
};

}  // namespace

const char* quantifier_kind_name(QuantifierKind kind) {
  switch (kind) {
    case QuantifierKind::Every:
      return "every";
    case QuantifierKind::Some:
      return "some";
    case QuantifierKind::Most:
      return "most";
    case QuantifierKind::No:
      return "no";
    case QuantifierKind::Few:
      return "few";
    case QuantifierKind::Many:
      return "many";
  }
  return "?";
}

ScopedQuery parse_scope_tree_json(const std::string& text,
                                  const Vocabulary& vocab,
                                  const QuantifierDefaults& defaults) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorKind::Parse, std::string("bad scope tree JSON: ") + e.what());
  }
  try {
    if (!doc.contains("tree") || !doc.contains("graph")) {
      raise(ErrorKind::Parse,
            "scope tree file needs \"tree\" and \"graph\" objects");
    }
    SituationGraph graph = parse_graph_json(doc.at("graph").dump(), vocab);
    for (const GraphNode& n : graph.nodes()) {
      if (n.pred) {
        raise(ErrorKind::Structure,
              "scope tree graphs carry no observations; node " + n.id +
                  " has a predicate");
      }
    }
    std::unique_ptr<ScopeNode> root =
        parse_node(doc.at("tree"), vocab, graph, defaults);
    std::set<std::string> bound, quantified;
    validate_tree(*root, graph, bound, quantified);
    if (quantified.size() != graph.nodes().size()) {
      raise(ErrorKind::Structure,
            "expected one quantifier per graph node: " +
                std::to_string(quantified.size()) + " quantifiers for " +
                std::to_string(graph.nodes().size()) + " nodes");
    }
    return ScopedQuery{std::move(root), std::move(graph)};
  } catch (const json::exception& e) {
    raise(ErrorKind::Parse, std::string("bad scope tree JSON: ") + e.what());
  }
}

ScopedQuery parse_scope_tree(const std::string& path, const Vocabulary& vocab,
                             const QuantifierDefaults& defaults) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open scope tree: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scope_tree_json(buf.str(), vocab, defaults);
}

std::string scope_tree_to_json(const ScopedQuery& query,
                               const Vocabulary& vocab) {
  json doc;
  doc["tree"] = node_to_json(*query.root, vocab);
  doc["graph"] = json::parse(graph_to_json(query.graph, vocab));
  return doc.dump(2) + "\n";
}

double quantifier_truth(const Quantifier& quantifier, double q) {
  constexpr double kSharpTolerance = 1e-9;
  switch (quantifier.kind) {
    case QuantifierKind::Every:
      return q >= 1.0 - kSharpTolerance ? 1.0 : 0.0;
    case QuantifierKind::Some:
      return q > kSharpTolerance ? 1.0 : 0.0;
    case QuantifierKind::Most:
      return q > 0.5 ? 1.0 : 0.0;
    case QuantifierKind::No:
      return q <= kSharpTolerance ? 1.0 : 0.0;
    case QuantifierKind::Many:
      return sigmoid((q - quantifier.theta) / quantifier.tau);
    case QuantifierKind::Few:
      return 1.0 - sigmoid((q - quantifier.theta) / quantifier.tau);
  }
  return 0.0;
}

double q_value(const FdsModel& model, const ScopedQuery& query,
               const ScopeNode& node,
               const std::unordered_map<std::string, Pixie>& free_assignment,
               double cap) {
  if (node.is_leaf()) {
    raise(ErrorKind::Query, "q is defined at quantifier nodes, not leaves");
  }
  std::set<std::string> free = free_variables(node, query.graph);
  for (const auto& [var, pixie] : free_assignment) {
    if (!free.count(var)) {
      raise(ErrorKind::Query, "assignment covers non-free variable: " + var);
    }
    if (!valid_pixie(model.config, pixie)) {
      raise(ErrorKind::Query, "invalid pixie assigned to variable: " + var);
    }
  }
  for (const std::string& var : free) {
    if (!free_assignment.count(var)) {
      raise(ErrorKind::Query, "assignment misses free variable: " + var);
    }
  }
  Evaluator evaluator(model, query, cap, nullptr);
  std::vector<int> sel(query.graph.nodes().size(), -1);
  for (const auto& [var, pixie] : free_assignment) {
    auto k = query.graph.node_index(var);
    if (!k) raise(ErrorKind::Query, "variable is not a graph node: " + var);
    auto it = std::find(evaluator.pixies().begin(), evaluator.pixies().end(),
                        pixie);
    sel[*k] = static_cast<int>(it - evaluator.pixies().begin());
  }
  return evaluator.q_at(node, sel);
}

double evaluate(const FdsModel& model, const ScopedQuery& query, double cap,
                std::vector<QTraceEntry>* trace) {
  Evaluator evaluator(model, query, cap, trace);
  std::vector<int> sel(query.graph.nodes().size(), -1);
  return evaluator.eval(*query.root, sel);
}

}  // namespace fds
