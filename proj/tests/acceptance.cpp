// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Thresholds and tolerances are pinned in code.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fds/corpus.hpp"
#include "fds/inference.hpp"
#include "fds/init.hpp"
#include "fds/model.hpp"
#include "fds/quantifier.hpp"
#include "fds/tasks.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace fds;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << " — " << detail
            << "\n";
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------- 1 ---
void space_cardinality() {
  auto start = Clock::now();
  double big = count_pixies_log10({1000, 40});
  double sub = count_pixies_log10({200, 40});
  double elapsed = seconds_since(start);
  bool pass = big >= 71.0 && big <= 72.5 && sub >= 41.5 && sub <= 43.0 &&
              elapsed < 1e-3;
  std::ostringstream detail;
  detail << "log10 counts " << big << " and " << sub << " in [71,72.5] and "
         << "[41.5,43], " << elapsed * 1e6 << " us";
  report("space-cardinality", pass, detail.str());
}

// ---------------------------------------------------------------- 2 ---
void link_ppmi_zero_point() {
  auto start = Clock::now();
  const int dim = 50;
  TripleCorpus corpus;
  PredicateId dog = corpus.vocab.add("dog_n", Role::Noun, 5);
  PredicateId cat = corpus.vocab.add("cat_n", Role::Noun, 5);
  PredicateId chase = corpus.vocab.add("chase_v", Role::Verb, 5);
  corpus.triples.push_back(SvoTriple{dog, chase, cat});
  corpus.triples.push_back(SvoTriple{cat, chase, dog});
  corpus.triples.push_back(SvoTriple{dog, chase, std::nullopt});

  FdsModel model;
  model.config = SpaceConfig{dim, 5};
  model.vocab = corpus.vocab;
  model.functions.resize(3);
  for (auto& f : model.functions) f.weights.assign(dim, 0.0);
  model.arg1 = LinkMatrix(LinkLabel::Arg1, dim);
  model.arg2 = LinkMatrix(LinkLabel::Arg2, dim);

  LinkInit links = init_links(model, corpus.triples);
  std::size_t nonzero = 0;
  for (double v : links.arg1.values()) nonzero += (v != 0.0);
  for (double v : links.arg2.values()) nonzero += (v != 0.0);
  double elapsed = seconds_since(start);
  bool pass = nonzero == 0 && elapsed < 1.0;
  std::ostringstream detail;
  detail << nonzero << " nonzero entries out of " << 2 * dim * dim << " at D="
         << dim << " (uniform fields), " << elapsed << " s";
  report("link-ppmi-zero-point", pass, detail.str());
}

// ---------------------------------------------------------------- 3 ---
void oracle_agreement() {
  auto start = Clock::now();
  double worst_marginal = 0.0;
  double worst_conditional = 0.0;
  int models = 0;
  for (std::uint64_t seed = 0; seed < 54; ++seed) {
    fds::test::RandomModelSpec spec;
    spec.dim = 5 + static_cast<int>(seed % 4);  // D in 5..8
    spec.card = 2;
    FdsModel model = fds::test::random_model(spec, 7000 + seed);
    int nodes = 1 + static_cast<int>(seed % 3);  // 1..3 nodes
    SituationGraph graph = fds::test::chain_graph(model, nodes);
    auto obs = graph_observations(graph);
    ++models;

    PosteriorTable table = exact_posterior(model, graph, obs);
    auto exact = posterior_marginals(table, model.config.dim);
    MeanFieldResult mf = mean_field(model, graph, obs);
    for (std::size_t k = 0; k < exact.size(); ++k) {
      for (int i = 0; i < model.config.dim; ++i) {
        worst_marginal = std::max(
            worst_marginal,
            std::abs(exact[k][i] - mf.node_fields[k].probs[i]));
      }
    }

    PredicateId query = *model.vocab.find("n2", Role::Noun);
    Observation q{"x", query};
    double approx = conditional_truth_mf(model, graph, obs, q);
    double exact_p = exact_conditional_truth(model, graph, obs, q);
    worst_conditional =
        std::max(worst_conditional, std::abs(approx - exact_p));
  }
  double elapsed = seconds_since(start);
  bool pass = worst_marginal <= 0.15 && worst_conditional <= 0.15 &&
              elapsed < 60.0 && models >= 50;
  std::ostringstream detail;
  detail << models << " models: worst marginal TV " << worst_marginal
         << ", worst conditional gap " << worst_conditional << " (<= 0.15), "
         << elapsed << " s";
  report("oracle-agreement", pass, detail.str());
}

// ---------------------------------------------------------------- 4 ---
void quantifier_oracle() {
  auto start = Clock::now();
  bool pass = true;
  std::ostringstream detail;

  // Single-quantifier trees over D=4, C=1 vs. naive enumeration.
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    fds::test::FixtureRng rng(9000 + seed);
    FdsModel model;
    model.config = SpaceConfig{4, 1};
    model.vocab.add("r_n", Role::Noun, 5);
    model.vocab.add("b_n", Role::Noun, 5);
    model.functions.resize(2);
    for (auto& f : model.functions) {
      f.weights.resize(4);
      for (double& w : f.weights) w = rng.normal(0.0, 1.5);
      f.bias = rng.normal(0.0, 0.5);
    }
    model.arg1 = LinkMatrix(LinkLabel::Arg1, 4);
    model.arg2 = LinkMatrix(LinkLabel::Arg2, 4);

    ScopedQuery query = parse_scope_tree_json(R"({
      "tree": {"quant": "most", "var": "x",
               "restriction": {"preds": [["r_n", "x"]]},
               "body": {"preds": [["b_n", "x"]]}},
      "graph": {"nodes": [{"id": "x"}], "links": []}
    })",
                                              model.vocab);
    double num = 0.0, den = 0.0;
    for (std::uint32_t mask : oracle::masks(4, 1)) {
      double r = oracle::truth_of_mask(model.functions[0], mask, 4);
      double b = oracle::truth_of_mask(model.functions[1], mask, 4);
      num += r * b;
      den += r;
    }
    double naive_q = num / den;
    double q = q_value(model, query, *query.root, {});
    worst = std::max(worst, std::abs(q - naive_q));
    double value = evaluate(model, query);
    double expected = naive_q > 0.5 ? 1.0 : 0.0;
    if (value != expected) pass = false;
  }
  if (worst > 1e-9) pass = false;
  detail << "worst |q - naive| " << worst << " (<= 1e-9)";

  // Sharp cutoff behaviour on constructed q values.
  const double qs[] = {0.0, 0.49, 0.5, 0.51, 0.99, 1.0};
  const double want_every[] = {0, 0, 0, 0, 0, 1};
  const double want_some[] = {0, 1, 1, 1, 1, 1};
  const double want_most[] = {0, 0, 0, 1, 1, 1};
  const double want_no[] = {1, 0, 0, 0, 0, 0};
  for (int i = 0; i < 6; ++i) {
    if (quantifier_truth({QuantifierKind::Every, 0.5, 0.1}, qs[i]) !=
        want_every[i])
      pass = false;
    if (quantifier_truth({QuantifierKind::Some, 0.5, 0.1}, qs[i]) !=
        want_some[i])
      pass = false;
    if (quantifier_truth({QuantifierKind::Most, 0.5, 0.1}, qs[i]) !=
        want_most[i])
      pass = false;
    if (quantifier_truth({QuantifierKind::No, 0.5, 0.1}, qs[i]) != want_no[i])
      pass = false;
  }
  double elapsed = seconds_since(start);
  if (elapsed >= 5.0) pass = false;
  detail << ", cutoffs exact, " << elapsed << " s";
  report("quantifier-oracle", pass, detail.str());
}

// ---------------------------------------------------------------- 5 ---
void idempotent_conditioning() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    fds::test::RandomModelSpec spec;
    spec.dim = 4 + static_cast<int>(seed % 4);
    spec.card = 2;
    FdsModel model = fds::test::random_model(spec, 100 + seed);
    int nodes = 1 + static_cast<int>(seed % 3);
    SituationGraph graph = fds::test::chain_graph(model, nodes);
    auto obs = graph_observations(graph);
    // Query each observation against itself.
    for (const Observation& o : obs) {
      double p = exact_conditional_truth(model, graph, obs, o);
      worst = std::max(worst, std::abs(p - 1.0));
    }
  }
  bool pass = worst <= 1e-9;
  std::ostringstream detail;
  detail << "worst |P(t_p|t_p) - 1| = " << worst << " (<= 1e-9)";
  report("idempotent-conditioning", pass, detail.str());
}

// ---------------------------------------------------------------- 6 ---
void metric_correctness() {
  bool pass = true;
  std::ostringstream detail;

  std::vector<double> xs{1.0, 2.0, 2.0, 4.0};
  std::vector<double> ys{1.0, 2.0, 3.0, 4.0};
  double rho = spearman(xs, ys);
  double rho_expected = std::sqrt(0.9);  // hand value with average ranks
  if (std::abs(rho - rho_expected) > 1e-12) pass = false;

  std::vector<double> up{1, 2, 3, 4, 5};
  std::vector<double> down{5, 4, 3, 2, 1};
  if (std::abs(spearman(up, up) - 1.0) > 1e-12) pass = false;
  if (std::abs(spearman(up, down) + 1.0) > 1e-12) pass = false;

  double map13 = mean_average_precision({{7, 8, 9, 10}}, {{7, 9}});
  if (std::abs(map13 - (1.0 + 2.0 / 3.0) / 2.0) > 1e-12) pass = false;
  double map_last = mean_average_precision({{0, 1, 2, 3}}, {{2, 3}});
  if (std::abs(map_last - 5.0 / 12.0) > 1e-12) pass = false;
  double map_top = mean_average_precision({{0, 1, 2}}, {{0}});
  if (std::abs(map_top - 1.0) > 1e-12) pass = false;

  detail << "spearman ties " << rho << " vs " << rho_expected
         << "; MAP fixtures exact to 1e-12";
  report("metric-correctness", pass, detail.str());
}

// ---------------------------------------------------------------- 7 ---
const char* kAcceptanceWorld = R"({
  "categories": {
    "animal": ["dog_n", "cat_n", "fox_n", "wolf_n", "bear_n"],
    "food": ["rice_n", "bread_n", "corn_n", "cake_n", "oat_n"]
  },
  "frames": [
    {"verb": "eat_v", "subj": "animal", "obj": "food", "weight": 3},
    {"verb": "chase_v", "subj": "animal", "obj": "animal", "weight": 2},
    {"verb": "nourish_v", "subj": "food", "obj": "animal", "weight": 2},
    {"verb": "spoil_v", "subj": "food", "obj": "food", "weight": 1}
  ]
})";

void end_to_end_micro_world() {
  auto start = Clock::now();
  MicroWorld world = parse_world_json(kAcceptanceWorld);
  TripleCorpus corpus = generate_synthetic_corpus(world, 1, 20000);
  InitParams params;
  params.config = SpaceConfig{100, 10};
  params.seed = 1;
  FdsModel model = init_model(corpus, params).model;
  FdsModel again = init_model(corpus, params).model;
  bool bit_identical = model_to_json(model) == model_to_json(again);

  const std::vector<std::string> animals{"dog_n", "cat_n", "fox_n", "wolf_n",
                                         "bear_n"};
  const std::vector<std::string> foods{"rice_n", "bread_n", "corn_n", "cake_n",
                                       "oat_n"};
  auto noun = [&](const std::string& w) {
    return *model.vocab.find(w, Role::Noun);
  };
  auto verb = [&](const std::string& w) {
    return *model.vocab.find(w, Role::Verb);
  };

  double within = 0.0, cross = 0.0;
  int within_n = 0, cross_n = 0;
  for (const auto& group : {animals, foods}) {
    for (std::size_t i = 0; i < group.size(); ++i) {
      for (std::size_t j = i + 1; j < group.size(); ++j) {
        within += lexical_similarity(model, noun(group[i]), noun(group[j]));
        ++within_n;
      }
    }
  }
  for (const std::string& a : animals) {
    for (const std::string& f : foods) {
      cross += lexical_similarity(model, noun(a), noun(f));
      ++cross_n;
    }
  }
  within /= within_n;
  cross /= cross_n;
  bool separated = within > cross;

  // Ten constructed properties: five select animals, five select food.
  struct Spec {
    const char* term;
    ClauseKind kind;
    const char* hypernym;
    const char* verb;
    const char* argument;
  };
  const Spec animal_props[] = {
      {"dog_n", ClauseKind::Subject, "cat_n", "eat_v", "rice_n"},
      {"dog_n", ClauseKind::Subject, "fox_n", "eat_v", "bread_n"},
      {"dog_n", ClauseKind::Subject, "wolf_n", "chase_v", "bear_n"},
      {"dog_n", ClauseKind::Object, "fox_n", "chase_v", "cat_n"},
      {"dog_n", ClauseKind::Object, "bear_n", "nourish_v", "corn_n"},
  };
  const Spec food_props[] = {
      {"rice_n", ClauseKind::Object, "corn_n", "eat_v", "dog_n"},
      {"rice_n", ClauseKind::Subject, "cake_n", "nourish_v", "cat_n"},
      {"rice_n", ClauseKind::Subject, "oat_n", "spoil_v", "bread_n"},
      {"rice_n", ClauseKind::Object, "bread_n", "spoil_v", "cake_n"},
      {"rice_n", ClauseKind::Subject, "corn_n", "nourish_v", "wolf_n"},
  };
  std::vector<RelpronProperty> pool;
  auto push = [&](const Spec& s, const char* term) {
    RelpronProperty p;
    p.term = noun(term);
    p.kind = s.kind;
    p.hypernym = noun(s.hypernym);
    p.verb = verb(s.verb);
    p.argument = noun(s.argument);
    pool.push_back(p);
  };
  for (const Spec& s : animal_props) push(s, s.term);
  for (const Spec& s : food_props) push(s, s.term);

  // Retrieval over the pool for two animal terms and two food terms.
  std::vector<std::pair<std::string, bool>> terms{
      {"dog_n", true}, {"cat_n", true}, {"rice_n", false}, {"bread_n", false}};
  std::vector<std::vector<std::size_t>> rankings;
  std::vector<std::unordered_set<std::size_t>> gold;
  for (const auto& [term, is_animal] : terms) {
    auto ranked = relpron_rank(model, noun(term), pool);
    std::vector<std::size_t> order;
    for (const RankedProperty& rp : ranked) order.push_back(rp.index);
    rankings.push_back(order);
    std::unordered_set<std::size_t> g;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      bool animal_prop = i < 5;
      if (animal_prop == is_animal) g.insert(i);
    }
    gold.push_back(g);
  }
  double map = mean_average_precision(rankings, gold);
  bool retrieval = map >= 0.6;

  double elapsed = seconds_since(start);
  bool pass = bit_identical && separated && retrieval && elapsed < 300.0;
  std::ostringstream detail;
  detail << "within-category sim " << within << " > cross " << cross << ": "
         << (separated ? "yes" : "NO") << "; retrieval MAP " << map
         << " (>= 0.6); bit-identical refit: " << (bit_identical ? "yes" : "NO")
         << "; " << elapsed << " s";
  report("end-to-end-micro-world", pass, detail.str());
}

// ---------------------------------------------------------------- 8 ---
int run_command(const std::string& command) {
  int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism() {
  fds::test::TempDir dir;
  MicroWorld world = parse_world_json(kAcceptanceWorld);
  TripleCorpus corpus = generate_synthetic_corpus(world, 2, 2000);
  save_triples(dir.file("corpus.tsv"), corpus.triples, corpus.vocab);
  std::string base = std::string("'") + FDS_CLI_PATH + "' init --corpus '" +
                     dir.file("corpus.tsv") +
                     "' --dim 30 --card 4 --seed 9 --min-count 1 --out '";
  bool ok1 = run_command(base + dir.file("m1.json") + "' >/dev/null 2>&1") == 0;
  bool ok2 = run_command(base + dir.file("m2.json") + "' >/dev/null 2>&1") == 0;
  bool identical = fds::test::read_file(dir.file("m1.json")) ==
                       fds::test::read_file(dir.file("m2.json")) &&
                   !fds::test::read_file(dir.file("m1.json")).empty();

  fds::test::write_file(dir.file("pairs.tsv"),
                        "dog_n\tcat_n\t9\n"
                        "dog_n\trice_n\t2\n"
                        "cake_n\toat_n\t8\n"
                        "fox_n\twolf_n\t7\n");
  std::string eval = std::string("'") + FDS_CLI_PATH + "' eval-sim --model '" +
                     dir.file("m1.json") + "' --data '" +
                     dir.file("pairs.tsv") + "' --json --threads ";
  bool ok3 =
      run_command(eval + "1 >'" + dir.file("t1.txt") + "' 2>/dev/null") == 0;
  bool ok4 =
      run_command(eval + "4 >'" + dir.file("t4.txt") + "' 2>/dev/null") == 0;
  bool thread_stable = fds::test::read_file(dir.file("t1.txt")) ==
                           fds::test::read_file(dir.file("t4.txt")) &&
                       !fds::test::read_file(dir.file("t1.txt")).empty();

  bool pass = ok1 && ok2 && identical && ok3 && ok4 && thread_stable;
  std::ostringstream detail;
  detail << "init reruns byte-identical: " << (identical ? "yes" : "NO")
         << "; eval output thread-count invariant: "
         << (thread_stable ? "yes" : "NO");
  report("determinism", pass, detail.str());
}

}  // namespace

int main() {
  space_cardinality();
  link_ppmi_zero_point();
  oracle_agreement();
  quantifier_oracle();
  idempotent_conditioning();
  metric_correctness();
  end_to_end_micro_world();
  determinism();
  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
