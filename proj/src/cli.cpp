#include "fds/cli.hpp"

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "fds/corpus.hpp"
#include "fds/error.hpp"
#include "fds/inference.hpp"
#include "fds/init.hpp"
#include "fds/model.hpp"
#include "fds/quantifier.hpp"
#include "fds/tasks.hpp"
#include "json.hpp"

namespace fds {

namespace {

using nlohmann::json;

struct RunConfig {
  // init / synth
  std::string corpus_path;
  std::string world_path;
  std::string out_path;
  int dim = 100;
  int card = 10;
  std::uint64_t seed = 0;
  int min_count = kDefaultMinCount;
  double scale = 1.0;
  double target_truth = 0.5;
  std::size_t n = 10000;

  // shared
  std::string model_path;
  double tolerance = 1e-4;
  int max_iters = 50;
  double cap = kEnumerationCap;
  int threads = static_cast<int>(std::thread::hardware_concurrency());

  // infer / quant
  std::string graph_path;
  std::string tree_path;
  std::string query;
  bool exact = false;
  bool q_trace = false;
  double many_theta = kDefaultManyTheta;
  double few_theta = kDefaultFewTheta;
  double fuzzy_tau = kDefaultFuzzyTau;

  // eval
  std::string data_path;
  std::string embeddings_path;
  double alpha = 0.5;
  bool json_output = false;
  std::string role = "noun";
};

std::ostream& result() { return std::cout; }
std::ostream& diag() { return std::cerr; }

void print_probability(double p) {
  result() << std::setprecision(17) << p << "\n";
}

// `pred@node`, e.g. dog_n@x.
std::pair<std::string, std::string> split_query(const std::string& query) {
  std::size_t at = query.rfind('@');
  if (at == std::string::npos || at == 0 || at + 1 == query.size()) {
    raise(ErrorKind::Query, "query must look like pred@node: " + query);
  }
  return {query.substr(0, at), query.substr(at + 1)};
}

PredicateId resolve_query_pred(const SituationGraph& graph,
                               const Vocabulary& vocab,
                               const std::string& form,
                               const std::string& node) {
  auto index = graph.node_index(node);
  if (!index) raise(ErrorKind::Query, "unknown node id: " + node);
  Role implied = Role::Noun;
  for (const GraphLink& l : graph.links()) {
    if (l.source == *index) implied = Role::Verb;
  }
  auto id = vocab.resolve(form, implied);
  if (!id) raise(ErrorKind::Vocab, "unknown predicate: " + form);
  return *id;
}

int cmd_init(const RunConfig& config) {
  diag() << "loading corpus " << config.corpus_path << "\n";
  TripleCorpus corpus = load_triples(config.corpus_path, config.min_count);
  diag() << "loaded " << corpus.triples.size() << " triples, vocabulary "
         << corpus.vocab.size() << "\n";
  InitParams params;
  params.config = SpaceConfig{config.dim, config.card};
  params.seed = config.seed;
  params.scale = config.scale;
  params.target_truth = config.target_truth;
  params.mf = MeanFieldOptions{config.tolerance, config.max_iters};
  InitResult fitted = init_model(corpus, params);
  for (const std::string& w : fitted.warnings) diag() << "warning: " << w << "\n";
  save_model(fitted.model, config.out_path);
  diag() << "wrote " << config.out_path << "\n";
  result() << "vocab=" << fitted.model.vocab.size() << " dim=" << config.dim
           << " card=" << config.card << " seed=" << config.seed << "\n";
  return 0;
}

int cmd_synth(const RunConfig& config) {
  MicroWorld world = load_world(config.world_path);
  TripleCorpus corpus = generate_synthetic_corpus(world, config.seed, config.n);
  save_triples(config.out_path, corpus.triples, corpus.vocab);
  diag() << "wrote " << corpus.triples.size() << " triples to "
         << config.out_path << "\n";
  result() << "triples=" << corpus.triples.size()
           << " vocab=" << corpus.vocab.size() << " seed=" << config.seed
           << "\n";
  return 0;
}

int cmd_infer(const RunConfig& config) {
  FdsModel model = load_model(config.model_path);
  SituationGraph graph = load_graph(config.graph_path, model.vocab);
  auto [form, node] = split_query(config.query);
  PredicateId pred = resolve_query_pred(graph, model.vocab, form, node);
  auto observations = graph_observations(graph);
  Observation query{node, pred};
  double p;
  if (config.exact) {
    p = exact_conditional_truth(model, graph, observations, query, config.cap);
  } else {
    MeanFieldOptions opts{config.tolerance, config.max_iters};
    MeanFieldResult mf = mean_field(model, graph, observations, opts);
    if (!mf.converged) {
      diag() << "warning: mean field not converged after " << mf.iterations
             << " iterations (max delta " << mf.max_delta << ")\n";
    }
    p = truth_probability_mf(model.function(pred), mf.at(graph, node));
  }
  print_probability(p);
  return 0;
}

int cmd_quant(const RunConfig& config) {
  FdsModel model = load_model(config.model_path);
  ScopedQuery query = parse_scope_tree(config.tree_path, model.vocab);
  std::vector<QTraceEntry> trace;
  double p = evaluate(model, query, config.cap,
                      config.q_trace ? &trace : nullptr);
  if (config.q_trace) {
    for (const QTraceEntry& entry : trace) {
      diag() << "q[" << entry.var << "] = " << std::setprecision(17)
             << entry.q << "\n";
    }
  }
  print_probability(p);
  return 0;
}

EvalOptions make_eval_options(const RunConfig& config,
                              const ExternalEmbeddings* embeddings) {
  EvalOptions opts;
  opts.mf = MeanFieldOptions{config.tolerance, config.max_iters};
  opts.threads = config.threads > 0 ? config.threads : 1;
  opts.embeddings = embeddings;
  opts.alpha = config.alpha;
  opts.role = config.role == "verb" ? Role::Verb : Role::Noun;
  return opts;
}

void report_similarity(const char* task, const SimilarityReport& report,
                       bool as_json) {
  if (as_json) {
    json out{{"task", task},
             {"metric", report.metric},
             {"coverage", report.coverage},
             {"n", report.n},
             {"total", report.total}};
    result() << out.dump() << "\n";
    return;
  }
  result() << std::left << std::setw(10) << task << " spearman "
           << std::setprecision(6) << std::fixed << report.metric
           << "  coverage " << report.n << "/" << report.total << " ("
           << std::setprecision(1) << 100.0 * report.coverage << "%)\n"
           << std::defaultfloat;
}

int cmd_eval(const RunConfig& config, const std::string& task) {
  FdsModel model = load_model(config.model_path);
  ExternalEmbeddings embeddings;
  const ExternalEmbeddings* embeddings_ptr = nullptr;
  if (!config.embeddings_path.empty()) {
    embeddings = load_embeddings(config.embeddings_path);
    embeddings_ptr = &embeddings;
  }
  EvalOptions opts = make_eval_options(config, embeddings_ptr);
  if (task == "eval-sim") {
    report_similarity("eval-sim",
                      eval_similarity_file(model, config.data_path, opts),
                      config.json_output);
  } else if (task == "eval-svo") {
    report_similarity("eval-svo", eval_svo_file(model, config.data_path, opts),
                      config.json_output);
  } else {
    RelpronReport report = eval_relpron_file(model, config.data_path, opts);
    if (config.json_output) {
      json per_term = json::array();
      for (const auto& [term, ap] : report.per_term) {
        per_term.push_back({{"term", term}, {"ap", ap}});
      }
      json out{{"task", "eval-relpron"},
               {"metric", report.metric},
               {"coverage", report.coverage},
               {"n", report.n},
               {"total", report.total},
               {"per_term", per_term}};
      result() << out.dump() << "\n";
    } else {
      result() << "eval-relpron MAP " << std::setprecision(6) << std::fixed
               << report.metric << "  coverage " << report.n << "/"
               << report.total << " (" << std::setprecision(1)
               << 100.0 * report.coverage << "%)\n";
      for (const auto& [term, ap] : report.per_term) {
        result() << "  " << std::left << std::setw(20) << term << " AP "
                 << std::setprecision(6) << std::fixed << ap << "\n";
      }
      result() << std::defaultfloat;
    }
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  RunConfig config;
  CLI::App app{"Functional distributional semantics toolkit"};
  app.require_subcommand(1);

  CLI::App* init = app.add_subcommand(
      "init", "Fit a model from a triples corpus and write it as JSON");
  init->add_option("--corpus", config.corpus_path, "triples TSV")->required();
  init->add_option("--out", config.out_path, "output model path")->required();
  init->add_option("--dim", config.dim, "space dimensions D");
  init->add_option("--card", config.card, "active dimensions C");
  init->add_option("--seed", config.seed, "projection seed");
  init->add_option("--min-count", config.min_count, "vocabulary threshold");
  init->add_option("--scale", config.scale, "PPMI weight scale");
  init->add_option("--target-truth", config.target_truth,
                   "truth probability at the uniform mean field");
  init->add_option("--tolerance", config.tolerance, "mean field tolerance");
  init->add_option("--max-iters", config.max_iters, "mean field iteration cap");

  CLI::App* synth = app.add_subcommand(
      "synth", "Sample a synthetic corpus from a micro-world description");
  synth->add_option("--world", config.world_path, "micro-world JSON")->required();
  synth->add_option("--out", config.out_path, "output TSV path")->required();
  synth->add_option("--n", config.n, "number of triples");
  synth->add_option("--seed", config.seed, "sampling seed");

  CLI::App* infer = app.add_subcommand(
      "infer", "Conditional truth probability of a predicate on a graph node");
  infer->add_option("--model", config.model_path, "model JSON")->required();
  infer->add_option("--graph", config.graph_path, "situation graph JSON")
      ->required();
  infer->add_option("--query", config.query, "pred@node")->required();
  infer->add_flag("--exact", config.exact,
                  "exhaustive enumeration instead of mean field");
  infer->add_option("--cap", config.cap, "enumeration cap for --exact");
  infer->add_option("--tolerance", config.tolerance, "mean field tolerance");
  infer->add_option("--max-iters", config.max_iters, "mean field iteration cap");

  CLI::App* quant = app.add_subcommand(
      "quant", "Evaluate a fully scoped quantifier tree");
  quant->add_option("--model", config.model_path, "model JSON")->required();
  quant->add_option("--tree", config.tree_path, "scope tree JSON")->required();
  quant->add_flag("--q-trace", config.q_trace,
                  "print every quantifier's q value to stderr");
  quant->add_option("--cap", config.cap, "enumeration cap");

  const char* eval_names[] = {"eval-sim", "eval-svo", "eval-relpron"};
  const char* eval_help[] = {
      "Lexical similarity against a word1/word2/gold TSV",
      "Contextual verb similarity against an SVO-comparison TSV",
      "Property retrieval against a RELPRON-style TSV"};
  for (int i = 0; i < 3; ++i) {
    CLI::App* cmd = app.add_subcommand(eval_names[i], eval_help[i]);
    cmd->add_option("--model", config.model_path, "model JSON")->required();
    cmd->add_option("--data", config.data_path, "dataset TSV")->required();
    cmd->add_option("--embeddings", config.embeddings_path,
                    "external word vectors; enables the ensemble");
    cmd->add_option("--alpha", config.alpha, "ensemble weight on the model");
    cmd->add_option("--threads", config.threads, "evaluation parallelism");
    cmd->add_option("--tolerance", config.tolerance, "mean field tolerance");
    cmd->add_option("--max-iters", config.max_iters,
                    "mean field iteration cap");
    cmd->add_flag("--json", config.json_output, "machine-readable report");
    if (i == 0) {
      cmd->add_option("--role", config.role, "noun or verb namespace")
          ->check(CLI::IsMember({"noun", "verb"}));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (init->parsed()) return cmd_init(config);
    if (synth->parsed()) return cmd_synth(config);
    if (infer->parsed()) return cmd_infer(config);
    if (quant->parsed()) return cmd_quant(config);
    for (const char* name : eval_names) {
      if (app.get_subcommand(name)->parsed()) return cmd_eval(config, name);
    }
  } catch (const Error& e) {
    diag() << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    diag() << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace fds
