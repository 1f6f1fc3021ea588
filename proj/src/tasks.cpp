#include "fds/tasks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "fds/error.hpp"
#include "fds/util.hpp"

namespace fds {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

double parse_gold(const std::string& token, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(token, &used);
    if (used != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    raise(ErrorKind::Parse, where + ": bad numeric score '" + token + "'");
  }
}

// Reads non-comment lines of a TSV file with a fixed field count.
std::vector<std::vector<std::string>> read_tsv(const std::string& path,
                                               std::size_t fields) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open dataset: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> row = split_tabs(line);
    if (row.size() != fields) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": expected " << fields
          << " tab-separated fields, got " << row.size();
      raise(ErrorKind::Parse, msg.str());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// Index-parallel map with deterministic result placement. Worker count
// never changes the output, only the wall time.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int count = std::min<int>(threads, static_cast<int>(n));
  pool.reserve(count);
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&xs](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = xs[i] - mean_x;
    double dy = ys[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    raise(ErrorKind::Metric, "correlation undefined: zero variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

SituationGraph property_graph(const RelpronProperty& property) {
  SvoTriple triple;
  triple.verb = property.verb;
  if (property.kind == ClauseKind::Subject) {
    triple.subject = property.hypernym;
    triple.object = property.argument;
  } else {
    triple.subject = property.argument;
    triple.object = property.hypernym;
  }
  return triple_to_graph(triple);
}

const char* hypernym_node(const RelpronProperty& property) {
  return property.kind == ClauseKind::Subject ? "x" : "z";
}

std::vector<double> embedding_sum(const ExternalEmbeddings& e,
                                  std::span<const std::string> words) {
  std::vector<double> acc(e.dim(), 0.0);
  for (const std::string& w : words) {
    const std::vector<double>* v = e.find(w);
    for (int i = 0; i < e.dim(); ++i) acc[i] += (*v)[i];
  }
  return acc;
}

double cosine_vec(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    raise(ErrorKind::Metric, "cosine undefined for zero-norm vector");
  }
  return dot / std::sqrt(na * nb);
}

}  // namespace

double lexical_similarity(const FdsModel& model, PredicateId a, PredicateId b,
                          const MeanFieldOptions& opts) {
  auto direction = [&](PredicateId observed, PredicateId queried) {
    SituationGraph graph({GraphNode{"x", observed}}, {});
    auto obs = graph_observations(graph);
    return conditional_truth_mf(model, graph, obs, Observation{"x", queried},
                                opts);
  };
  return direction(b, a) * direction(a, b);
}

double contextual_verb_similarity(const FdsModel& model,
                                  const SvoComparison& cmp,
                                  const MeanFieldOptions& opts) {
  auto direction = [&](PredicateId observed_verb, PredicateId other_verb) {
    SvoTriple triple{cmp.subject, observed_verb, cmp.object};
    SituationGraph graph = triple_to_graph(triple);
    auto obs = graph_observations(graph);
    MeanFieldResult mf = mean_field(model, graph, obs, opts);
    return truth_probability_mf(model.function(other_verb),
                                mf.at(graph, "y"));
  };
  return direction(cmp.verb1, cmp.verb2) * direction(cmp.verb2, cmp.verb1);
}

double relpron_property_score(const FdsModel& model, PredicateId term,
                              const RelpronProperty& property,
                              const MeanFieldOptions& opts) {
  SituationGraph graph = property_graph(property);
  auto obs = graph_observations(graph);
  MeanFieldResult mf = mean_field(model, graph, obs, opts);
  return truth_probability_mf(model.function(term),
                              mf.at(graph, hypernym_node(property)));
}

std::vector<RankedProperty> relpron_rank(
    const FdsModel& model, PredicateId term,
    std::span<const RelpronProperty> properties,
    const MeanFieldOptions& opts) {
  std::vector<RankedProperty> ranked;
  ranked.reserve(properties.size());
  for (std::size_t i = 0; i < properties.size(); ++i) {
    ranked.push_back(
        RankedProperty{i, relpron_property_score(model, term, properties[i], opts)});
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedProperty& a, const RankedProperty& b) {
                     return a.score > b.score;
                   });
  return ranked;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    raise(ErrorKind::Metric, "spearman inputs differ in length");
  }
  if (xs.empty()) {
    raise(ErrorKind::Metric, "spearman undefined on empty input");
  }
  std::vector<double> rx = average_ranks(xs);
  std::vector<double> ry = average_ranks(ys);
  return pearson(rx, ry);
}

double mean_average_precision(
    const std::vector<std::vector<std::size_t>>& rankings,
    const std::vector<std::unordered_set<std::size_t>>& gold) {
  if (rankings.size() != gold.size()) {
    raise(ErrorKind::Metric, "rankings and gold sets differ in length");
  }
  if (rankings.empty()) {
    raise(ErrorKind::Metric, "MAP undefined with no queries");
  }
  double sum_ap = 0.0;
  for (std::size_t t = 0; t < rankings.size(); ++t) {
    if (gold[t].empty()) {
      raise(ErrorKind::Metric,
            "empty gold set for query " + std::to_string(t));
    }
    double hits = 0.0;
    double ap = 0.0;
    for (std::size_t rank = 0; rank < rankings[t].size(); ++rank) {
      if (gold[t].count(rankings[t][rank])) {
        hits += 1.0;
        ap += hits / static_cast<double>(rank + 1);
      }
    }
    sum_ap += ap / static_cast<double>(gold[t].size());
  }
  return sum_ap / static_cast<double>(rankings.size());
}

ExternalEmbeddings ExternalEmbeddings::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open embeddings: " + path);
  ExternalEmbeddings e;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (row >> tok) tokens.push_back(tok);
    if (first) {
      first = false;
      // Optional `count dim` header.
      if (tokens.size() == 2 &&
          tokens[0].find_first_not_of("0123456789") == std::string::npos &&
          tokens[1].find_first_not_of("0123456789") == std::string::npos) {
        continue;
      }
    }
    if (tokens.size() < 2) {
      raise(ErrorKind::Parse, path + ":" + std::to_string(lineno) +
                                  ": embedding line needs a word and values");
    }
    std::vector<double> values;
    values.reserve(tokens.size() - 1);
    for (std::size_t i = 1; i < tokens.size(); ++i) {
      values.push_back(parse_gold(tokens[i],
                                  path + ":" + std::to_string(lineno)));
    }
    if (e.dim_ == 0) {
      e.dim_ = static_cast<int>(values.size());
    } else if (static_cast<int>(values.size()) != e.dim_) {
      raise(ErrorKind::Parse,
            path + ":" + std::to_string(lineno) +
                ": inconsistent embedding dimensionality");
    }
    double norm = 0.0;
    for (double v : values) norm += v * v;
    if (norm == 0.0) {
      raise(ErrorKind::Parse, path + ":" + std::to_string(lineno) +
                                  ": zero-norm vector for " + tokens[0]);
    }
    e.vectors_[tokens[0]] = std::move(values);
  }
  if (e.vectors_.empty()) {
    raise(ErrorKind::Parse, "no vectors in embeddings file: " + path);
  }
  return e;
}

const std::vector<double>* ExternalEmbeddings::find(
    const std::string& word) const {
  auto it = vectors_.find(word);
  return it == vectors_.end() ? nullptr : &it->second;
}

ExternalEmbeddings load_embeddings(const std::string& path) {
  return ExternalEmbeddings::load(path);
}

double cosine(const ExternalEmbeddings& embeddings, const std::string& w1,
              const std::string& w2) {
  const std::vector<double>* a = embeddings.find(w1);
  const std::vector<double>* b = embeddings.find(w2);
  if (!a) raise(ErrorKind::Vocab, "no embedding for: " + w1);
  if (!b) raise(ErrorKind::Vocab, "no embedding for: " + w2);
  return cosine_vec(*a, *b);
}

std::vector<double> ensemble_score(std::span<const double> scores_a,
                                   std::span<const double> scores_b,
                                   double alpha) {
  if (scores_a.size() != scores_b.size()) {
    raise(ErrorKind::Metric, "ensemble inputs differ in length");
  }
  const std::size_t n = scores_a.size();
  if (n == 0) raise(ErrorKind::Metric, "ensemble undefined on empty input");
  auto zscores = [n](std::span<const double> xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n);
    if (var == 0.0) {
      raise(ErrorKind::Metric, "ensemble undefined: zero score variance");
    }
    double sd = std::sqrt(var);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (xs[i] - mean) / sd;
    return z;
  };
  std::vector<double> za = zscores(scores_a);
  std::vector<double> zb = zscores(scores_b);
  std::vector<double> combined(n);
  for (std::size_t i = 0; i < n; ++i) {
    combined[i] = alpha * za[i] + (1.0 - alpha) * zb[i];
  }
  return combined;
}

SimilarityReport eval_similarity_file(const FdsModel& model,
                                      const std::string& path,
                                      const EvalOptions& opts) {
  auto rows = read_tsv(path, 3);
  struct Item {
    PredicateId a, b;
    const std::string* wa;
    const std::string* wb;
    double gold;
  };
  std::vector<Item> items;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto a = model.vocab.resolve(rows[r][0], opts.role);
    auto b = model.vocab.resolve(rows[r][1], opts.role);
    if (!a || !b) continue;
    if (opts.embeddings &&
        (!opts.embeddings->find(rows[r][0]) || !opts.embeddings->find(rows[r][1]))) {
      continue;
    }
    items.push_back(Item{*a, *b, &rows[r][0], &rows[r][1],
                         parse_gold(rows[r][2], path)});
  }
  SimilarityReport report;
  report.total = rows.size();
  report.n = items.size();
  report.coverage =
      rows.empty() ? 0.0
                   : static_cast<double>(items.size()) / rows.size();
  if (items.empty()) {
    raise(ErrorKind::EmptyCorpus, "no scorable pairs in " + path);
  }
  std::vector<double> scores(items.size());
  std::vector<double> gold(items.size());
  parallel_for(items.size(), opts.threads, [&](std::size_t i) {
    scores[i] = lexical_similarity(model, items[i].a, items[i].b, opts.mf);
    gold[i] = items[i].gold;
  });
  if (opts.embeddings) {
    std::vector<double> emb(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      emb[i] = cosine(*opts.embeddings, *items[i].wa, *items[i].wb);
    }
    scores = ensemble_score(scores, emb, opts.alpha);
  }
  report.metric = spearman(scores, gold);
  return report;
}

SimilarityReport eval_svo_file(const FdsModel& model, const std::string& path,
                               const EvalOptions& opts) {
  auto rows = read_tsv(path, 5);
  struct Item {
    SvoComparison cmp;
    const std::vector<std::string>* row;
  };
  std::vector<Item> items;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto subject = model.vocab.find(rows[r][0], Role::Noun);
    auto verb1 = model.vocab.find(rows[r][1], Role::Verb);
    auto object = model.vocab.find(rows[r][2], Role::Noun);
    auto verb2 = model.vocab.find(rows[r][3], Role::Verb);
    if (!subject || !verb1 || !object || !verb2) continue;
    if (opts.embeddings) {
      bool have_all = true;
      for (int c = 0; c < 4; ++c) {
        if (!opts.embeddings->find(rows[r][c])) have_all = false;
      }
      if (!have_all) continue;
    }
    SvoComparison cmp;
    cmp.subject = *subject;
    cmp.verb1 = *verb1;
    cmp.object = *object;
    cmp.verb2 = *verb2;
    cmp.gold = parse_gold(rows[r][4], path);
    items.push_back(Item{cmp, &rows[r]});
  }
  SimilarityReport report;
  report.total = rows.size();
  report.n = items.size();
  report.coverage =
      rows.empty() ? 0.0
                   : static_cast<double>(items.size()) / rows.size();
  if (items.empty()) {
    raise(ErrorKind::EmptyCorpus, "no scorable comparisons in " + path);
  }
  std::vector<double> scores(items.size());
  std::vector<double> gold(items.size());
  parallel_for(items.size(), opts.threads, [&](std::size_t i) {
    scores[i] = contextual_verb_similarity(model, items[i].cmp, opts.mf);
    gold[i] = items[i].cmp.gold;
  });
  if (opts.embeddings) {
    std::vector<double> emb(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& row = *items[i].row;
      std::vector<std::string> left{row[0], row[1], row[2]};
      std::vector<std::string> right{row[0], row[3], row[2]};
      emb[i] = cosine_vec(embedding_sum(*opts.embeddings, left),
                          embedding_sum(*opts.embeddings, right));
    }
    scores = ensemble_score(scores, emb, opts.alpha);
  }
  report.metric = spearman(scores, gold);
  return report;
}

RelpronReport eval_relpron_file(const FdsModel& model, const std::string& path,
                                const EvalOptions& opts) {
  auto rows = read_tsv(path, 5);
  struct Item {
    RelpronProperty property;
    std::string term_form;
    const std::vector<std::string>* row;
  };
  std::vector<Item> pool;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row[1] != "SBJ" && row[1] != "OBJ") {
      raise(ErrorKind::Parse,
            path + ": clause kind must be SBJ or OBJ, got '" + row[1] + "'");
    }
    auto term = model.vocab.find(row[0], Role::Noun);
    auto hypernym = model.vocab.find(row[2], Role::Noun);
    auto verb = model.vocab.find(row[3], Role::Verb);
    auto argument = model.vocab.find(row[4], Role::Noun);
    if (!term || !hypernym || !verb || !argument) continue;
    if (opts.embeddings) {
      bool have_all = opts.embeddings->find(row[0]) &&
                      opts.embeddings->find(row[2]) &&
                      opts.embeddings->find(row[3]) &&
                      opts.embeddings->find(row[4]);
      if (!have_all) continue;
    }
    Item item;
    item.property.term = *term;
    item.property.kind =
        row[1] == "SBJ" ? ClauseKind::Subject : ClauseKind::Object;
    item.property.hypernym = *hypernym;
    item.property.verb = *verb;
    item.property.argument = *argument;
    item.term_form = row[0];
    item.row = &rows[r];
    pool.push_back(std::move(item));
  }
  RelpronReport report;
  report.total = rows.size();
  report.n = pool.size();
  report.coverage =
      rows.empty() ? 0.0 : static_cast<double>(pool.size()) / rows.size();
  if (pool.empty()) {
    raise(ErrorKind::EmptyCorpus, "no scorable properties in " + path);
  }

  // The property mean fields do not depend on the term, so compute each
  // hypernym-node field once.
  std::vector<MeanFieldVector> fields(pool.size());
  parallel_for(pool.size(), opts.threads, [&](std::size_t i) {
    SituationGraph graph = property_graph(pool[i].property);
    auto obs = graph_observations(graph);
    MeanFieldResult mf = mean_field(model, graph, obs, opts.mf);
    fields[i] = mf.at(graph, hypernym_node(pool[i].property));
  });

  // Distinct terms in file order.
  std::vector<std::pair<std::string, PredicateId>> terms;
  for (const Item& item : pool) {
    bool seen = false;
    for (const auto& t : terms) {
      if (t.second == item.property.term) seen = true;
    }
    if (!seen) terms.emplace_back(item.term_form, item.property.term);
  }

  std::vector<std::vector<std::size_t>> rankings(terms.size());
  std::vector<std::unordered_set<std::size_t>> gold(terms.size());
  for (std::size_t t = 0; t < terms.size(); ++t) {
    std::vector<double> scores(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
      scores[i] = truth_probability_mf(model.function(terms[t].second),
                                       fields[i]);
    }
    if (opts.embeddings) {
      std::vector<double> emb(pool.size());
      const std::vector<double>* term_vec =
          opts.embeddings->find(terms[t].first);
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto& row = *pool[i].row;
        std::vector<std::string> words{row[2], row[3], row[4]};
        emb[i] = cosine_vec(*term_vec,
                            embedding_sum(*opts.embeddings, words));
      }
      scores = ensemble_score(scores, emb, opts.alpha);
    }
    std::vector<std::size_t> order(pool.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&scores](std::size_t a, std::size_t b) {
                       return scores[a] > scores[b];
                     });
    rankings[t] = std::move(order);
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].property.term == terms[t].second) gold[t].insert(i);
    }
  }
  report.metric = mean_average_precision(rankings, gold);
  for (std::size_t t = 0; t < terms.size(); ++t) {
    double ap = mean_average_precision({rankings[t]}, {gold[t]});
    report.per_term.emplace_back(terms[t].first, ap);
  }
  return report;
}

}  // namespace fds
