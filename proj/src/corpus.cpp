#include "fds/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include "fds/error.hpp"
#include "fds/util.hpp"
#include "json.hpp"

namespace fds {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::Io, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

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

struct RawTriple {
  std::string subject;  // empty = absent
  std::string verb;
  std::string object;
};

// Shared TSV scan: syntax checks only, no vocabulary decisions.
std::vector<RawTriple> scan_triples(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorKind::Io, "cannot open corpus: " + path);
  std::vector<RawTriple> raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != 3) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": expected 3 tab-separated fields, got "
          << fields.size();
      raise(ErrorKind::Parse, msg.str());
    }
    RawTriple t;
    t.subject = fields[0] == "_" ? "" : fields[0];
    t.verb = fields[1] == "_" ? "" : fields[1];
    t.object = fields[2] == "_" ? "" : fields[2];
    if (t.verb.empty()) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": verb field is absent";
      raise(ErrorKind::Parse, msg.str());
    }
    if (t.subject.empty() && t.object.empty()) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": both arguments absent";
      raise(ErrorKind::Parse, msg.str());
    }
    raw.push_back(std::move(t));
  }
  return raw;
}

// Resolves raw triples against an id-assigning callback; tokens the
// callback rejects behave like filtered ones.
template <typename Resolve>
std::vector<SvoTriple> assemble_triples(const std::vector<RawTriple>& raw,
                                        Resolve&& resolve) {
  std::vector<SvoTriple> out;
  for (const RawTriple& t : raw) {
    std::optional<PredicateId> verb = resolve(t.verb, Role::Verb);
    if (!verb) continue;
    std::optional<PredicateId> subject, object;
    if (!t.subject.empty()) subject = resolve(t.subject, Role::Noun);
    if (!t.object.empty()) object = resolve(t.object, Role::Noun);
    if (!subject && !object) continue;
    out.push_back(SvoTriple{subject, *verb, object});
  }
  return out;
}

Role implied_role(const json& node_json, const json& links_json) {
  // A node that heads any link is an event, hence a verb predicate.
  const std::string id = node_json.at("id").get<std::string>();
  for (const auto& l : links_json) {
    if (l.at("from").get<std::string>() == id) return Role::Verb;
  }
  return Role::Noun;
}

}  // namespace

const char* role_name(Role role) {
  return role == Role::Noun ? "noun" : "verb";
}

const char* link_label_name(LinkLabel label) {
  return label == LinkLabel::Arg1 ? "ARG1" : "ARG2";
}

PredicateId Vocabulary::add(std::string form, Role role, std::uint64_t count) {
  auto& lookup = role == Role::Noun ? noun_lookup_ : verb_lookup_;
  if (lookup.count(form)) {
    raise(ErrorKind::Vocab,
          "duplicate vocabulary entry: " + form + " (" + role_name(role) + ")");
  }
  std::uint32_t index = static_cast<std::uint32_t>(entries_.size());
  lookup.emplace(form, index);
  entries_.push_back(VocabEntry{std::move(form), role, count});
  return PredicateId{index, role};
}

std::optional<PredicateId> Vocabulary::find(std::string_view form,
                                            Role role) const {
  const auto& lookup = role == Role::Noun ? noun_lookup_ : verb_lookup_;
  auto it = lookup.find(std::string(form));
  if (it == lookup.end()) return std::nullopt;
  return PredicateId{it->second, role};
}

std::optional<PredicateId> Vocabulary::resolve(std::string_view form,
                                               Role preferred) const {
  if (auto id = find(form, preferred)) return id;
  return find(form, preferred == Role::Noun ? Role::Verb : Role::Noun);
}

const VocabEntry& Vocabulary::entry(PredicateId id) const {
  if (id.index >= entries_.size()) {
    raise(ErrorKind::Vocab,
          "predicate index " + std::to_string(id.index) + " out of range");
  }
  return entries_[id.index];
}

SituationGraph::SituationGraph(std::vector<GraphNode> nodes,
                               std::vector<GraphLink> links)
    : nodes_(std::move(nodes)), links_(std::move(links)) {
  if (nodes_.empty()) raise(ErrorKind::Structure, "graph has no nodes");
  for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i].id, i).second) {
      raise(ErrorKind::Structure, "duplicate node id: " + nodes_[i].id);
    }
  }
  std::set<std::tuple<std::uint32_t, std::uint32_t, LinkLabel>> seen;
  for (const GraphLink& l : links_) {
    if (l.source >= nodes_.size() || l.target >= nodes_.size()) {
      raise(ErrorKind::Structure, "link endpoint out of range");
    }
    if (!seen.insert({l.source, l.target, l.label}).second) {
      raise(ErrorKind::Structure,
            std::string("duplicate link ") + nodes_[l.source].id + "->" +
                nodes_[l.target].id + ":" + link_label_name(l.label));
    }
  }
  // Connectivity over the undirected skeleton.
  std::vector<char> visited(nodes_.size(), 0);
  std::queue<std::uint32_t> frontier;
  frontier.push(0);
  visited[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    std::uint32_t at = frontier.front();
    frontier.pop();
    for (const GraphLink& l : links_) {
      std::uint32_t other;
      if (l.source == at)
        other = l.target;
      else if (l.target == at)
        other = l.source;
      else
        continue;
      if (!visited[other]) {
        visited[other] = 1;
        ++reached;
        frontier.push(other);
      }
    }
  }
  if (reached != nodes_.size()) {
    raise(ErrorKind::Structure, "graph is not connected");
  }
}

std::optional<std::uint32_t> SituationGraph::node_index(
    std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TripleCorpus load_triples(const std::string& path, int min_count) {
  std::vector<RawTriple> raw = scan_triples(path);

  // Corpus counts per (form, role).
  std::map<std::pair<std::string, int>, std::uint64_t> counts;
  auto bump = [&counts](const std::string& form, Role role) {
    if (!form.empty()) ++counts[{form, static_cast<int>(role)}];
  };
  for (const RawTriple& t : raw) {
    bump(t.subject, Role::Noun);
    bump(t.verb, Role::Verb);
    bump(t.object, Role::Noun);
  }

  auto surviving = [&](const std::string& form, Role role) {
    auto it = counts.find({form, static_cast<int>(role)});
    return it != counts.end() &&
           it->second >= static_cast<std::uint64_t>(min_count);
  };

  // Vocabulary ids in first-appearance order, restricted to tokens that
  // still occur in at least one surviving triple.
  TripleCorpus corpus;
  auto intern = [&](const std::string& form, Role role) {
    if (auto id = corpus.vocab.find(form, role)) return *id;
    return corpus.vocab.add(form, role,
                            counts.at({form, static_cast<int>(role)}));
  };
  corpus.triples = assemble_triples(
      raw, [&](const std::string& form, Role role) -> std::optional<PredicateId> {
        if (!surviving(form, role)) return std::nullopt;
        return intern(form, role);
      });
  if (corpus.triples.empty()) {
    raise(ErrorKind::EmptyCorpus,
          "no usable triples in " + path + " after min-count " +
              std::to_string(min_count) + " filtering");
  }
  return corpus;
}

std::vector<SvoTriple> load_triples(const std::string& path,
                                    const Vocabulary& vocab) {
  std::vector<RawTriple> raw = scan_triples(path);
  std::vector<SvoTriple> triples = assemble_triples(
      raw, [&vocab](const std::string& form, Role role) {
        return vocab.find(form, role);
      });
  if (triples.empty()) {
    raise(ErrorKind::EmptyCorpus,
          "no usable triples in " + path + " under the given vocabulary");
  }
  return triples;
}

void save_triples(const std::string& path,
                  const std::vector<SvoTriple>& triples,
                  const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::Io, "cannot write: " + path);
  for (const SvoTriple& t : triples) {
    out << (t.subject ? vocab.form(*t.subject) : "_") << '\t'
        << vocab.form(t.verb) << '\t'
        << (t.object ? vocab.form(*t.object) : "_") << '\n';
  }
  if (!out) raise(ErrorKind::Io, "write failed: " + path);
}

SituationGraph triple_to_graph(const SvoTriple& triple) {
  std::vector<GraphNode> nodes;
  std::vector<GraphLink> links;
  std::uint32_t subject_index = 0, verb_index = 0;
  if (triple.subject) {
    nodes.push_back(GraphNode{"x", triple.subject});
    subject_index = 0;
  }
  verb_index = static_cast<std::uint32_t>(nodes.size());
  nodes.push_back(GraphNode{"y", triple.verb});
  if (triple.subject) {
    links.push_back(GraphLink{verb_index, subject_index, LinkLabel::Arg1});
  }
  if (triple.object) {
    std::uint32_t object_index = static_cast<std::uint32_t>(nodes.size());
    nodes.push_back(GraphNode{"z", triple.object});
    links.push_back(GraphLink{verb_index, object_index, LinkLabel::Arg2});
  }
  return SituationGraph(std::move(nodes), std::move(links));
}

SituationGraph parse_graph_json(const std::string& text,
                                const Vocabulary& vocab) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorKind::Parse, std::string("bad graph JSON: ") + e.what());
  }
  try {
    const json& nodes_json = doc.at("nodes");
    const json& links_json = doc.at("links");
    std::vector<GraphNode> nodes;
    std::map<std::string, std::uint32_t> by_id;
    for (const json& n : nodes_json) {
      GraphNode node;
      node.id = n.at("id").get<std::string>();
      if (n.contains("pred") && !n.at("pred").is_null()) {
        std::string form = n.at("pred").get<std::string>();
        auto id = vocab.resolve(form, implied_role(n, links_json));
        if (!id) {
          raise(ErrorKind::Vocab, "unknown predicate: " + form);
        }
        node.pred = *id;
      }
      by_id.emplace(node.id, static_cast<std::uint32_t>(nodes.size()));
      nodes.push_back(std::move(node));
    }
    std::vector<GraphLink> links;
    for (const json& l : links_json) {
      GraphLink link;
      std::string from = l.at("from").get<std::string>();
      std::string to = l.at("to").get<std::string>();
      auto fi = by_id.find(from);
      auto ti = by_id.find(to);
      if (fi == by_id.end() || ti == by_id.end()) {
        raise(ErrorKind::Structure,
              "link endpoint refers to missing node: " +
                  (fi == by_id.end() ? from : to));
      }
      link.source = fi->second;
      link.target = ti->second;
      std::string label = l.at("label").get<std::string>();
      if (label == "ARG1")
        link.label = LinkLabel::Arg1;
      else if (label == "ARG2")
        link.label = LinkLabel::Arg2;
      else
        raise(ErrorKind::Parse, "unknown link label: " + label);
      links.push_back(link);
    }
    return SituationGraph(std::move(nodes), std::move(links));
  } catch (const json::exception& e) {
    raise(ErrorKind::Parse, std::string("bad graph JSON: ") + e.what());
  }
}

SituationGraph load_graph(const std::string& path, const Vocabulary& vocab) {
  return parse_graph_json(read_file(path), vocab);
}

std::string graph_to_json(const SituationGraph& graph,
                          const Vocabulary& vocab) {
  json nodes = json::array();
  for (const GraphNode& n : graph.nodes()) {
    json node;
    node["id"] = n.id;
    node["pred"] = n.pred ? json(vocab.form(*n.pred)) : json(nullptr);
    nodes.push_back(node);
  }
  json links = json::array();
  for (const GraphLink& l : graph.links()) {
    json link;
    link["from"] = graph.nodes()[l.source].id;
    link["to"] = graph.nodes()[l.target].id;
    link["label"] = link_label_name(l.label);
    links.push_back(link);
  }
  json doc;
  doc["nodes"] = nodes;
  doc["links"] = links;
  return doc.dump(2) + "\n";
}

void save_graph(const std::string& path, const SituationGraph& graph,
                const Vocabulary& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::Io, "cannot write: " + path);
  out << graph_to_json(graph, vocab);
}

MicroWorld parse_world_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorKind::Parse, std::string("bad micro-world JSON: ") + e.what());
  }
  MicroWorld world;
  try {
    for (const auto& [name, nouns] : doc.at("categories").items()) {
      std::vector<std::string> members;
      for (const json& n : nouns) members.push_back(n.get<std::string>());
      world.categories.emplace(name, std::move(members));
    }
    for (const json& f : doc.at("frames")) {
      WorldFrame frame;
      frame.verb = f.at("verb").get<std::string>();
      if (f.contains("subj") && !f.at("subj").is_null()) {
        frame.subject_category = f.at("subj").get<std::string>();
      }
      if (f.contains("obj") && !f.at("obj").is_null()) {
        frame.object_category = f.at("obj").get<std::string>();
      }
      if (f.contains("weight")) frame.weight = f.at("weight").get<double>();
      world.frames.push_back(std::move(frame));
    }
  } catch (const json::exception& e) {
    raise(ErrorKind::Parse, std::string("bad micro-world JSON: ") + e.what());
  }
  return world;
}

MicroWorld load_world(const std::string& path) {
  return parse_world_json(read_file(path));
}

TripleCorpus generate_synthetic_corpus(const MicroWorld& world,
                                       std::uint64_t seed, std::size_t n) {
  if (world.frames.empty()) {
    raise(ErrorKind::WorldSpec, "micro-world has no frames");
  }
  double total_weight = 0.0;
  for (const WorldFrame& f : world.frames) {
    if (!f.subject_category && !f.object_category) {
      raise(ErrorKind::WorldSpec,
            "frame " + f.verb + " selects neither subject nor object");
    }
    if (!(f.weight > 0.0)) {
      raise(ErrorKind::WorldSpec, "frame " + f.verb + " has non-positive weight");
    }
    for (const auto& cat : {f.subject_category, f.object_category}) {
      if (!cat) continue;
      auto it = world.categories.find(*cat);
      if (it == world.categories.end() || it->second.empty()) {
        raise(ErrorKind::WorldSpec, "frame " + f.verb +
                                        " references empty or missing "
                                        "category: " +
                                        *cat);
      }
    }
    total_weight += f.weight;
  }

  SplitMix64 rng(seed);
  std::vector<RawTriple> raw;
  raw.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    double u = rng.next_unit() * total_weight;
    std::size_t pick = world.frames.size() - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < world.frames.size(); ++i) {
      acc += world.frames[i].weight;
      if (u < acc) {
        pick = i;
        break;
      }
    }
    const WorldFrame& frame = world.frames[pick];
    RawTriple t;
    t.verb = frame.verb;
    if (frame.subject_category) {
      const auto& cat = world.categories.at(*frame.subject_category);
      t.subject = cat[rng.next_below(cat.size())];
    }
    if (frame.object_category) {
      const auto& cat = world.categories.at(*frame.object_category);
      t.object = cat[rng.next_below(cat.size())];
    }
    raw.push_back(std::move(t));
  }

  std::map<std::pair<std::string, int>, std::uint64_t> counts;
  for (const RawTriple& t : raw) {
    if (!t.subject.empty()) ++counts[{t.subject, static_cast<int>(Role::Noun)}];
    ++counts[{t.verb, static_cast<int>(Role::Verb)}];
    if (!t.object.empty()) ++counts[{t.object, static_cast<int>(Role::Noun)}];
  }
  TripleCorpus corpus;
  auto intern = [&](const std::string& form,
                    Role role) -> std::optional<PredicateId> {
    if (auto id = corpus.vocab.find(form, role)) return *id;
    return corpus.vocab.add(form, role,
                            counts.at({form, static_cast<int>(role)}));
  };
  corpus.triples = assemble_triples(raw, intern);
  return corpus;
}

}  // namespace fds
