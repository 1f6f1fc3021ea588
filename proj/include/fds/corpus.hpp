#ifndef FDS_CORPUS_HPP
#define FDS_CORPUS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fds {

// Noun and verb predicates live in separate namespaces: the same surface
// form in both roles is two distinct predicates.
enum class Role : std::uint8_t { Noun, Verb };

const char* role_name(Role role);

struct PredicateId {
  std::uint32_t index = 0;  // position in the vocabulary
  Role role = Role::Noun;

  bool operator==(const PredicateId& o) const { return index == o.index; }
  bool operator!=(const PredicateId& o) const { return index != o.index; }
  bool operator<(const PredicateId& o) const { return index < o.index; }
};

struct VocabEntry {
  std::string form;
  Role role = Role::Noun;
  std::uint64_t count = 0;  // occurrences in the corpus it was built from
};

class Vocabulary {
 public:
  // Throws Error(Vocab) on a duplicate (form, role) pair.
  PredicateId add(std::string form, Role role, std::uint64_t count);

  std::optional<PredicateId> find(std::string_view form, Role role) const;

  // Lookup that prefers `preferred` but falls back to the other role.
  std::optional<PredicateId> resolve(std::string_view form,
                                     Role preferred) const;

  const VocabEntry& entry(PredicateId id) const;
  const std::string& form(PredicateId id) const { return entry(id).form; }

  std::size_t size() const { return entries_.size(); }
  const std::vector<VocabEntry>& entries() const { return entries_; }

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, std::uint32_t> noun_lookup_;
  std::unordered_map<std::string, std::uint32_t> verb_lookup_;
};

/// One corpus item: a verb with optional nominal arguments. The verb is
/// always present and at least one argument is.
struct SvoTriple {
  std::optional<PredicateId> subject;  // noun
  PredicateId verb;                    // verb
  std::optional<PredicateId> object;   // noun
};

enum class LinkLabel : std::uint8_t { Arg1, Arg2 };

const char* link_label_name(LinkLabel label);

struct GraphNode {
  std::string id;
  std::optional<PredicateId> pred;  // observed-true predicate, if any
};

struct GraphLink {
  std::uint32_t source = 0;  // index into nodes
  std::uint32_t target = 0;
  LinkLabel label = LinkLabel::Arg1;
};

/// Pixie-valued nodes joined by labeled argument links. Node ids are
/// unique, link endpoints exist, there are no duplicate links, and the
/// graph is connected; the constructor enforces all of this.
class SituationGraph {
 public:
  SituationGraph(std::vector<GraphNode> nodes, std::vector<GraphLink> links);

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphLink>& links() const { return links_; }

  std::optional<std::uint32_t> node_index(std::string_view id) const;

 private:
  std::vector<GraphNode> nodes_;
  std::vector<GraphLink> links_;
  std::map<std::string, std::uint32_t, std::less<>> index_;
};

struct TripleCorpus {
  std::vector<SvoTriple> triples;
  Vocabulary vocab;
};

inline constexpr int kDefaultMinCount = 5;

/// Loads a triples TSV (`subject<TAB>verb<TAB>object`, `_` for an absent
/// argument, `#` comments) and builds a vocabulary from it. Tokens whose
/// corpus count falls below `min_count` are dropped: a dropped verb drops
/// its triple, a dropped noun nulls that argument, and a triple whose
/// arguments both vanish is discarded.
TripleCorpus load_triples(const std::string& path,
                          int min_count = kDefaultMinCount);

/// Same file format, resolved against an existing vocabulary. Unknown
/// tokens are treated like filtered ones.
std::vector<SvoTriple> load_triples(const std::string& path,
                                    const Vocabulary& vocab);

void save_triples(const std::string& path,
                  const std::vector<SvoTriple>& triples,
                  const Vocabulary& vocab);

/// Builds the situation graph for a triple: verb node `y` with an ARG1
/// link to subject node `x` and an ARG2 link to object node `z`, observed
/// predicates attached.
SituationGraph triple_to_graph(const SvoTriple& triple);

SituationGraph load_graph(const std::string& path, const Vocabulary& vocab);
SituationGraph parse_graph_json(const std::string& text,
                                const Vocabulary& vocab);
std::string graph_to_json(const SituationGraph& graph,
                          const Vocabulary& vocab);
void save_graph(const std::string& path, const SituationGraph& graph,
                const Vocabulary& vocab);

/// A micro-world: noun categories plus verb frames that select them.
struct WorldFrame {
  std::string verb;
  std::optional<std::string> subject_category;
  std::optional<std::string> object_category;
  double weight = 1.0;
};

struct MicroWorld {
  std::map<std::string, std::vector<std::string>> categories;
  std::vector<WorldFrame> frames;
};

MicroWorld load_world(const std::string& path);
MicroWorld parse_world_json(const std::string& text);

/// Samples `n` triples: weighted frame choice, then uniform noun choice
/// within each selected category. A pure function of (world, seed, n);
/// identical inputs give identical output, bit for bit.
TripleCorpus generate_synthetic_corpus(const MicroWorld& world,
                                       std::uint64_t seed, std::size_t n);

}  // namespace fds

#endif  // FDS_CORPUS_HPP
