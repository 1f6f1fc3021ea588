#ifndef FDS_MODEL_HPP
#define FDS_MODEL_HPP

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fds/corpus.hpp"
#include "fds/space.hpp"

namespace fds {

/// A predicate's standing meaning: a one-layer network mapping any pixie
/// to a probability of truth via sigmoid(weights . pixie + bias).
struct SemanticFunction {
  std::vector<double> weights;  // length D
  double bias = 0.0;
};

/// Pairwise co-activation scores for one link label: entry (i, j) scores
/// dimension i of the source pixie firing together with dimension j of
/// the target pixie.
class LinkMatrix {
 public:
  LinkMatrix() = default;
  LinkMatrix(LinkLabel label, int dim)
      : label_(label), dim_(dim), values_(static_cast<std::size_t>(dim) * dim, 0.0) {}

  LinkLabel label() const { return label_; }
  int dim() const { return dim_; }

  double at(int i, int j) const {
    return values_[static_cast<std::size_t>(i) * dim_ + j];
  }
  double& at(int i, int j) {
    return values_[static_cast<std::size_t>(i) * dim_ + j];
  }

  // Row i as a contiguous span (source dimension i against all targets).
  std::span<const double> row(int i) const {
    return {values_.data() + static_cast<std::size_t>(i) * dim_,
            static_cast<std::size_t>(dim_)};
  }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

 private:
  LinkLabel label_ = LinkLabel::Arg1;
  int dim_ = 0;
  std::vector<double> values_;
};

/// The trained artifact: space configuration, vocabulary, one semantic
/// function per predicate, and one link matrix per label. Immutable after
/// construction or load; all operations on it are pure.
struct FdsModel {
  SpaceConfig config;
  Vocabulary vocab;
  std::vector<SemanticFunction> functions;  // aligned with vocab entries
  LinkMatrix arg1;
  LinkMatrix arg2;

  const LinkMatrix& link(LinkLabel label) const {
    return label == LinkLabel::Arg1 ? arg1 : arg2;
  }
  const SemanticFunction& function(PredicateId id) const;
};

// Throws Error(Inconsistent) if functions, links, and vocab disagree.
void validate(const FdsModel& model);

/// P(predicate true of pixie) = sigmoid(sum of active weights + bias),
/// clamped into the open interval (0,1).
double truth_probability(const SemanticFunction& f, const Pixie& x);

/// The mean-field surrogate: the semantic function evaluated at the mean
/// activation, sigmoid(weights . q + bias). This plugs the mean in rather
/// than averaging the sigmoid over the distribution; the gap between the
/// two is measured, not assumed zero.
double truth_probability_mf(const SemanticFunction& f,
                            const MeanFieldVector& q);

/// Unnormalized log prior of a joint pixie assignment: the sum over links
/// of the link matrix entries selected by the active dimensions of the
/// linked pixies. Prior over assignments is proportional to exp(score).
/// `assignment` is indexed by graph node order.
double situation_score(const FdsModel& model, const SituationGraph& graph,
                       std::span<const Pixie> assignment);

/// Same, with the assignment keyed by node id. Throws Error(Query) when a
/// node is missing from the assignment.
double situation_score(const FdsModel& model, const SituationGraph& graph,
                       const std::unordered_map<std::string, Pixie>& assignment);

// Versioned JSON model file; numbers round-trip bit-exactly.
void save_model(const FdsModel& model, const std::string& path);
FdsModel load_model(const std::string& path);
std::string model_to_json(const FdsModel& model);
FdsModel model_from_json(const std::string& text);

}  // namespace fds

#endif  // FDS_MODEL_HPP
