#ifndef FDS_SPACE_HPP
#define FDS_SPACE_HPP

#include <cstdint>
#include <vector>

namespace fds {

/// The semantic space: binary vectors of dimension `dim` with exactly
/// `card` active dimensions.
struct SpaceConfig {
  int dim = 0;   // D, total dimensions
  int card = 0;  // C, active dimensions per pixie

  bool valid() const { return 0 < card && card < dim; }
};

// Throws Error(Dimension) unless 0 < card < dim.
void validate(const SpaceConfig& config);

/// A point of the semantic space, stored as its sorted active-index set.
/// C is much smaller than D in every configuration of interest, so the
/// sparse form makes dot products with dense weights O(C).
struct Pixie {
  std::vector<std::int32_t> active;

  bool operator==(const Pixie& other) const { return active == other.active; }
};

// True iff `active` is strictly increasing, in range, and of size card.
bool valid_pixie(const SpaceConfig& config, const Pixie& pixie);

/// Per-dimension activation probabilities; components sum to C.
struct MeanFieldVector {
  std::vector<double> probs;
};

// True iff all components are in [0,1] and sum to card within `tol`.
bool valid_mean_field(const SpaceConfig& config, const MeanFieldVector& mf,
                      double tol = 1e-6);

/// log10 of binomial(D, C): the number of pixies in the space.
/// Computed in log space; no overflow for D up to 10^6.
double count_pixies_log10(const SpaceConfig& config);

inline constexpr double kEnumerationCap = 1e6;

/// Streams every cardinality-C subset of {0,...,D-1} in lexicographic
/// order. Construction throws Error(TooLarge), reporting the log10 count,
/// when binomial(D, C) exceeds `cap`.
class PixieEnumerator {
 public:
  explicit PixieEnumerator(const SpaceConfig& config,
                           double cap = kEnumerationCap);

  // Next pixie, or nullptr once the space is exhausted.
  const Pixie* next();

 private:
  SpaceConfig config_;
  Pixie current_;
  bool started_ = false;
  bool done_ = false;
};

// Materialized enumeration, same order and same cap behaviour.
std::vector<Pixie> enumerate_pixies(const SpaceConfig& config,
                                    double cap = kEnumerationCap);

/// The no-information state: every component C/D.
MeanFieldVector uniform_mean_field(const SpaceConfig& config);

}  // namespace fds

#endif  // FDS_SPACE_HPP
