#include "fds/space.hpp"

#include <cmath>
#include <sstream>

#include "fds/error.hpp"

namespace fds {

void validate(const SpaceConfig& config) {
  if (!config.valid()) {
    std::ostringstream msg;
    msg << "invalid space config: dim=" << config.dim
        << " card=" << config.card << " (need 0 < card < dim)";
    raise(ErrorKind::Dimension, msg.str());
  }
}

bool valid_pixie(const SpaceConfig& config, const Pixie& pixie) {
  if (static_cast<int>(pixie.active.size()) != config.card) return false;
  std::int32_t prev = -1;
  for (std::int32_t i : pixie.active) {
    if (i <= prev || i >= config.dim) return false;
    prev = i;
  }
  return true;
}

bool valid_mean_field(const SpaceConfig& config, const MeanFieldVector& mf,
                      double tol) {
  if (static_cast<int>(mf.probs.size()) != config.dim) return false;
  double sum = 0.0;
  for (double p : mf.probs) {
    if (!(p >= 0.0 && p <= 1.0)) return false;
    sum += p;
  }
  return std::abs(sum - config.card) <= tol;
}

double count_pixies_log10(const SpaceConfig& config) {
  validate(config);
  double ln = std::lgamma(config.dim + 1.0) - std::lgamma(config.card + 1.0) -
              std::lgamma(config.dim - config.card + 1.0);
  return ln / std::log(10.0);
}

PixieEnumerator::PixieEnumerator(const SpaceConfig& config, double cap)
    : config_(config) {
  validate(config);
  double log_count = count_pixies_log10(config);
  if (log_count > std::log10(cap)) {
    std::ostringstream msg;
    msg << "space too large to enumerate: log10(count) = " << log_count
        << " exceeds cap " << cap;
    raise(ErrorKind::TooLarge, msg.str());
  }
  current_.active.resize(config.card);
}

const Pixie* PixieEnumerator::next() {
  if (done_) return nullptr;
  if (!started_) {
    for (int i = 0; i < config_.card; ++i) current_.active[i] = i;
    started_ = true;
    return &current_;
  }
  // Advance to the lexicographically next C-combination.
  int c = config_.card;
  int d = config_.dim;
  int i = c - 1;
  while (i >= 0 && current_.active[i] == d - c + i) --i;
  if (i < 0) {
    done_ = true;
    return nullptr;
  }
  ++current_.active[i];
  for (int j = i + 1; j < c; ++j) current_.active[j] = current_.active[j - 1] + 1;
  return &current_;
}

std::vector<Pixie> enumerate_pixies(const SpaceConfig& config, double cap) {
  PixieEnumerator it(config, cap);
  std::vector<Pixie> out;
  while (const Pixie* p = it.next()) out.push_back(*p);
  return out;
}

MeanFieldVector uniform_mean_field(const SpaceConfig& config) {
  validate(config);
  MeanFieldVector mf;
  mf.probs.assign(config.dim,
                  static_cast<double>(config.card) / config.dim);
  return mf;
}

}  // namespace fds
