#ifndef FDS_ERROR_HPP
#define FDS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fds {

// Every failure mode gets a distinct kind so callers (and tests) can tell
// them apart without string matching.
enum class ErrorKind {
  Parse,            // malformed input line / document
  Vocab,            // unknown or duplicate predicate
  Structure,        // graph or tree violates a structural invariant
  EmptyCorpus,      // nothing usable left after filtering
  WorldSpec,        // bad micro-world description
  TooLarge,         // enumeration cap exceeded
  Dimension,        // vector/matrix dimension mismatch
  UndefinedTarget,  // PPMI requested for a predicate with no counts
  Version,          // unsupported model file version
  Corrupt,          // unreadable or truncated model file
  Inconsistent,     // model file fields disagree with each other
  Metric,           // metric undefined for this input (ties, zero variance)
  Query,            // bad inference query (missing node, uncovered variable)
  Io,               // file not readable/writable
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace fds

#endif  // FDS_ERROR_HPP
