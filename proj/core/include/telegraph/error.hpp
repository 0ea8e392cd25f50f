#pragma once

#include <stdexcept>
#include <string>

namespace telegraph {

enum class ErrorKind {
  AllZero,        // normalization sum underflowed to zero
  GuardViolated,  // linearized propagation outside its validity range
  NotStochastic,  // matrix columns do not sum to one
  CapExceeded,    // rate grid larger than the configured cell cap
  ZeroMean,       // rate marginal has zero mean but positive spread
  Empty,          // aggregation over an empty collection
  NoEpisodes,     // target never dominant
  NeverReached,   // a trace never reaches target dominance
  InvalidArgument,
  Config,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace telegraph
