#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace maxsurf {

/// Failure categories shared by every module. The CLI reports them verbatim
/// in its error JSON, so the spelling in to_string() is part of the interface.
enum class ErrorKind {
  invalid_argument,
  invalid_boost,
  degenerate_direction,
  domain,
  undefined_constant,
  root_find,
  geometry,
  out_of_domain,
  non_spacelike,
  inadmissible,
  convergence,
  linear_solve,
  fit_failure,
  window_too_narrow,
  continuation_stall,
  usage,
  io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return "invalid_argument";
    case ErrorKind::invalid_boost: return "invalid_boost";
    case ErrorKind::degenerate_direction: return "degenerate_direction";
    case ErrorKind::domain: return "domain";
    case ErrorKind::undefined_constant: return "undefined_constant";
    case ErrorKind::root_find: return "root_find";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::out_of_domain: return "out_of_domain";
    case ErrorKind::non_spacelike: return "non_spacelike";
    case ErrorKind::inadmissible: return "inadmissible";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::linear_solve: return "linear_solve";
    case ErrorKind::fit_failure: return "fit_failure";
    case ErrorKind::window_too_narrow: return "window_too_narrow";
    case ErrorKind::continuation_stall: return "continuation_stall";
    case ErrorKind::usage: return "usage";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace maxsurf
