#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace atlasid {

enum class Errc {
  sum_not_zero,
  partial_sum_non_negative,
  non_positive_variance,
  invalid_argument,
  non_finite,
  out_of_range,
  too_few_lags,
  no_bracket,
  parse,
  io,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::sum_not_zero: return "SumNotZero";
    case Errc::partial_sum_non_negative: return "PartialSumNonNegative";
    case Errc::non_positive_variance: return "NonPositiveVariance";
    case Errc::invalid_argument: return "InvalidArgument";
    case Errc::non_finite: return "NonFinite";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::too_few_lags: return "TooFewLags";
    case Errc::no_bracket: return "NoBracket";
    case Errc::parse: return "Parse";
    case Errc::io: return "Io";
  }
  return "Unknown";
}

/// Library error. `index()` carries the offending position when one exists
/// (prefix length for PartialSumNonNegative, step for NonFinite, ...).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what,
        std::optional<std::size_t> index = std::nullopt)
      : std::runtime_error(what), code_(code), index_(index) {}

  Errc code() const noexcept { return code_; }
  std::optional<std::size_t> index() const noexcept { return index_; }

 private:
  Errc code_;
  std::optional<std::size_t> index_;
};

}  // namespace atlasid
