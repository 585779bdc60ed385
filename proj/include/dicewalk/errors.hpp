#pragma once

#include <stdexcept>
#include <string>

namespace dicewalk {

// Failure taxonomy shared by every module. The CLI maps kinds to process
// exit codes; library callers can switch on kind() instead of parsing
// messages.
enum class errc {
  invalid_input,      // malformed files, bad flags, domain violations
  normalization,      // face probabilities do not sum to 1
  common_divisor,     // gcd of face values exceeds 1, walk cannot reach all residues
  out_of_range,       // query beyond a structure's computed limit
  budget,             // an explicit work or memory budget was exceeded
  insufficient_data,  // not enough points to estimate the requested quantity
  undefined,          // requested statistic does not exist (e.g. sigma = 0)
  numeric,            // internal arithmetic failed a consistency check
  tolerance,          // a requested certificate could not be met
  horizon,            // iteration cap reached before convergence
};

class error : public std::runtime_error {
 public:
  error(errc kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  errc kind() const noexcept { return kind_; }

 private:
  errc kind_;
};

// Exit-code contract: 0 success, 2 tolerance/numeric failure, 3 invalid
// input, 4 resource or iteration limit.
inline int exit_code(errc kind) {
  switch (kind) {
    case errc::invalid_input:
    case errc::normalization:
    case errc::common_divisor:
    case errc::out_of_range:
    case errc::insufficient_data:
    case errc::undefined:
      return 3;
    case errc::numeric:
    case errc::tolerance:
      return 2;
    case errc::budget:
    case errc::horizon:
      return 4;
  }
  return 2;
}

}  // namespace dicewalk
