#pragma once

#include <stdexcept>
#include <string>

namespace dgn {

// Library-wide exception. Messages are meant to be actionable: they name the
// offending quantity (layer, timestep, file, key) rather than just "invalid".
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) fail(msg);
}

}  // namespace dgn
