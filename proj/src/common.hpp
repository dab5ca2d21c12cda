#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace cma {

using cplx = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kEps = std::numeric_limits<double>::epsilon();

// Mirrors the C status codes one-to-one.
enum class Status : int {
  ok = 0,
  invalid_argument = 1,
  out_of_range = 2,
  divergent = 3,
  requires_measure = 4,
  requires_class = 5,
  unsupported = 6,
  limit_undefined = 7,
  numeric_failure = 8,
  io = 9,
  parse = 10,
  internal = 11,
};

const char* status_name(Status s);

class Error : public std::runtime_error {
 public:
  Error(Status code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Status code() const { return code_; }

 private:
  Status code_;
};

[[noreturn]] inline void fail(Status code, const std::string& what) { throw Error(code, what); }

}  // namespace cma
