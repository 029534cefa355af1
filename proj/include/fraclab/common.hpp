#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace fraclab {

// All recoverable failures throw Error with a short kebab-case code as the
// first word of the message; the CLI maps codes to exit status.
class Error : public std::runtime_error {
public:
  Error(const std::string& code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(code) {}
  const std::string& code() const { return code_; }

private:
  std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& detail) {
  throw Error(code, detail);
}

inline void require(bool ok, const std::string& code, const std::string& detail) {
  if (!ok) fail(code, detail);
}

constexpr double pi = 3.14159265358979323846;

// Shortest-width fixed formatting used for every CSV cell, so identical runs
// produce identical bytes.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace fraclab
