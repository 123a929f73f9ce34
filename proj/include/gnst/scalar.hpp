#pragma once

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

#include <gmpxx.h>

namespace gnst {

using Rational = mpq_class;

enum class Arithmetic { exact, floating };

inline std::string_view arithmetic_name(Arithmetic a) {
  return a == Arithmetic::exact ? "exact" : "float";
}

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (bad assignment, scenario mismatch...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Document-level parse failure. `location` names the offending JSON path.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::string location)
      : InputError(location.empty() ? what : what + " at " + location),
        location_(std::move(location)) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

/// The requested operation is outside the supported instance class.
class ScopeError : public Error {
 public:
  using Error::Error;
};

/// Solver breakdown or a certificate that failed re-verification.
class SolverError : public Error {
 public:
  using Error::Error;
};

template <typename T>
concept Scalar = std::is_same_v<T, Rational> || std::is_same_v<T, double>;

template <Scalar T>
constexpr Arithmetic arithmetic_of() {
  return std::is_same_v<T, Rational> ? Arithmetic::exact : Arithmetic::floating;
}

template <Scalar T>
constexpr bool is_exact_v = std::is_same_v<T, Rational>;

inline double to_double(const Rational& r) { return r.get_d(); }
inline double to_double(double d) { return d; }

inline Rational abs_value(const Rational& r) { return abs(r); }
inline double abs_value(double d) { return std::fabs(d); }

template <Scalar T>
T from_ratio(long num, long den) {
  if constexpr (is_exact_v<T>) {
    Rational r(num, den);
    r.canonicalize();
    return r;
  } else {
    return static_cast<double>(num) / static_cast<double>(den);
  }
}

/// Canonical "n/d" rendering; integers keep an explicit denominator.
inline std::string format_rational(const Rational& r) {
  Rational c = r;
  c.canonicalize();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

/// Accepts "n/d" or a bare integer "n". Throws InputError on anything else.
inline Rational parse_rational(std::string_view text) {
  auto valid_int = [](std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') return false;
    return true;
  };
  auto slash = text.find('/');
  std::string_view num = text.substr(0, slash);
  std::string_view den =
      slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
  if (!valid_int(num) || !valid_int(den) || den[0] == '-' || den[0] == '+')
    throw InputError("invalid rational literal '" + std::string(text) + "'");
  std::string n(num[0] == '+' ? num.substr(1) : num);
  mpz_class nz(n), dz{std::string(den)};
  if (dz == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
  Rational r(nz, dz);
  r.canonicalize();
  return r;
}

}  // namespace gnst
