#pragma once

#include <boost/multiprecision/float128.hpp>
#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <concepts>
#include <string>
#include <type_traits>

namespace dyadlab {

/// Exact rational scalar (GMP backed).
using Rational = boost::multiprecision::mpq_rational;
/// Arbitrary-width integer (GMP backed).
using Integer = boost::multiprecision::mpz_int;
/// IEEE binary128 scalar, 113-bit significand.
using Quad = boost::multiprecision::float128;

template <class T>
inline constexpr bool is_exact_v = std::is_same_v<T, Rational>;

template <class T>
concept Scalar = std::same_as<T, Rational> || std::same_as<T, Quad> || std::same_as<T, double>;

template <class T>
concept FloatScalar = std::same_as<T, Quad> || std::same_as<T, double>;

Quad to_quad(const Integer& z);
Quad to_quad(const Rational& q);
double to_double(const Rational& q);

/// Exact conversion of a finite binary float into a rational.
Rational exact_rational(const Quad& x);
Rational exact_rational(double x);

/// 2^e as an exact rational (e may be negative).
Rational pow2(long e);

/// Convert any supported scalar into T. Float-to-rational conversions are exact.
template <Scalar T, class S>
T convert(const S& x) {
  if constexpr (std::is_same_v<T, S>) {
    return x;
  } else if constexpr (std::is_same_v<S, Rational>) {
    if constexpr (std::is_same_v<T, Quad>) return to_quad(x);
    else return to_double(x);
  } else if constexpr (std::is_same_v<T, Rational>) {
    return exact_rational(x);
  } else if constexpr (std::is_same_v<T, double>) {
    return static_cast<double>(x);
  } else {
    return T(x);
  }
}

inline double as_double(const Rational& x) { return to_double(x); }
inline double as_double(const Quad& x) { return static_cast<double>(x); }
inline double as_double(double x) { return x; }

template <Scalar T>
T abs_value(const T& x) {
  return x < 0 ? T(-x) : x;
}

template <FloatScalar T>
T sqrt_value(const T& x) {
  using std::sqrt;
  using boost::multiprecision::sqrt;
  return sqrt(x);
}

template <FloatScalar T>
T pow_value(const T& x, const T& e) {
  using std::pow;
  using boost::multiprecision::pow;
  return pow(x, e);
}

template <FloatScalar T>
T log_value(const T& x) {
  using std::log;
  using boost::multiprecision::log;
  return log(x);
}

template <FloatScalar T>
T exp_value(const T& x) {
  using std::exp;
  using boost::multiprecision::exp;
  return exp(x);
}

/// Integer power by repeated squaring, valid for every scalar.
template <Scalar T>
T ipow(T base, unsigned long e) {
  T result(1);
  while (e != 0) {
    if (e & 1UL) result *= base;
    e >>= 1;
    if (e != 0) base *= base;
  }
  return result;
}

/// Parse "a", "a/b" or a finite decimal "1.25e-3" into an exact rational.
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);
/// Shortest round-trip decimal text for a double; 36 significant digits for Quad.
std::string to_string(double x);
std::string to_string(const Quad& x);

}  // namespace dyadlab
