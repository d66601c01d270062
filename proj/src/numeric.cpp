#include "dyadlab/numeric.hpp"

#include "dyadlab/errors.hpp"

#include <gmp.h>

#include <cctype>
#include <charconv>
#include <cstdio>
#include <quadmath.h>

namespace dyadlab {

namespace {

// Keep 120 leading bits so the final rounding to 113 bits happens once.
constexpr long kKeepBits = 120;

Quad mpz_to_quad(const mpz_t z) {
  const int sign = mpz_sgn(z);
  if (sign == 0) return Quad(0);
  mpz_t a;
  mpz_init(a);
  mpz_abs(a, z);
  const long bits = static_cast<long>(mpz_sizeinbase(a, 2));
  long shift = 0;
  if (bits > kKeepBits) {
    shift = bits - kKeepBits;
    // Sticky bit preserves correct rounding of the truncated tail.
    const bool sticky = mpz_scan1(a, 0) < static_cast<mp_bitcnt_t>(shift);
    mpz_tdiv_q_2exp(a, a, static_cast<mp_bitcnt_t>(shift));
    if (sticky) mpz_setbit(a, 0);
  }
  __float128 acc = 0;
  const size_t limbs = mpz_size(a);
  for (size_t i = limbs; i-- > 0;) {
    const mp_limb_t limb = mpz_getlimbn(a, static_cast<mp_size_t>(i));
    acc = ldexpq(acc, GMP_NUMB_BITS) + static_cast<__float128>(limb);
  }
  mpz_clear(a);
  acc = ldexpq(acc, static_cast<int>(shift));
  return Quad(sign < 0 ? -acc : acc);
}

}  // namespace

Quad to_quad(const Integer& z) { return mpz_to_quad(z.backend().data()); }

Quad to_quad(const Rational& q) {
  const mpq_srcptr raw = q.backend().data();
  const long nbits = static_cast<long>(mpz_sizeinbase(mpq_numref(raw), 2));
  const long dbits = static_cast<long>(mpz_sizeinbase(mpq_denref(raw), 2));
  if (mpz_sgn(mpq_numref(raw)) == 0) return Quad(0);
  // Integer division with enough quotient bits, then one rounding step.
  const long extra = kKeepBits + 2 + dbits - nbits;
  mpz_t num, quo;
  mpz_init_set(num, mpq_numref(raw));
  mpz_init(quo);
  if (extra > 0) mpz_mul_2exp(num, num, static_cast<mp_bitcnt_t>(extra));
  else if (extra < 0) mpz_tdiv_q_2exp(num, num, static_cast<mp_bitcnt_t>(-extra));
  mpz_t rem;
  mpz_init(rem);
  mpz_tdiv_qr(quo, rem, num, mpq_denref(raw));
  if (mpz_sgn(rem) != 0) mpz_setbit(quo, 0);
  Quad result = mpz_to_quad(quo);
  mpz_clears(num, quo, rem, nullptr);
  return Quad(ldexpq(result.backend().value(), static_cast<int>(-extra)));
}

double to_double(const Rational& q) { return static_cast<double>(to_quad(q)); }

Rational exact_rational(const Quad& x) {
  __float128 v = x.backend().value();
  if (!finiteq(v)) throw DyadError(ErrorKind::InvalidArgument, "non-finite value cannot be made rational");
  if (v == 0) return Rational(0);
  int e = 0;
  __float128 mant = frexpq(v, &e);
  // mant in [0.5, 1); scale to an integer with 113 bits.
  mant = ldexpq(mant, 113);
  e -= 113;
  const bool neg = mant < 0;
  if (neg) mant = -mant;
  Integer m(0);
  for (int chunk = 0; chunk < 4; ++chunk) {
    const __float128 high = floorq(ldexpq(mant, -32 * (3 - chunk)));
    const auto digit = static_cast<unsigned long>(high);
    m = (m << 32) + digit;
    mant -= ldexpq(static_cast<__float128>(digit), 32 * (3 - chunk));
  }
  Rational r(m);
  if (neg) r = -r;
  return r * pow2(e);
}

Rational exact_rational(double x) { return exact_rational(Quad(x)); }

Rational pow2(long e) {
  Integer one(1);
  if (e >= 0) return Rational(Integer(one << static_cast<unsigned>(e)));
  return Rational(one, Integer(one << static_cast<unsigned>(-e)));
}

Rational parse_rational(const std::string& raw) {
  std::string text;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) text.push_back(c);
  if (text.empty()) throw DyadError(ErrorKind::ParseError, "empty number");
  const auto slash = text.find('/');
  auto parse_int = [&](const std::string& s) {
    if (s.empty()) throw DyadError(ErrorKind::ParseError, "bad number: " + raw);
    size_t start = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (start == s.size()) throw DyadError(ErrorKind::ParseError, "bad number: " + raw);
    for (size_t i = start; i < s.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(s[i]))) throw DyadError(ErrorKind::ParseError, "bad number: " + raw);
    return Integer(s[0] == '+' ? s.substr(1) : s);
  };
  if (slash != std::string::npos) {
    Integer num = parse_int(text.substr(0, slash));
    Integer den = parse_int(text.substr(slash + 1));
    if (den == 0) throw DyadError(ErrorKind::ParseError, "zero denominator: " + raw);
    return Rational(num, den);
  }
  // Decimal with optional exponent.
  std::string mant = text;
  long exponent = 0;
  const auto epos = text.find_first_of("eE");
  if (epos != std::string::npos) {
    mant = text.substr(0, epos);
    const std::string es = text.substr(epos + 1);
    const auto* first = es.data() + ((!es.empty() && es[0] == '+') ? 1 : 0);
    auto [ptr, ec] = std::from_chars(first, es.data() + es.size(), exponent);
    if (ec != std::errc() || ptr != es.data() + es.size()) throw DyadError(ErrorKind::ParseError, "bad exponent: " + raw);
  }
  const auto dot = mant.find('.');
  std::string digits = mant;
  if (dot != std::string::npos) {
    digits = mant.substr(0, dot) + mant.substr(dot + 1);
    exponent -= static_cast<long>(mant.size() - dot - 1);
  }
  if (digits == "-" || digits == "+" || digits.empty()) digits += "0";
  Rational value(parse_int(digits));
  Integer ten_pow(1);
  for (long i = 0; i < (exponent < 0 ? -exponent : exponent); ++i) ten_pow *= 10;
  if (exponent >= 0) value *= Rational(ten_pow);
  else value /= Rational(ten_pow);
  return value;
}

std::string to_string(const Rational& q) { return q.str(); }

std::string to_string(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

std::string to_string(const Quad& x) {
  char buf[96];
  quadmath_snprintf(buf, sizeof buf, "%.36Qg", x.backend().value());
  return buf;
}

}  // namespace dyadlab
