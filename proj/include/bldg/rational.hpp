#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace bldg {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Rational rat(long long n, long long d = 1) { return Rational(n, d); }

inline double to_double(const Rational& x) { return x.template convert_to<double>(); }

inline Int num(const Rational& x) { return boost::multiprecision::numerator(x); }
inline Int den(const Rational& x) { return boost::multiprecision::denominator(x); }

inline bool is_integer(const Rational& x) { return den(x) == 1; }

inline Int to_int(const Rational& x) {
  if (!is_integer(x)) throw std::domain_error("rational is not an integer: " + x.str());
  return num(x);
}

inline long long to_ll(const Rational& x) { return to_int(x).template convert_to<long long>(); }

// floor(x) as Int
inline Int floor_int(const Rational& x) {
  Int n = num(x), d = den(x);
  Int q = n / d;
  if (n < 0 && q * d != n) --q;
  return q;
}

// x^k with integer (possibly negative) exponent
inline Rational pow_rat(const Rational& x, long long k) {
  if (k == 0) return Rational(1);
  bool inv = k < 0;
  unsigned long long e = inv ? static_cast<unsigned long long>(-k) : static_cast<unsigned long long>(k);
  Rational base = x, acc = 1;
  while (e) {
    if (e & 1ULL) acc *= base;
    base *= base;
    e >>= 1;
  }
  if (inv) {
    if (acc == 0) throw std::domain_error("pow_rat: zero to negative power");
    acc = Rational(1) / acc;
  }
  return acc;
}

// log2 of a positive rational, accurate even when it over/underflows double
inline double log2_value(const Rational& x) {
  if (x <= 0) throw std::domain_error("log2_value: nonpositive");
  const Int n = num(x), d = den(x);
  auto log2_int = [](const Int& v) {
    const std::size_t b = boost::multiprecision::msb(v);
    // keep ~64 top bits for the mantissa
    Int m = (b > 62) ? Int(v >> (b - 62)) : v;
    const double shift = (b > 62) ? static_cast<double>(b - 62) : 0.0;
    return std::log2(m.template convert_to<double>()) + shift;
  };
  return log2_int(n) - log2_int(d);
}

inline double log_value(const Rational& x) { return log2_value(x) * 0.6931471805599453; }

inline std::string rat_str(const Rational& x) { return x.str(); }

}  // namespace bldg
