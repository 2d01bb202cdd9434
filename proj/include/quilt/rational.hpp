/**
 * Exact rational scalars.
 *
 * All coefficients in the library are arbitrary-precision rationals (GMP's
 * mpq_class).  Serialization is always the canonical string "p/q" with q > 0
 * and gcd(p,q) = 1, or just "p" when q = 1; parsing accepts exactly those
 * forms plus an optional explicit "/1".  Nothing in the library ever goes
 * through floating point.
 */
#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "quilt/error.hpp"

namespace quilt {

using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

/// Canonical form "p" or "p/q" with q > 0 and the fraction reduced.
inline std::string rat_to_string(const Rat& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

/// Strict parse of "p" or "p/q"; q must be positive, no whitespace allowed.
inline Rat rat_from_string(const std::string& s) {
  if (s.empty()) throw Error(ErrorKind::io_parse, "empty rational literal");
  auto bad = [&](const char* why) {
    throw Error(ErrorKind::io_parse,
                std::string("bad rational literal '") + s + "': " + why);
  };
  std::size_t slash = s.find('/');
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  auto check_int = [&](const std::string& part, bool allow_sign) {
    if (part.empty()) bad("missing digits");
    std::size_t i = 0;
    if (allow_sign && (part[0] == '-' || part[0] == '+')) i = 1;
    if (i == part.size()) bad("missing digits");
    for (; i < part.size(); ++i)
      if (part[i] < '0' || part[i] > '9') bad("non-digit character");
  };
  check_int(num, true);
  check_int(den, false);
  Rat r;
  if (r.set_str(num + "/" + den, 10) != 0) bad("not parseable");
  if (r.get_den() == 0) bad("zero denominator");
  r.canonicalize();
  return r;
}

/// FNV-1a over a byte string; used for stable provenance hashes in artifacts.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string fnv1a_hex(const std::string& bytes) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a(bytes);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace quilt
