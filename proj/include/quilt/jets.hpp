/**
 * Truncated polynomial rings ("jets"), derivations, and precision tracking.
 *
 * A JetAlgebra fixes named coordinates and a truncation order N; elements are
 * polynomials with every monomial of total degree > N dropped.  Arithmetic is
 * exact modulo that truncation.
 *
 * Derivations carry their own precision (the order to which their coefficient
 * jets are trusted).  Applying a derivation whose coefficients have a nonzero
 * constant term consumes one order of trust: the degree-m part of the output
 * depends on the degree-(m+1) part of the input, which a truncated jet does
 * not carry.  PrecisionTaggedValue records the trusted order so that
 * downstream comparisons never read beyond it.
 */
#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "quilt/error.hpp"
#include "quilt/rational.hpp"

namespace quilt {

/// Exponent vector; index matches the ring's coordinate list.
using Mono = std::vector<int>;

inline int mono_degree(const Mono& m) { return std::accumulate(m.begin(), m.end(), 0); }

inline Mono mono_mul(const Mono& a, const Mono& b) {
  Mono out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

struct JetAlgebra {
  std::vector<std::string> coords;
  int order = 0;

  int dim() const { return static_cast<int>(coords.size()); }
  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < coords.size(); ++i)
      if (coords[i] == name) return static_cast<int>(i);
    throw Error(ErrorKind::io_parse, "unknown coordinate '" + name + "'");
  }
  bool operator==(const JetAlgebra& o) const {
    return coords == o.coords && order == o.order;
  }
};

inline void validate_ring(const JetAlgebra& r) {
  if (r.order < 0) throw Error(ErrorKind::io_parse, "jet order must be nonnegative");
  for (std::size_t i = 0; i < r.coords.size(); ++i) {
    if (r.coords[i].empty())
      throw Error(ErrorKind::io_parse, "jet coordinates must have nonempty names");
    for (std::size_t j = i + 1; j < r.coords.size(); ++j)
      if (r.coords[i] == r.coords[j])
        throw Error(ErrorKind::io_parse, "duplicate jet coordinate '" + r.coords[i] + "'");
  }
}

struct Jet {
  JetAlgebra ring;
  std::map<Mono, Rat> terms;  // nonzero coefficients only; degrees <= ring.order

  Rat coeff(const Mono& m) const {
    auto it = terms.find(m);
    return it == terms.end() ? Rat(0) : it->second;
  }
  bool is_zero() const { return terms.empty(); }
  bool operator==(const Jet& o) const { return ring == o.ring && terms == o.terms; }
};

inline void require_same_ring(const Jet& a, const Jet& b) {
  if (!(a.ring == b.ring))
    throw Error(ErrorKind::io_parse, "jets live in different rings");
}

inline Jet jet_zero(JetAlgebra ring) { return Jet{std::move(ring), {}}; }

inline Jet make_jet(JetAlgebra ring, const std::map<Mono, Rat>& raw) {
  Jet out{std::move(ring), {}};
  for (const auto& [m, c] : raw) {
    if (static_cast<int>(m.size()) != out.ring.dim())
      throw Error(ErrorKind::io_parse, "monomial length does not match coordinate count");
    for (int e : m)
      if (e < 0) throw Error(ErrorKind::io_parse, "negative exponent in monomial");
    if (c == 0 || mono_degree(m) > out.ring.order) continue;
    out.terms[m] = c;
  }
  return out;
}

inline Jet jet_const(JetAlgebra ring, const Rat& c) {
  Jet out{std::move(ring), {}};
  if (c != 0 && out.ring.order >= 0) out.terms[Mono(out.ring.dim(), 0)] = c;
  return out;
}

inline Jet jet_var(JetAlgebra ring, const std::string& name) {
  Jet out{std::move(ring), {}};
  if (out.ring.order < 1)
    throw Error(ErrorKind::io_parse, "ring order too small for a coordinate jet");
  Mono m(out.ring.dim(), 0);
  m[out.ring.index_of(name)] = 1;
  out.terms[m] = 1;
  return out;
}

inline Jet add(const Jet& a, const Jet& b) {
  require_same_ring(a, b);
  Jet out = a;
  for (const auto& [m, c] : b.terms) {
    auto [it, fresh] = out.terms.try_emplace(m, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0) out.terms.erase(it);
    }
  }
  return out;
}

inline Jet scale(const Jet& a, const Rat& c) {
  Jet out{a.ring, {}};
  if (c == 0) return out;
  for (const auto& [m, v] : a.terms) out.terms[m] = v * c;
  return out;
}

inline Jet sub(const Jet& a, const Jet& b) { return add(a, scale(b, Rat(-1))); }

inline Jet mul(const Jet& a, const Jet& b) {
  require_same_ring(a, b);
  Jet out{a.ring, {}};
  for (const auto& [ma, ca] : a.terms) {
    int da = mono_degree(ma);
    for (const auto& [mb, cb] : b.terms) {
      if (da + mono_degree(mb) > a.ring.order) continue;
      Mono m = mono_mul(ma, mb);
      auto [it, fresh] = out.terms.try_emplace(m, ca * cb);
      if (!fresh) {
        it->second += ca * cb;
        if (it->second == 0) out.terms.erase(it);
      }
    }
  }
  return out;
}

/// Partial derivative; exact on representatives (the caller is responsible
/// for precision bookkeeping, see apply_derivation).
inline Jet derivative(const Jet& a, int coord) {
  if (coord < 0 || coord >= a.ring.dim())
    throw Error(ErrorKind::io_parse, "derivative coordinate out of range");
  Jet out{a.ring, {}};
  for (const auto& [m, c] : a.terms) {
    if (m[coord] == 0) continue;
    Mono d = m;
    d[coord] -= 1;
    out.terms[d] = c * m[coord];
  }
  return out;
}

/// Drop all monomials of degree > d (the ring stays the same).
inline Jet truncate_to(const Jet& a, int d) {
  Jet out{a.ring, {}};
  for (const auto& [m, c] : a.terms)
    if (mono_degree(m) <= d) out.terms[m] = c;
  return out;
}

inline Jet component(const Jet& a, int d) {
  Jet out{a.ring, {}};
  for (const auto& [m, c] : a.terms)
    if (mono_degree(m) == d) out.terms[m] = c;
  return out;
}

inline bool equal_to_order(const Jet& a, const Jet& b, int d) {
  require_same_ring(a, b);
  return truncate_to(a, d) == truncate_to(b, d);
}

/// Lowest degree with a nonzero term; ring.order + 1 for the zero jet.
inline int min_degree(const Jet& a) {
  int best = a.ring.order + 1;
  for (const auto& [m, c] : a.terms) best = std::min(best, mono_degree(m));
  return best;
}

/// Substitute images[i] for coordinate i of f's ring.  Every image must have
/// zero constant term (so truncation stays sound) and the target order must
/// not exceed the source order.
inline Jet substitute(const Jet& f, const std::vector<Jet>& images) {
  if (static_cast<int>(images.size()) != f.ring.dim())
    throw Error(ErrorKind::io_parse, "substitute: one image per coordinate required");
  JetAlgebra target = images.empty() ? f.ring : images.front().ring;
  for (const auto& g : images) {
    if (!(g.ring == target))
      throw Error(ErrorKind::io_parse, "substitute: images live in different rings");
    if (min_degree(g) < 1)
      throw Error(ErrorKind::io_parse, "substitute: images must have zero constant term");
  }
  if (target.order > f.ring.order)
    throw Error(ErrorKind::io_parse,
                "substitute: target order exceeds the source truncation");
  Jet out = jet_zero(target);
  for (const auto& [m, c] : f.terms) {
    Jet term = jet_const(target, c);
    for (int i = 0; i < f.ring.dim(); ++i)
      for (int e = 0; e < m[i]; ++e) term = mul(term, images[i]);
    out = add(out, term);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Derivations and precision

struct PrecisionTaggedValue {
  Jet value;
  int trusted_order = 0;  // comparisons must not read beyond this degree
};

struct Derivation {
  JetAlgebra ring;
  std::vector<Jet> coeffs;  // one per coordinate, in `ring`
  int precision = 0;        // order to which the coefficients are trusted
};

inline void validate_derivation(const Derivation& d) {
  if (static_cast<int>(d.coeffs.size()) != d.ring.dim())
    throw Error(ErrorKind::io_parse, "derivation needs one coefficient per coordinate");
  for (const auto& c : d.coeffs)
    if (!(c.ring == d.ring))
      throw Error(ErrorKind::io_parse, "derivation coefficient in the wrong ring");
}

inline bool has_constant_coefficient(const Derivation& d) {
  Mono unit(d.ring.dim(), 0);
  for (const auto& c : d.coeffs)
    if (c.coeff(unit) != 0) return true;
  return false;
}

/// Sum of coeff_i * df/dx_i.  The result is trusted to
/// min(D.precision, order of f) minus 1 exactly when some coefficient has a
/// nonzero constant term: that term shifts unknown degree-(m+1) content of f
/// down into degree m.
inline PrecisionTaggedValue apply_derivation(const Derivation& d,
                                             const PrecisionTaggedValue& f) {
  if (!(f.value.ring == d.ring))
    throw Error(ErrorKind::io_parse, "derivation and jet have mismatched coordinates");
  Jet out = jet_zero(d.ring);
  for (int i = 0; i < d.ring.dim(); ++i)
    out = add(out, mul(d.coeffs[i], derivative(f.value, i)));
  int trusted = std::min(d.precision, f.trusted_order);
  if (has_constant_coefficient(d)) trusted -= 1;
  if (trusted < 0)
    throw Error(ErrorKind::verification, "precision exhausted while applying a derivation");
  return PrecisionTaggedValue{truncate_to(out, trusted), trusted};
}

inline PrecisionTaggedValue apply_derivation(const Derivation& d, const Jet& f) {
  return apply_derivation(d, PrecisionTaggedValue{f, f.ring.order});
}

/// Combine tagged values; the result is only trusted where both inputs are.
inline PrecisionTaggedValue ptv_add(const PrecisionTaggedValue& a,
                                    const PrecisionTaggedValue& b) {
  int m = std::min(a.trusted_order, b.trusted_order);
  return {truncate_to(add(a.value, b.value), m), m};
}

inline PrecisionTaggedValue ptv_scale(const PrecisionTaggedValue& a, const Rat& c) {
  return {scale(a.value, c), a.trusted_order};
}

/// Product of tagged values: the degree-m part of fg only involves parts of
/// f and g of degree <= m, so the product inherits the smaller trust.
inline PrecisionTaggedValue ptv_mul(const PrecisionTaggedValue& a,
                                    const PrecisionTaggedValue& b) {
  int m = std::min(a.trusted_order, b.trusted_order);
  return {truncate_to(mul(a.value, b.value), m), m};
}

inline bool ptv_is_zero(const PrecisionTaggedValue& a) {
  return truncate_to(a.value, a.trusted_order).is_zero();
}

/// Commutator [d, e] = d∘e − e∘d as a derivation; its coefficients are
/// d(e_i) − e(d_i), each trusted per the application rule.
inline Derivation commutator(const Derivation& d, const Derivation& e) {
  if (!(d.ring == e.ring))
    throw Error(ErrorKind::io_parse, "derivations live in different rings");
  Derivation out;
  out.ring = d.ring;
  int trusted = std::min(d.precision, e.precision);
  if (has_constant_coefficient(d) || has_constant_coefficient(e)) trusted -= 1;
  if (trusted < 0)
    throw Error(ErrorKind::verification, "precision exhausted in a derivation commutator");
  for (int i = 0; i < d.ring.dim(); ++i) {
    PrecisionTaggedValue de = apply_derivation(d, PrecisionTaggedValue{e.coeffs[i], e.precision});
    PrecisionTaggedValue ed = apply_derivation(e, PrecisionTaggedValue{d.coeffs[i], d.precision});
    out.coeffs.push_back(truncate_to(sub(de.value, ed.value), trusted));
  }
  out.precision = trusted;
  return out;
}

inline Derivation add(const Derivation& d, const Derivation& e) {
  if (!(d.ring == e.ring))
    throw Error(ErrorKind::io_parse, "derivations live in different rings");
  Derivation out;
  out.ring = d.ring;
  out.precision = std::min(d.precision, e.precision);
  for (int i = 0; i < d.ring.dim(); ++i)
    out.coeffs.push_back(truncate_to(add(d.coeffs[i], e.coeffs[i]), out.precision));
  return out;
}

inline Derivation scale(const Derivation& d, const Rat& c) {
  Derivation out;
  out.ring = d.ring;
  out.precision = d.precision;
  for (const auto& f : d.coeffs) out.coeffs.push_back(scale(f, c));
  return out;
}

inline bool derivations_equal_to_order(const Derivation& a, const Derivation& b, int d) {
  if (!(a.ring == b.ring)) return false;
  for (int i = 0; i < a.ring.dim(); ++i)
    if (!equal_to_order(a.coeffs[i], b.coeffs[i], d)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json jet_to_json(const Jet& a) {
  nlohmann::ordered_json j;
  j["coords"] = a.ring.coords;
  j["order"] = a.ring.order;
  nlohmann::ordered_json terms = nlohmann::ordered_json::array();
  for (const auto& [m, c] : a.terms) {
    nlohmann::ordered_json t;
    t["mono"] = m;
    t["coeff"] = rat_to_string(c);
    terms.push_back(t);
  }
  j["terms"] = std::move(terms);
  return j;
}

inline Jet jet_from_json(const nlohmann::json& j) {
  JetAlgebra ring;
  for (const auto& c : j.at("coords")) ring.coords.push_back(c.get<std::string>());
  ring.order = j.at("order").get<int>();
  validate_ring(ring);
  std::map<Mono, Rat> raw;
  for (const auto& t : j.at("terms")) {
    Mono m;
    for (const auto& e : t.at("mono")) m.push_back(e.get<int>());
    Rat c = rat_from_string(t.at("coeff").get<std::string>());
    if (raw.count(m)) throw Error(ErrorKind::io_parse, "duplicate monomial in jet");
    if (mono_degree(m) > ring.order)
      throw Error(ErrorKind::io_parse, "jet term exceeds the stated order");
    raw[m] = c;
  }
  return make_jet(ring, raw);
}

}  // namespace quilt
