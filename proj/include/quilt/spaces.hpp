/**
 * Formal affine spaces carrying Lie-algebra actions.
 *
 * A GSpace is a jet algebra together with an action of a Lie algebra by
 * precision-tracked derivations.  On top of that this header provides
 *   - tensor products of such spaces (with coordinate prefixes),
 *   - the coisotropic-stabilizer test: Σ t^{ab} V_a ⊗ V_b = 0,
 *   - the quasi-Poisson commutativity test: Σ t^{ab} V_a(f)·V_b(g) = 0,
 *   - chord-series actions: a chord between two bound strands acts as the
 *     Casimir contraction of the two factors' fields,
 *   - exact bases of jets annihilated by a family of derivations,
 *   - the classical Poisson bracket ½ Σ (V_{ξ^i}f·V_{ξ_i}g − V_{ξ_i}f·V_{ξ^i}g),
 *   - selection of the unique group-action convention that passes the
 *     structural oracles.
 */
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quilt/chords.hpp"
#include "quilt/error.hpp"
#include "quilt/jets.hpp"
#include "quilt/liealg.hpp"
#include "quilt/linalg.hpp"

namespace quilt {

struct GSpace {
  JetAlgebra algebra;
  LieAlgebra lie;
  std::vector<Derivation> action;  // one derivation per Lie basis element
};

inline void validate_gspace(const GSpace& X) {
  validate_ring(X.algebra);
  validate_lie_algebra(X.lie);
  if (static_cast<int>(X.action.size()) != X.lie.dim())
    throw Error(ErrorKind::io_parse, "space needs one derivation per Lie basis element");
  for (const auto& d : X.action) {
    if (!(d.ring == X.algebra))
      throw Error(ErrorKind::io_parse, "action derivation lives on the wrong algebra");
    validate_derivation(d);
  }
}

/// The vector field of a general Lie element Σ xi_a e_a.
inline Derivation space_field(const GSpace& X, const SparseVec& xi) {
  Derivation out{X.algebra, std::vector<Jet>(X.algebra.dim(), jet_zero(X.algebra)),
                 X.algebra.order};
  bool first = true;
  for (const auto& [a, c] : xi) {
    if (a < 0 || a >= X.lie.dim())
      throw Error(ErrorKind::io_parse, "Lie element index out of range");
    const Derivation& d = X.action[a];
    out.precision = first ? d.precision : std::min(out.precision, d.precision);
    first = false;
    for (int i = 0; i < X.algebra.dim(); ++i)
      out.coeffs[i] = add(out.coeffs[i], scale(d.coeffs[i], c));
  }
  for (auto& cjet : out.coeffs) cjet = truncate_to(cjet, out.precision);
  return out;
}

/// The formal group of the subalgebra half of a Manin triple, acted on by
/// the whole double.
inline GSpace make_h_space(const ManinTriple& mt, int N, const ActionConvention& conv,
                           int max_n = 6) {
  GSpace X;
  X.algebra = JetAlgebra{
      std::vector<std::string>(mt.g.basis.begin(), mt.g.basis.begin() + mt.n), N};
  X.lie = mt.g;
  X.action = g_action_on_H(mt, N, conv, max_n);
  validate_gspace(X);
  return X;
}

/// A Lie algebra acting on its own coordinate ring by the adjoint action:
/// the field of basis element a moves the point x along [x, a].  With this
/// orientation a ↦ V_a is a Lie-algebra homomorphism; the coefficients are
/// linear and carry no constant term.
inline GSpace adjoint_space(const LieAlgebra& L, int N) {
  GSpace X;
  X.algebra = JetAlgebra{L.basis, N};
  X.lie = L;
  for (int a = 0; a < L.dim(); ++a) {
    std::vector<Jet> coeffs(L.dim(), jet_zero(X.algebra));
    for (int j = 0; j < L.dim(); ++j)
      for (const auto& [k, c] : L.c[j][a])
        coeffs[k] = add(coeffs[k], scale(jet_var(X.algebra, L.basis[j]), c));
    X.action.push_back(Derivation{X.algebra, std::move(coeffs), N});
  }
  validate_gspace(X);
  return X;
}

// ---------------------------------------------------------------------------
// Tensor products

struct TensorSpace {
  JetAlgebra ring;
  std::vector<GSpace> factors;
  std::vector<int> offsets;  // first coordinate index of each factor
  // fields[k][a]: the factor-k action of Lie basis element a, on the product.
  std::vector<std::vector<Derivation>> fields;
};

/// Push a jet on one factor into the product ring at the given offset.
inline Jet embed_jet(const Jet& f, const JetAlgebra& ring, int offset) {
  if (offset < 0 || offset + f.ring.dim() > ring.dim())
    throw Error(ErrorKind::io_parse, "jet embedding offset out of range");
  Jet out = jet_zero(ring);
  for (const auto& [m, c] : f.terms) {
    Mono mm(ring.dim(), 0);
    for (std::size_t i = 0; i < m.size(); ++i) mm[offset + static_cast<int>(i)] = m[i];
    out.terms[mm] = c;
  }
  return out;
}

inline Derivation embed_derivation(const Derivation& d, const JetAlgebra& ring,
                                   int offset) {
  Derivation out{ring, std::vector<Jet>(ring.dim(), jet_zero(ring)), d.precision};
  for (int i = 0; i < d.ring.dim(); ++i)
    out.coeffs[offset + i] = embed_jet(d.coeffs[i], ring, offset);
  return out;
}

inline TensorSpace tensor_space(const std::vector<GSpace>& factors,
                                const std::vector<std::string>& prefixes) {
  if (factors.empty())
    throw Error(ErrorKind::io_parse, "tensor product needs at least one factor");
  if (prefixes.size() != factors.size())
    throw Error(ErrorKind::io_parse, "tensor product needs one prefix per factor");
  TensorSpace out;
  out.factors = factors;
  out.ring.order = factors.front().algebra.order;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    if (factors[k].algebra.order != out.ring.order)
      throw Error(ErrorKind::io_parse, "tensor factors must share the jet order");
    out.offsets.push_back(out.ring.dim());
    for (const auto& c : factors[k].algebra.coords)
      out.ring.coords.push_back(prefixes[k] + c);
  }
  validate_ring(out.ring);
  for (std::size_t k = 0; k < factors.size(); ++k) {
    std::vector<Derivation> emb;
    for (const auto& d : factors[k].action)
      emb.push_back(embed_derivation(d, out.ring, out.offsets[k]));
    out.fields.push_back(std::move(emb));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Structural oracles

/// First coordinate pair (i, j) where the symmetric tensor field
/// Σ t^{ab} V_a ⊗ V_b fails to vanish to the trusted order, if any.
inline std::optional<std::pair<int, int>> coisotropic_stabilizers_check(
    const GSpace& X, const CasimirElement& t) {
  if (t.t.nrows != X.lie.dim())
    throw Error(ErrorKind::io_parse, "Casimir size does not match the Lie algebra");
  int trusted = X.algebra.order;
  for (const auto& d : X.action) trusted = std::min(trusted, d.precision);
  for (int i = 0; i < X.algebra.dim(); ++i)
    for (int j = 0; j < X.algebra.dim(); ++j) {
      Jet s = jet_zero(X.algebra);
      for (int a = 0; a < t.t.nrows; ++a)
        for (int b = 0; b < t.t.ncols; ++b) {
          if (t.t.at(a, b) == 0) continue;
          s = add(s, scale(mul(X.action[a].coeffs[i], X.action[b].coeffs[j]),
                           t.t.at(a, b)));
        }
      if (!truncate_to(s, trusted).is_zero()) return std::make_pair(i, j);
    }
  return std::nullopt;
}

/// Exponent vectors of total degree <= d in the ring's coordinates, ordered
/// by degree and then reverse-lexicographically within each degree.  This is
/// the canonical column order used by the invariant-jet solver.
inline std::vector<Mono> monomials_up_to(const JetAlgebra& ring, int d) {
  std::vector<Mono> out;
  Mono cur(ring.dim(), 0);
  std::function<void(int, int)> fill = [&](int pos, int left) {
    if (pos == ring.dim()) {
      if (left == 0) out.push_back(cur);
      return;
    }
    for (int e = left; e >= 0; --e) {
      cur[pos] = e;
      fill(pos + 1, left - e);
      cur[pos] = 0;
    }
  };
  for (int deg = 0; deg <= d; ++deg) fill(0, deg);
  return out;
}

/// First pair of monomials (f, g) with Σ t^{ab} V_a(f)·V_b(g) nonzero to the
/// common trusted order; monomials run through degrees 1..test_degree.
inline std::optional<std::pair<Mono, Mono>> quasi_poisson_comm_check(
    const GSpace& X, const CasimirElement& t, int test_degree = 2) {
  if (t.t.nrows != X.lie.dim())
    throw Error(ErrorKind::io_parse, "Casimir size does not match the Lie algebra");
  std::vector<Mono> monos;
  for (const Mono& m : monomials_up_to(X.algebra, test_degree))
    if (mono_degree(m) >= 1) monos.push_back(m);
  for (const Mono& mf : monos)
    for (const Mono& mg : monos) {
      PrecisionTaggedValue f{make_jet(X.algebra, {{mf, Rat(1)}}), X.algebra.order};
      PrecisionTaggedValue g{make_jet(X.algebra, {{mg, Rat(1)}}), X.algebra.order};
      std::optional<PrecisionTaggedValue> acc;
      for (int a = 0; a < t.t.nrows; ++a)
        for (int b = 0; b < t.t.ncols; ++b) {
          if (t.t.at(a, b) == 0) continue;
          PrecisionTaggedValue term =
              ptv_scale(ptv_mul(apply_derivation(X.action[a], f),
                                apply_derivation(X.action[b], g)),
                        t.t.at(a, b));
          acc = acc ? ptv_add(*acc, term) : term;
        }
      if (acc && !ptv_is_zero(*acc)) return std::make_pair(mf, mg);
    }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Chord actions

struct ChordBinding {
  int factor = 0;
  int sign = 1;  // -1 marks a strand carrying the opposite-Casimir copy
};

struct ChordAction {
  StrandSet strands;
  std::vector<ChordBinding> binding;  // aligned with strands
  JetAlgebra ring;
  DenseMat t;
  std::vector<std::vector<Derivation>> fields;  // [factor][Lie basis]
};

inline ChordAction make_chord_action(StrandSet strands, std::vector<ChordBinding> binding,
                                     const TensorSpace& space, const CasimirElement& t) {
  validate_strands(strands);
  if (binding.size() != strands.size())
    throw Error(ErrorKind::io_parse, "every strand needs a binding");
  for (const auto& b : binding) {
    if (b.factor < 0 || b.factor >= static_cast<int>(space.factors.size()))
      throw Error(ErrorKind::io_parse, "strand bound to a factor that does not exist");
    if (b.sign != 1 && b.sign != -1)
      throw Error(ErrorKind::io_parse, "strand sign must be +1 or -1");
    if (space.factors[b.factor].lie.dim() != t.t.nrows)
      throw Error(ErrorKind::io_parse, "Casimir size does not match the bound factor");
  }
  return ChordAction{std::move(strands), std::move(binding), space.ring, t.t,
                     space.fields};
}

/// One chord between strands u, v acts as Σ_{a,b} t^{ab} V_a^{(u)} ∘ V_b^{(v)},
/// scaled by the product of the two strand signs (an opposite-Casimir strand
/// flips the sign of every chord touching it once).
inline PrecisionTaggedValue apply_chord(const ChordAction& act, const Chord& c,
                                        const PrecisionTaggedValue& f) {
  if (!(f.value.ring == act.ring))
    throw Error(ErrorKind::io_parse, "chord operand lives on the wrong algebra");
  const ChordBinding& bu = act.binding.at(c.first);
  const ChordBinding& bv = act.binding.at(c.second);
  Rat sgn = Rat(bu.sign) * Rat(bv.sign);
  std::optional<PrecisionTaggedValue> acc;
  for (int a = 0; a < act.t.nrows; ++a)
    for (int b = 0; b < act.t.ncols; ++b) {
      if (act.t.at(a, b) == 0) continue;
      PrecisionTaggedValue g = apply_derivation(act.fields[bv.factor][b], f);
      g = apply_derivation(act.fields[bu.factor][a], g);
      acc = acc ? ptv_add(*acc, ptv_scale(g, act.t.at(a, b) * sgn))
                : ptv_scale(g, act.t.at(a, b) * sgn);
    }
  if (!acc) return PrecisionTaggedValue{jet_zero(f.value.ring), f.trusted_order};
  return *acc;
}

/// A word acts as the composition of its chords, rightmost chord first, so
/// that concatenation of words corresponds to composition of operators.
inline PrecisionTaggedValue apply_chord_word(const ChordAction& act, const Word& w,
                                             const PrecisionTaggedValue& f) {
  PrecisionTaggedValue cur = f;
  for (auto it = w.rbegin(); it != w.rend(); ++it) cur = apply_chord(act, *it, cur);
  return cur;
}

/// The formal-parameter-graded action of a chord series: slot d collects the
/// degree-d words applied to f.
inline std::vector<PrecisionTaggedValue> apply_chord_series(
    const ChordAction& act, const ChordSeries& s, const PrecisionTaggedValue& f) {
  if (!(s.strands == act.strands))
    throw Error(ErrorKind::io_parse, "series strands do not match the chord action");
  std::vector<PrecisionTaggedValue> out(
      s.trunc + 1, PrecisionTaggedValue{jet_zero(act.ring), f.trusted_order});
  for (const auto& [w, coeff] : s.coeffs) {
    int d = static_cast<int>(w.size());
    out[d] = ptv_add(out[d], ptv_scale(apply_chord_word(act, w, f), coeff));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Invariants

/// Basis of the invariants of the generators on the space of degree-<= d
/// jets.  A derivation whose coefficients carry a constant term maps that
/// space into degree-<= (d-1) jets — the degree-(d+1) content it would need
/// is not part of a degree-d jet — so its matrix targets degree d-1; pure
/// positive-degree derivations target degree d.  The returned basis is the
/// exact kernel of the stacked matrices, canonical in the monomial order of
/// monomials_up_to.
inline std::vector<Jet> invariant_jets(const JetAlgebra& ring,
                                       const std::vector<Derivation>& generators,
                                       int d) {
  if (d < 0 || d > ring.order)
    throw Error(ErrorKind::io_parse, "invariants degree must lie within the jet order");
  std::vector<Mono> cols = monomials_up_to(ring, d);
  std::vector<SparseVec> rows;
  for (const auto& g : generators) {
    if (!(g.ring == ring))
      throw Error(ErrorKind::io_parse, "invariants generator on the wrong algebra");
    int cap = has_constant_coefficient(g) ? d - 1 : d;
    if (std::min(g.precision, ring.order) < d)
      throw Error(ErrorKind::verification,
                  "precision exhausted: generator trusted to order " +
                      std::to_string(std::min(g.precision, ring.order)) +
                      " cannot resolve invariants of degree " + std::to_string(d));
    std::map<Mono, SparseVec> block;  // one condition per output monomial
    for (std::size_t ci = 0; ci < cols.size(); ++ci) {
      Jet image = jet_zero(ring);
      for (int i = 0; i < ring.dim(); ++i)
        image = add(image, mul(g.coeffs[i],
                               derivative(make_jet(ring, {{cols[ci], Rat(1)}}), i)));
      for (const auto& [m, c] : truncate_to(image, cap).terms)
        block[m][static_cast<int>(ci)] = c;
    }
    for (auto& [m, row] : block) rows.push_back(std::move(row));
  }
  std::vector<SparseVec> kernel = kernel_basis(static_cast<int>(cols.size()), rows);
  std::vector<Jet> out;
  for (const auto& k : kernel) {
    std::map<Mono, Rat> raw;
    for (const auto& [ci, c] : k) raw[cols[ci]] = c;
    out.push_back(make_jet(ring, raw));
  }
  return out;
}

// ---------------------------------------------------------------------------
// The classical Poisson bracket

struct PoissonBivector {
  GSpace space;
  int n = 0;  // action indices 0..n-1 are the subalgebra, n..2n-1 the dual
};

inline PoissonBivector poisson_bivector(const GSpace& X, int n_sub) {
  if (X.lie.dim() != 2 * n_sub)
    throw Error(ErrorKind::io_parse, "Poisson bivector needs the action of a double");
  return PoissonBivector{X, n_sub};
}

/// {f, g} = ½ Σ_i (V_{ξ^i}f · V_{ξ_i}g − V_{ξ_i}f · V_{ξ^i}g).
inline PrecisionTaggedValue poisson_bracket(const PoissonBivector& pi,
                                            const PrecisionTaggedValue& f,
                                            const PrecisionTaggedValue& g) {
  std::optional<PrecisionTaggedValue> acc;
  for (int i = 0; i < pi.n; ++i) {
    const Derivation& vi = pi.space.action[i];
    const Derivation& vdual = pi.space.action[pi.n + i];
    PrecisionTaggedValue pos =
        ptv_mul(apply_derivation(vdual, f), apply_derivation(vi, g));
    PrecisionTaggedValue neg =
        ptv_mul(apply_derivation(vi, f), apply_derivation(vdual, g));
    PrecisionTaggedValue term = ptv_add(pos, ptv_scale(neg, Rat(-1)));
    acc = acc ? ptv_add(*acc, term) : term;
  }
  if (!acc) return PrecisionTaggedValue{jet_zero(f.value.ring), f.trusted_order};
  return ptv_scale(*acc, rat(1, 2));
}

inline PrecisionTaggedValue poisson_bracket(const PoissonBivector& pi, const Jet& f,
                                            const Jet& g) {
  return poisson_bracket(pi, PrecisionTaggedValue{f, f.ring.order},
                         PrecisionTaggedValue{g, g.ring.order});
}

// ---------------------------------------------------------------------------
// Convention selection

struct ConventionReport {
  ActionConvention convention;
  bool homomorphism = false;
  bool coisotropic = false;
  bool quasi_poisson = false;
  bool invariant_dimension = false;

  bool all_ok() const {
    return homomorphism && coisotropic && quasi_poisson && invariant_dimension;
  }
};

/// Run every structural oracle against all four action conventions on the
/// formal group of the triple and return the unique survivor.  N is the jet
/// order used for the probes (at least 3 so degree-2 probes stay trusted).
inline std::pair<ActionConvention, std::vector<ConventionReport>>
select_action_convention(const ManinTriple& mt, int N, int max_n = 6) {
  if (N < 3)
    throw Error(ErrorKind::io_parse, "convention selection needs jet order >= 3");
  CasimirElement t = casimir(mt);
  std::vector<ConventionReport> reports;
  std::optional<ActionConvention> selected;
  for (const ActionConvention& conv : all_action_conventions()) {
    GSpace X = make_h_space(mt, N, conv, max_n);
    ConventionReport rep;
    rep.convention = conv;
    rep.homomorphism = !action_homomorphism_witness(X.lie, X.action, N - 1).has_value();
    rep.coisotropic = !coisotropic_stabilizers_check(X, t).has_value();
    rep.quasi_poisson = !quasi_poisson_comm_check(X, t, 2).has_value();
    // Diagonal invariants of the two-fold product must look like jets on a
    // single copy: the quotient by the diagonal translation is the group.
    TensorSpace prod = tensor_space({X, X}, {"l.", "r."});
    std::vector<Derivation> gens;
    for (int i = 0; i < mt.n; ++i)
      gens.push_back(add(prod.fields[0][i], prod.fields[1][i]));
    int probe_degree = 2;
    std::vector<Jet> inv = invariant_jets(prod.ring, gens, probe_degree);
    JetAlgebra model{
        std::vector<std::string>(mt.g.basis.begin(), mt.g.basis.begin() + mt.n), N};
    rep.invariant_dimension = inv.size() == monomials_up_to(model, probe_degree).size();
    if (rep.all_ok()) {
      if (selected)
        throw Error(ErrorKind::verification,
                    "convention selection is ambiguous: " + convention_name(*selected) +
                        " and " + convention_name(conv) + " both pass");
      selected = conv;
    }
    reports.push_back(rep);
  }
  if (!selected)
    throw Error(ErrorKind::verification, "no action convention passes the oracles");
  return {*selected, std::move(reports)};
}

}  // namespace quilt
