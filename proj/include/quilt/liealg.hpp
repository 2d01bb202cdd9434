/**
 * Exact Lie-algebra kernel: bialgebras by structure constants, Drinfeld
 * doubles as Manin triples, Casimir elements, coisotropy tests, truncated
 * Baker-Campbell-Hausdorff, formal factorization of the double, and the
 * induced action of the double on the formal group of the subalgebra.
 *
 * The double of (h, cobracket d) lives on h ⊕ h* with
 *   [e_i, e_j]   from the bracket constants c,
 *   [e^i, e^j]   from the cobracket constants d,
 *   [e_i, e^j] = Σ_m d^{jm}_i e_m + Σ_m c^j_{mi} e^m,
 * the mixed bracket being forced by invariance of the canonical pairing
 * ⟨e_i, e^j⟩ = δ_i^j.  Jacobi for the double is exactly the cocycle
 * condition on the cobracket, so validation reports failures in those terms.
 *
 * BCH is evaluated through the Dynkin form: the word coefficients of
 * log(exp a · exp b) in the free associative algebra are cached per degree,
 * and each word w contributes (coeff/|w|) times its left-nested bracketing.
 */
#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "quilt/error.hpp"
#include "quilt/jets.hpp"
#include "quilt/linalg.hpp"
#include "quilt/rational.hpp"

namespace quilt {

struct LieAlgebra {
  std::vector<std::string> basis;
  // c[i][j] holds [e_i, e_j] as a sparse vector over the basis.
  std::vector<std::vector<SparseVec>> c;

  int dim() const { return static_cast<int>(basis.size()); }
  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < basis.size(); ++i)
      if (basis[i] == name) return static_cast<int>(i);
    throw Error(ErrorKind::io_parse, "unknown basis label '" + name + "'");
  }
  SparseVec bracket(const SparseVec& x, const SparseVec& y) const {
    SparseVec out;
    for (const auto& [i, xi] : x)
      for (const auto& [j, yj] : y) axpy(out, xi * yj, c[i][j]);
    return out;
  }
};

inline LieAlgebra abelian_lie_algebra(std::vector<std::string> basis) {
  LieAlgebra L;
  L.basis = std::move(basis);
  L.c.assign(L.basis.size(), std::vector<SparseVec>(L.basis.size()));
  return L;
}

inline void validate_lie_algebra(const LieAlgebra& L) {
  int n = L.dim();
  for (int i = 0; i < n; ++i) {
    if (L.basis[i].empty())
      throw Error(ErrorKind::io_parse, "basis labels must be nonempty");
    for (int j = i + 1; j < n; ++j)
      if (L.basis[i] == L.basis[j])
        throw Error(ErrorKind::io_parse, "duplicate basis label '" + L.basis[i] + "'");
  }
  if (static_cast<int>(L.c.size()) != n)
    throw Error(ErrorKind::io_parse, "structure constant table has the wrong size");
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(L.c[i].size()) != n)
      throw Error(ErrorKind::io_parse, "structure constant table has the wrong size");
    for (int j = 0; j < n; ++j)
      for (const auto& [k, v] : L.c[i][j])
        if (k < 0 || k >= n)
          throw Error(ErrorKind::io_parse, "structure constant index out of range");
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) {
      SparseVec s = L.c[i][j];
      axpy(s, Rat(1), L.c[j][i]);
      if (!s.empty())
        throw Error(ErrorKind::io_parse, "bracket table is not antisymmetric at (" +
                                             L.basis[i] + ", " + L.basis[j] + ")");
    }
}

struct JacobiWitness {
  int i = 0, j = 0, k = 0;
  SparseVec residual;
};

/// First triple i < j < k violating Jacobi, or nothing if the identity holds.
inline std::optional<JacobiWitness> check_jacobi(const LieAlgebra& L) {
  int n = L.dim();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        SparseVec s = L.bracket(L.c[j][k], SparseVec{{i, Rat(1)}});
        axpy(s, Rat(1), L.bracket(L.c[k][i], SparseVec{{j, Rat(1)}}));
        axpy(s, Rat(1), L.bracket(L.c[i][j], SparseVec{{k, Rat(1)}}));
        // [[x,y],z] summed cyclically equals the Jacobi residual.
        if (!s.empty()) return JacobiWitness{i, j, k, s};
      }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Bialgebras and doubles

struct LieBialgebra {
  LieAlgebra h;
  // d[i] is the cobracket of e_i in wedge coordinates: {(j,k) with j<k} -> d^{jk}_i.
  std::vector<std::map<std::pair<int, int>, Rat>> d;
};

inline void validate_bialgebra_shape(const LieBialgebra& b) {
  validate_lie_algebra(b.h);
  int n = b.h.dim();
  if (static_cast<int>(b.d.size()) != n)
    throw Error(ErrorKind::io_parse, "cobracket table needs one entry per basis element");
  for (const auto& row : b.d)
    for (const auto& [jk, v] : row) {
      auto [j, k] = jk;
      if (j < 0 || k < 0 || j >= n || k >= n)
        throw Error(ErrorKind::io_parse, "cobracket index out of range");
      if (j >= k)
        throw Error(ErrorKind::io_parse, "cobracket wedge indices must be ordered j < k");
    }
}

struct ManinTriple {
  LieAlgebra g;      // dimension 2n; indices 0..n-1 are h, n..2n-1 are h*
  int n = 0;         // dim h
  DenseMat pairing;  // ⟨basis_a, basis_b⟩
};

namespace detail {

/// d^{jk}_i for arbitrary index order (antisymmetric in j,k).
inline Rat cobracket_entry(const LieBialgebra& b, int j, int k, int i) {
  if (j == k) return Rat(0);
  bool flip = j > k;
  if (flip) std::swap(j, k);
  auto it = b.d[i].find({j, k});
  Rat v = it == b.d[i].end() ? Rat(0) : it->second;
  return flip ? Rat(-v) : v;
}

}  // namespace detail

/// The double g = h ⊕ h* of a Lie bialgebra, with the canonical pairing.
/// Throws when the double fails Jacobi, which is exactly a violation of the
/// cobracket cocycle condition.
inline ManinTriple drinfeld_double(const LieBialgebra& b) {
  validate_bialgebra_shape(b);
  int n = b.h.dim();
  ManinTriple mt;
  mt.n = n;
  mt.g.basis = b.h.basis;
  for (const auto& x : b.h.basis) mt.g.basis.push_back(x + "*");
  mt.g.c.assign(2 * n, std::vector<SparseVec>(2 * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // [e_i, e_j]: the bracket of h.
      mt.g.c[i][j] = b.h.c[i][j];
      // [e^i, e^j] = Σ_k d^{ij}_k e^k.
      SparseVec duals;
      for (int k = 0; k < n; ++k) {
        Rat v = detail::cobracket_entry(b, i, j, k);
        if (v != 0) duals[n + k] = v;
      }
      mt.g.c[n + i][n + j] = duals;
      // [e_i, e^j] = Σ_m d^{jm}_i e_m + Σ_m c^j_{mi} e^m.
      SparseVec mixed;
      for (int m = 0; m < n; ++m) {
        Rat v = detail::cobracket_entry(b, j, m, i);
        if (v != 0) mixed[m] = v;
        auto it = b.h.c[m][i].find(j);
        if (it != b.h.c[m][i].end() && it->second != 0) mixed[n + m] += it->second;
      }
      for (auto it = mixed.begin(); it != mixed.end();)
        it = it->second == 0 ? mixed.erase(it) : std::next(it);
      mt.g.c[i][n + j] = mixed;
      mt.g.c[n + j][i] = scaled(mixed, Rat(-1));
    }
  mt.pairing = DenseMat(2 * n, 2 * n);
  for (int i = 0; i < n; ++i) {
    mt.pairing.at(i, n + i) = 1;
    mt.pairing.at(n + i, i) = 1;
  }
  validate_lie_algebra(mt.g);
  if (auto w = check_jacobi(mt.g))
    throw Error(ErrorKind::verification,
                "cobracket violates the cocycle condition: double fails Jacobi at (" +
                    mt.g.basis[w->i] + ", " + mt.g.basis[w->j] + ", " + mt.g.basis[w->k] +
                    ")");
  return mt;
}

// ---------------------------------------------------------------------------
// Casimir elements and coisotropy

struct CasimirElement {
  DenseMat t;  // symmetric ad-invariant tensor t^{ab}
};

/// Witness (i, a, b) where the ad-invariance sum of t fails, if any.
inline std::optional<std::tuple<int, int, int>> casimir_invariance_witness(
    const LieAlgebra& L, const DenseMat& t) {
  int n = L.dim();
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Rat s = 0;
        for (int cc = 0; cc < n; ++cc) {
          auto ia = L.c[i][cc].find(a);
          if (ia != L.c[i][cc].end()) s += ia->second * t.at(cc, b);
        }
        // The loop above sums c^a_{ic} t^{cb}; symmetrically for the second slot.
        for (int cc = 0; cc < n; ++cc) {
          auto ib = L.c[i][cc].find(b);
          if (ib != L.c[i][cc].end()) s += ib->second * t.at(a, cc);
        }
        if (s != 0) return std::make_tuple(i, a, b);
      }
  return std::nullopt;
}

/// t = pairing^{-1}; for the canonical double this is Σ_i e_i⊗e^i + e^i⊗e_i.
inline CasimirElement casimir(const ManinTriple& mt) {
  auto inv = mat_inverse(mt.pairing);
  if (!inv)
    throw Error(ErrorKind::verification, "pairing of the triple is degenerate");
  CasimirElement out{*inv};
  for (int a = 0; a < out.t.nrows; ++a)
    for (int b = a + 1; b < out.t.ncols; ++b)
      if (out.t.at(a, b) != out.t.at(b, a))
        throw Error(ErrorKind::verification, "inverse pairing is not symmetric");
  if (auto w = casimir_invariance_witness(mt.g, out.t)) {
    auto [i, a, b] = *w;
    throw Error(ErrorKind::verification,
                "inverse pairing is not ad-invariant at (" + mt.g.basis[i] + ", " +
                    mt.g.basis[a] + ", " + mt.g.basis[b] + ")");
  }
  return out;
}

struct Subalgebra {
  std::vector<SparseVec> span;
};

/// True iff the image of t in S²(g/c) vanishes.  Requires c to be closed
/// under the bracket.
inline bool is_coisotropic(const Subalgebra& c, const LieAlgebra& g,
                           const CasimirElement& t) {
  RowReducer span;
  for (const auto& v : c.span) span.add_row(v);
  for (const auto& v : c.span)
    for (const auto& w : c.span)
      if (!span.contains(g.bracket(v, w)))
        throw Error(ErrorKind::verification, "span is not closed under the bracket");
  int n = g.dim();
  // Quotient coordinates: reduce each basis vector modulo the span; the
  // surviving non-pivot coordinates parametrize g/c.
  std::vector<SparseVec> q(n);
  for (int a = 0; a < n; ++a) {
    SparseVec red = span.reduce(SparseVec{{a, Rat(1)}});
    for (const auto& [k, v] : red)
      if (!span.is_pivot(k)) q[a][k] = v;
  }
  for (int alpha = 0; alpha < n; ++alpha)
    for (int beta = 0; beta < n; ++beta) {
      Rat s = 0;
      for (int a = 0; a < n; ++a) {
        auto ia = q[a].find(alpha);
        if (ia == q[a].end()) continue;
        for (int b = 0; b < n; ++b) {
          auto ib = q[b].find(beta);
          if (ib != q[b].end()) s += t.t.at(a, b) * ia->second * ib->second;
        }
      }
      if (s != 0) return false;
    }
  return true;
}

// ---------------------------------------------------------------------------
// Baker-Campbell-Hausdorff

namespace detail {

/// Word coefficients of log(exp a · exp b) in the free associative algebra,
/// divided by the word length (the Dynkin normalization), for all words of
/// length 1..N over the letters 'a', 'b'.
inline const std::vector<std::pair<std::string, Rat>>& bch_words(int N) {
  static std::mutex mu;
  static std::map<int, std::vector<std::pair<std::string, Rat>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(N);
  if (it != cache.end()) return it->second;
  using Free = std::map<std::string, Rat>;
  auto free_mul = [N](const Free& x, const Free& y) {
    Free out;
    for (const auto& [wx, cx] : x)
      for (const auto& [wy, cy] : y) {
        if (static_cast<int>(wx.size() + wy.size()) > N) continue;
        out[wx + wy] += cx * cy;
      }
    return out;
  };
  auto free_exp = [&](char letter) {
    Free out{{"", Rat(1)}};
    Rat inv_fact = 1;
    std::string w;
    for (int k = 1; k <= N; ++k) {
      w.push_back(letter);
      inv_fact /= k;
      out[w] = inv_fact;
    }
    return out;
  };
  Free prod = free_mul(free_exp('a'), free_exp('b'));
  prod.erase("");  // u = exp(a)exp(b) - 1
  Free log_sum, power{{"", Rat(1)}};
  for (int m = 1; m <= N; ++m) {
    power = free_mul(power, prod);
    Rat sign = (m % 2 == 1) ? Rat(1, m) : Rat(-1, m);
    for (const auto& [w, cv] : power) log_sum[w] += sign * cv;
  }
  std::vector<std::pair<std::string, Rat>> out;
  for (const auto& [w, cv] : log_sum) {
    if (cv == 0 || w.empty()) continue;
    out.emplace_back(w, cv / static_cast<int>(w.size()));
  }
  auto [pos, fresh] = cache.emplace(N, std::move(out));
  (void)fresh;
  return pos->second;
}

}  // namespace detail

/// BCH series of two algebra-valued jets, truncated at words of total
/// degree N.  Each cached word contributes its left-nested bracketing
/// (the Dynkin-Specht-Wever projection).
inline std::vector<Jet> bch_jets(const LieAlgebra& L, const std::vector<Jet>& x,
                                 const std::vector<Jet>& y, int N, int max_n = 6) {
  if (N < 0 || N > max_n)
    throw Error(ErrorKind::io_parse,
                "bch degree " + std::to_string(N) + " exceeds the configured maximum " +
                    std::to_string(max_n));
  int n = L.dim();
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw Error(ErrorKind::io_parse, "bch arguments must have one jet per basis element");
  JetAlgebra ring = n > 0 ? x[0].ring : JetAlgebra{};
  auto jet_bracket = [&](const std::vector<Jet>& u, const std::vector<Jet>& v) {
    std::vector<Jet> out(n, jet_zero(ring));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (u[i].is_zero() || v[j].is_zero()) continue;
        Jet uv = mul(u[i], v[j]);
        for (const auto& [k, cc] : L.c[i][j]) out[k] = add(out[k], scale(uv, cc));
      }
    return out;
  };
  std::vector<Jet> acc(n, jet_zero(ring));
  for (const auto& [w, coeff] : detail::bch_words(N)) {
    std::vector<Jet> cur = (w[0] == 'a') ? x : y;
    for (std::size_t p = 1; p < w.size(); ++p)
      cur = jet_bracket(cur, w[p] == 'a' ? x : y);
    for (int i = 0; i < n; ++i)
      if (!cur[i].is_zero()) acc[i] = add(acc[i], scale(cur[i], coeff));
  }
  return acc;
}

/// BCH on plain algebra elements (rational coefficients).
inline SparseVec bch(const LieAlgebra& L, const SparseVec& x, const SparseVec& y, int N,
                     int max_n = 6) {
  JetAlgebra scalars{{}, 0};
  auto lift = [&](const SparseVec& v) {
    std::vector<Jet> out(L.dim(), jet_zero(scalars));
    for (const auto& [i, c] : v) out[i] = jet_const(scalars, c);
    return out;
  };
  std::vector<Jet> r = bch_jets(L, lift(x), lift(y), N, max_n);
  SparseVec out;
  for (int i = 0; i < L.dim(); ++i) {
    Rat c = r[i].coeff(Mono{});
    if (c != 0) out[i] = c;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Factorization of the double and the action on the formal group

enum class FactorOrder {
  dual_then_group,  // z = bch(λ, x) with λ in h*, x in h
  group_then_dual,  // z = bch(x, λ)
};

struct Factorization {
  std::vector<Jet> dual_part;   // supported on indices n..2n-1
  std::vector<Jet> group_part;  // supported on indices 0..n-1
};

/// Split a constant-term-free g-valued jet as a truncated product of the two
/// formal subgroups, by degreewise Newton correction.  The recomposition is
/// re-checked exactly modulo degree > N.
inline Factorization factorize(const std::vector<Jet>& z, const ManinTriple& mt, int N,
                               FactorOrder order = FactorOrder::dual_then_group,
                               int max_n = 6) {
  int dim = mt.g.dim();
  if (static_cast<int>(z.size()) != dim)
    throw Error(ErrorKind::io_parse, "factorize: one jet per double basis element required");
  JetAlgebra ring = dim > 0 ? z[0].ring : JetAlgebra{};
  for (const auto& f : z) {
    if (!(f.ring == ring))
      throw Error(ErrorKind::io_parse, "factorize: jets live in different rings");
    if (!f.is_zero() && min_degree(f) < 1)
      throw Error(ErrorKind::io_parse, "factorize: input must have no constant term");
  }
  Factorization out{std::vector<Jet>(dim, jet_zero(ring)),
                    std::vector<Jet>(dim, jet_zero(ring))};
  for (int m = 1; m <= N; ++m) {
    const std::vector<Jet>& first =
        order == FactorOrder::dual_then_group ? out.dual_part : out.group_part;
    const std::vector<Jet>& second =
        order == FactorOrder::dual_then_group ? out.group_part : out.dual_part;
    std::vector<Jet> recomposed = bch_jets(mt.g, first, second, N, max_n);
    for (int i = 0; i < dim; ++i) {
      Jet r = component(sub(z[i], recomposed[i]), m);
      if (r.is_zero()) continue;
      auto& slot = i < mt.n ? out.group_part : out.dual_part;
      slot[i] = add(slot[i], r);
    }
  }
  const std::vector<Jet>& first =
      order == FactorOrder::dual_then_group ? out.dual_part : out.group_part;
  const std::vector<Jet>& second =
      order == FactorOrder::dual_then_group ? out.group_part : out.dual_part;
  std::vector<Jet> recomposed = bch_jets(mt.g, first, second, N, max_n);
  for (int i = 0; i < dim; ++i)
    if (!equal_to_order(recomposed[i], z[i], std::min(N, ring.order)))
      throw Error(ErrorKind::solver, "factorization failed to recompose");
  return out;
}

enum class ActionSide {
  multiply_left,   // move the point by exp(t·ξ) on the left
  multiply_right,  // move the point by exp(t·ξ) on the right
};

struct ActionConvention {
  ActionSide side = ActionSide::multiply_right;
  FactorOrder order = FactorOrder::dual_then_group;
};

inline std::vector<ActionConvention> all_action_conventions() {
  return {{ActionSide::multiply_left, FactorOrder::dual_then_group},
          {ActionSide::multiply_left, FactorOrder::group_then_dual},
          {ActionSide::multiply_right, FactorOrder::dual_then_group},
          {ActionSide::multiply_right, FactorOrder::group_then_dual}};
}

inline std::string convention_name(const ActionConvention& c) {
  std::string side = c.side == ActionSide::multiply_left ? "left-multiply" : "right-multiply";
  std::string ord =
      c.order == FactorOrder::dual_then_group ? "dual-then-group" : "group-then-dual";
  return side + "/" + ord;
}

/// One derivation on the formal group coordinates per basis element of the
/// double: write the moved point exp(t·ξ)·p or p·exp(t·ξ) in the double,
/// split it per the factor order, and differentiate the group part at t = 0.
/// Coefficients are exact to jet order N.
inline std::vector<Derivation> g_action_on_H(const ManinTriple& mt, int N,
                                             const ActionConvention& conv,
                                             int max_n = 6) {
  int n = mt.n, dim = mt.g.dim();
  std::string flow = "@t";
  for (bool clash = true; clash;) {
    clash = false;
    for (int i = 0; i < n; ++i)
      if (mt.g.basis[i] == flow) {
        flow += "_";
        clash = true;
      }
  }
  JetAlgebra ring_tx;
  ring_tx.coords.push_back(flow);
  for (int i = 0; i < n; ++i) ring_tx.coords.push_back(mt.g.basis[i]);
  ring_tx.order = N + 1;
  JetAlgebra ring_x{std::vector<std::string>(mt.g.basis.begin(), mt.g.basis.begin() + n),
                    N};
  // The generic point X = Σ x_i e_i of the formal group.
  std::vector<Jet> X(dim, jet_zero(ring_tx));
  for (int i = 0; i < n; ++i) X[i] = jet_var(ring_tx, mt.g.basis[i]);
  std::vector<Derivation> out;
  for (int a = 0; a < dim; ++a) {
    std::vector<Jet> xi(dim, jet_zero(ring_tx));
    xi[a] = jet_var(ring_tx, flow);
    std::vector<Jet> z = conv.side == ActionSide::multiply_left
                             ? bch_jets(mt.g, xi, X, N + 1, max_n)
                             : bch_jets(mt.g, X, xi, N + 1, max_n);
    Factorization f = factorize(z, mt, N + 1, conv.order, max_n);
    Derivation d;
    d.ring = ring_x;
    d.precision = N;
    for (int i = 0; i < n; ++i) {
      // Coefficient of t^1, as a polynomial in the x's of degree <= N.
      Jet v = jet_zero(ring_x);
      for (const auto& [m, cc] : f.group_part[i].terms) {
        if (m[0] != 1) continue;
        Mono mx(m.begin() + 1, m.end());
        v.terms[mx] = cc;
      }
      d.coeffs.push_back(v);
    }
    validate_derivation(d);
    out.push_back(std::move(d));
  }
  return out;
}

/// Check that basis -> derivation is a Lie algebra homomorphism to the given
/// comparison order; returns the first failing pair if any.
inline std::optional<std::pair<int, int>> action_homomorphism_witness(
    const LieAlgebra& g, const std::vector<Derivation>& rho, int compare_order) {
  int dim = g.dim();
  for (int a = 0; a < dim; ++a)
    for (int b = a + 1; b < dim; ++b) {
      Derivation lhs = commutator(rho[a], rho[b]);
      Derivation rhs{lhs.ring, std::vector<Jet>(lhs.ring.dim(), jet_zero(lhs.ring)),
                     lhs.precision};
      for (const auto& [k, cc] : g.c[a][b])
        for (int i = 0; i < lhs.ring.dim(); ++i)
          rhs.coeffs[i] = add(rhs.coeffs[i], scale(rho[k].coeffs[i], cc));
      if (!derivations_equal_to_order(lhs, rhs, std::min(compare_order, lhs.precision)))
        return std::make_pair(a, b);
    }
  return std::nullopt;
}

}  // namespace quilt
