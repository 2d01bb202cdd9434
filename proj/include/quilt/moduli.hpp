/**
 * Moduli algebras of quilted surfaces.
 *
 * A quilted surface is presented combinatorially by a ciliated graph: two
 * signed families of half-edges attached to signed vertices (with a cyclic
 * order, the cilia, flattened here to a total order per vertex), and a set of
 * edges pairing a positive half-edge with a negative one.  Each edge and each
 * unpaired ("widowed") half-edge carries a formal model space, and each
 * vertex carries a coisotropic colour subalgebra of a fixed quadratic Lie
 * algebra g.  The phase space X_Γ is the product of the model spaces, with
 * one commuting strand of g-symmetry per half-edge; the classical moduli
 * algebra is the subalgebra of jets invariant under the vertex colours acting
 * diagonally across their cilia.
 *
 * Quantization deforms the commutative product on those invariants: the two
 * multiplicands are fused vertex-by-vertex with associator chord series (one
 * series per sign of strand, the negative strands contracting with -t), then
 * multiplied through the diagonal.  The result is a table of exact rational
 * structure constants per ℏ-degree, each tagged with the jet order to which
 * it is trusted.  Morphisms of surfaces (vertex fusions, strand relabelings,
 * equivariant maps of model spaces) induce algebra maps computed as a
 * higher-associator correction followed by the diagonal pullback.
 */
#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "quilt/associator.hpp"
#include "quilt/bialgebra_io.hpp"
#include "quilt/chords.hpp"
#include "quilt/error.hpp"
#include "quilt/jets.hpp"
#include "quilt/liealg.hpp"
#include "quilt/linalg.hpp"
#include "quilt/ordcat.hpp"
#include "quilt/parallel.hpp"
#include "quilt/spaces.hpp"

namespace quilt {

// ---------------------------------------------------------------------------
// Ciliated graphs

/// Half-edges attached to vertices, sign by sign.  i_plus : H⁺ → V⁺ and
/// i_minus : H⁻ → V⁻ carry the cilia as fiber orders; h_plus/h_minus attach
/// each edge to one half-edge of each sign.  Half-edges not hit by any edge
/// are "widowed" and carry their own model space.
struct CiliatedGraph {
  OrderedMorphism i_plus;   // positive half-edges → positive vertices
  OrderedMorphism i_minus;  // negative half-edges → negative vertices
  FinSet edges;
  std::map<std::string, std::string> h_plus;   // edge → positive half-edge
  std::map<std::string, std::string> h_minus;  // edge → negative half-edge
};

namespace detail {

inline bool contains_value(const std::map<std::string, std::string>& m,
                           const std::string& v) {
  for (const auto& [k, x] : m)
    if (x == v) return true;
  return false;
}

}  // namespace detail

/// Widowed half-edges of one sign, in half-edge order.
inline std::vector<std::string> widowed_half_edges(const CiliatedGraph& g, int sign) {
  const OrderedMorphism& i = sign > 0 ? g.i_plus : g.i_minus;
  const std::map<std::string, std::string>& h = sign > 0 ? g.h_plus : g.h_minus;
  std::vector<std::string> out;
  for (const auto& x : i.source.elements)
    if (!detail::contains_value(h, x)) out.push_back(x);
  return out;
}

/// Structural diagnostics; empty means the graph is well formed.
inline std::vector<std::string> graph_diagnostics(const CiliatedGraph& g) {
  std::vector<std::string> out;
  auto check_side = [&](const OrderedMorphism& i, const char* side) {
    try {
      validate_morphism(i);
    } catch (const Error& e) {
      out.push_back(std::string("incidence map (") + side + "): " + e.what());
      return;
    }
    for (const auto& v : i.target.elements)
      if (i.fiber(v).empty())
        out.push_back(std::string("vertex '") + v + "' (" + side +
                      ") has no half-edges");
  };
  check_side(g.i_plus, "+");
  check_side(g.i_minus, "-");
  for (const auto& v : g.i_plus.target.elements)
    if (g.i_minus.target.contains(v))
      out.push_back("vertex '" + v + "' appears with both signs");
  auto check_attach = [&](const std::map<std::string, std::string>& h,
                          const OrderedMorphism& i, const char* side) {
    std::map<std::string, std::string> seen;  // half-edge → edge
    for (const auto& e : g.edges.elements) {
      auto it = h.find(e);
      if (it == h.end()) {
        out.push_back(std::string("edge '") + e + "' has no " + side + " half-edge");
        continue;
      }
      if (!i.source.contains(it->second)) {
        out.push_back("edge '" + e + "' attaches to unknown half-edge '" +
                      it->second + "' (" + side + ")");
        continue;
      }
      auto [prev, fresh] = seen.try_emplace(it->second, e);
      if (!fresh)
        out.push_back("half-edge '" + it->second + "' is attached to edges '" +
                      prev->second + "' and '" + e + "'");
    }
    for (const auto& [e, x] : h)
      if (!g.edges.contains(e))
        out.push_back(std::string("attachment for unknown edge '") + e + "' (" +
                      side + ")");
  };
  check_attach(g.h_plus, g.i_plus, "+");
  check_attach(g.h_minus, g.i_minus, "-");
  return out;
}

inline void validate_graph(const CiliatedGraph& g) {
  std::vector<std::string> d = graph_diagnostics(g);
  if (!d.empty()) throw Error(ErrorKind::io_parse, d.front());
}

// ---------------------------------------------------------------------------
// Model spaces

/// Model space of an edge: one jet algebra with two commuting g-actions, one
/// felt by the positive strand of the edge and one by the negative strand.
struct EdgeSpace {
  JetAlgebra algebra;
  std::vector<Derivation> plus;   // action felt by the positive half-edge
  std::vector<Derivation> minus;  // action felt by the negative half-edge
};

/// A zero-dimensional model space: no coordinates, the action is zero.
inline GSpace point_space(const LieAlgebra& g, int N) {
  GSpace X;
  X.algebra = JetAlgebra{{}, N};
  X.lie = g;
  for (int a = 0; a < g.dim(); ++a)
    X.action.push_back(Derivation{X.algebra, {}, N});
  return X;
}

/// Model space of the formal group of g itself, one coordinate per basis
/// element.  The positive strand acts by minus the right-invariant fields
/// (the flow x ↦ bch(t·e_a, x)), the negative strand by the left-invariant
/// fields (the flow x ↦ bch(x, t·e_a)); the two actions commute.
inline EdgeSpace edge_double_space(const LieAlgebra& g, int N, int max_n = 6) {
  int dim = g.dim();
  std::string flow = "@t";
  for (bool clash = true; clash;) {
    clash = false;
    for (const auto& b : g.basis)
      if (b == flow) {
        flow += "_";
        clash = true;
      }
  }
  JetAlgebra ring_tx;
  ring_tx.coords.push_back(flow);
  for (const auto& b : g.basis) ring_tx.coords.push_back(b);
  ring_tx.order = N + 1;
  JetAlgebra ring_x{g.basis, N};
  std::vector<Jet> X(dim, jet_zero(ring_tx));
  for (int i = 0; i < dim; ++i) X[i] = jet_var(ring_tx, g.basis[i]);
  auto flow_field = [&](const std::vector<Jet>& z, const Rat& scale_by) {
    Derivation d;
    d.ring = ring_x;
    d.precision = N;
    for (int i = 0; i < dim; ++i) {
      Jet v = jet_zero(ring_x);
      for (const auto& [m, cc] : z[i].terms) {
        if (m[0] != 1) continue;  // keep the first-order part of the flow
        Mono mx(m.begin() + 1, m.end());
        v.terms[mx] = cc * scale_by;
      }
      d.coeffs.push_back(truncate_to(v, N));
    }
    validate_derivation(d);
    return d;
  };
  EdgeSpace out;
  out.algebra = ring_x;
  for (int a = 0; a < dim; ++a) {
    std::vector<Jet> xi(dim, jet_zero(ring_tx));
    xi[a] = jet_var(ring_tx, flow);
    out.plus.push_back(flow_field(bch_jets(g, xi, X, N + 1, max_n), Rat(-1)));
    out.minus.push_back(flow_field(bch_jets(g, X, xi, N + 1, max_n), Rat(1)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Skeletized coloured surfaces

/// A ciliated graph with a quadratic Lie algebra g, one coisotropic colour
/// subalgebra per vertex, and one model space per edge and per widowed
/// half-edge.  All model algebras must share one jet order.
struct SkeletizedColouredSurface {
  CiliatedGraph graph;
  LieAlgebra g;
  CasimirElement t;
  std::map<std::string, Subalgebra> colour;      // vertex → colour
  std::map<std::string, EdgeSpace> edge_space;   // edge → model
  std::map<std::string, GSpace> half_space;      // widowed half-edge → model
};

/// The common jet order of the model spaces (0 for a surface with no factors).
inline int surface_jet_order(const SkeletizedColouredSurface& s) {
  for (const auto& [e, sp] : s.edge_space) return sp.algebra.order;
  for (const auto& [h, sp] : s.half_space) return sp.algebra.order;
  return 0;
}

namespace detail {

/// Direct sum of copies of g, one per strand name, basis "strand.element".
inline LieAlgebra strandwise_sum(const LieAlgebra& g,
                                 const std::vector<std::string>& strands) {
  LieAlgebra out;
  int d = g.dim(), n = static_cast<int>(strands.size());
  for (const auto& s : strands)
    for (const auto& b : g.basis) out.basis.push_back(s + "." + b);
  out.c.assign(n * d, std::vector<SparseVec>(n * d));
  for (int s = 0; s < n; ++s)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (const auto& [k, c] : g.c[i][j]) out.c[s * d + i][s * d + j][s * d + k] = c;
  return out;
}

/// Casimir matrix negated (contraction element of the opposite direction).
inline DenseMat negated(const DenseMat& t) {
  DenseMat out = t;
  for (auto& c : out.a) c = -c;
  return out;
}

/// Block diagonal diag(t, -t) for the two strands of an edge model.
inline DenseMat edge_pair_casimir(const DenseMat& t) {
  int d = t.nrows;
  DenseMat out(2 * d, 2 * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      out.at(i, j) = t.at(i, j);
      out.at(i + d, j + d) = -t.at(i, j);
    }
  return out;
}

}  // namespace detail

/// Structural and geometric diagnostics; empty means the surface is valid.
/// Geometric checks: every colour is a coisotropic subalgebra of (g, t),
/// every model space has coisotropic stabilizers, edge actions commute.
inline std::vector<std::string> surface_diagnostics(
    const SkeletizedColouredSurface& s) {
  std::vector<std::string> out = graph_diagnostics(s.graph);
  if (!out.empty()) return out;  // later checks assume a well-formed graph
  int dim = s.g.dim();
  if (s.t.t.nrows != dim || s.t.t.ncols != dim)
    out.push_back("contraction element does not match the Lie algebra dimension");

  std::vector<std::string> vertices = s.graph.i_plus.target.elements;
  for (const auto& v : s.graph.i_minus.target.elements) vertices.push_back(v);
  for (const auto& v : vertices) {
    auto it = s.colour.find(v);
    if (it == s.colour.end()) {
      out.push_back("vertex '" + v + "' has no colour");
      continue;
    }
    for (const auto& row : it->second.span)
      for (const auto& [i, c] : row)
        if (i < 0 || i >= dim)
          out.push_back("colour of vertex '" + v + "' uses an index out of range");
    // The zero colour means the vertex does not constrain anything; only
    // nonzero colours are required to be coisotropic.
    if (it->second.span.empty()) continue;
    try {
      if (!is_coisotropic(it->second, s.g, s.t))
        out.push_back("colour of vertex '" + v + "' is not coisotropic");
    } catch (const Error& e) {
      out.push_back("colour of vertex '" + v + "': " + e.what());
    }
  }
  for (const auto& [v, c] : s.colour)
    if (std::find(vertices.begin(), vertices.end(), v) == vertices.end())
      out.push_back("colour for unknown vertex '" + v + "'");

  int order = surface_jet_order(s);
  for (const auto& e : s.graph.edges.elements) {
    auto it = s.edge_space.find(e);
    if (it == s.edge_space.end()) {
      out.push_back("edge '" + e + "' has no model space");
      continue;
    }
    const EdgeSpace& sp = it->second;
    if (sp.algebra.order != order)
      out.push_back("edge '" + e + "' has jet order " +
                    std::to_string(sp.algebra.order) + ", expected " +
                    std::to_string(order));
    if (static_cast<int>(sp.plus.size()) != dim ||
        static_cast<int>(sp.minus.size()) != dim) {
      out.push_back("edge '" + e + "' needs one derivation per Lie basis element "
                    "on each strand");
      continue;
    }
    bool shape_ok = true;
    for (const auto& list : {sp.plus, sp.minus})
      for (const auto& d : list)
        if (!(d.ring == sp.algebra)) {
          out.push_back("edge '" + e + "' has a strand field on the wrong algebra");
          shape_ok = false;
        }
    if (!shape_ok) continue;
    for (int a = 0; a < dim && shape_ok; ++a)
      for (int b = 0; b < dim && shape_ok; ++b) {
        Derivation c = commutator(sp.plus[a], sp.minus[b]);
        for (const auto& j : c.coeffs)
          if (!equal_to_order(j, jet_zero(sp.algebra), c.precision)) {
            out.push_back("edge '" + e + "': the two strand actions do not commute");
            shape_ok = false;
            break;
          }
      }
    GSpace pair;
    pair.algebra = sp.algebra;
    pair.lie = detail::strandwise_sum(s.g, {"p", "m"});
    pair.action = sp.plus;
    for (const auto& d : sp.minus) pair.action.push_back(d);
    auto witness =
        coisotropic_stabilizers_check(pair, CasimirElement{detail::edge_pair_casimir(s.t.t)});
    if (witness)
      out.push_back("edge '" + e + "': stabilizers fail coisotropy at basis pair (" +
                    std::to_string(witness->first) + ", " +
                    std::to_string(witness->second) + ")");
  }
  for (const auto& [e, sp] : s.edge_space)
    if (!s.graph.edges.contains(e))
      out.push_back("model space for unknown edge '" + e + "'");

  std::set<std::string> widowed;
  for (int sign : {+1, -1})
    for (const auto& h : widowed_half_edges(s.graph, sign)) {
      widowed.insert(h);
      auto it = s.half_space.find(h);
      if (it == s.half_space.end()) {
        out.push_back("widowed half-edge '" + h + "' has no model space");
        continue;
      }
      const GSpace& sp = it->second;
      if (sp.algebra.order != order)
        out.push_back("half-edge '" + h + "' has jet order " +
                      std::to_string(sp.algebra.order) + ", expected " +
                      std::to_string(order));
      try {
        validate_gspace(sp);
      } catch (const Error& e2) {
        out.push_back("half-edge '" + h + "': " + e2.what());
        continue;
      }
      if (sp.lie.dim() != dim)
        out.push_back("half-edge '" + h + "' is not acted on by the surface's "
                      "Lie algebra");
      else {
        auto witness = coisotropic_stabilizers_check(sp, s.t);
        if (witness)
          out.push_back("half-edge '" + h +
                        "': stabilizers fail coisotropy at basis pair (" +
                        std::to_string(witness->first) + ", " +
                        std::to_string(witness->second) + ")");
      }
    }
  for (const auto& [h, sp] : s.half_space)
    if (!widowed.count(h))
      out.push_back("model space for non-widowed half-edge '" + h + "'");

  // Factor labels become coordinate prefixes and must be distinct.
  std::set<std::string> labels;
  for (const auto& e : s.graph.edges.elements)
    if (!labels.insert(e).second)
      out.push_back("duplicate factor label '" + e + "'");
  for (const auto& h : widowed)
    if (!labels.insert(h).second)
      out.push_back("duplicate factor label '" + h + "'");
  return out;
}

inline void validate_surface(const SkeletizedColouredSurface& s) {
  std::vector<std::string> d = surface_diagnostics(s);
  if (!d.empty()) throw Error(ErrorKind::io_parse, d.front());
}

// ---------------------------------------------------------------------------
// The phase space X_Γ

/// The product of all model spaces, with per-half-edge strand actions
/// embedded into the product ring.  Factor order: edges, then widowed
/// positive half-edges, then widowed negative half-edges; coordinates are
/// prefixed "factor.".
struct ModuliSpace {
  JetAlgebra ring;
  std::vector<std::string> factor_labels;
  std::vector<JetAlgebra> factor_algebras;           // local rings, same order
  std::vector<int> offsets;                          // first coordinate index
  std::map<std::string, int> factor_index;           // label → position
  std::map<std::string, int> factor_of_half;         // half-edge → position
  std::map<std::string, std::vector<Derivation>> strand;  // half-edge → fields
  std::vector<std::string> plus_strands, minus_strands;   // half-edge orders
};

inline ModuliSpace build_X_Gamma(const SkeletizedColouredSurface& s) {
  validate_surface(s);
  ModuliSpace ms;
  int order = surface_jet_order(s);
  auto add_factor = [&](const std::string& label, const JetAlgebra& local) {
    ms.factor_index[label] = static_cast<int>(ms.factor_labels.size());
    ms.factor_labels.push_back(label);
    ms.factor_algebras.push_back(local);
    ms.offsets.push_back(ms.ring.dim());
    for (const auto& c : local.coords) ms.ring.coords.push_back(label + "." + c);
  };
  ms.ring.order = order;
  for (const auto& e : s.graph.edges.elements)
    add_factor(e, s.edge_space.at(e).algebra);
  for (int sign : {+1, -1})
    for (const auto& h : widowed_half_edges(s.graph, sign))
      add_factor(h, s.half_space.at(h).algebra);
  validate_ring(ms.ring);

  auto bind = [&](const std::string& half, const std::string& factor,
                  const std::vector<Derivation>& fields) {
    int k = ms.factor_index.at(factor);
    ms.factor_of_half[half] = k;
    std::vector<Derivation> embedded;
    for (const auto& d : fields)
      embedded.push_back(embed_derivation(d, ms.ring, ms.offsets[k]));
    ms.strand[half] = std::move(embedded);
  };
  for (const auto& e : s.graph.edges.elements) {
    bind(s.graph.h_plus.at(e), e, s.edge_space.at(e).plus);
    bind(s.graph.h_minus.at(e), e, s.edge_space.at(e).minus);
  }
  for (int sign : {+1, -1})
    for (const auto& h : widowed_half_edges(s.graph, sign))
      bind(h, h, s.half_space.at(h).action);
  ms.plus_strands = s.graph.i_plus.source.elements;
  ms.minus_strands = s.graph.i_minus.source.elements;
  return ms;
}

/// X_Γ as a single space acted on by one copy of g per strand (positive
/// strands first).  Basis element "h.a" of the sum acts by strand h's field
/// for g-basis element a.
inline GSpace moduli_gspace(const ModuliSpace& ms, const LieAlgebra& g) {
  GSpace X;
  X.algebra = ms.ring;
  std::vector<std::string> strands = ms.plus_strands;
  for (const auto& h : ms.minus_strands) strands.push_back(h);
  X.lie = detail::strandwise_sum(g, strands);
  for (const auto& h : strands)
    for (const auto& d : ms.strand.at(h)) X.action.push_back(d);
  validate_gspace(X);
  return X;
}

// ---------------------------------------------------------------------------
// Classical invariants

/// One generator per vertex and colour-span vector: the colour element acting
/// diagonally across the vertex's cilia.
inline std::vector<Derivation> colour_generators(const ModuliSpace& ms,
                                                 const SkeletizedColouredSurface& s) {
  std::vector<Derivation> out;
  auto vertex_block = [&](const OrderedMorphism& i) {
    for (const auto& v : i.target.elements) {
      auto it = s.colour.find(v);
      if (it == s.colour.end()) continue;
      for (const auto& xi : it->second.span) {
        std::optional<Derivation> gen;
        for (const auto& h : i.fiber(v)) {
          const std::vector<Derivation>& fields = ms.strand.at(h);
          Derivation part{ms.ring,
                          std::vector<Jet>(ms.ring.dim(), jet_zero(ms.ring)),
                          ms.ring.order};
          for (const auto& [a, c] : xi) {
            part.precision = std::min(part.precision, fields[a].precision);
            for (int k = 0; k < ms.ring.dim(); ++k)
              part.coeffs[k] = add(part.coeffs[k], scale(fields[a].coeffs[k], c));
          }
          gen = gen ? add(*gen, part) : part;
        }
        if (gen) out.push_back(std::move(*gen));
      }
    }
  };
  vertex_block(s.graph.i_plus);
  vertex_block(s.graph.i_minus);
  return out;
}

/// The classical moduli algebra at one jet degree: a reduced basis of
/// invariant jets.  Basis rows are fully reduced against each other, ordered
/// by leading monomial (degree, then the monomial order of the ring), with
/// unit leading coefficients; every non-leading monomial of a basis element
/// comes strictly after its leading one.  This makes expansion in the basis a
/// forward substitution that peels leading monomials in increasing order.
struct ClassicalModuli {
  JetAlgebra ring;
  int degree = 0;
  std::vector<Mono> cols;             // monomials of degree ≤ degree, in order
  std::vector<Jet> basis;
  std::vector<int> lead;              // column index of each leading monomial
  std::vector<int> lead_degree;       // total degree of each leading monomial
};

namespace detail {

inline int mono_degree(const Mono& m) {
  int d = 0;
  for (int e : m) d += e;
  return d;
}

inline SparseVec jet_to_columns(const Jet& f, const std::map<Mono, int>& col_of) {
  SparseVec v;
  for (const auto& [m, c] : f.terms) v[col_of.at(m)] = c;
  return v;
}

}  // namespace detail

inline ClassicalModuli classical_moduli(const SkeletizedColouredSurface& s,
                                        const ModuliSpace& ms, int degree) {
  ClassicalModuli out;
  out.ring = ms.ring;
  out.degree = degree;
  out.cols = monomials_up_to(ms.ring, degree);
  std::map<Mono, int> col_of;
  for (std::size_t i = 0; i < out.cols.size(); ++i)
    col_of[out.cols[i]] = static_cast<int>(i);
  std::vector<Jet> raw = invariant_jets(ms.ring, colour_generators(ms, s), degree);
  RowReducer rr;
  for (const auto& f : raw) rr.add_row(detail::jet_to_columns(f, col_of));
  for (const auto& [pivot, row] : rr.rows()) {
    std::map<Mono, Rat> terms;
    for (const auto& [ci, c] : row) terms[out.cols[ci]] = c;
    out.basis.push_back(make_jet(ms.ring, terms));
    out.lead.push_back(pivot);
    out.lead_degree.push_back(detail::mono_degree(out.cols[pivot]));
  }
  return out;
}

inline ClassicalModuli classical_moduli(const SkeletizedColouredSurface& s,
                                        int degree) {
  ModuliSpace ms = build_X_Gamma(s);
  return classical_moduli(s, ms, degree);
}

/// Expand a value in the invariant basis by forward substitution.  Monomials
/// beyond the trusted order of the value are ignored (their coefficients are
/// not known); a surviving monomial at or below the trusted order that is not
/// a leading monomial of the basis witnesses that the value does not lie in
/// the span, and nullopt is returned with the witness monomial in *failed.
inline std::optional<SparseVec> try_expand_in_basis(const ClassicalModuli& cm,
                                                    const PrecisionTaggedValue& v,
                                                    Mono* failed = nullptr) {
  std::map<Mono, int> col_of;
  for (std::size_t i = 0; i < cm.cols.size(); ++i)
    col_of[cm.cols[i]] = static_cast<int>(i);
  std::map<int, int> basis_at;  // lead column → basis index
  for (std::size_t i = 0; i < cm.basis.size(); ++i)
    basis_at[cm.lead[i]] = static_cast<int>(i);
  SparseVec r;
  for (const auto& [m, c] : v.value.terms) {
    if (detail::mono_degree(m) > cm.degree) {
      if (detail::mono_degree(m) <= v.trusted_order) {
        if (failed) *failed = m;
        return std::nullopt;
      }
      continue;
    }
    r[col_of.at(m)] = c;
  }
  SparseVec coeffs;
  while (!r.empty()) {
    auto [col, c] = *r.begin();
    if (detail::mono_degree(cm.cols[col]) > v.trusted_order) break;
    auto it = basis_at.find(col);
    if (it == basis_at.end()) {
      if (failed) *failed = cm.cols[col];
      return std::nullopt;
    }
    const Jet& b = cm.basis[it->second];
    Rat factor = c / b.terms.at(cm.cols[col]);
    coeffs[it->second] = factor;
    for (const auto& [m, bc] : b.terms) {
      int mc = col_of.at(m);
      Rat& entry = r[mc];
      entry -= factor * bc;
      if (entry == 0) r.erase(mc);
    }
  }
  return coeffs;
}

inline SparseVec expand_in_basis(const ClassicalModuli& cm,
                                 const PrecisionTaggedValue& v,
                                 const std::string& what) {
  Mono failed;
  auto c = try_expand_in_basis(cm, v, &failed);
  if (!c) {
    std::string mono;
    for (std::size_t i = 0; i < failed.size(); ++i)
      if (failed[i] > 0)
        mono += (mono.empty() ? "" : "*") + cm.ring.coords[i] +
                (failed[i] > 1 ? "^" + std::to_string(failed[i]) : "");
    throw Error(ErrorKind::verification,
                what + " does not lie in the invariant span (monomial " +
                    (mono.empty() ? "1" : mono) + ")");
  }
  return *c;
}

/// Structure constants of the plain commutative product on the basis.
inline SparseVec classical_product(const ClassicalModuli& cm, int i, int j) {
  Jet p = mul(cm.basis[i], cm.basis[j]);
  return expand_in_basis(cm, PrecisionTaggedValue{p, cm.degree},
                         "classical product of invariants");
}

// ---------------------------------------------------------------------------
// The quantized product

/// The fused multiplication operator of one surface: two copies of the ring
/// ("a." block = left multiplicand, "b." block = right), the per-sign chord
/// actions on the doubled strands, the associator fusion series of both
/// incidence maps, and the diagonal images that multiply the copies out.
struct StarOperator {
  JetAlgebra ring;            // X_Γ
  JetAlgebra ring2;           // doubled copy
  int dim1 = 0;
  std::vector<Jet> diag;      // substitution images ring2 → ring
  ChordAction act_plus, act_minus;
  ChordSeries nu_plus, nu_minus;
  int degree = 0;             // ℏ-truncation carried by the fusion series
};

namespace detail {

/// Chord action of one sign's doubled strand set on the doubled ring.
/// Negative strands contract with -t: the sign is carried by negating the
/// matrix once, never per endpoint, so that a chord with both endpoints on
/// negative strands still contracts with -t.
inline ChordAction doubled_action(const ModuliSpace& ms, const JetAlgebra& ring2,
                                  const std::vector<std::string>& strands,
                                  const DenseMat& t) {
  ChordAction act;
  act.ring = ring2;
  act.t = t;
  int dim1 = ms.ring.dim();
  for (const auto& h : strands) act.strands.strands.push_back(h + "a");
  for (const auto& h : strands) act.strands.strands.push_back(h + "b");
  for (int copy = 0; copy < 2; ++copy)
    for (const auto& h : strands) {
      act.binding.push_back(ChordBinding{static_cast<int>(act.fields.size()), +1});
      std::vector<Derivation> fields;
      for (const auto& d : ms.strand.at(h))
        fields.push_back(embed_derivation(d, ring2, copy == 0 ? 0 : dim1));
      act.fields.push_back(std::move(fields));
    }
  return act;
}

/// Apply a chord series degree by degree, up to kmax (all degrees when kmax
/// is negative).  A slot whose words would need more jet precision than the
/// input carries is reported as zero with trusted order -1 ("nothing known"),
/// rather than failing the whole computation: high ℏ-degrees of a low-order
/// jet are simply out of reach.
inline std::vector<PrecisionTaggedValue> apply_series_capped(
    const ChordAction& act, const ChordSeries& s, const PrecisionTaggedValue& f,
    int kmax = -1) {
  if (!(s.strands == act.strands))
    throw Error(ErrorKind::io_parse, "series strands do not match the chord action");
  int top = kmax < 0 ? s.trunc : std::min(kmax, s.trunc);
  std::vector<PrecisionTaggedValue> out;
  for (int d = 0; d <= top; ++d) {
    std::optional<PrecisionTaggedValue> slot;
    bool unknown = false;
    for (const auto& [w, c] : component(s, d)) {
      std::optional<PrecisionTaggedValue> term;
      try {
        term = apply_chord_word(act, w, f);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::verification) throw;
        unknown = true;
        break;
      }
      PrecisionTaggedValue scaled = ptv_scale(*term, c);
      slot = slot ? ptv_add(*slot, scaled) : scaled;
    }
    if (unknown)
      out.push_back(PrecisionTaggedValue{jet_zero(act.ring), -1});
    else if (slot)
      out.push_back(*slot);
    else
      out.push_back(PrecisionTaggedValue{jet_zero(act.ring), f.trusted_order});
  }
  return out;
}

}  // namespace detail

inline StarOperator make_star_operator(const SkeletizedColouredSurface& s,
                                       const ModuliSpace& ms,
                                       const Associator& assoc,
                                       const ParenthesizedOrderedMorphism& p_plus,
                                       const ParenthesizedOrderedMorphism& p_minus) {
  StarOperator op;
  op.ring = ms.ring;
  op.dim1 = ms.ring.dim();
  op.degree = assoc.phi.trunc;
  op.ring2.order = ms.ring.order;
  for (const auto& c : ms.ring.coords) op.ring2.coords.push_back("a." + c);
  for (const auto& c : ms.ring.coords) op.ring2.coords.push_back("b." + c);
  for (int copy = 0; copy < 2; ++copy)
    for (const auto& c : ms.ring.coords) op.diag.push_back(jet_var(op.ring, c));
  op.act_plus = detail::doubled_action(ms, op.ring2, ms.plus_strands, s.t.t);
  op.act_minus =
      detail::doubled_action(ms, op.ring2, ms.minus_strands, detail::negated(s.t.t));
  op.nu_plus = nu(assoc, p_plus);
  op.nu_minus = nu(assoc, p_minus);
  if (!(op.nu_plus.strands == op.act_plus.strands) ||
      !(op.nu_minus.strands == op.act_minus.strands))
    throw std::logic_error("fusion series and chord action disagree on strands");
  return op;
}

inline StarOperator make_star_operator(const SkeletizedColouredSurface& s,
                                       const ModuliSpace& ms,
                                       const Associator& assoc) {
  return make_star_operator(s, ms, assoc,
                            standard_parenthesization(s.graph.i_plus),
                            standard_parenthesization(s.graph.i_minus));
}

/// One fused product: the ℏ-slots of f ⋆ g as values on X_Γ, computed up to
/// ℏ-degree kmax (the full series degree when kmax is negative).  Slots whose
/// chord words exceed the inputs' jet precision come back as zero with
/// trusted order -1.
inline std::vector<PrecisionTaggedValue> star_apply(const StarOperator& op,
                                                    const PrecisionTaggedValue& f,
                                                    const PrecisionTaggedValue& g,
                                                    int kmax = -1) {
  int top = kmax < 0 ? op.degree : std::min(kmax, op.degree);
  PrecisionTaggedValue w0 =
      ptv_mul(PrecisionTaggedValue{embed_jet(f.value, op.ring2, 0), f.trusted_order},
              PrecisionTaggedValue{embed_jet(g.value, op.ring2, op.dim1),
                                   g.trusted_order});
  std::vector<PrecisionTaggedValue> plus =
      detail::apply_series_capped(op.act_plus, op.nu_plus, w0, top);
  std::vector<std::optional<PrecisionTaggedValue>> acc(top + 1);
  for (int k1 = 0; k1 <= top; ++k1) {
    std::vector<PrecisionTaggedValue> minus =
        detail::apply_series_capped(op.act_minus, op.nu_minus, plus[k1], top - k1);
    for (int k2 = 0; k1 + k2 <= top && k2 < static_cast<int>(minus.size()); ++k2)
      acc[k1 + k2] = acc[k1 + k2] ? ptv_add(*acc[k1 + k2], minus[k2]) : minus[k2];
  }
  std::vector<PrecisionTaggedValue> out;
  for (int k = 0; k <= top; ++k)
    out.push_back(PrecisionTaggedValue{substitute(acc[k]->value, op.diag),
                                       acc[k]->trusted_order});
  return out;
}

/// The quantized moduli algebra: the classical invariant basis together with
/// exact structure constants per ℏ-degree, each degree tagged with the jet
/// order it is trusted to.
struct QuantModuliAlgebra {
  ClassicalModuli inv;
  int hbar_degree = 0;
  int jet_order = 0;
  std::vector<int> trusted;                                // per ℏ-degree
  std::vector<std::vector<std::vector<SparseVec>>> star;   // [k][i][j] → basis coeffs
  std::string associator_id;
  std::string description;
};

/// Stable fingerprint of an associator (degree + content hash), recorded in
/// quantizations so that morphisms can refuse to mix incompatible ones.
inline std::string associator_fingerprint(const Associator& assoc) {
  std::string s = series_to_json(assoc.phi).dump();
  unsigned long long h = 1469598103934665603ull;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << "deg" << assoc.phi.trunc << "-" << std::hex << h;
  return os.str();
}

inline QuantModuliAlgebra quantize_with(const SkeletizedColouredSurface& s,
                                        const Associator& assoc, int D, int N,
                                        const ParenthesizedOrderedMorphism& p_plus,
                                        const ParenthesizedOrderedMorphism& p_minus,
                                        int jobs = 1) {
  if (D < 0) throw Error(ErrorKind::io_parse, "negative ℏ-degree");
  if (assoc.phi.trunc < D)
    throw Error(ErrorKind::io_parse,
                "associator of degree " + std::to_string(assoc.phi.trunc) +
                    " cannot quantize to ℏ-degree " + std::to_string(D));
  ModuliSpace ms = build_X_Gamma(s);
  if (ms.ring.order != N)
    throw Error(ErrorKind::io_parse,
                "surface is modelled at jet order " + std::to_string(ms.ring.order) +
                    ", not " + std::to_string(N));
  QuantModuliAlgebra q;
  q.inv = classical_moduli(s, ms, N);
  q.hbar_degree = D;
  q.jet_order = N;
  q.associator_id = associator_fingerprint(assoc);
  {
    std::ostringstream os;
    os << s.graph.i_plus.target.size() + s.graph.i_minus.target.size()
       << " vertices, "
       << s.graph.i_plus.source.size() + s.graph.i_minus.source.size()
       << " half-edges, " << s.graph.edges.size() << " edges, basis "
       << q.inv.basis.size();
    q.description = os.str();
  }
  StarOperator op = make_star_operator(s, ms, assoc, p_plus, p_minus);
  int B = static_cast<int>(q.inv.basis.size());
  q.star.assign(D + 1, std::vector<std::vector<SparseVec>>(
                           B, std::vector<SparseVec>(B)));
  std::vector<std::vector<int>> trust(D + 1, std::vector<int>(B * B, N));
  std::vector<std::string> errors(B * B);
  parallel_for(B * B, jobs, [&](int cell) {
    int i = cell / B, j = cell % B;
    std::vector<PrecisionTaggedValue> slots =
        star_apply(op, PrecisionTaggedValue{q.inv.basis[i], N},
                   PrecisionTaggedValue{q.inv.basis[j], N}, D);
    for (int k = 0; k <= D; ++k) {
      trust[k][cell] = slots[k].trusted_order;
      auto c = try_expand_in_basis(q.inv, slots[k]);
      if (!c) {
        std::ostringstream os;
        os << "star product of basis elements " << i << ", " << j
           << " does not close on the invariants at ℏ-degree " << k;
        errors[cell] = os.str();
        return;
      }
      q.star[k][i][j] = std::move(*c);
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw Error(ErrorKind::verification, e);
  q.trusted.assign(D + 1, N);
  for (int k = 0; k <= D; ++k)
    for (int cell = 0; cell < B * B; ++cell)
      q.trusted[k] = std::min(q.trusted[k], trust[k][cell]);
  return q;
}

inline QuantModuliAlgebra quantize(const SkeletizedColouredSurface& s,
                                   const Associator& assoc, int D, int N,
                                   int jobs = 1) {
  return quantize_with(s, assoc, D, N,
                       standard_parenthesization(s.graph.i_plus),
                       standard_parenthesization(s.graph.i_minus), jobs);
}

// ---------------------------------------------------------------------------
// Surface morphisms

/// A morphism of skeletized coloured surfaces Γ → Γ′.  Vertices, half-edges
/// and edges map covariantly (half-edge maps carry fiber orders: the order in
/// which merged strands fuse); each source factor's model space receives an
/// equivariant map FROM the model space of its image factor, given by the
/// images of the source factor's local coordinates inside the image factor's
/// local algebra.
struct SurfaceMorphism {
  OrderedMorphism v_plus, v_minus;  // vertex maps
  OrderedMorphism h_plus, h_minus;  // half-edge maps, with fusion orders
  std::map<std::string, std::string> edge_map;
  std::map<std::string, std::vector<Jet>> component;  // source factor → images
};

namespace detail {

inline bool same_ordered(const OrderedMorphism& a, const OrderedMorphism& b) {
  return a.source == b.source && a.target == b.target &&
         a.assignment == b.assignment && a.fiber_orders == b.fiber_orders;
}

/// The factor label of the surface containing a given half-edge.
inline std::string factor_of_half_label(const CiliatedGraph& g,
                                        const std::string& half, int sign) {
  const std::map<std::string, std::string>& h = sign > 0 ? g.h_plus : g.h_minus;
  for (const auto& [e, x] : h)
    if (x == half) return e;
  return half;  // widowed: its own factor
}

}  // namespace detail

/// Diagnostics for a morphism between two validated surfaces; empty = valid.
inline std::vector<std::string> morphism_diagnostics(
    const SkeletizedColouredSurface& src, const SkeletizedColouredSurface& dst,
    const SurfaceMorphism& f) {
  validate_surface(src);
  validate_surface(dst);
  std::vector<std::string> out;
  auto check_side = [&](const OrderedMorphism& fv, const OrderedMorphism& fh,
                        const OrderedMorphism& i_src, const OrderedMorphism& i_dst,
                        const char* side) {
    try {
      validate_morphism(fv);
      validate_morphism(fh);
    } catch (const Error& e) {
      out.push_back(std::string("map (") + side + "): " + e.what());
      return;
    }
    if (!(fv.source == i_src.target) || !(fv.target == i_dst.target))
      out.push_back(std::string("vertex map (") + side +
                    ") does not connect the vertex sets");
    if (!(fh.source == i_src.source) || !(fh.target == i_dst.source))
      out.push_back(std::string("half-edge map (") + side +
                    ") does not connect the half-edge sets");
    if (!out.empty()) return;
    if (!detail::same_ordered(compose(i_src, fv), compose(fh, i_dst)))
      out.push_back(std::string("naturality square (") + side +
                    ") does not commute as ordered maps");
  };
  check_side(f.v_plus, f.h_plus, src.graph.i_plus, dst.graph.i_plus, "+");
  check_side(f.v_minus, f.h_minus, src.graph.i_minus, dst.graph.i_minus, "-");
  if (!out.empty()) return out;

  for (const auto& e : src.graph.edges.elements) {
    auto it = f.edge_map.find(e);
    if (it == f.edge_map.end()) {
      out.push_back("edge '" + e + "' has no image");
      continue;
    }
    if (!dst.graph.edges.contains(it->second)) {
      out.push_back("edge '" + e + "' maps to unknown edge '" + it->second + "'");
      continue;
    }
    if (f.h_plus.assignment.at(src.graph.h_plus.at(e)) !=
            dst.graph.h_plus.at(it->second) ||
        f.h_minus.assignment.at(src.graph.h_minus.at(e)) !=
            dst.graph.h_minus.at(it->second))
      out.push_back("edge '" + e + "' and its half-edges map incompatibly");
  }

  // Colours: the image vertex's colour must sit inside the source colour.
  auto check_colours = [&](const OrderedMorphism& fv) {
    for (const auto& [v, w] : fv.assignment) {
      RowReducer rr;
      for (const auto& row : src.colour.at(v).span) rr.add_row(row);
      for (const auto& row : dst.colour.at(w).span)
        if (!rr.reduce(row).empty())
          out.push_back("colour of vertex '" + w +
                        "' does not include into the colour of '" + v + "'");
    }
  };
  check_colours(f.v_plus);
  check_colours(f.v_minus);

  // Components: one per source factor, zero constant terms, equivariant for
  // every strand on the factor.
  ModuliSpace ms_src = build_X_Gamma(src);
  ModuliSpace ms_dst = build_X_Gamma(dst);
  auto target_factor = [&](const std::string& half, int sign) {
    const OrderedMorphism& fh = sign > 0 ? f.h_plus : f.h_minus;
    return detail::factor_of_half_label(dst.graph, fh.assignment.at(half), sign);
  };
  auto local_fields = [&](const SkeletizedColouredSurface& sc,
                          const std::string& half,
                          int sign) -> const std::vector<Derivation>& {
    const std::map<std::string, std::string>& h =
        sign > 0 ? sc.graph.h_plus : sc.graph.h_minus;
    for (const auto& [e, x] : h)
      if (x == half) {
        const EdgeSpace& sp = sc.edge_space.at(e);
        return sign > 0 ? sp.plus : sp.minus;
      }
    return sc.half_space.at(half).action;
  };
  for (std::size_t fi = 0; fi < ms_src.factor_labels.size(); ++fi) {
    const std::string& label = ms_src.factor_labels[fi];
    const JetAlgebra& local = ms_src.factor_algebras[fi];
    auto it = f.component.find(label);
    if (it == f.component.end()) {
      out.push_back("factor '" + label + "' has no component map");
      continue;
    }
    if (static_cast<int>(it->second.size()) != local.dim()) {
      out.push_back("component of factor '" + label +
                    "' needs one image per coordinate");
      continue;
    }
    // Strands living on this factor, with their signs.
    std::vector<std::pair<std::string, int>> strands;
    for (int sign : {+1, -1}) {
      const std::map<std::string, std::string>& h =
          sign > 0 ? src.graph.h_plus : src.graph.h_minus;
      for (const auto& [e, x] : h)
        if (e == label) strands.push_back({x, sign});
    }
    for (int sign : {+1, -1})
      for (const auto& h : widowed_half_edges(src.graph, sign))
        if (h == label) strands.push_back({h, sign});
    std::string tf;
    bool consistent = true;
    for (const auto& [h, sign] : strands) {
      std::string cand = target_factor(h, sign);
      if (tf.empty())
        tf = cand;
      else if (tf != cand) {
        out.push_back("factor '" + label +
                      "': its strands map into different factors");
        consistent = false;
      }
    }
    if (!consistent || tf.empty()) continue;
    const JetAlgebra& target_local =
        ms_dst.factor_algebras[ms_dst.factor_index.at(tf)];
    bool images_ok = true;
    for (const auto& img : it->second) {
      if (!(img.ring == target_local)) {
        out.push_back("component of factor '" + label +
                      "' has images on the wrong algebra (expected factor '" + tf +
                      "')");
        images_ok = false;
        break;
      }
      if (img.terms.count(Mono(target_local.dim(), 0))) {
        out.push_back("component of factor '" + label +
                      "' has an image with a constant term");
        images_ok = false;
        break;
      }
    }
    if (!images_ok) continue;
    for (const auto& [h, sign] : strands) {
      const std::vector<Derivation>& V = local_fields(src, h, sign);
      const std::vector<Derivation>& W =
          local_fields(dst, (sign > 0 ? f.h_plus : f.h_minus).assignment.at(h), sign);
      for (std::size_t a = 0; a < V.size(); ++a) {
        int prec = std::min(V[a].precision, W[a].precision);
        bool ok = true;
        for (int c = 0; c < local.dim() && ok; ++c) {
          Jet lhs = substitute(V[a].coeffs[c], it->second);
          PrecisionTaggedValue rhs = apply_derivation(
              W[a], PrecisionTaggedValue{it->second[c], target_local.order});
          if (!equal_to_order(lhs, rhs.value, std::min(prec, rhs.trusted_order)))
            ok = false;
        }
        if (!ok) {
          out.push_back("component of factor '" + label +
                        "' is not equivariant for strand '" + h +
                        "', Lie basis element " + std::to_string(a));
          break;
        }
      }
    }
  }
  for (const auto& [label, imgs] : f.component)
    if (!ms_src.factor_index.count(label))
      out.push_back("component for unknown factor '" + label + "'");
  return out;
}

inline void validate_surface_morphism(const SkeletizedColouredSurface& src,
                                      const SkeletizedColouredSurface& dst,
                                      const SurfaceMorphism& f) {
  std::vector<std::string> d = morphism_diagnostics(src, dst, f);
  if (!d.empty()) throw Error(ErrorKind::io_parse, d.front());
}

/// The identity morphism of a surface (identity component maps).
inline SurfaceMorphism identity_surface_morphism(const SkeletizedColouredSurface& s) {
  SurfaceMorphism f;
  f.v_plus = identity_morphism(s.graph.i_plus.target);
  f.v_minus = identity_morphism(s.graph.i_minus.target);
  f.h_plus = identity_morphism(s.graph.i_plus.source);
  f.h_minus = identity_morphism(s.graph.i_minus.source);
  for (const auto& e : s.graph.edges.elements) f.edge_map[e] = e;
  ModuliSpace ms = build_X_Gamma(s);
  for (std::size_t i = 0; i < ms.factor_labels.size(); ++i) {
    std::vector<Jet> images;
    for (const auto& c : ms.factor_algebras[i].coords)
      images.push_back(jet_var(ms.factor_algebras[i], c));
    f.component[ms.factor_labels[i]] = std::move(images);
  }
  return f;
}

// ---------------------------------------------------------------------------
// The classical pullback of a morphism

/// The jet-algebra morphism O(X_Γ) → O(X_Γ′): every source coordinate is sent
/// to its component image embedded at the image factor's block.  Source
/// factors sharing an image factor multiply out through the diagonal.
struct DiagonalPullback {
  JetAlgebra source, target;
  std::vector<Jet> images;  // one per source coordinate, in the target ring
};

inline DiagonalPullback pullback_diagonal(const SkeletizedColouredSurface& src,
                                          const SkeletizedColouredSurface& dst,
                                          const SurfaceMorphism& f) {
  validate_surface_morphism(src, dst, f);
  ModuliSpace ms_src = build_X_Gamma(src);
  ModuliSpace ms_dst = build_X_Gamma(dst);
  DiagonalPullback pb;
  pb.source = ms_src.ring;
  pb.target = ms_dst.ring;
  for (std::size_t fi = 0; fi < ms_src.factor_labels.size(); ++fi) {
    const std::string& label = ms_src.factor_labels[fi];
    // Image factor: where this factor's strands land.
    std::string tf;
    for (int sign : {+1, -1}) {
      const std::map<std::string, std::string>& h =
          sign > 0 ? src.graph.h_plus : src.graph.h_minus;
      for (const auto& [e, x] : h)
        if (e == label)
          tf = detail::factor_of_half_label(
              dst.graph, (sign > 0 ? f.h_plus : f.h_minus).assignment.at(x), sign);
      for (const auto& w : widowed_half_edges(src.graph, sign))
        if (w == label)
          tf = detail::factor_of_half_label(
              dst.graph, (sign > 0 ? f.h_plus : f.h_minus).assignment.at(w), sign);
    }
    int offset = ms_dst.offsets[ms_dst.factor_index.at(tf)];
    for (const auto& img : f.component.at(label))
      pb.images.push_back(embed_jet(img, ms_dst.ring, offset));
  }
  return pb;
}

inline PrecisionTaggedValue apply_pullback(const DiagonalPullback& pb,
                                           const PrecisionTaggedValue& v) {
  return PrecisionTaggedValue{substitute(v.value, pb.images), v.trusted_order};
}

// ---------------------------------------------------------------------------
// The quantized morphism

/// Per-ℏ-degree matrices of an algebra map between two quantizations,
/// columns over the source basis, sparse rows over the target basis.
struct MorphismMatrices {
  std::vector<std::vector<SparseVec>> deg;  // [k][source index] → target coeffs
  std::vector<int> trusted;
};

namespace detail {

/// Chord action of one sign's (undoubled) strand set directly on X_Γ.
inline ChordAction plain_action(const ModuliSpace& ms,
                                const std::vector<std::string>& strands,
                                const DenseMat& t) {
  ChordAction act;
  act.ring = ms.ring;
  act.t = t;
  for (const auto& h : strands) {
    act.strands.strands.push_back(h);
    act.binding.push_back(ChordBinding{static_cast<int>(act.fields.size()), +1});
    act.fields.push_back(ms.strand.at(h));
  }
  return act;
}

}  // namespace detail

/// The chord action of one sign's strands directly on X_Γ (undoubled):
/// positive strands contract with t, negative strands with -t.
inline ChordAction moduli_sign_action(const ModuliSpace& ms, int sign,
                                      const CasimirElement& t) {
  return detail::plain_action(ms, sign > 0 ? ms.plus_strands : ms.minus_strands,
                              sign > 0 ? t.t : detail::negated(t.t));
}

/// Apply a chord series on one sign's strands to a value on X_Γ, slot by
/// ℏ-degree (see star_apply for the trust semantics).
inline std::vector<PrecisionTaggedValue> apply_strand_series(
    const ChordAction& act, const ChordSeries& s, const PrecisionTaggedValue& f,
    int kmax = -1) {
  return detail::apply_series_capped(act, s, f, kmax);
}

/// The fusion correction of a morphism on one sign's strands: the higher
/// associator between parenthesizing the composite H_Γ → V′ through the
/// source vertices first (fuse in Γ, then map) and through the half-edge map
/// first (map strands, then fuse in Γ′).
inline ChordSeries morphism_correction(const Associator& assoc,
                                       const SkeletizedColouredSurface& src,
                                       const SkeletizedColouredSurface& dst,
                                       const SurfaceMorphism& f, int sign) {
  const OrderedMorphism& i_src = sign > 0 ? src.graph.i_plus : src.graph.i_minus;
  const OrderedMorphism& i_dst = sign > 0 ? dst.graph.i_plus : dst.graph.i_minus;
  const OrderedMorphism& fv = sign > 0 ? f.v_plus : f.v_minus;
  const OrderedMorphism& fh = sign > 0 ? f.h_plus : f.h_minus;
  ParenthesizedOrderedMorphism through_source =
      compose_parenthesized(standard_parenthesization(i_src),
                            standard_parenthesization(fv));
  ParenthesizedOrderedMorphism through_target =
      compose_parenthesized(standard_parenthesization(fh),
                            standard_parenthesization(i_dst));
  return higher_associator(assoc, through_source, through_target);
}

inline MorphismMatrices apply_morphism(const SkeletizedColouredSurface& src,
                                       const SkeletizedColouredSurface& dst,
                                       const SurfaceMorphism& f,
                                       const QuantModuliAlgebra& qsrc,
                                       const QuantModuliAlgebra& qdst,
                                       const Associator& assoc, int jobs = 1) {
  if (qsrc.associator_id != qdst.associator_id ||
      qsrc.associator_id != associator_fingerprint(assoc))
    throw Error(ErrorKind::io_parse,
                "quantizations were built with different associators");
  if (qsrc.jet_order != qdst.jet_order)
    throw Error(ErrorKind::io_parse, "quantizations have different jet orders");
  int D = std::min(qsrc.hbar_degree, qdst.hbar_degree);
  int N = qsrc.jet_order;
  DiagonalPullback pb = pullback_diagonal(src, dst, f);
  ModuliSpace ms = build_X_Gamma(src);
  ChordSeries u_plus = morphism_correction(assoc, src, dst, f, +1);
  ChordSeries u_minus = morphism_correction(assoc, src, dst, f, -1);
  ChordAction act_plus = detail::plain_action(ms, ms.plus_strands, src.t.t);
  ChordAction act_minus =
      detail::plain_action(ms, ms.minus_strands, detail::negated(src.t.t));
  int B = static_cast<int>(qsrc.inv.basis.size());
  MorphismMatrices mm;
  mm.deg.assign(D + 1, std::vector<SparseVec>(B));
  std::vector<std::vector<int>> trust(D + 1, std::vector<int>(B, N));
  std::vector<std::string> errors(B);
  parallel_for(B, jobs, [&](int i) {
    PrecisionTaggedValue x{qsrc.inv.basis[i], N};
    std::vector<PrecisionTaggedValue> plus =
        detail::apply_series_capped(act_plus, u_plus, x, D);
    std::vector<std::optional<PrecisionTaggedValue>> acc(D + 1);
    for (int k1 = 0; k1 < static_cast<int>(plus.size()); ++k1) {
      std::vector<PrecisionTaggedValue> minus =
          detail::apply_series_capped(act_minus, u_minus, plus[k1], D - k1);
      for (int k2 = 0; k1 + k2 <= D && k2 < static_cast<int>(minus.size()); ++k2)
        acc[k1 + k2] = acc[k1 + k2] ? ptv_add(*acc[k1 + k2], minus[k2]) : minus[k2];
    }
    for (int k = 0; k <= D; ++k) {
      if (!acc[k]) acc[k] = PrecisionTaggedValue{jet_zero(ms.ring), N};
      PrecisionTaggedValue img = apply_pullback(pb, *acc[k]);
      trust[k][i] = img.trusted_order;
      auto c = try_expand_in_basis(qdst.inv, img);
      if (!c) {
        std::ostringstream os;
        os << "image of basis element " << i
           << " does not lie in the target invariants at ℏ-degree " << k;
        errors[i] = os.str();
        return;
      }
      mm.deg[k][i] = std::move(*c);
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw Error(ErrorKind::verification, e);
  mm.trusted.assign(D + 1, N);
  for (int k = 0; k <= D; ++k)
    for (int i = 0; i < B; ++i) mm.trusted[k] = std::min(mm.trusted[k], trust[k][i]);
  return mm;
}

/// Composition of morphisms Γ --f--> Γ′ --g--> Γ″.
inline SurfaceMorphism compose_surface_morphisms(
    const SkeletizedColouredSurface& src, const SkeletizedColouredSurface& mid,
    [[maybe_unused]] const SkeletizedColouredSurface& dst, const SurfaceMorphism& f,
    const SurfaceMorphism& g) {
  SurfaceMorphism h;
  h.v_plus = compose(f.v_plus, g.v_plus);
  h.v_minus = compose(f.v_minus, g.v_minus);
  h.h_plus = compose(f.h_plus, g.h_plus);
  h.h_minus = compose(f.h_minus, g.h_minus);
  for (const auto& [e, e2] : f.edge_map) h.edge_map[e] = g.edge_map.at(e2);
  ModuliSpace ms_src = build_X_Gamma(src);
  for (const auto& label : ms_src.factor_labels) {
    // Push f's images through g's component of the intermediate factor.
    std::string mid_factor;
    for (int sign : {+1, -1}) {
      const std::map<std::string, std::string>& hm =
          sign > 0 ? src.graph.h_plus : src.graph.h_minus;
      for (const auto& [e, x] : hm)
        if (e == label)
          mid_factor = detail::factor_of_half_label(
              mid.graph, (sign > 0 ? f.h_plus : f.h_minus).assignment.at(x), sign);
      for (const auto& w : widowed_half_edges(src.graph, sign))
        if (w == label)
          mid_factor = detail::factor_of_half_label(
              mid.graph, (sign > 0 ? f.h_plus : f.h_minus).assignment.at(w), sign);
    }
    std::vector<Jet> images;
    for (const auto& img : f.component.at(label))
      images.push_back(substitute(img, g.component.at(mid_factor)));
    h.component[label] = std::move(images);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Reduction triviality

/// A chord contracting a vertex's diagonal colour action on both multiplicands
/// must annihilate products of invariants (its contraction element lies in
/// c⊗g + g⊗c for a coisotropic colour c).  Returns a failing basis pair, or
/// nullopt when the operator vanishes on the whole basis square.
inline std::optional<std::pair<int, int>> colour_chord_witness(
    const SkeletizedColouredSurface& s, const ModuliSpace& ms,
    const ClassicalModuli& cm, const std::string& vertex) {
  int sign = s.graph.i_plus.target.contains(vertex) ? +1 : -1;
  const OrderedMorphism& i = sign > 0 ? s.graph.i_plus : s.graph.i_minus;
  JetAlgebra ring2;
  ring2.order = ms.ring.order;
  for (const auto& c : ms.ring.coords) ring2.coords.push_back("a." + c);
  for (const auto& c : ms.ring.coords) ring2.coords.push_back("b." + c);
  int dim1 = ms.ring.dim();
  ChordAction act;
  act.ring = ring2;
  act.t = sign > 0 ? s.t.t : detail::negated(s.t.t);
  act.strands = StrandSet{{vertex + "a", vertex + "b"}};
  for (int copy = 0; copy < 2; ++copy) {
    std::vector<Derivation> diag;
    for (int a = 0; a < s.g.dim(); ++a) {
      std::optional<Derivation> d;
      for (const auto& h : i.fiber(vertex)) {
        Derivation e = embed_derivation(ms.strand.at(h)[a], ring2,
                                        copy == 0 ? 0 : dim1);
        d = d ? add(*d, e) : e;
      }
      diag.push_back(std::move(*d));
    }
    act.binding.push_back(ChordBinding{copy, +1});
    act.fields.push_back(std::move(diag));
  }
  int B = static_cast<int>(cm.basis.size());
  for (int i1 = 0; i1 < B; ++i1)
    for (int j = 0; j < B; ++j) {
      PrecisionTaggedValue w = ptv_mul(
          PrecisionTaggedValue{embed_jet(cm.basis[i1], ring2, 0), cm.degree},
          PrecisionTaggedValue{embed_jet(cm.basis[j], ring2, dim1), cm.degree});
      if (!ptv_is_zero(apply_chord_word(act, {{0, 1}}, w)))
        return std::make_pair(i1, j);
    }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Disjoint union

/// Label-disjoint union: every label of the left surface is prefixed with
/// pre_a, of the right with pre_b.  The Lie algebra, contraction element and
/// jet order must agree.
inline SkeletizedColouredSurface disjoint_union_surface(
    const SkeletizedColouredSurface& a, const SkeletizedColouredSurface& b,
    const std::string& pre_a = "0:", const std::string& pre_b = "1:") {
  if (!(a.g.basis == b.g.basis && a.g.c == b.g.c))
    throw Error(ErrorKind::io_parse,
                "disjoint union needs the same Lie algebra on both parts");
  if (!(a.t.t == b.t.t))
    throw Error(ErrorKind::io_parse,
                "disjoint union needs the same contraction element on both parts");
  if (surface_jet_order(a) != surface_jet_order(b) && a.graph.i_plus.source.size() &&
      b.graph.i_plus.source.size())
    throw Error(ErrorKind::io_parse,
                "disjoint union needs one jet order on both parts");
  SkeletizedColouredSurface u;
  u.g = a.g;
  u.t = a.t;
  u.graph.i_plus = disjoint_union(a.graph.i_plus, b.graph.i_plus, pre_a, pre_b);
  u.graph.i_minus = disjoint_union(a.graph.i_minus, b.graph.i_minus, pre_a, pre_b);
  for (const auto& e : a.graph.edges.elements)
    u.graph.edges.elements.push_back(pre_a + e);
  for (const auto& e : b.graph.edges.elements)
    u.graph.edges.elements.push_back(pre_b + e);
  auto merge = [&](const SkeletizedColouredSurface& part, const std::string& pre) {
    for (const auto& [e, h] : part.graph.h_plus) u.graph.h_plus[pre + e] = pre + h;
    for (const auto& [e, h] : part.graph.h_minus) u.graph.h_minus[pre + e] = pre + h;
    for (const auto& [v, c] : part.colour) u.colour[pre + v] = c;
    for (const auto& [e, sp] : part.edge_space) u.edge_space[pre + e] = sp;
    for (const auto& [h, sp] : part.half_space) u.half_space[pre + h] = sp;
  };
  merge(a, pre_a);
  merge(b, pre_b);
  return u;
}

// ---------------------------------------------------------------------------
// Input format

/// Parse a surface description over the double of a Manin triple.  Sections:
///
///   [vertices]    w = "+"              sign per vertex
///   [colours]     w = "x; y"           colour generators, combinations over
///                                      the Lie basis ("0" = zero subalgebra)
///   [half-edges]  0 = "w"              incident vertex per half-edge
///   [cilia]       w = "0 1"            total order of each vertex's fiber
///   [edges]       e = "0 4"            positive then negative half-edge
///   [models]      0 = "group"          "group" (widowed half-edges),
///                                      "double" (edges), "point" (either)
///
/// Lines are comments (#...), section headers, or `key = "value"` entries.
/// The group model is the formal group of the first half of the triple's
/// basis, acted on by the whole double; the double model is the formal group
/// of the whole double with its two translation actions.
namespace detail {

/// Parse one colour generator: a signed sum of `[coeff] basis-name` terms,
/// where a coefficient is "p" or "p/q" and the name is any basis element of
/// g (dualized names like "x*" included).  "0" denotes the zero vector.
inline SparseVec parse_colour_combination(const std::string& file, int line,
                                          const std::string& s, int col0,
                                          const LieAlgebra& g) {
  auto fail = [&](std::size_t at, const std::string& msg) -> void {
    throw ParseError(file, line, col0 + static_cast<int>(at) + 1, msg);
  };
  SparseVec row;
  std::size_t i = skip_ws(s, 0);
  bool first = true;
  while (i < s.size()) {
    int sign = +1;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1 : +1;
      i = skip_ws(s, i + 1);
      if (i >= s.size()) fail(i, "dangling sign");
    } else if (!first) {
      fail(i, "expected '+' or '-' between terms");
    }
    first = false;
    Rat coeff(1);
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      std::size_t j = i;
      while (j < s.size() &&
             (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '/'))
        ++j;
      try {
        coeff = rat_from_string(s.substr(i, j - i));
      } catch (const Error& e) {
        fail(i, e.what());
      }
      i = skip_ws(s, j);
      if (i >= s.size() || s[i] == '+' || s[i] == '-') {
        // A bare number is only meaningful as the zero vector.
        if (coeff != 0) fail(j, "a coefficient needs a basis name");
        continue;
      }
    }
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) &&
           s[j] != '+' && s[j] != '-')
      ++j;
    std::string name = s.substr(i, j - i);
    auto it = std::find(g.basis.begin(), g.basis.end(), name);
    if (it == g.basis.end()) fail(i, "unknown basis element '" + name + "'");
    int idx = static_cast<int>(it - g.basis.begin());
    Rat& e = row[idx];
    e += sign * coeff;
    if (e == 0) row.erase(idx);
    i = skip_ws(s, j);
  }
  return row;
}

}  // namespace detail

inline SkeletizedColouredSurface surface_from_text(const std::string& text,
                                                   const std::string& file,
                                                   const ManinTriple& mt,
                                                   const ActionConvention& conv,
                                                   int N, int max_n = 6) {
  struct Entry {
    int line;
    std::string key, value;
    int value_col;
  };
  std::map<std::string, std::vector<Entry>> sections;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::size_t i = detail::skip_ws(raw, 0);
    if (i >= raw.size() || raw[i] == '#') continue;
    if (raw[i] == '[') {
      std::size_t j = raw.find(']', i);
      if (j == std::string::npos)
        throw ParseError(file, lineno, static_cast<int>(i) + 1,
                         "unterminated section header");
      current = raw.substr(i + 1, j - i - 1);
      std::size_t k = detail::skip_ws(raw, j + 1);
      if (k < raw.size() && raw[k] != '#')
        throw ParseError(file, lineno, static_cast<int>(k) + 1,
                         "unexpected text after a section header");
      if (current != "vertices" && current != "colours" && current != "half-edges" &&
          current != "cilia" && current != "edges" && current != "models")
        throw ParseError(file, lineno, static_cast<int>(i) + 2,
                         "unknown section '" + current + "'");
      continue;
    }
    if (current.empty())
      throw ParseError(file, lineno, static_cast<int>(i) + 1,
                       "entries must appear inside a section");
    std::size_t k = i;
    while (k < raw.size() && raw[k] != ' ' && raw[k] != '\t' && raw[k] != '=') ++k;
    std::string key = raw.substr(i, k - i);
    if (key.empty())
      throw ParseError(file, lineno, static_cast<int>(i) + 1, "expected a label");
    k = detail::skip_ws(raw, k);
    if (k >= raw.size() || raw[k] != '=')
      throw ParseError(file, lineno, static_cast<int>(k) + 1, "expected '='");
    k = detail::skip_ws(raw, k + 1);
    if (k >= raw.size() || raw[k] != '"')
      throw ParseError(file, lineno, static_cast<int>(k) + 1,
                       "expected a quoted value");
    auto [value, after] = detail::quoted(file, lineno, raw, k);
    std::size_t rest = detail::skip_ws(raw, after);
    if (rest < raw.size() && raw[rest] != '#')
      throw ParseError(file, lineno, static_cast<int>(rest) + 1,
                       "unexpected text after the value");
    sections[current].push_back(
        Entry{lineno, key, value, static_cast<int>(k) + 2});
  }
  auto require_section = [&](const std::string& name) -> std::vector<Entry>& {
    auto it = sections.find(name);
    if (it == sections.end())
      throw ParseError(file, lineno, 1, "missing [" + name + "] section");
    return it->second;
  };

  // Vertices and signs.
  std::map<std::string, int> vertex_sign;
  FinSet v_plus, v_minus;
  for (const auto& e : require_section("vertices")) {
    if (vertex_sign.count(e.key))
      throw ParseError(file, e.line, 1, "duplicate vertex '" + e.key + "'");
    if (e.value != "+" && e.value != "-")
      throw ParseError(file, e.line, e.value_col, "vertex sign must be + or -");
    int sign = e.value == "+" ? +1 : -1;
    vertex_sign[e.key] = sign;
    (sign > 0 ? v_plus : v_minus).elements.push_back(e.key);
  }

  // Half-edges and their vertices.
  std::map<std::string, std::string> half_vertex;
  FinSet h_plus_set, h_minus_set;
  for (const auto& e : require_section("half-edges")) {
    if (half_vertex.count(e.key))
      throw ParseError(file, e.line, 1, "duplicate half-edge '" + e.key + "'");
    auto it = vertex_sign.find(e.value);
    if (it == vertex_sign.end())
      throw ParseError(file, e.line, e.value_col,
                       "unknown vertex '" + e.value + "'");
    half_vertex[e.key] = e.value;
    (it->second > 0 ? h_plus_set : h_minus_set).elements.push_back(e.key);
  }

  // Cilia: one entry per vertex listing its whole fiber in order.
  std::map<std::string, std::vector<std::string>> fibers;
  for (const auto& e : require_section("cilia")) {
    if (!vertex_sign.count(e.key))
      throw ParseError(file, e.line, 1, "unknown vertex '" + e.key + "'");
    if (fibers.count(e.key))
      throw ParseError(file, e.line, 1, "duplicate cilia for '" + e.key + "'");
    std::vector<std::string> fiber;
    std::istringstream fs(e.value);
    std::string h;
    while (fs >> h) {
      auto it = half_vertex.find(h);
      if (it == half_vertex.end() || it->second != e.key)
        throw ParseError(file, e.line, e.value_col,
                         "half-edge '" + h + "' is not incident to '" + e.key + "'");
      fiber.push_back(h);
    }
    fibers[e.key] = fiber;
  }
  for (const auto& [h, v] : half_vertex) {
    auto it = fibers.find(v);
    if (it == fibers.end() ||
        std::find(it->second.begin(), it->second.end(), h) == it->second.end())
      throw ParseError(file, lineno, 1,
                       "half-edge '" + h + "' missing from the cilia of '" + v + "'");
  }

  SkeletizedColouredSurface s;
  s.g = mt.g;
  s.t = casimir(mt);
  auto build_incidence = [&](const FinSet& halves, const FinSet& verts) {
    std::map<std::string, std::vector<std::string>> side_fibers;
    for (const auto& v : verts.elements) side_fibers[v] = fibers.at(v);
    return from_fibers(halves, verts, side_fibers);
  };
  s.graph.i_plus = build_incidence(h_plus_set, v_plus);
  s.graph.i_minus = build_incidence(h_minus_set, v_minus);

  // Edges: "positive-half negative-half".
  if (sections.count("edges"))
    for (const auto& e : sections["edges"]) {
      std::istringstream es(e.value);
      std::string hp, hm, extra;
      if (!(es >> hp >> hm) || (es >> extra))
        throw ParseError(file, e.line, e.value_col,
                         "an edge needs exactly two half-edges");
      if (!h_plus_set.contains(hp))
        throw ParseError(file, e.line, e.value_col,
                         "'" + hp + "' is not a positive half-edge");
      if (!h_minus_set.contains(hm))
        throw ParseError(file, e.line, e.value_col,
                         "'" + hm + "' is not a negative half-edge");
      if (s.graph.edges.contains(e.key))
        throw ParseError(file, e.line, 1, "duplicate edge '" + e.key + "'");
      s.graph.edges.elements.push_back(e.key);
      s.graph.h_plus[e.key] = hp;
      s.graph.h_minus[e.key] = hm;
    }

  // Colours over the double's basis.
  for (const auto& e : require_section("colours")) {
    if (!vertex_sign.count(e.key))
      throw ParseError(file, e.line, 1, "unknown vertex '" + e.key + "'");
    Subalgebra c;
    std::istringstream cs(e.value);
    std::string piece;
    while (std::getline(cs, piece, ';')) {
      SparseVec row =
          detail::parse_colour_combination(file, e.line, piece, e.value_col, mt.g);
      if (!row.empty()) c.span.push_back(row);
    }
    s.colour[e.key] = c;
  }
  for (const auto& [v, sign] : vertex_sign)
    if (!s.colour.count(v))
      throw ParseError(file, lineno, 1, "vertex '" + v + "' has no colour entry");

  // Models.
  std::optional<GSpace> group_model, point_model;
  std::optional<EdgeSpace> double_model, point_edge;
  for (const auto& e : require_section("models")) {
    bool is_edge = s.graph.edges.contains(e.key);
    bool is_half = half_vertex.count(e.key) && !is_edge;
    if (!is_edge && !is_half)
      throw ParseError(file, e.line, 1, "unknown factor '" + e.key + "'");
    if (is_edge) {
      if (e.value == "double") {
        if (!double_model) double_model = edge_double_space(mt.g, N, max_n);
        s.edge_space[e.key] = *double_model;
      } else if (e.value == "point") {
        if (!point_edge) {
          EdgeSpace sp;
          sp.algebra = JetAlgebra{{}, N};
          for (int a = 0; a < mt.g.dim(); ++a) {
            sp.plus.push_back(Derivation{sp.algebra, {}, N});
            sp.minus.push_back(Derivation{sp.algebra, {}, N});
          }
          point_edge = sp;
        }
        s.edge_space[e.key] = *point_edge;
      } else {
        throw ParseError(file, e.line, e.value_col,
                         "edge model must be 'double' or 'point'");
      }
    } else {
      if (e.value == "group") {
        if (!group_model) group_model = make_h_space(mt, N, conv, max_n);
        s.half_space[e.key] = *group_model;
      } else if (e.value == "point") {
        if (!point_model) point_model = point_space(mt.g, N);
        s.half_space[e.key] = *point_model;
      } else {
        throw ParseError(file, e.line, e.value_col,
                         "half-edge model must be 'group' or 'point'");
      }
    }
  }

  std::vector<std::string> diag = surface_diagnostics(s);
  if (!diag.empty())
    throw Error(ErrorKind::io_parse, file + ": " + diag.front());
  return s;
}

// ---------------------------------------------------------------------------
// Rendering and serialization

inline std::string render_surface(const SkeletizedColouredSurface& s) {
  std::ostringstream os;
  if (!s.graph.i_plus.target.elements.empty()) {
    os << "positive vertices:\n" << render_polygons(s.graph.i_plus);
  }
  if (!s.graph.i_minus.target.elements.empty()) {
    os << "negative vertices:\n" << render_polygons(s.graph.i_minus);
  }
  if (!s.graph.edges.elements.empty()) {
    os << "edges:\n";
    for (const auto& e : s.graph.edges.elements)
      os << "  " << e << ": " << s.graph.h_plus.at(e) << " (+) -- "
         << s.graph.h_minus.at(e) << " (-)\n";
  }
  os << "colours:\n";
  auto show_colour = [&](const std::string& v) {
    os << "  " << v << ":";
    const Subalgebra& c = s.colour.at(v);
    if (c.span.empty()) os << " 0";
    for (const auto& row : c.span) {
      os << " [";
      bool first = true;
      for (const auto& [i, coeff] : row) {
        if (!first) os << " + ";
        first = false;
        if (!(coeff == Rat(1))) os << rat_to_string(coeff) << "*";
        os << s.g.basis[i];
      }
      os << "]";
    }
    os << "\n";
  };
  for (const auto& v : s.graph.i_plus.target.elements) show_colour(v);
  for (const auto& v : s.graph.i_minus.target.elements) show_colour(v);
  return os.str();
}

inline nlohmann::ordered_json quant_to_json(const QuantModuliAlgebra& q) {
  nlohmann::ordered_json j;
  j["jet_order"] = q.jet_order;
  j["hbar_degree"] = q.hbar_degree;
  j["trusted"] = q.trusted;
  j["coordinates"] = q.inv.ring.coords;
  j["associator"] = q.associator_id;
  j["description"] = q.description;
  nlohmann::ordered_json basis = nlohmann::ordered_json::array();
  for (const auto& b : q.inv.basis) basis.push_back(jet_to_json(b));
  j["basis"] = std::move(basis);
  nlohmann::ordered_json star = nlohmann::ordered_json::array();
  for (int k = 0; k <= q.hbar_degree; ++k) {
    nlohmann::ordered_json layer = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < q.star[k].size(); ++i)
      for (std::size_t jj = 0; jj < q.star[k][i].size(); ++jj) {
        if (q.star[k][i][jj].empty()) continue;
        nlohmann::ordered_json cell;
        cell["i"] = i;
        cell["j"] = jj;
        nlohmann::ordered_json terms = nlohmann::ordered_json::array();
        for (const auto& [b, c] : q.star[k][i][jj])
          terms.push_back({b, rat_to_string(c)});
        cell["coeffs"] = std::move(terms);
        layer.push_back(std::move(cell));
      }
    star.push_back(std::move(layer));
  }
  j["star"] = std::move(star);
  return j;
}

}  // namespace quilt
