/**
 * Rational Drinfeld associator and parenthesized-braid evaluation.
 *
 * The associator Phi lives on three strands in A = t^{12}, B = t^{23}; it is
 * the exponential of a Lie series all of whose brackets contain both letters,
 * which makes group-likeness and the strand-deletion unit constraints hold
 * structurally.  Degree by degree, the unknown Lie coefficients are fixed by
 * an exact affine-linear solve of the pentagon and both hexagons; free
 * directions are closed by a deterministic tie-break.
 *
 * Braid words are evaluated against a state (parenthesization tree, strand
 * order).  A rotation step contributes Phi^{+1} (toward right-nesting) or
 * Phi^{-1}, with its three slots cabled by the subtree blocks at the rotated
 * node; crossing two sibling blocks contributes the cabled braiding
 * R^{+-1} = exp(+-(1/2) sum t^{uv}) over the block pairs.  Factors compose in
 * operator order: the later move multiplies on the left.  Pentagon and
 * hexagon constraints are generated from pairs of braid paths with equal
 * endpoints, so every downstream use of fusion elements shares one
 * convention by construction.
 */
#pragma once

#include <algorithm>
#include <cassert>
#include <map>
#include <string>
#include <vector>

#include "quilt/chords.hpp"
#include "quilt/error.hpp"
#include "quilt/linalg.hpp"
#include "quilt/ordcat.hpp"

namespace quilt {

struct Associator {
  ChordSeries phi;  // on strands {"1","2","3"}, constant term 1
  int degree = 0;   // = phi.trunc
};

enum class TieBreak { zero, alternate };

inline StrandSet three_strands() { return StrandSet{{"1", "2", "3"}}; }

/// The braiding R = exp((1/2) t^{12}) on two strands.
inline ChordSeries standard_braiding(int trunc) {
  StrandSet s{{"1", "2"}};
  return exp_series(scale(chord_gen(s, trunc, "1", "2"), rat(1, 2)));
}

// ---------------------------------------------------------------------------
// Braid states and moves

/// Current shape of a parenthesized braid: tree over the left-to-right
/// strand order.  Crossings permute the order; rotations only the tree.
struct BraidState {
  PTree tree;
  std::vector<std::string> order;

  StrandSet strand_set() const { return StrandSet{order}; }
};

struct ParenthesizedBraidMove {
  enum class Kind { reparenthesize, cross };
  Kind kind = Kind::cross;
  ReparenthesizationStep step;  // reparenthesize: rotation node + orientation
  std::vector<int> node;        // cross: path to the node whose children swap
  int sign = +1;                // cross: +1 over, -1 under
};

inline ParenthesizedBraidMove rotation_move(std::vector<int> path, bool left_to_right) {
  ParenthesizedBraidMove m;
  m.kind = ParenthesizedBraidMove::Kind::reparenthesize;
  m.step = ReparenthesizationStep{"", std::move(path), left_to_right};
  return m;
}

inline ParenthesizedBraidMove cross_move(std::vector<int> path, int sign) {
  ParenthesizedBraidMove m;
  m.kind = ParenthesizedBraidMove::Kind::cross;
  m.node = std::move(path);
  m.sign = sign;
  return m;
}

namespace detail {

/// Subtree at a node path together with its leftmost leaf position.
inline std::pair<PTree, int> subtree_at(const PTree& t, const std::vector<int>& path) {
  PTree cur = t;
  int offset = 0;
  for (int dir : path) {
    if (cur.empty() || cur.is_leaf())
      throw std::logic_error("node path walks past a leaf");
    if (dir == 0) {
      cur = cur.left();
    } else {
      offset += cur.left().leaves();
      cur = cur.right();
    }
  }
  return {cur, offset};
}

/// Path to the (unique) node covering exactly leaves [lo, lo+size).
inline std::vector<int> path_to_range(const PTree& t, int lo, int size) {
  std::vector<int> path;
  PTree cur = t;
  int offset = 0;
  while (true) {
    if (cur.leaves() == size && offset == lo) return path;
    if (cur.empty() || cur.is_leaf())
      throw std::logic_error("no node covers the requested leaf range");
    int nl = cur.left().leaves();
    if (lo < offset + nl && lo + size <= offset + nl) {
      path.push_back(0);
      cur = cur.left();
    } else if (lo >= offset + nl) {
      path.push_back(1);
      offset += nl;
      cur = cur.right();
    } else {
      throw std::logic_error("requested leaf range splits across a node");
    }
  }
}

/// Left comb on `len` slots with a two-leaf node grafted at slot `i`.
inline PTree comb_with_pair(int len, int i) {
  std::vector<PTree> subs;
  for (int k = 0; k < len; ++k)
    subs.push_back(k == i ? PTree::node(PTree::leaf(), PTree::leaf()) : PTree::leaf());
  return graft(left_comb(len), subs);
}

/// Replace every leaf of T by a two-leaf pair node.
inline PTree pairs_tree(const PTree& T) {
  std::vector<PTree> subs(T.leaves(), PTree::node(PTree::leaf(), PTree::leaf()));
  return graft(T, subs);
}

}  // namespace detail

/// Phi with its three slots cabled by label blocks inside `ambient`.
inline ChordSeries cabled_phi(const Associator& assoc, const StrandSet& ambient,
                              const std::vector<std::string>& x,
                              const std::vector<std::string>& y,
                              const std::vector<std::string>& z, int exponent) {
  ChordSeries base = exponent >= 0 ? assoc.phi : inverse_series(assoc.phi);
  return multi_cable(base, {{"1", x}, {"2", y}, {"3", z}}, ambient);
}

/// Evaluate one move against a state; returns the chord factor (on the fixed
/// ambient strand set) and advances the state in place.
inline ChordSeries apply_braid_move(const Associator& assoc, const ChordSeries& braiding,
                                    const StrandSet& ambient, BraidState& state,
                                    const ParenthesizedBraidMove& move) {
  auto block = [&](int lo, int n) {
    return std::vector<std::string>(state.order.begin() + lo, state.order.begin() + lo + n);
  };
  if (move.kind == ParenthesizedBraidMove::Kind::reparenthesize) {
    auto [node, lo] = detail::subtree_at(state.tree, move.step.node_path);
    if (node.empty() || node.is_leaf())
      throw Error(ErrorKind::io_parse, "rotation move addresses a leaf");
    PTree xt, yt, zt;
    if (move.step.left_to_right) {
      if (node.left().is_leaf())
        throw Error(ErrorKind::io_parse, "rotation needs an internal left child");
      xt = node.left().left();
      yt = node.left().right();
      zt = node.right();
    } else {
      if (node.right().is_leaf())
        throw Error(ErrorKind::io_parse, "rotation needs an internal right child");
      xt = node.left();
      yt = node.right().left();
      zt = node.right().right();
    }
    int nx = xt.leaves(), ny = yt.leaves(), nz = zt.leaves();
    ChordSeries factor =
        cabled_phi(assoc, ambient, block(lo, nx), block(lo + nx, ny),
                   block(lo + nx + ny, nz), move.step.left_to_right ? +1 : -1);
    state.tree = apply_step(state.tree, move.step);
    return factor;
  }
  // Crossing: swap the two children of the addressed node.
  auto [node, lo] = detail::subtree_at(state.tree, move.node);
  if (node.empty() || node.is_leaf())
    throw Error(ErrorKind::io_parse, "crossing move addresses a leaf");
  PTree lt = node.left(), rt = node.right();
  int nl = lt.leaves(), nr = rt.leaves();
  std::vector<std::string> lb = block(lo, nl), rb = block(lo + nl, nr);
  ChordSeries base = move.sign >= 0 ? braiding : inverse_series(braiding);
  ChordSeries factor = multi_cable(base, {{"1", lb}, {"2", rb}}, ambient);
  // Rebuild the tree with the children swapped, then update the order.
  struct Swap {
    static PTree at(const PTree& t, const std::vector<int>& path, std::size_t d) {
      if (d == path.size()) return PTree::node(t.right(), t.left());
      if (path[d] == 0) return PTree::node(at(t.left(), path, d + 1), t.right());
      return PTree::node(t.left(), at(t.right(), path, d + 1));
    }
  };
  state.tree = Swap::at(state.tree, move.node, 0);
  for (int k = 0; k < nr; ++k) state.order[lo + k] = rb[k];
  for (int k = 0; k < nl; ++k) state.order[lo + nr + k] = lb[k];
  return factor;
}

/// Product over a move sequence, later moves multiplying on the left.
/// Returns the element on the strand set fixed by the starting order;
/// `state` is advanced to the final state.
inline ChordSeries braid_to_chord(const Associator& assoc, const ChordSeries& braiding,
                                  BraidState& state,
                                  const std::vector<ParenthesizedBraidMove>& moves) {
  StrandSet ambient = state.strand_set();
  ChordSeries acc = chord_unit(ambient, assoc.phi.trunc);
  for (const auto& m : moves) {
    ChordSeries factor = apply_braid_move(assoc, braiding, ambient, state, m);
    acc = mul(factor, acc);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Pentagon and hexagons as pairs of braid paths

/// Residual of the pentagon: the two rotation routes from (((1 2) 3) 4) to
/// (1 (2 (3 4))) must evaluate equally.
inline ChordSeries check_pentagon(const Associator& assoc) {
  ChordSeries R = standard_braiding(assoc.phi.trunc);
  std::vector<std::string> order{"1", "2", "3", "4"};
  PTree start = left_comb(4);
  BraidState s1{start, order};
  ChordSeries two = braid_to_chord(assoc, R, s1,
                                   {rotation_move({}, true), rotation_move({}, true)});
  BraidState s2{start, order};
  ChordSeries three =
      braid_to_chord(assoc, R, s2,
                     {rotation_move({0}, true), rotation_move({}, true),
                      rotation_move({1}, true)});
  assert(s1.tree == s2.tree && s1.order == s2.order);
  return sub(two, three);
}

/// Residuals of the two hexagons: crossing strand 1 past the fused block
/// (2 3) in one move equals the three-rotation route with two single
/// crossings; once with positive crossings, once with negative.
inline std::pair<ChordSeries, ChordSeries> check_hexagons(const Associator& assoc,
                                                          const ChordSeries& braiding) {
  if (!(braiding.strands == StrandSet{{"1", "2"}}))
    throw Error(ErrorKind::io_parse, "braiding must live on strands {1,2}");
  auto one_sign = [&](int sign) {
    PTree start = PTree::node(PTree::leaf(), PTree::node(PTree::leaf(), PTree::leaf()));
    std::vector<std::string> order{"1", "2", "3"};
    BraidState sa{start, order};
    ChordSeries block = braid_to_chord(assoc, braiding, sa, {cross_move({}, sign)});
    BraidState sb{start, order};
    ChordSeries steps = braid_to_chord(
        assoc, braiding, sb,
        {rotation_move({}, false), cross_move({0}, sign), rotation_move({}, true),
         cross_move({1}, sign), rotation_move({}, false)});
    assert(sa.tree == sb.tree && sa.order == sb.order);
    return sub(block, steps);
  };
  return {one_sign(+1), one_sign(-1)};
}

/// delete of any strand must give 1.
inline bool associator_units_ok(const Associator& assoc) {
  ChordSeries phi = assoc.phi;
  for (const std::string s : {"1", "2", "3"}) {
    ChordSeries d = delete_strand(phi, s);
    if (!(d == chord_unit(d.strands, d.trunc))) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Solver

namespace detail {

/// Lyndon words over {a,b} of the given length that use both letters,
/// ascending lex; 'a' < 'b'.
inline std::vector<std::string> mixed_lyndon_words(int len) {
  std::vector<std::string> out;
  for (int mask = 0; mask < (1 << len); ++mask) {
    std::string w(len, 'a');
    for (int i = 0; i < len; ++i)
      if (mask >> i & 1) w[i] = 'b';
    bool lyndon = true;
    for (int cut = 1; cut < len && lyndon; ++cut)
      if (w.substr(cut) + w.substr(0, cut) <= w) lyndon = false;
    if (lyndon && w.find('a') != std::string::npos && w.find('b') != std::string::npos)
      out.push_back(w);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Standard bracketing of a Lyndon word, expanded in the chord algebra with
/// a = t^{12}, b = t^{23}.
inline ChordSeries lyndon_bracket(const std::string& w, int trunc) {
  StrandSet s3 = three_strands();
  if (w.size() == 1)
    return w == "a" ? chord_gen(s3, trunc, "1", "2") : chord_gen(s3, trunc, "2", "3");
  // Split at the longest proper suffix that is itself Lyndon.
  for (std::size_t cut = 1; cut < w.size(); ++cut) {
    std::string v = w.substr(cut);
    bool lyndon = true;
    for (std::size_t c = 1; c < v.size() && lyndon; ++c)
      if (v.substr(c) + v.substr(0, c) <= v) lyndon = false;
    if (lyndon)
      return commutator(lyndon_bracket(w.substr(0, cut), trunc), lyndon_bracket(v, trunc));
  }
  throw std::logic_error("lyndon_bracket: no standard factorization for '" + w + "'");
}

}  // namespace detail

/// Construct the associator degree by degree.  Free directions of the
/// constraint system are set to zero (TieBreak::zero) or shifted by the
/// kernel basis (TieBreak::alternate, giving a second valid associator).
inline Associator solve_associator(int D, TieBreak tie_break = TieBreak::zero) {
  if (D < 1 || D > 4)
    throw Error(ErrorKind::io_parse,
                "associator degree must lie in 1..4 (got " + std::to_string(D) + ")");
  StrandSet s3 = three_strands();
  ChordSeries log_phi = chord_zero(s3, D);
  for (int d = 2; d <= D; ++d) {
    std::vector<ChordSeries> basis;
    for (const auto& w : detail::mixed_lyndon_words(d))
      basis.push_back(detail::lyndon_bracket(w, D));
    int n = static_cast<int>(basis.size());
    // Residuals of all three constraint families at formal degree d, as one
    // stacked vector; affine-linear in the new coefficients.
    auto residual_stack = [&](const std::vector<Rat>& x) {
      ChordSeries cand = log_phi;
      for (int i = 0; i < n; ++i) cand = add(cand, scale(basis[i], x[i]));
      Associator a{exp_series(cand), D};
      ChordSeries pent = check_pentagon(a);
      auto [hex_pos, hex_neg] = check_hexagons(a, standard_braiding(D));
      std::vector<std::pair<Word, Rat>> rows;
      for (const auto& [w, c] : component(pent, d)) rows.emplace_back(w, c);
      // Hexagon words live on 3 strands and could collide with pentagon
      // words as keys; prefix a tag chord well outside any strand range.
      auto append = [&rows](const ChordSeries& series, int dd, int blk) {
        for (const auto& [w, c] : component(series, dd)) {
          Word key = w;
          key.insert(key.begin(), chord(100 + blk, 101 + blk));
          rows.emplace_back(key, c);
        }
      };
      append(hex_pos, d, 0);
      append(hex_neg, d, 2);
      return rows;
    };
    std::vector<Rat> zero(n, Rat(0));
    auto r0 = residual_stack(zero);
    // Column index per residual word key.
    std::map<Word, int> row_index;
    auto note_rows = [&row_index](const std::vector<std::pair<Word, Rat>>& rows) {
      for (const auto& [w, c] : rows) row_index.emplace(w, 0);
    };
    note_rows(r0);
    std::vector<std::vector<std::pair<Word, Rat>>> ri(n);
    for (int i = 0; i < n; ++i) {
      std::vector<Rat> x = zero;
      x[i] = 1;
      ri[i] = residual_stack(x);
      note_rows(ri[i]);
    }
    int nrows = 0;
    for (auto& [w, idx] : row_index) idx = nrows++;
    // Equations: sum_i (ri - r0)_w x_i = -r0_w for every residual word w.
    std::vector<SparseVec> eq(nrows);
    std::vector<Rat> rhs(nrows, Rat(0));
    for (const auto& [w, c] : r0) rhs[row_index.at(w)] = -c;
    for (int i = 0; i < n; ++i) {
      std::map<Word, Rat> delta;
      for (const auto& [w, c] : ri[i]) delta[w] += c;
      for (const auto& [w, c] : r0) delta[w] -= c;
      for (const auto& [w, c] : delta)
        if (c != 0) eq[row_index.at(w)][i] = c;
    }
    LinearSolution sol = solve_linear(n, eq, rhs);
    if (!sol.consistent)
      throw Error(ErrorKind::solver,
                  "associator system inconsistent at degree " + std::to_string(d) +
                      " (equation " + std::to_string(sol.witness_row) + ")");
    std::vector<Rat> x(n, Rat(0));
    for (const auto& [i, c] : sol.particular) x[i] = c;
    if (tie_break == TieBreak::alternate)
      for (const auto& k : sol.kernel)
        for (const auto& [i, c] : k) x[i] += c;
    for (int i = 0; i < n; ++i) log_phi = add(log_phi, scale(basis[i], x[i]));
  }
  Associator out{exp_series(log_phi), D};
  // Re-verify everything the solver promised.
  if (!check_pentagon(out).is_zero())
    throw Error(ErrorKind::solver, "pentagon residual nonzero after solve");
  auto [h1, h2] = check_hexagons(out, standard_braiding(D));
  if (!h1.is_zero() || !h2.is_zero())
    throw Error(ErrorKind::solver, "hexagon residual nonzero after solve");
  if (!is_group_like(out.phi))
    throw Error(ErrorKind::solver, "associator is not group-like");
  if (!associator_units_ok(out))
    throw Error(ErrorKind::solver, "associator unit constraints fail");
  return out;
}

// ---------------------------------------------------------------------------
// Fusion elements

struct FusionElement {
  ChordSeries K;     // on a-copies then b-copies of the fiber
  PTree source_tree; // the two fiber copies side by side
  PTree target_tree; // the fiber tree with paired leaves
};

/// Canonical move sequence fusing the two copies of an n-leaf fiber with
/// tree T: for k = 1..n, transport the k-th right-copy strand leftward past
/// the greater left-copy strands with positive crossings, exposing each
/// crossing through rotations; finally rotate to the paired tree.
inline std::vector<ParenthesizedBraidMove> fusion_braid(const PTree& T) {
  int n = T.leaves();
  std::vector<ParenthesizedBraidMove> moves;
  if (n == 0) return moves;
  // Simulate with integer ids: 0..n-1 left copies, n..2n-1 right copies.
  std::vector<int> order;
  for (int i = 0; i < n; ++i) order.push_back(i);
  for (int i = 0; i < n; ++i) order.push_back(n + i);
  PTree cur = n == 1 ? PTree::node(PTree::leaf(), PTree::leaf()) : PTree::node(T, T);
  auto emit_rotations_to = [&](const PTree& target) {
    for (const auto& s : reparenthesization_path(cur, target))
      moves.push_back(rotation_move(s.node_path, s.left_to_right));
    cur = target;
  };
  for (int k = 0; k < n; ++k) {
    // Right copy k sits somewhere right of its final slot; walk it left past
    // every left copy j > k.
    while (true) {
      int pos = static_cast<int>(std::find(order.begin(), order.end(), n + k) -
                                 order.begin());
      if (pos == 0) break;
      int left_neighbor = order[pos - 1];
      if (left_neighbor < n && left_neighbor > k) {
        emit_rotations_to(detail::comb_with_pair(static_cast<int>(order.size()) - 1, pos - 1));
        moves.push_back(cross_move(detail::path_to_range(cur, pos - 1, 2), +1));
        // The crossing swaps the pair node's children.
        std::swap(order[pos - 1], order[pos]);
        // Tree shape unchanged (two leaves swap), order updated.
      } else {
        break;
      }
    }
  }
  emit_rotations_to(detail::pairs_tree(T));
  return moves;
}

inline std::vector<std::string> doubled_fiber_labels(const std::vector<std::string>& fiber) {
  std::vector<std::string> out;
  for (const auto& x : fiber) out.push_back(x + "a");
  for (const auto& x : fiber) out.push_back(x + "b");
  return out;
}

/// K for one fiber: evaluate the canonical fusion braid.
inline FusionElement fusion_element(const Associator& assoc,
                                    const std::vector<std::string>& fiber, const PTree& T) {
  if (static_cast<int>(fiber.size()) != T.leaves())
    throw std::logic_error("fusion_element: fiber/tree size mismatch");
  int n = T.leaves();
  FusionElement out;
  out.source_tree = n == 0 ? PTree()
                           : (n == 1 ? PTree::node(PTree::leaf(), PTree::leaf())
                                     : PTree::node(T, T));
  out.target_tree = detail::pairs_tree(T);
  StrandSet strands{doubled_fiber_labels(fiber)};
  validate_strands(strands);
  BraidState state{out.source_tree, strands.strands};
  ChordSeries R = standard_braiding(assoc.phi.trunc);
  out.K = braid_to_chord(assoc, R, state, fusion_braid(T));
  // The braid must land on the paired tree with interleaved strands.
  std::vector<std::string> interleaved;
  for (const auto& x : fiber) {
    interleaved.push_back(x + "a");
    interleaved.push_back(x + "b");
  }
  if (!(state.tree == out.target_tree) || state.order != interleaved)
    throw std::logic_error("fusion braid did not reach its target state");
  return out;
}

/// Strand set for doubled sources: all a-copies in source order, then all
/// b-copies.
inline StrandSet doubled_source(const OrderedMorphism& base) {
  StrandSet s;
  for (const auto& x : base.source.elements) s.strands.push_back(x + "a");
  for (const auto& x : base.source.elements) s.strands.push_back(x + "b");
  validate_strands(s);
  return s;
}

/// nu^p: the product of fusion elements over all fibers, embedded on the
/// doubled source.  Factors touch disjoint strands, so the order is
/// irrelevant; we take the target order.
inline ChordSeries nu(const Associator& assoc, const ParenthesizedOrderedMorphism& p) {
  StrandSet ambient = doubled_source(p.base);
  ChordSeries acc = chord_unit(ambient, assoc.phi.trunc);
  for (const auto& j : p.base.target.elements) {
    FusionElement K = fusion_element(assoc, p.base.fiber(j), p.tree(j));
    std::map<std::string, std::string> names;
    for (const auto& s : K.K.strands.strands) names[s] = s;
    acc = mul(acc, embed(K.K, names, ambient));
  }
  return acc;
}

/// Cable a series living on the doubled target of p along p's fibers:
/// j+"a" goes to the fiber's a-copies, j+"b" to its b-copies.  Empty fibers
/// delete their strands.
inline ChordSeries cable_fibers_doubled(const ChordSeries& a, const OrderedMorphism& p,
                                        StrandSet ambient) {
  std::map<std::string, std::vector<std::string>> blocks;
  for (const auto& j : p.target.elements) {
    std::vector<std::string> ba, bb;
    for (const auto& x : p.fiber(j)) {
      ba.push_back(x + "a");
      bb.push_back(x + "b");
    }
    blocks[j + "a"] = std::move(ba);
    blocks[j + "b"] = std::move(bb);
  }
  return multi_cable(a, blocks, std::move(ambient));
}

/// Higher associator between two parenthesizations of the same morphism:
/// per fiber, evaluate the canonical rotation path from p's tree to p''s
/// tree; embed the factors on the (undoubled) source.
inline ChordSeries higher_associator(const Associator& assoc,
                                     const ParenthesizedOrderedMorphism& p,
                                     const ParenthesizedOrderedMorphism& q) {
  if (!(p.base.assignment == q.base.assignment) ||
      !(p.base.fiber_orders == q.base.fiber_orders))
    throw Error(ErrorKind::io_parse, "higher_associator: underlying morphisms differ");
  StrandSet ambient{p.base.source.elements};
  ChordSeries acc = chord_unit(ambient, assoc.phi.trunc);
  ChordSeries R = standard_braiding(assoc.phi.trunc);
  for (const auto& j : p.base.target.elements) {
    const auto& fib = p.base.fiber(j);
    if (fib.size() < 3) continue;  // nothing to rotate
    std::vector<ParenthesizedBraidMove> moves;
    for (const auto& s : reparenthesization_path(p.tree(j), q.tree(j)))
      moves.push_back(rotation_move(s.node_path, s.left_to_right));
    BraidState state{p.tree(j), fib};
    ChordSeries factor = braid_to_chord(assoc, R, state, moves);
    std::map<std::string, std::string> names;
    for (const auto& s : fib) names[s] = s;
    acc = mul(embed(factor, names, ambient), acc);
  }
  return acc;
}

}  // namespace quilt
