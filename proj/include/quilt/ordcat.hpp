/**
 * Ordered and parenthesized morphisms of finite sets.
 *
 * An ordered morphism is a map of finite sets together with a linear order
 * on every fiber; composition concatenates fiber orders lexicographically
 * (first-applied map innermost).  A parenthesized ordered morphism adds a
 * full binary tree over each fiber.  Any two parenthesizations of the same
 * fiber are connected by a canonical path of basic rotations
 * ((a b) c) <-> (a (b c)); we normalize through the left comb.
 *
 * Labels are opaque strings.  Empty fibers are allowed; grafting an empty
 * tree onto a leaf deletes that leaf and contracts its parent, which is how
 * composition handles them.
 */
#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "quilt/error.hpp"

namespace quilt {

// ---------------------------------------------------------------------------
// Finite sets and ordered morphisms

struct FinSet {
  std::vector<std::string> elements;

  bool contains(const std::string& x) const {
    return std::find(elements.begin(), elements.end(), x) != elements.end();
  }
  std::size_t size() const { return elements.size(); }
  bool operator==(const FinSet& o) const { return elements == o.elements; }
};

inline void validate_finset(const FinSet& s) {
  for (std::size_t i = 0; i < s.elements.size(); ++i)
    for (std::size_t j = i + 1; j < s.elements.size(); ++j)
      if (s.elements[i] == s.elements[j])
        throw Error(ErrorKind::io_parse,
                    "finite set has duplicate label '" + s.elements[i] + "'");
}

struct OrderedMorphism {
  FinSet source;
  FinSet target;
  std::map<std::string, std::string> assignment;               // source -> target
  std::map<std::string, std::vector<std::string>> fiber_orders;  // target -> ordered fiber

  const std::vector<std::string>& fiber(const std::string& t) const {
    auto it = fiber_orders.find(t);
    if (it == fiber_orders.end())
      throw std::logic_error("fiber requested for unknown target '" + t + "'");
    return it->second;
  }
};

/// Check all the structural invariants; throws on violation.
inline void validate_morphism(const OrderedMorphism& p) {
  validate_finset(p.source);
  validate_finset(p.target);
  if (p.fiber_orders.size() != p.target.size())
    throw Error(ErrorKind::io_parse, "morphism must list a fiber for every target element");
  std::size_t covered = 0;
  for (const auto& t : p.target.elements) {
    auto it = p.fiber_orders.find(t);
    if (it == p.fiber_orders.end())
      throw Error(ErrorKind::io_parse, "missing fiber order for target '" + t + "'");
    for (const auto& x : it->second) {
      auto a = p.assignment.find(x);
      if (a == p.assignment.end() || a->second != t)
        throw Error(ErrorKind::io_parse,
                    "fiber of '" + t + "' lists '" + x + "' but the assignment disagrees");
      ++covered;
    }
  }
  if (covered != p.source.size() || p.assignment.size() != p.source.size())
    throw Error(ErrorKind::io_parse, "fibers must partition the source exactly once");
  for (const auto& [x, t] : p.assignment) {
    if (!p.source.contains(x))
      throw Error(ErrorKind::io_parse, "assignment key '" + x + "' is not a source element");
    if (!p.target.contains(t))
      throw Error(ErrorKind::io_parse, "assignment value '" + t + "' is not a target element");
  }
}

/// Build a morphism from explicit fiber sequences (the assignment is implied).
inline OrderedMorphism from_fibers(FinSet source, FinSet target,
                                   std::map<std::string, std::vector<std::string>> fibers) {
  OrderedMorphism p;
  p.source = std::move(source);
  p.target = std::move(target);
  p.fiber_orders = std::move(fibers);
  for (const auto& t : p.target.elements) p.fiber_orders.try_emplace(t);
  for (const auto& [t, fib] : p.fiber_orders)
    for (const auto& x : fib) p.assignment[x] = t;
  validate_morphism(p);
  return p;
}

/// Build a morphism from an assignment; fibers inherit the source order.
inline OrderedMorphism from_assignment(FinSet source, FinSet target,
                                       std::map<std::string, std::string> assignment) {
  std::map<std::string, std::vector<std::string>> fibers;
  for (const auto& t : target.elements) fibers[t];
  for (const auto& x : source.elements) {
    auto it = assignment.find(x);
    if (it == assignment.end())
      throw Error(ErrorKind::io_parse, "assignment missing source element '" + x + "'");
    fibers[it->second].push_back(x);
  }
  OrderedMorphism p;
  p.source = std::move(source);
  p.target = std::move(target);
  p.assignment = std::move(assignment);
  p.fiber_orders = std::move(fibers);
  validate_morphism(p);
  return p;
}

inline OrderedMorphism identity_morphism(const FinSet& s) {
  std::map<std::string, std::string> a;
  for (const auto& x : s.elements) a[x] = x;
  return from_assignment(s, s, std::move(a));
}

/// Diagrammatic composite: apply p first, then q.  The fiber of z is the
/// concatenation, over j in q's fiber of z in q's order, of p's fibers over j.
inline OrderedMorphism compose(const OrderedMorphism& p, const OrderedMorphism& q) {
  if (!(p.target == q.source))
    throw Error(ErrorKind::io_parse, "compose: middle sets do not match");
  std::map<std::string, std::vector<std::string>> fibers;
  for (const auto& z : q.target.elements) {
    auto& fib = fibers[z];
    for (const auto& j : q.fiber(z))
      for (const auto& x : p.fiber(j)) fib.push_back(x);
  }
  return from_fibers(p.source, q.target, std::move(fibers));
}

/// Same assignment, every fiber order reversed.
inline OrderedMorphism reverse(const OrderedMorphism& p) {
  OrderedMorphism out = p;
  for (auto& [t, fib] : out.fiber_orders) std::reverse(fib.begin(), fib.end());
  return out;
}

/// Relabel every source and target element through the given maps.
inline OrderedMorphism rename_morphism(const OrderedMorphism& p,
                                       const std::map<std::string, std::string>& src_names,
                                       const std::map<std::string, std::string>& tgt_names) {
  auto look = [](const std::map<std::string, std::string>& m, const std::string& x) {
    auto it = m.find(x);
    if (it == m.end()) throw std::logic_error("rename_morphism: no name for '" + x + "'");
    return it->second;
  };
  OrderedMorphism out;
  for (const auto& x : p.source.elements) out.source.elements.push_back(look(src_names, x));
  for (const auto& t : p.target.elements) out.target.elements.push_back(look(tgt_names, t));
  for (const auto& [x, t] : p.assignment)
    out.assignment[look(src_names, x)] = look(tgt_names, t);
  for (const auto& [t, fib] : p.fiber_orders) {
    auto& f = out.fiber_orders[look(tgt_names, t)];
    for (const auto& x : fib) f.push_back(look(src_names, x));
  }
  validate_morphism(out);
  return out;
}

/// Disjoint union with collision-free labels via prefixing.
inline OrderedMorphism disjoint_union(const OrderedMorphism& p, const OrderedMorphism& q,
                                      const std::string& prefix_p = "0:",
                                      const std::string& prefix_q = "1:") {
  auto prefixed = [](const OrderedMorphism& m, const std::string& pre) {
    std::map<std::string, std::string> src, tgt;
    for (const auto& x : m.source.elements) src[x] = pre + x;
    for (const auto& t : m.target.elements) tgt[t] = pre + t;
    return rename_morphism(m, src, tgt);
  };
  OrderedMorphism a = prefixed(p, prefix_p);
  OrderedMorphism b = prefixed(q, prefix_q);
  OrderedMorphism out;
  out.source.elements = a.source.elements;
  out.source.elements.insert(out.source.elements.end(), b.source.elements.begin(),
                             b.source.elements.end());
  out.target.elements = a.target.elements;
  out.target.elements.insert(out.target.elements.end(), b.target.elements.begin(),
                             b.target.elements.end());
  out.assignment = a.assignment;
  out.assignment.insert(b.assignment.begin(), b.assignment.end());
  out.fiber_orders = a.fiber_orders;
  out.fiber_orders.insert(b.fiber_orders.begin(), b.fiber_orders.end());
  validate_morphism(out);
  return out;
}

// ---------------------------------------------------------------------------
// Parenthesizations (full binary trees over fiber positions)

/// Shape of a full binary tree; leaves are fiber positions left to right.
/// The default-constructed tree is the empty tree (0 leaves).
class PTree {
public:
  PTree() = default;
  static PTree leaf() {
    PTree t;
    t.n_ = 1;
    return t;
  }
  static PTree node(const PTree& l, const PTree& r) {
    if (l.empty() || r.empty())
      throw std::logic_error("PTree::node: children must be nonempty");
    PTree t;
    t.n_ = l.n_ + r.n_;
    t.l_ = std::make_shared<PTree>(l);
    t.r_ = std::make_shared<PTree>(r);
    return t;
  }

  bool empty() const { return n_ == 0; }
  bool is_leaf() const { return n_ == 1; }
  int leaves() const { return n_; }
  const PTree& left() const { return *l_; }
  const PTree& right() const { return *r_; }

  /// Canonical shape string: "" empty, "*" leaf, "(LR)" internal.
  std::string encode() const {
    if (empty()) return "";
    if (is_leaf()) return "*";
    return "(" + l_->encode() + r_->encode() + ")";
  }
  bool operator==(const PTree& o) const { return encode() == o.encode(); }
  bool operator!=(const PTree& o) const { return !(*this == o); }
  bool operator<(const PTree& o) const { return encode() < o.encode(); }

  /// Render with the given leaf labels in place of '*'.
  std::string render(const std::vector<std::string>& labels) const {
    std::size_t next = 0;
    return render_impl(labels, next);
  }

private:
  std::string render_impl(const std::vector<std::string>& labels, std::size_t& next) const {
    if (empty()) return "()";
    if (is_leaf()) {
      if (next >= labels.size()) throw std::logic_error("PTree::render: too few labels");
      return labels[next++];
    }
    return "(" + l_->render_impl(labels, next) + " " + r_->render_impl(labels, next) + ")";
  }

  int n_ = 0;
  std::shared_ptr<const PTree> l_, r_;
};

/// Left comb (((1 2) 3) 4)... on n leaves.
inline PTree left_comb(int n) {
  if (n <= 0) return PTree();
  PTree t = PTree::leaf();
  for (int i = 1; i < n; ++i) t = PTree::node(t, PTree::leaf());
  return t;
}

/// All full binary trees on n leaves; Catalan(n-1) of them for n >= 1.
/// Deterministic order: by position of the root split, left factor first.
inline std::vector<PTree> enumerate_parenthesizations(int n) {
  if (n < 0) throw std::logic_error("enumerate_parenthesizations: negative n");
  if (n == 0) return {PTree()};
  if (n == 1) return {PTree::leaf()};
  std::vector<PTree> out;
  for (int k = 1; k < n; ++k)
    for (const PTree& l : enumerate_parenthesizations(k))
      for (const PTree& r : enumerate_parenthesizations(n - k)) out.push_back(PTree::node(l, r));
  return out;
}

/// Replace leaf i of `shape` by subtrees[i]; the empty tree deletes the leaf
/// and its parent node collapses onto the sibling.
inline PTree graft(const PTree& shape, const std::vector<PTree>& subtrees) {
  std::size_t next = 0;
  // Recursive worker consuming leaves left to right.
  struct Walk {
    const std::vector<PTree>& subs;
    std::size_t& next;
    PTree operator()(const PTree& t) const {
      if (t.empty()) return PTree();
      if (t.is_leaf()) {
        if (next >= subs.size()) throw std::logic_error("graft: too few subtrees");
        return subs[next++];
      }
      PTree l = (*this)(t.left());
      PTree r = (*this)(t.right());
      if (l.empty()) return r;
      if (r.empty()) return l;
      return PTree::node(l, r);
    }
  };
  PTree out = Walk{subtrees, next}(shape);
  if (next != subtrees.size()) throw std::logic_error("graft: too many subtrees");
  return out;
}

// ---------------------------------------------------------------------------
// Reparenthesization moves

/// One basic rotation inside the tree over `target_element`.
/// left_to_right: ((A B) C) -> (A (B C)) at the addressed node; otherwise the
/// inverse.  node_path walks from the root, 0 = left child, 1 = right child.
struct ReparenthesizationStep {
  std::string target_element;
  std::vector<int> node_path;
  bool left_to_right = true;
};

inline PTree apply_step_at(const PTree& t, const std::vector<int>& path, std::size_t depth,
                           bool left_to_right) {
  if (t.empty() || t.is_leaf())
    throw std::logic_error("reparenthesization step addresses a leaf");
  if (depth < path.size()) {
    if (path[depth] == 0)
      return PTree::node(apply_step_at(t.left(), path, depth + 1, left_to_right), t.right());
    return PTree::node(t.left(), apply_step_at(t.right(), path, depth + 1, left_to_right));
  }
  if (left_to_right) {
    if (t.left().is_leaf())
      throw std::logic_error("rotation ((A B) C) -> (A (B C)) needs an internal left child");
    return PTree::node(t.left().left(), PTree::node(t.left().right(), t.right()));
  }
  if (t.right().is_leaf())
    throw std::logic_error("rotation (A (B C)) -> ((A B) C) needs an internal right child");
  return PTree::node(PTree::node(t.left(), t.right().left()), t.right().right());
}

inline PTree apply_step(const PTree& t, const ReparenthesizationStep& s) {
  return apply_step_at(t, s.node_path, 0, s.left_to_right);
}

/// Rotation sequence taking t to the left comb: at each node on the left
/// spine, rotate until the right child is a leaf, then descend left.
inline std::vector<ReparenthesizationStep> comb_steps(const PTree& t) {
  std::vector<ReparenthesizationStep> steps;
  std::vector<int> path;
  PTree node = t;  // subtree at `path`; rotations below `path` never affect above
  while (!node.empty() && !node.is_leaf()) {
    if (!node.right().is_leaf()) {
      steps.push_back({"", path, false});
      node = apply_step_at(node, path, path.size(), false);
    } else {
      PTree next = node.left();
      path.push_back(0);
      node = next;
    }
  }
  return steps;
}

inline ReparenthesizationStep inverted(ReparenthesizationStep s) {
  s.left_to_right = !s.left_to_right;
  return s;
}

/// Canonical rotation path from t1 to t2 (same leaf count required):
/// rotate t1 to the left comb, then run t2's comb path backwards.
inline std::vector<ReparenthesizationStep> reparenthesization_path(const PTree& t1,
                                                                   const PTree& t2) {
  if (t1.leaves() != t2.leaves())
    throw Error(ErrorKind::io_parse, "reparenthesization_path: leaf sequences differ");
  std::vector<ReparenthesizationStep> out = comb_steps(t1);
  std::vector<ReparenthesizationStep> back = comb_steps(t2);
  for (auto it = back.rbegin(); it != back.rend(); ++it) out.push_back(inverted(*it));
  return out;
}

// ---------------------------------------------------------------------------
// Parenthesized ordered morphisms

struct ParenthesizedOrderedMorphism {
  OrderedMorphism base;
  std::map<std::string, PTree> trees;  // one per target element

  const PTree& tree(const std::string& t) const {
    auto it = trees.find(t);
    if (it == trees.end()) throw std::logic_error("tree requested for unknown target '" + t + "'");
    return it->second;
  }
};

inline void validate_parenthesized(const ParenthesizedOrderedMorphism& p) {
  validate_morphism(p.base);
  if (p.trees.size() != p.base.target.size())
    throw Error(ErrorKind::io_parse, "parenthesized morphism must carry one tree per target");
  for (const auto& t : p.base.target.elements) {
    auto it = p.trees.find(t);
    if (it == p.trees.end())
      throw Error(ErrorKind::io_parse, "missing parenthesization for target '" + t + "'");
    if (it->second.leaves() != static_cast<int>(p.base.fiber(t).size()))
      throw Error(ErrorKind::io_parse,
                  "parenthesization over '" + t + "' has the wrong number of leaves");
  }
}

/// Left-comb every fiber.
inline ParenthesizedOrderedMorphism standard_parenthesization(const OrderedMorphism& p) {
  ParenthesizedOrderedMorphism out;
  out.base = p;
  for (const auto& t : p.target.elements)
    out.trees[t] = left_comb(static_cast<int>(p.fiber(t).size()));
  validate_parenthesized(out);
  return out;
}

/// Composite: base morphisms compose; the tree over z is q's tree with each
/// leaf j replaced by p's tree over j (empty fibers prune their leaf).
inline ParenthesizedOrderedMorphism compose_parenthesized(
    const ParenthesizedOrderedMorphism& p, const ParenthesizedOrderedMorphism& q) {
  ParenthesizedOrderedMorphism out;
  out.base = compose(p.base, q.base);
  for (const auto& z : q.base.target.elements) {
    std::vector<PTree> subs;
    for (const auto& j : q.base.fiber(z)) subs.push_back(p.tree(j));
    out.trees[z] = graft(q.tree(z), subs);
  }
  validate_parenthesized(out);
  return out;
}

// ---------------------------------------------------------------------------
// Polygonal debug rendering

/// One flattened polygon per target element: the fiber elements label the top
/// edges, the target element labels the bottom edge.
inline std::string render_polygons(const OrderedMorphism& p) {
  std::string out;
  for (const auto& t : p.target.elements) {
    const auto& fib = p.fiber(t);
    std::string top = "+";
    for (const auto& x : fib) top += "--" + x + "--+";
    if (fib.empty()) top += "------+";
    std::string bottom_label = "--" + t + "--";
    std::string bottom = "+" + bottom_label + "+";
    // Widen whichever edge row is shorter so the slants meet it.
    std::size_t width = std::max(top.size(), bottom.size() + 2);
    while (top.size() < width) top.insert(top.size() - 1, "-");
    while (bottom.size() + 2 < width) bottom.insert(bottom.size() - 1, "-");
    out += top + "\n";
    out += " \\" + std::string(width - 4, ' ') + "/\n";
    out += "  " + bottom + "\n\n";
  }
  return out;
}

}  // namespace quilt
