#include "quilt/ordcat.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"

using namespace quilt;

namespace {

/// The running three-block example: six edges over three blocks.
OrderedMorphism example_p() {
  FinSet I{{"1a", "2a", "1b", "2b", "3b", "1c"}};
  FinSet J{{"a", "b", "c"}};
  return from_fibers(I, J,
                     {{"a", {"1a", "2a"}}, {"b", {"1b", "2b", "3b"}}, {"c", {"1c"}}});
}

OrderedMorphism example_q() {
  FinSet J{{"a", "b", "c"}};
  FinSet K{{"x", "y"}};
  return from_fibers(J, K, {{"x", {"a", "c"}}, {"y", {"b"}}});
}

}  // namespace

TEST_CASE("composite concatenates fiber orders lexicographically") {
  OrderedMorphism r = compose(example_p(), example_q());
  CHECK(r.fiber("x") == std::vector<std::string>{"1a", "2a", "1c"});
  CHECK(r.fiber("y") == std::vector<std::string>{"1b", "2b", "3b"});
  CHECK(r.assignment.at("1c") == "x");
}

TEST_CASE("identity is neutral for composition") {
  OrderedMorphism p = example_p();
  OrderedMorphism l = compose(identity_morphism(p.source), p);
  OrderedMorphism r = compose(p, identity_morphism(p.target));
  CHECK(l.fiber_orders == p.fiber_orders);
  CHECK(r.fiber_orders == p.fiber_orders);
  CHECK(l.assignment == p.assignment);
  CHECK(r.assignment == p.assignment);
}

TEST_CASE("composition is associative on random triples") {
  testutil::Rng rng(20240811);
  for (int trial = 0; trial < 200; ++trial) {
    FinSet I = testutil::named_set("i", testutil::pick(rng, 0, 5));
    FinSet J = testutil::named_set("j", testutil::pick(rng, 1, 4));
    FinSet K = testutil::named_set("k", testutil::pick(rng, 1, 4));
    FinSet L = testutil::named_set("l", testutil::pick(rng, 1, 3));
    OrderedMorphism p = testutil::random_morphism(rng, I, J);
    OrderedMorphism q = testutil::random_morphism(rng, J, K);
    OrderedMorphism r = testutil::random_morphism(rng, K, L);
    OrderedMorphism lhs = compose(compose(p, q), r);
    OrderedMorphism rhs = compose(p, compose(q, r));
    REQUIRE(lhs.assignment == rhs.assignment);
    REQUIRE(lhs.fiber_orders == rhs.fiber_orders);
  }
}

TEST_CASE("compose rejects mismatched middle sets") {
  OrderedMorphism p = example_p();
  OrderedMorphism bad = example_q();
  bad.source.elements = {"a", "b", "z"};
  CHECK_THROWS_AS(compose(p, bad), Error);
}

TEST_CASE("reverse is an involution and fixes singleton fibers") {
  OrderedMorphism p = example_p();
  OrderedMorphism rr = reverse(reverse(p));
  CHECK(rr.fiber_orders == p.fiber_orders);
  CHECK(reverse(p).fiber("c") == std::vector<std::string>{"1c"});
  CHECK(reverse(p).fiber("b") == std::vector<std::string>{"3b", "2b", "1b"});
}

TEST_CASE("reverse commutes with composition") {
  testutil::Rng rng(20240812);
  for (int trial = 0; trial < 100; ++trial) {
    FinSet I = testutil::named_set("i", testutil::pick(rng, 0, 5));
    FinSet J = testutil::named_set("j", testutil::pick(rng, 1, 4));
    FinSet K = testutil::named_set("k", testutil::pick(rng, 1, 3));
    OrderedMorphism p = testutil::random_morphism(rng, I, J);
    OrderedMorphism q = testutil::random_morphism(rng, J, K);
    OrderedMorphism lhs = reverse(compose(p, q));
    OrderedMorphism rhs = compose(reverse(p), reverse(q));
    REQUIRE(lhs.fiber_orders == rhs.fiber_orders);
  }
}

TEST_CASE("parenthesization counts follow the Catalan numbers") {
  CHECK(enumerate_parenthesizations(1).size() == 1);
  CHECK(enumerate_parenthesizations(2).size() == 1);
  CHECK(enumerate_parenthesizations(3).size() == 2);
  CHECK(enumerate_parenthesizations(4).size() == 5);
  CHECK(enumerate_parenthesizations(5).size() == 14);
  // All distinct.
  auto trees = enumerate_parenthesizations(4);
  std::set<std::string> codes;
  for (const auto& t : trees) codes.insert(t.encode());
  CHECK(codes.size() == 5);
  for (const auto& t : trees) CHECK(t.leaves() == 4);
}

TEST_CASE("standard parenthesization is the left comb") {
  OrderedMorphism p = example_p();
  ParenthesizedOrderedMorphism sp = standard_parenthesization(p);
  CHECK(sp.tree("b").encode() == "((**)*)");
  CHECK(sp.tree("c").encode() == "*");
  CHECK(left_comb(4).encode() == "(((**)*)*)");
  auto five = enumerate_parenthesizations(4);
  CHECK(std::count(five.begin(), five.end(), left_comb(4)) == 1);
}

TEST_CASE("rotation path between parenthesizations") {
  // Identical trees: empty path.
  PTree comb3 = left_comb(3);
  CHECK(reparenthesization_path(comb3, comb3).empty());

  // ((1 2) 3) -> (1 (2 3)) in a single step.
  PTree right3 = PTree::node(PTree::leaf(), PTree::node(PTree::leaf(), PTree::leaf()));
  auto path = reparenthesization_path(comb3, right3);
  REQUIRE(path.size() == 1);
  CHECK(path[0].left_to_right);
  CHECK(apply_step(comb3, path[0]) == right3);

  // Every pair of 4-leaf trees: the path works, and the rotation graph has
  // diameter squaring with breadth-first search.
  auto trees = enumerate_parenthesizations(4);
  // Breadth-first distances in the basic-rotation graph.
  auto neighbors = [&](const PTree& t) {
    std::vector<PTree> out;
    struct Rec {
      std::vector<PTree>& out;
      const PTree& whole;
      void visit(const PTree& node, std::vector<int>& path) const {
        if (node.empty() || node.is_leaf()) return;
        if (!node.left().is_leaf())
          out.push_back(apply_step_at(whole, path, 0, true));
        if (!node.right().is_leaf())
          out.push_back(apply_step_at(whole, path, 0, false));
        path.push_back(0);
        visit(node.left(), path);
        path.back() = 1;
        visit(node.right(), path);
        path.pop_back();
      }
    };
    std::vector<int> path;
    Rec{out, t}.visit(t, path);
    return out;
  };
  for (const auto& a : trees) {
    std::map<std::string, int> dist{{a.encode(), 0}};
    std::vector<PTree> frontier{a};
    while (!frontier.empty()) {
      std::vector<PTree> next;
      for (const auto& u : frontier)
        for (const auto& v : neighbors(u))
          if (dist.emplace(v.encode(), dist.at(u.encode()) + 1).second) next.push_back(v);
      frontier = std::move(next);
    }
    REQUIRE(dist.size() == 5);  // rotation graph is connected
    for (const auto& b : trees) {
      CHECK(dist.at(b.encode()) <= 4);
      PTree cur = a;
      for (const auto& s : reparenthesization_path(a, b)) cur = apply_step(cur, s);
      REQUIRE(cur == b);
    }
  }
}

TEST_CASE("parenthesized composition grafts trees") {
  OrderedMorphism p = example_p();
  OrderedMorphism q = example_q();
  ParenthesizedOrderedMorphism sp = standard_parenthesization(p);
  ParenthesizedOrderedMorphism sq = standard_parenthesization(q);
  ParenthesizedOrderedMorphism c = compose_parenthesized(sp, sq);
  CHECK(c.base.fiber("x") == std::vector<std::string>{"1a", "2a", "1c"});
  CHECK(c.base.fiber("y") == std::vector<std::string>{"1b", "2b", "3b"});
  // Tree over x: q's comb (a c) with a -> (1a 2a) comb, c -> leaf.
  CHECK(c.tree("x").encode() == "((**)*)");
  CHECK(c.tree("y").encode() == "((**)*)");

  // Grafting through an identity reproduces p's trees.
  ParenthesizedOrderedMorphism idp =
      standard_parenthesization(identity_morphism(p.target));
  ParenthesizedOrderedMorphism again = compose_parenthesized(sp, idp);
  for (const auto& t : p.target.elements) CHECK(again.tree(t) == sp.tree(t));
}

TEST_CASE("empty fibers prune grafted leaves") {
  FinSet I{{"u"}};
  FinSet J{{"a", "b"}};
  FinSet K{{"z"}};
  OrderedMorphism p = from_fibers(I, J, {{"a", {"u"}}, {"b", {}}});
  OrderedMorphism q = from_fibers(J, K, {{"z", {"a", "b"}}});
  ParenthesizedOrderedMorphism c =
      compose_parenthesized(standard_parenthesization(p), standard_parenthesization(q));
  CHECK(c.base.fiber("z") == std::vector<std::string>{"u"});
  CHECK(c.tree("z").encode() == "*");
}

TEST_CASE("disjoint union keeps labels apart") {
  OrderedMorphism p = example_p();
  OrderedMorphism u = disjoint_union(p, p);
  CHECK(u.source.size() == 12);
  CHECK(u.fiber("0:a") == std::vector<std::string>{"0:1a", "0:2a"});
  CHECK(u.fiber("1:a") == std::vector<std::string>{"1:1a", "1:2a"});
}

TEST_CASE("polygon renderer labels every edge") {
  std::string text = render_polygons(example_p());
  for (const char* label : {"1a", "2a", "1b", "2b", "3b", "1c", "--a--", "--b--", "--c--"})
    CHECK(text.find(label) != std::string::npos);
}
