#include "quilt/jets.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"

using namespace quilt;

namespace {

JetAlgebra ring_xy(int order) { return JetAlgebra{{"x", "y"}, order}; }
JetAlgebra ring_xyz(int order) { return JetAlgebra{{"x", "y", "z"}, order}; }

/// All exponent vectors of total degree <= order, lexicographically.
void collect_monos(int dim, int order, Mono& cur, std::vector<Mono>& out) {
  if (static_cast<int>(cur.size()) == dim) {
    out.push_back(cur);
    return;
  }
  for (int e = 0; e <= order; ++e) {
    cur.push_back(e);
    collect_monos(dim, order - e, cur, out);
    cur.pop_back();
  }
}

std::vector<Mono> all_monos(const JetAlgebra& r) {
  std::vector<Mono> out;
  Mono cur;
  collect_monos(r.dim(), r.order, cur, out);
  return out;
}

Jet random_jet(testutil::Rng& rng, const JetAlgebra& r, int min_deg = 0) {
  std::map<Mono, Rat> raw;
  for (const Mono& m : all_monos(r)) {
    if (mono_degree(m) < min_deg) continue;
    if (testutil::pick(rng, 0, 2) == 0) continue;  // keep the jets sparse-ish
    raw[m] = rat(testutil::pick(rng, -5, 5), testutil::pick(rng, 1, 4));
  }
  return make_jet(r, raw);
}

Jet from_terms(const JetAlgebra& r, std::map<Mono, Rat> raw) { return make_jet(r, raw); }

Derivation random_derivation(testutil::Rng& rng, const JetAlgebra& r, int precision,
                             int min_deg = 0) {
  Derivation d;
  d.ring = r;
  d.precision = precision;
  for (int i = 0; i < r.dim(); ++i) d.coeffs.push_back(random_jet(rng, r, min_deg));
  return d;
}

Derivation zero_derivation(const JetAlgebra& r, int precision) {
  Derivation d;
  d.ring = r;
  d.precision = precision;
  for (int i = 0; i < r.dim(); ++i) d.coeffs.push_back(jet_zero(r));
  return d;
}

}  // namespace

TEST_CASE("jet constructors and validation") {
  JetAlgebra r = ring_xy(3);
  validate_ring(r);

  Jet one = jet_const(r, 1);
  CHECK(one.coeff(Mono{0, 0}) == 1);
  CHECK(one.terms.size() == 1);
  CHECK(jet_const(r, 0).is_zero());

  Jet x = jet_var(r, "x");
  CHECK(x.coeff(Mono{1, 0}) == 1);
  CHECK(x.terms.size() == 1);
  CHECK_THROWS_AS(jet_var(JetAlgebra{{"x"}, 0}, "x"), Error);
  CHECK_THROWS_AS(jet_var(r, "w"), Error);

  // make_jet drops zeros and over-order monomials, rejects malformed ones.
  Jet f = from_terms(r, {{Mono{1, 1}, rat(2)}, {Mono{0, 0}, rat(0)}, {Mono{2, 2}, rat(5)}});
  CHECK(f.terms.size() == 1);
  CHECK(f.coeff(Mono{1, 1}) == 2);
  CHECK_THROWS_AS(from_terms(r, {{Mono{1}, rat(1)}}), Error);
  CHECK_THROWS_AS(from_terms(r, {{Mono{-1, 0}, rat(1)}}), Error);

  JetAlgebra dup{{"x", "x"}, 2};
  CHECK_THROWS_AS(validate_ring(dup), Error);
  CHECK_THROWS_AS(validate_ring(JetAlgebra{{"x"}, -1}), Error);

  // Jets in different rings never mix.
  CHECK_THROWS_AS(add(jet_const(ring_xy(3), 1), jet_const(ring_xy(2), 1)), Error);
}

TEST_CASE("jet arithmetic satisfies the ring axioms") {
  testutil::Rng rng(911001);
  JetAlgebra r = ring_xyz(4);
  Jet one = jet_const(r, 1);
  for (int round = 0; round < 8; ++round) {
    Jet a = random_jet(rng, r), b = random_jet(rng, r), c = random_jet(rng, r);
    CHECK(add(a, b) == add(b, a));
    CHECK(add(add(a, b), c) == add(a, add(b, c)));
    CHECK(mul(a, b) == mul(b, a));
    CHECK(mul(mul(a, b), c) == mul(a, mul(b, c)));
    CHECK(mul(a, add(b, c)) == add(mul(a, b), mul(a, c)));
    CHECK(mul(a, one) == a);
    CHECK(sub(a, a).is_zero());
    CHECK(scale(a, rat(-3, 2)) == sub(scale(a, rat(-1, 2)), a));
    CHECK(mul(scale(a, rat(2, 7)), b) == scale(mul(a, b), rat(2, 7)));
  }
}

TEST_CASE("truncation, components, and degrees") {
  JetAlgebra r = ring_xy(4);
  Jet f = from_terms(r, {{Mono{0, 0}, rat(3)},
                         {Mono{1, 0}, rat(1)},
                         {Mono{1, 2}, rat(-2)},
                         {Mono{4, 0}, rat(1, 6)}});
  CHECK(truncate_to(f, 2).terms.size() == 2);
  CHECK(component(f, 3) == from_terms(r, {{Mono{1, 2}, rat(-2)}}));
  Jet rebuilt = jet_zero(r);
  for (int d = 0; d <= r.order; ++d) rebuilt = add(rebuilt, component(f, d));
  CHECK(rebuilt == f);
  CHECK(min_degree(f) == 0);
  CHECK(min_degree(sub(f, jet_const(r, 3))) == 1);
  CHECK(min_degree(jet_zero(r)) == r.order + 1);
  CHECK(equal_to_order(f, truncate_to(f, 3), 3));
  CHECK_FALSE(equal_to_order(f, truncate_to(f, 3), 4));

  // Multiplication drops what the order cannot hold: (x^2+y^2)*(x^2-y^2)
  // at order 3 is zero.
  Jet x = jet_var(r, "x"), y = jet_var(r, "y");
  JetAlgebra r3 = ring_xy(3);
  Jet p = from_terms(r3, {{Mono{2, 0}, rat(1)}, {Mono{0, 2}, rat(1)}});
  Jet q = from_terms(r3, {{Mono{2, 0}, rat(1)}, {Mono{0, 2}, rat(-1)}});
  CHECK(mul(p, q).is_zero());
  CHECK(mul(mul(x, x), mul(y, y)) == from_terms(r, {{Mono{2, 2}, rat(1)}}));
}

TEST_CASE("derivatives are linear, commute, and obey Leibniz up to truncation") {
  testutil::Rng rng(911002);
  JetAlgebra r = ring_xy(5);
  for (int round = 0; round < 6; ++round) {
    Jet f = random_jet(rng, r), g = random_jet(rng, r);
    for (int i = 0; i < r.dim(); ++i) {
      CHECK(derivative(add(f, g), i) == add(derivative(f, i), derivative(g, i)));
      // The product was truncated at the ring order, so its derivative is
      // only honest one order lower.
      Jet lhs = derivative(mul(f, g), i);
      Jet rhs = add(mul(derivative(f, i), g), mul(f, derivative(g, i)));
      CHECK(equal_to_order(lhs, rhs, r.order - 1));
    }
    CHECK(derivative(derivative(f, 0), 1) == derivative(derivative(f, 1), 0));
  }
  CHECK_THROWS_AS(derivative(jet_const(r, 1), 2), Error);

  // d/dx (x^3 y) = 3 x^2 y, exactly.
  Jet f = from_terms(r, {{Mono{3, 1}, rat(1)}});
  CHECK(derivative(f, 0) == from_terms(r, {{Mono{2, 1}, rat(3)}}));
  CHECK(derivative(f, 1) == from_terms(r, {{Mono{3, 0}, rat(1)}}));
}

TEST_CASE("substitution is a ring homomorphism") {
  testutil::Rng rng(911003);
  JetAlgebra src = ring_xy(4);
  JetAlgebra tgt{{"u", "v"}, 4};
  Jet u = jet_var(tgt, "u"), v = jet_var(tgt, "v");
  // x -> u + v^2, y -> uv - 3v: both have zero constant term.
  std::vector<Jet> images{add(u, mul(v, v)), sub(mul(u, v), scale(v, rat(3)))};
  for (int round = 0; round < 6; ++round) {
    Jet f = random_jet(rng, src), g = random_jet(rng, src);
    CHECK(substitute(add(f, g), images) == add(substitute(f, images), substitute(g, images)));
    CHECK(substitute(mul(f, g), images) == mul(substitute(f, images), substitute(g, images)));
  }
  CHECK(substitute(jet_const(src, rat(7, 2)), images) == jet_const(tgt, rat(7, 2)));
  CHECK(substitute(jet_var(src, "x"), images) == images[0]);

  // Composition of substitutions agrees with substituting composed images.
  JetAlgebra mid{{"s"}, 4};
  Jet s = jet_var(mid, "s");
  std::vector<Jet> second{s, mul(s, s)};  // u -> s, v -> s^2
  Jet f = random_jet(rng, src);
  std::vector<Jet> composed{substitute(images[0], second), substitute(images[1], second)};
  CHECK(substitute(substitute(f, images), second) == substitute(f, composed));

  // Error cases: constant-term image, arity mismatch, order inflation.
  std::vector<Jet> with_const{add(u, jet_const(tgt, 1)), v};
  CHECK_THROWS_AS(substitute(f, with_const), Error);
  CHECK_THROWS_AS(substitute(f, {u}), Error);
  JetAlgebra wide{{"u", "v"}, 5};
  std::vector<Jet> inflating{jet_var(wide, "u"), jet_var(wide, "v")};
  CHECK_THROWS_AS(substitute(f, inflating), Error);
  std::vector<Jet> mixed{u, jet_var(wide, "v")};
  CHECK_THROWS_AS(substitute(f, mixed), Error);
}

TEST_CASE("applying a derivation tracks precision") {
  JetAlgebra r{{"x"}, 3};
  Jet x = jet_var(r, "x");

  // d/dx has a constant coefficient, so one order of trust is spent.
  Derivation ddx{r, {jet_const(r, 1)}, 3};
  validate_derivation(ddx);
  CHECK(has_constant_coefficient(ddx));
  PrecisionTaggedValue out = apply_derivation(ddx, mul(x, x));
  CHECK(out.value == scale(x, rat(2)));
  CHECK(out.trusted_order == 2);

  // x d/dx preserves degrees: no constant coefficient, no trust spent.
  Derivation euler{r, {x}, 3};
  CHECK_FALSE(has_constant_coefficient(euler));
  Jet f = add(mul(x, x), mul(x, mul(x, x)));
  PrecisionTaggedValue eu = apply_derivation(euler, f);
  CHECK(eu.trusted_order == 3);
  CHECK(eu.value == add(scale(mul(x, x), rat(2)), scale(mul(x, mul(x, x)), rat(3))));

  // Precision is consumed order by order and eventually runs out.
  PrecisionTaggedValue t{mul(x, x), 3};
  t = apply_derivation(ddx, t);  // trusted 2
  t = apply_derivation(ddx, t);  // trusted 1
  CHECK(t.value == jet_const(r, 2));
  t = apply_derivation(ddx, t);  // trusted 0
  CHECK(t.trusted_order == 0);
  CHECK_THROWS_AS(apply_derivation(ddx, t), Error);

  // A low-precision derivation caps the result even on a fresh jet.
  Derivation coarse{r, {jet_const(r, 1)}, 1};
  CHECK(apply_derivation(coarse, mul(x, x)).trusted_order == 0);

  // Mismatched coordinates are rejected.
  Derivation other{JetAlgebra{{"y"}, 3}, {jet_const(JetAlgebra{{"y"}, 3}, 1)}, 3};
  CHECK_THROWS_AS(apply_derivation(other, f), Error);
  Derivation short_coeffs{r, {}, 3};
  CHECK_THROWS_AS(validate_derivation(short_coeffs), Error);
}

TEST_CASE("derivations obey Leibniz at the trusted order") {
  testutil::Rng rng(911004);
  JetAlgebra r = ring_xy(4);
  for (int round = 0; round < 6; ++round) {
    Derivation d = random_derivation(rng, r, 4);
    Jet f = random_jet(rng, r), g = random_jet(rng, r);
    PrecisionTaggedValue lhs = apply_derivation(d, mul(f, g));
    Jet rhs = add(mul(apply_derivation(d, f).value, g), mul(f, apply_derivation(d, g).value));
    CHECK(equal_to_order(lhs.value, rhs, lhs.trusted_order));
  }
}

TEST_CASE("derivation commutators") {
  JetAlgebra r = ring_xy(4);
  Jet x = jet_var(r, "x");

  // [d/dx, x d/dx] = d/dx.
  Derivation ddx{r, {jet_const(r, 1), jet_zero(r)}, 4};
  Derivation euler{r, {x, jet_zero(r)}, 4};
  Derivation c = commutator(ddx, euler);
  CHECK(c.precision == 3);
  CHECK(derivations_equal_to_order(c, ddx, 3));

  // Antisymmetry.
  Derivation cr = commutator(euler, ddx);
  CHECK(derivations_equal_to_order(scale(cr, rat(-1)), c, 3));

  // The commutator acts as the difference of compositions.
  testutil::Rng rng(911005);
  for (int round = 0; round < 5; ++round) {
    Derivation d = random_derivation(rng, r, 4);
    Derivation e = random_derivation(rng, r, 4);
    Jet f = random_jet(rng, r);
    Derivation de = commutator(d, e);
    PrecisionTaggedValue lhs = apply_derivation(de, f);
    PrecisionTaggedValue d_ef = apply_derivation(d, apply_derivation(e, f));
    PrecisionTaggedValue e_df = apply_derivation(e, apply_derivation(d, f));
    int ord = std::min({lhs.trusted_order, d_ef.trusted_order, e_df.trusted_order});
    CHECK(equal_to_order(lhs.value, sub(d_ef.value, e_df.value), ord));
  }

  // Jacobi to the common trusted order, using degree-preserving derivations
  // so no precision is spent along the way.
  for (int round = 0; round < 4; ++round) {
    Derivation a = random_derivation(rng, r, 4, 1);
    Derivation b = random_derivation(rng, r, 4, 1);
    Derivation e = random_derivation(rng, r, 4, 1);
    Derivation j = add(add(commutator(commutator(a, b), e), commutator(commutator(b, e), a)),
                       commutator(commutator(e, a), b));
    CHECK(derivations_equal_to_order(j, zero_derivation(r, j.precision), j.precision));
  }

  CHECK_THROWS_AS(commutator(ddx, Derivation{JetAlgebra{{"x"}, 4},
                                             {jet_const(JetAlgebra{{"x"}, 4}, 1)}, 4}),
                  Error);
  CHECK_THROWS_AS(commutator(Derivation{r, {jet_const(r, 1), jet_zero(r)}, 0},
                             Derivation{r, {jet_const(r, 1), jet_zero(r)}, 0}),
                  Error);
}

TEST_CASE("jet json round trip") {
  testutil::Rng rng(911006);
  JetAlgebra r = ring_xyz(3);
  for (int round = 0; round < 5; ++round) {
    Jet f = random_jet(rng, r);
    nlohmann::ordered_json j = jet_to_json(f);
    CHECK(jet_from_json(j) == f);
  }
  Jet f = from_terms(ring_xy(2), {{Mono{1, 1}, rat(5, 3)}});
  nlohmann::ordered_json j = jet_to_json(f);
  CHECK(j.at("coords").size() == 2);
  CHECK(j.at("terms").at(0).at("coeff") == "5/3");

  // Strictness: duplicated monomials and over-order terms are rejected.
  nlohmann::json dup = {{"coords", {"x"}},
                        {"order", 2},
                        {"terms",
                         {{{"mono", {1}}, {"coeff", "1"}}, {{"mono", {1}}, {"coeff", "2"}}}}};
  CHECK_THROWS_AS(jet_from_json(dup), Error);
  nlohmann::json over = {
      {"coords", {"x"}}, {"order", 2}, {"terms", {{{"mono", {3}}, {"coeff", "1"}}}}};
  CHECK_THROWS_AS(jet_from_json(over), Error);
}
