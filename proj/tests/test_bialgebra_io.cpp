#include "quilt/bialgebra_io.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <fstream>

using namespace quilt;

namespace {

LieBialgebra parse(const std::string& text) { return bialgebra_from_text(text, "<test>"); }

/// Expect a ParseError at an exact position.
void expect_error_at(const std::string& text, int line, int col) {
  try {
    parse(text);
    FAIL("expected a parse error for:\n" + text);
  } catch (const ParseError& e) {
    INFO(e.what());
    CHECK(e.line() == line);
    CHECK(e.col() == col);
  }
}

const char* kAxB =
    "# the ax+b bialgebra\n"
    "dim = 2\n"
    "basis = [\"x\", \"y\"]\n"
    "\n"
    "[bracket]\n"
    "\"x,y\" = \"y\"   # [x,y] = y\n"
    "\n"
    "[cobracket]\n"
    "\"y\" = \"x^y\"\n";

}  // namespace

TEST_CASE("bialgebra file round trip") {
  LieBialgebra b = parse(kAxB);
  REQUIRE(b.h.basis == std::vector<std::string>{"x", "y"});
  CHECK(b.h.c[0][1] == SparseVec{{1, Rat(1)}});
  CHECK(b.h.c[1][0] == SparseVec{{1, Rat(-1)}});
  REQUIRE(b.d.size() == 2);
  CHECK(b.d[0].empty());
  REQUIRE(b.d[1].size() == 1);
  CHECK(b.d[1].at({0, 1}) == 1);
  validate_bialgebra(b);
}

TEST_CASE("combination values") {
  // Multi-term values, explicit rational coefficients, signs, and zero.
  LieBialgebra b = parse(
      "dim = 3\n"
      "basis = [\"a\", \"b\", \"c\"]\n"
      "[bracket]\n"
      "\"a,b\" = \"2*b - 1/2*c\"\n"
      "\"a,c\" = \"0\"\n"
      "\"b,c\" = \"-c + c\"\n");
  CHECK(b.h.c[0][1] == SparseVec{{1, rat(2)}, {2, rat(-1, 2)}});
  CHECK(b.h.c[0][2].empty());
  CHECK(b.h.c[1][2].empty());
  for (const auto& row : b.d) CHECK(row.empty());

  // Reversed wedges flip sign; repeated wedges accumulate.
  LieBialgebra c = parse(
      "dim = 2\n"
      "basis = [\"x\", \"y\"]\n"
      "[cobracket]\n"
      "\"y\" = \"y^x + 3*x^y\"\n");
  CHECK(c.d[1].at({0, 1}) == 2);  // -1 + 3

  // Whitespace in keys is tolerated around the comma.
  LieBialgebra d = parse(
      "dim = 2\n"
      "basis = [\"x\", \"y\"]\n"
      "[bracket]\n"
      "\" x , y \" = \"y\"\n");
  CHECK(d.h.c[0][1] == SparseVec{{1, Rat(1)}});
}

TEST_CASE("parse errors carry exact positions") {
  // Unknown top-level key.
  expect_error_at("rank = 2\n", 1, 1);
  // dim must be an integer.
  expect_error_at("dim = two\n", 1, 7);
  // Unterminated basis string.
  expect_error_at("dim = 1\nbasis = [\"x]\n", 2, 10);
  // Label with a bad character.
  expect_error_at("dim = 1\nbasis = [\"x-y\"]\n", 2, 11);
  // Basis size must match dim (reported at end of input).
  expect_error_at("dim = 3\nbasis = [\"x\", \"y\"]\n", 2, 1);
  // Unknown section.
  expect_error_at("dim = 1\nbasis = [\"x\"]\n[brackets]\n", 3, 1);
  // Entry outside any section.
  expect_error_at("dim = 1\nbasis = [\"x\"]\n\"x,x\" = \"0\"\n", 3, 1);
  // Unknown label inside a key.
  expect_error_at(
      "dim = 2\nbasis = [\"x\", \"y\"]\n[bracket]\n\"x,z\" = \"y\"\n", 4, 2);
  // Bracket of a label with itself.
  expect_error_at(
      "dim = 2\nbasis = [\"x\", \"y\"]\n[bracket]\n\"x,x\" = \"y\"\n", 4, 2);
  // Unknown label in a value: the column points into the combination.
  expect_error_at(
      "dim = 2\nbasis = [\"x\", \"y\"]\n[bracket]\n\"x,y\" = \"z\"\n", 4, 10);
  // Coefficient without '*'.
  expect_error_at(
      "dim = 2\nbasis = [\"x\", \"y\"]\n[bracket]\n\"x,y\" = \"2 y\"\n", 4, 12);
  // Wedge in a bracket value.
  expect_error_at(
      "dim = 2\nbasis = [\"x\", \"y\"]\n[bracket]\n\"x,y\" = \"x^y\"\n", 4, 11);
  // Plain term in a cobracket value.
  expect_error_at(
      "dim = 2\nbasis = [\"x\", \"y\"]\n[cobracket]\n\"y\" = \"x\"\n", 4, 9);
  // Wedge of a label with itself.
  expect_error_at(
      "dim = 2\nbasis = [\"x\", \"y\"]\n[cobracket]\n\"y\" = \"x^x\"\n", 4, 10);
  // Trailing garbage after a value.
  expect_error_at(
      "dim = 2\nbasis = [\"x\", \"y\"]\n[bracket]\n\"x,y\" = \"y\" y\n", 4, 13);
  // Duplicate dim / basis / section / entries.
  expect_error_at("dim = 1\ndim = 1\nbasis = [\"x\"]\n", 2, 1);
  expect_error_at("dim = 1\nbasis = [\"x\"]\nbasis = [\"x\"]\n", 3, 1);
  expect_error_at("dim = 1\nbasis = [\"x\"]\n[bracket]\n[bracket]\n", 4, 1);
  expect_error_at(
      "dim = 2\nbasis = [\"x\", \"y\"]\n[bracket]\n\"x,y\" = \"y\"\n\"y,x\" = \"y\"\n", 5,
      2);
  expect_error_at(
      "dim = 2\nbasis = [\"x\", \"y\"]\n[cobracket]\n\"y\" = \"x^y\"\n\"y\" = \"x^y\"\n",
      5, 2);
  // Missing pieces.
  expect_error_at("basis = [\"x\"]\n", 1, 1);
  expect_error_at("dim = 1\n", 1, 1);
  // Duplicate labels come through algebra validation as a plain Error.
  CHECK_THROWS_AS(parse("dim = 2\nbasis = [\"x\", \"x\"]\n"), Error);
  // Bad rational in a coefficient.
  expect_error_at(
      "dim = 2\nbasis = [\"x\", \"y\"]\n[bracket]\n\"x,y\" = \"1/*y\"\n", 4, 12);
}

TEST_CASE("semantic validation happens after parsing") {
  // Structurally fine, but the bracket is not a Lie bracket.
  LieBialgebra nj = parse(
      "dim = 3\n"
      "basis = [\"a\", \"b\", \"c\"]\n"
      "[bracket]\n"
      "\"a,b\" = \"a + b\"\n"
      "\"a,c\" = \"b\"\n"
      "\"b,c\" = \"a\"\n");
  CHECK_THROWS_WITH(validate_bialgebra(nj), Catch::Matchers::ContainsSubstring("Jacobi"));

  // Structurally fine, but the cobracket is not a cocycle.
  LieBialgebra nc = parse(
      "dim = 3\n"
      "basis = [\"p\", \"q\", \"z\"]\n"
      "[bracket]\n"
      "\"p,q\" = \"z\"\n"
      "[cobracket]\n"
      "\"z\" = \"p^q\"\n");
  CHECK_THROWS_WITH(validate_bialgebra(nc), Catch::Matchers::ContainsSubstring("cocycle"));
}

TEST_CASE("loading a bialgebra from disk") {
  std::string path = "test_bialgebra_io_tmp.toml";
  {
    std::ofstream out(path);
    out << kAxB;
  }
  LieBialgebra b = load_bialgebra(path);
  CHECK(b.h.dim() == 2);
  CHECK(drinfeld_double(b).g.dim() == 4);
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_bialgebra("does_not_exist.toml"), Error);

  // load validates semantics, not just shape.
  {
    std::ofstream out(path);
    out << "dim = 3\nbasis = [\"p\", \"q\", \"z\"]\n[bracket]\n\"p,q\" = \"z\"\n"
           "[cobracket]\n\"z\" = \"p^q\"\n";
  }
  CHECK_THROWS_AS(load_bialgebra(path), Error);
  std::remove(path.c_str());
}
