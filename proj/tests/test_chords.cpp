#include "quilt/chords.hpp"

#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"

using namespace quilt;

namespace {

StrandSet strands_n(int n) {
  StrandSet s;
  for (int i = 1; i <= n; ++i) s.strands.push_back(std::to_string(i));
  return s;
}

Word random_word(testutil::Rng& rng, int nstrands, int d) {
  Word w;
  for (int k = 0; k < d; ++k) {
    int u = testutil::pick(rng, 0, nstrands - 1);
    int v = testutil::pick(rng, 0, nstrands - 2);
    if (v >= u) ++v;
    w.push_back(chord(u, v));
  }
  return w;
}

ChordSeries random_series(testutil::Rng& rng, const StrandSet& s, int trunc,
                          int terms_per_degree = 3) {
  std::map<Word, Rat> raw;
  for (int d = 0; d <= trunc; ++d)
    for (int t = 0; t < terms_per_degree; ++t)
      raw[random_word(rng, static_cast<int>(s.size()), d)] +=
          rat(testutil::pick(rng, -4, 4), testutil::pick(rng, 1, 3));
  return make_series(s, trunc, raw);
}

/// Free-algebra product of raw word maps (no normal form), truncated.
std::map<Word, Rat> free_mul(const std::map<Word, Rat>& a, const std::map<Word, Rat>& b,
                             int trunc) {
  std::map<Word, Rat> out;
  for (const auto& [wa, ca] : a)
    for (const auto& [wb, cb] : b) {
      if (wa.size() + wb.size() > static_cast<std::size_t>(trunc)) continue;
      Word w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      out[w] += ca * cb;
    }
  for (auto it = out.begin(); it != out.end();)
    it = it->second == 0 ? out.erase(it) : std::next(it);
  return out;
}

/// Independent reference reducer: global row reduction of the whole-degree
/// relation-ideal component, no support splitting, no caching.  Columns are
/// all degree-d words on the full strand set in descending lex order.
struct ReferenceReducer {
  std::vector<Word> words;
  std::map<Word, int> index;
  RowReducer red;

  ReferenceReducer(int nstrands, int d) {
    auto alphabet = detail::all_chords(nstrands);
    words = detail::all_words(alphabet, d);
    std::sort(words.begin(), words.end(), std::greater<Word>());
    for (std::size_t i = 0; i < words.size(); ++i) index[words[i]] = static_cast<int>(i);
    auto rels = detail::relation_generators(nstrands);
    for (int du = 0; du + 2 <= d; ++du) {
      for (const auto& u : detail::all_words(alphabet, du))
        for (const auto& r : rels)
          for (const auto& v : detail::all_words(alphabet, d - 2 - du)) {
            SparseVec row;
            for (const auto& [mid, c] : r) {
              Word w = u;
              w.insert(w.end(), mid.begin(), mid.end());
              w.insert(w.end(), v.begin(), v.end());
              row[index.at(w)] += c;
            }
            red.add_row(std::move(row));
          }
    }
  }

  std::map<Word, Rat> reduce_word(const Word& w) const {
    SparseVec v;
    v[index.at(w)] = 1;
    SparseVec r = red.reduce(v);
    std::map<Word, Rat> out;
    for (const auto& [j, c] : r) out[words[j]] = c;
    return out;
  }

  int standard_count() const { return static_cast<int>(words.size()) - red.rank(); }
};

}  // namespace

TEST_CASE("defining relations reduce to zero") {
  StrandSet s4 = strands_n(4);
  // Disjoint chords commute.
  ChordSeries t12 = chord_gen(s4, 3, "1", "2");
  ChordSeries t34 = chord_gen(s4, 3, "3", "4");
  CHECK(sub(mul(t12, t34), mul(t34, t12)).is_zero());
  // [t12, t13] = [t23, t12], the rewritten triangle relation.
  ChordSeries t13 = chord_gen(s4, 3, "1", "3");
  ChordSeries t23 = chord_gen(s4, 3, "2", "3");
  CHECK(sub(commutator(t12, t13), commutator(t23, t12)).is_zero());
  // The triangle relation itself.
  CHECK(commutator(t12, add(t13, t23)).is_zero());
}

TEST_CASE("degree-2 dimension of the three-strand algebra") {
  // Reference value from the independent dense reduction: the three triangle
  // relations on three strands sum to zero, so their span has rank 2 and the
  // degree-2 component has dimension 9 - 2 = 7.
  ReferenceReducer ref(3, 2);
  REQUIRE(ref.standard_count() == 7);
  CHECK(graded_dimension(strands_n(3), 2) == 7);
}

TEST_CASE("graded dimensions match the reference reduction and the closed form") {
  // Three strands: the algebra is a polynomial ring in the full twist times a
  // free algebra on two letters, so degree d has dimension 2^{d+1} - 1.
  const int expect3[] = {1, 3, 7, 15, 31, 63};
  StrandSet s3 = strands_n(3);
  for (int d = 0; d <= 5; ++d) {
    INFO("3 strands, degree " << d);
    if (d >= 2) {
      ReferenceReducer ref(3, d);
      REQUIRE(ref.standard_count() == expect3[d]);
    }
    CHECK(graded_dimension(s3, d) == expect3[d]);
  }
  // Four strands: dimensions of the universal envelope of the rank-3 tower,
  // generating series 1/((1-t)(1-2t)(1-3t)).
  const int expect4[] = {1, 6, 25, 90, 301};
  StrandSet s4 = strands_n(4);
  for (int d = 0; d <= 4; ++d) {
    INFO("4 strands, degree " << d);
    if (d >= 2 && d <= 3) {
      ReferenceReducer ref(4, d);
      REQUIRE(ref.standard_count() == expect4[d]);
    }
    CHECK(graded_dimension(s4, d) == expect4[d]);
  }
}

TEST_CASE("support-blocked normal form agrees with the global reduction") {
  testutil::Rng rng(20240813);
  StrandSet s4 = strands_n(4);
  for (int d = 2; d <= 3; ++d) {
    ReferenceReducer ref(4, d);
    for (int trial = 0; trial < 40; ++trial) {
      Word w = random_word(rng, 4, d);
      auto fast = normal_form(s4, d, {{w, Rat(1)}});
      auto slow = ref.reduce_word(w);
      REQUIRE(fast == slow);
    }
  }
}

TEST_CASE("normal form is idempotent and linear") {
  testutil::Rng rng(20240814);
  StrandSet s4 = strands_n(4);
  for (int trial = 0; trial < 20; ++trial) {
    ChordSeries a = random_series(rng, s4, 3);
    ChordSeries again = make_series(s4, 3, a.coeffs);
    REQUIRE(again == a);
    ChordSeries b = random_series(rng, s4, 3);
    std::map<Word, Rat> sum_raw;
    for (const auto& [w, c] : a.coeffs) sum_raw[w] += c;
    for (const auto& [w, c] : b.coeffs) sum_raw[w] += c;
    REQUIRE(make_series(s4, 3, sum_raw) == add(a, b));
  }
}

TEST_CASE("multiplication: unit, associativity against the free-algebra oracle") {
  testutil::Rng rng(20240815);
  StrandSet s4 = strands_n(4);
  ChordSeries one = chord_unit(s4, 4);
  for (int trial = 0; trial < 10; ++trial) {
    ChordSeries a = random_series(rng, s4, 4, 2);
    ChordSeries b = random_series(rng, s4, 4, 2);
    ChordSeries c = random_series(rng, s4, 4, 2);
    REQUIRE(mul(one, a) == a);
    REQUIRE(mul(a, one) == a);
    ChordSeries lhs = mul(mul(a, b), c);
    ChordSeries rhs = mul(a, mul(b, c));
    REQUIRE(lhs == rhs);
    // Oracle: expand the triple product in the free algebra, normalize once.
    auto raw = free_mul(free_mul(a.coeffs, b.coeffs, 4), c.coeffs, 4);
    REQUIRE(make_series(s4, 4, raw) == lhs);
  }
}

TEST_CASE("multiplication requires matching strand sets") {
  ChordSeries a = chord_unit(strands_n(3), 3);
  ChordSeries b = chord_unit(strands_n(4), 3);
  CHECK_THROWS_AS(mul(a, b), Error);
}

TEST_CASE("degree overflow is rejected") {
  StrandSet s3 = strands_n(3);
  Word w{chord(0, 1), chord(0, 1), chord(0, 1)};
  CHECK_THROWS_AS(make_series(s3, 2, {{w, Rat(1)}}), Error);
}

TEST_CASE("exponential and logarithm") {
  StrandSet s3 = strands_n(3);
  CHECK(exp_series(chord_zero(s3, 3)) == chord_unit(s3, 3));

  ChordSeries half_t12 = scale(chord_gen(s3, 3, "1", "2"), rat(1, 2));
  ChordSeries e = exp_series(half_t12);
  Word t12t12{chord(0, 1), chord(0, 1)};
  CHECK(e.coeff(t12t12) == rat(1, 8));

  CHECK_THROWS_AS(exp_series(chord_unit(s3, 3)), Error);
  CHECK_THROWS_AS(log_series(chord_zero(s3, 3)), Error);

  testutil::Rng rng(20240816);
  StrandSet s4 = strands_n(4);
  for (int trial = 0; trial < 8; ++trial) {
    ChordSeries x = random_series(rng, s4, 4, 2);
    x.coeffs.erase(Word{});
    REQUIRE(log_series(exp_series(x)) == x);
    REQUIRE(mul(exp_series(x), exp_series(scale(x, Rat(-1)))) == chord_unit(s4, 4));
  }
}

TEST_CASE("cabling") {
  StrandSet s2{{"1", "2"}};
  ChordSeries t12 = chord_gen(s2, 3, "1", "2");
  ChordSeries c = cable(t12, "1", "1a", "1b");
  StrandSet s3 = c.strands;
  REQUIRE(s3.strands == std::vector<std::string>{"1a", "1b", "2"});
  CHECK(c == add(chord_gen(s3, 3, "1a", "2"), chord_gen(s3, 3, "1b", "2")));

  // Untouched series pass through with the same coefficients.
  StrandSet s4 = strands_n(4);
  ChordSeries t34 = chord_gen(s4, 3, "3", "4");
  ChordSeries c2 = cable(mul(t34, t34), "1", "1a", "1b");
  Word t34t34{chord(3, 4), chord(3, 4)};
  CHECK(c2.coeff(t34t34) == 1);  // indices 3,4 shift to 3,4 in {1a,1b,2,3,4}
  CHECK(c2.coeffs.size() == 1);

  CHECK_THROWS_AS(cable(t34, "1", "2", "x"), Error);
}

TEST_CASE("cabling is a homomorphism and cables on disjoint strands commute") {
  testutil::Rng rng(20240817);
  StrandSet s4 = strands_n(4);
  for (int trial = 0; trial < 6; ++trial) {
    ChordSeries a = random_series(rng, s4, 3, 2);
    ChordSeries b = random_series(rng, s4, 3, 2);
    REQUIRE(cable(mul(a, b), "2", "2a", "2b") ==
            mul(cable(a, "2", "2a", "2b"), cable(b, "2", "2a", "2b")));
    ChordSeries uv = cable(cable(a, "1", "1a", "1b"), "3", "3a", "3b");
    ChordSeries vu = cable(cable(a, "3", "3a", "3b"), "1", "1a", "1b");
    // Same strand labels, possibly different list orders: compare via embed.
    std::map<std::string, std::string> id;
    for (const auto& x : vu.strands.strands) id[x] = x;
    REQUIRE(embed(vu, id, uv.strands) == uv);
  }
}

TEST_CASE("cabling is coassociative") {
  testutil::Rng rng(20240818);
  StrandSet s3 = strands_n(3);
  for (int trial = 0; trial < 6; ++trial) {
    ChordSeries a = random_series(rng, s3, 3, 2);
    // Split 1 into three parts two ways; identify (p,q,r) across both.
    ChordSeries left = cable(cable(a, "1", "p", "z"), "z", "q", "r");
    ChordSeries right = cable(cable(a, "1", "z", "r"), "z", "p", "q");
    std::map<std::string, std::string> id;
    for (const auto& x : right.strands.strands) id[x] = x;
    REQUIRE(embed(right, id, left.strands) == left);
  }
}

TEST_CASE("strand deletion") {
  StrandSet s3 = strands_n(3);
  CHECK(delete_strand(chord_unit(s3, 3), "2") == chord_unit(StrandSet{{"1", "3"}}, 3));

  testutil::Rng rng(20240819);
  for (int trial = 0; trial < 6; ++trial) {
    ChordSeries a = random_series(rng, s3, 3, 2);
    // Deleting both halves of a cabled strand equals deleting the original.
    ChordSeries lhs = delete_strand(delete_strand(cable(a, "2", "2a", "2b"), "2a"), "2b");
    ChordSeries rhs = delete_strand(a, "2");
    REQUIRE(lhs == rhs);
    // Deletion is an algebra homomorphism.
    ChordSeries b = random_series(rng, s3, 3, 2);
    REQUIRE(delete_strand(mul(a, b), "3") == mul(delete_strand(a, "3"), delete_strand(b, "3")));
  }
}

TEST_CASE("embedding and relabeling") {
  StrandSet s3 = strands_n(3);
  StrandSet s4 = strands_n(4);
  ChordSeries a = chord_gen(s3, 3, "1", "2");
  std::map<std::string, std::string> up{{"1", "2"}, {"2", "3"}, {"3", "4"}};
  CHECK(embed(a, up, s4) == chord_gen(s4, 3, "2", "3"));

  std::map<std::string, std::string> ident{{"1", "1"}, {"2", "2"}, {"3", "3"}};
  testutil::Rng rng(20240820);
  for (int trial = 0; trial < 6; ++trial) {
    ChordSeries x = random_series(rng, s3, 3, 2);
    REQUIRE(embed(x, ident, s3) == x);
    // Non-monotone relabeling still lands in normal form: compare against
    // rebuilding from the relabeled raw words.
    std::map<std::string, std::string> flip{{"1", "3"}, {"2", "2"}, {"3", "1"}};
    ChordSeries e = embed(x, flip, s3);
    std::map<Word, Rat> raw;
    for (const auto& [w, c] : x.coeffs) {
      Word r;
      for (const auto& [u, v] : w) r.push_back(chord(2 - u, 2 - v));
      raw[r] += c;
    }
    REQUIRE(e == make_series(s3, 3, raw));
    // Embedding then deleting an untouched strand commutes.
    REQUIRE(delete_strand(embed(x, up, s4), "1") ==
            embed(x, std::map<std::string, std::string>{{"1", "2"}, {"2", "3"}, {"3", "4"}},
                  StrandSet{{"2", "3", "4"}}));
  }

  std::map<std::string, std::string> collide{{"1", "2"}, {"2", "2"}, {"3", "4"}};
  CHECK_THROWS_AS(embed(a, collide, s4), Error);
}

TEST_CASE("group-likeness") {
  StrandSet s3 = strands_n(3);
  ChordSeries t12 = chord_gen(s3, 3, "1", "2");
  CHECK(is_group_like(exp_series(t12)));
  CHECK(is_group_like(chord_unit(s3, 3)));

  // 1 + t12 t12 fails at degree 2: the coproduct has a 2 t12 (x) t12 cross
  // term but the square only a 1.
  Word t12t12{chord(0, 1), chord(0, 1)};
  ChordSeries bad = make_series(s3, 3, {{Word{}, Rat(1)}, {t12t12, Rat(1)}});
  CHECK(!is_group_like(bad));

  testutil::Rng rng(20240821);
  for (int trial = 0; trial < 4; ++trial) {
    // Exponentials of primitive (degree-1) elements and their products.
    std::map<Word, Rat> raw1, raw2;
    for (int k = 0; k < 2; ++k) {
      raw1[random_word(rng, 3, 1)] += rat(testutil::pick(rng, -3, 3), 2);
      raw2[random_word(rng, 3, 1)] += rat(testutil::pick(rng, -3, 3), 2);
    }
    ChordSeries g1 = exp_series(make_series(s3, 3, raw1));
    ChordSeries g2 = exp_series(make_series(s3, 3, raw2));
    REQUIRE(is_group_like(g1));
    REQUIRE(is_group_like(mul(g1, g2)));
  }
}

TEST_CASE("canonical JSON round trip") {
  testutil::Rng rng(20240822);
  StrandSet s3 = strands_n(3);
  for (int trial = 0; trial < 4; ++trial) {
    ChordSeries a = random_series(rng, s3, 3);
    nlohmann::ordered_json j = series_to_json(a);
    ChordSeries back = series_from_json(j);
    REQUIRE(back == a);
    REQUIRE(series_to_json(back).dump() == j.dump());
  }
}
