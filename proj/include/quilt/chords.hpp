/**
 * Horizontal chord-diagram algebra on a named strand set, truncated in the
 * formal parameter.
 *
 * Generators t^{uv} (one per unordered pair of strands) subject to the
 * infinitesimal braid relations
 *
 *     [t^{uv}, t^{wz}] = 0                whenever {u,v} and {w,z} are disjoint,
 *     [t^{uv}, t^{uw} + t^{vw}] = 0       for distinct u, v, w.
 *
 * The formal-parameter degree of a word is its length, and everything is
 * truncated above a chosen degree.  Normal forms are computed per degree by
 * row reduction of the relation ideal under a fixed degree-lexicographic
 * order (largest word eliminated first).
 *
 * Two structural facts keep this cheap.  The relation ideal is graded by the
 * exact strand-support of a word: every ideal element is a combination of
 * homogeneous pieces all of whose words touch the same strand subset.  And a
 * support block on a subset S depends only on |S| after the order-preserving
 * relabeling of S onto {0..|S|-1}.  So reducers are built once per
 * (support size, degree) and shared across all strand sets; the cache is
 * guarded for concurrent use.
 */
#pragma once

#include <json.hpp>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "quilt/error.hpp"
#include "quilt/linalg.hpp"
#include "quilt/rational.hpp"

namespace quilt {

struct StrandSet {
  std::vector<std::string> strands;

  std::size_t size() const { return strands.size(); }
  bool contains(const std::string& s) const {
    return std::find(strands.begin(), strands.end(), s) != strands.end();
  }
  int index_of(const std::string& s) const {
    auto it = std::find(strands.begin(), strands.end(), s);
    if (it == strands.end())
      throw Error(ErrorKind::io_parse, "unknown strand '" + s + "'");
    return static_cast<int>(it - strands.begin());
  }
  bool operator==(const StrandSet& o) const { return strands == o.strands; }
};

inline void validate_strands(const StrandSet& s) {
  std::set<std::string> seen(s.strands.begin(), s.strands.end());
  if (seen.size() != s.strands.size())
    throw Error(ErrorKind::io_parse, "strand labels must be distinct");
}

/// One chord: an unordered pair of strand indices, stored ascending.
using Chord = std::pair<int, int>;
/// A word of chords; formal-parameter degree = length.
using Word = std::vector<Chord>;

inline Chord chord(int u, int v) {
  if (u == v) throw std::logic_error("chord endpoints must differ");
  return u < v ? Chord{u, v} : Chord{v, u};
}

namespace detail {

/// Strands touched by a word, ascending.
inline std::vector<int> support(const Word& w) {
  std::set<int> s;
  for (const auto& [u, v] : w) {
    s.insert(u);
    s.insert(v);
  }
  return {s.begin(), s.end()};
}

/// All chords on strands {0..m-1}, ascending.
inline std::vector<Chord> all_chords(int m) {
  std::vector<Chord> out;
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v) out.push_back({u, v});
  return out;
}

/// All degree-d words over the given alphabet, in ascending lex order.
inline std::vector<Word> all_words(const std::vector<Chord>& alphabet, int d) {
  std::vector<Word> out{Word{}};
  for (int k = 0; k < d; ++k) {
    std::vector<Word> next;
    next.reserve(out.size() * alphabet.size());
    for (const auto& w : out)
      for (const auto& c : alphabet) {
        Word e = w;
        e.push_back(c);
        next.push_back(std::move(e));
      }
    out = std::move(next);
  }
  return out;
}

/// Defining relations on strands {0..m-1}, as raw word combinations.
inline std::vector<std::map<Word, Rat>> relation_generators(int m) {
  std::vector<std::map<Word, Rat>> rels;
  auto chords = all_chords(m);
  // Disjoint pairs commute.
  for (std::size_t i = 0; i < chords.size(); ++i)
    for (std::size_t j = i + 1; j < chords.size(); ++j) {
      const auto& a = chords[i];
      const auto& b = chords[j];
      if (a.first == b.first || a.first == b.second || a.second == b.first ||
          a.second == b.second)
        continue;
      std::map<Word, Rat> r;
      r[{a, b}] += 1;
      r[{b, a}] -= 1;
      rels.push_back(std::move(r));
    }
  // Triangle relations [t^{uv}, t^{uw} + t^{vw}] for each pair-plus-point.
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v)
      for (int w = 0; w < m; ++w) {
        if (w == u || w == v) continue;
        Chord uv = chord(u, v), uw = chord(u, w), vw = chord(v, w);
        std::map<Word, Rat> r;
        r[{uv, uw}] += 1;
        r[{uw, uv}] -= 1;
        r[{uv, vw}] += 1;
        r[{vw, uv}] -= 1;
        // Drop cancellations (possible only in degenerate small cases).
        for (auto it = r.begin(); it != r.end();)
          it = it->second == 0 ? r.erase(it) : std::next(it);
        if (!r.empty()) rels.push_back(std::move(r));
      }
  return rels;
}

/// Reduction data for the degree-d component with support exactly {0..m-1}.
struct Block {
  std::vector<Word> words;        // support-exact words, descending lex
  std::map<Word, int> index;      // word -> column
  // For each pivot word, its normal form as (smaller word -> coefficient).
  std::map<Word, std::vector<std::pair<Word, Rat>>> rewrite;
};

inline std::shared_ptr<const Block> build_block(int m, int d) {
  auto blk = std::make_shared<Block>();
  auto alphabet = all_chords(m);
  std::vector<int> full(m);
  for (int i = 0; i < m; ++i) full[i] = i;
  for (auto& w : all_words(alphabet, d))
    if (support(w) == full) blk->words.push_back(std::move(w));
  std::sort(blk->words.begin(), blk->words.end(), std::greater<Word>());
  for (std::size_t i = 0; i < blk->words.size(); ++i)
    blk->index[blk->words[i]] = static_cast<int>(i);

  // Rows of the ideal component: u * r * v over all padding words u, v.
  RowReducer red;
  auto rels = relation_generators(m);
  for (int du = 0; du + 2 <= d; ++du) {
    int dv = d - 2 - du;
    auto us = all_words(alphabet, du);
    auto vs = all_words(alphabet, dv);
    for (const auto& u : us)
      for (const auto& r : rels)
        for (const auto& v : vs) {
          SparseVec row;
          bool in_block = true;
          for (const auto& [mid, c] : r) {
            Word w = u;
            w.insert(w.end(), mid.begin(), mid.end());
            w.insert(w.end(), v.begin(), v.end());
            auto it = blk->index.find(w);
            if (it == blk->index.end()) {
              in_block = false;  // support smaller than {0..m-1}
              break;
            }
            row[it->second] += c;
          }
          if (in_block) red.add_row(std::move(row));
        }
  }
  for (const auto& [pivot, rrow] : red.rows()) {
    auto& rw = blk->rewrite[blk->words[pivot]];
    for (const auto& [j, c] : rrow)
      if (j != pivot) rw.emplace_back(blk->words[j], -c);
  }
  return blk;
}

inline std::shared_ptr<const Block> get_block(int m, int d) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const Block>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(m, d);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto blk = build_block(m, d);
  cache.emplace(key, blk);
  return blk;
}

inline Word relabel(const Word& w, const std::map<int, int>& f) {
  Word out;
  out.reserve(w.size());
  for (const auto& [u, v] : w) out.push_back(chord(f.at(u), f.at(v)));
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Series

/// Truncated series with rational coefficients on normal-form chord words.
/// The empty word is the unit; a word's degree is its length.
struct ChordSeries {
  StrandSet strands;
  int trunc = 3;
  std::map<Word, Rat> coeffs;

  Rat coeff(const Word& w) const {
    auto it = coeffs.find(w);
    return it == coeffs.end() ? Rat(0) : it->second;
  }
  bool is_zero() const { return coeffs.empty(); }
  bool operator==(const ChordSeries& o) const {
    return strands == o.strands && trunc == o.trunc && coeffs == o.coeffs;
  }
};

/// Reduce a raw word combination to normal form.  Throws on words longer
/// than the truncation degree.
inline std::map<Word, Rat> normal_form(const StrandSet& s, int trunc,
                                       const std::map<Word, Rat>& raw) {
  std::map<Word, Rat> out;
  auto add = [&out](const Word& w, const Rat& c) {
    auto [it, fresh] = out.emplace(w, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0) out.erase(it);
    }
  };
  for (const auto& [w, c] : raw) {
    if (c == 0) continue;
    int d = static_cast<int>(w.size());
    if (d > trunc)
      throw Error(ErrorKind::io_parse,
                  "degree overflow: word of degree " + std::to_string(d) +
                      " exceeds truncation " + std::to_string(trunc));
    for (const auto& [u, v] : w)
      if (u < 0 || v >= static_cast<int>(s.size()))
        throw std::logic_error("chord endpoint outside the strand set");
    if (d < 2) {
      add(w, c);
      continue;
    }
    std::vector<int> supp = detail::support(w);
    int m = static_cast<int>(supp.size());
    std::map<int, int> down, up;
    for (int i = 0; i < m; ++i) {
      down[supp[i]] = i;
      up[i] = supp[i];
    }
    Word local = detail::relabel(w, down);
    auto blk = detail::get_block(m, d);
    auto rw = blk->rewrite.find(local);
    if (rw == blk->rewrite.end()) {
      add(w, c);  // already a standard word
    } else {
      for (const auto& [w2, c2] : rw->second) add(detail::relabel(w2, up), c * c2);
    }
  }
  return out;
}

inline ChordSeries make_series(StrandSet s, int trunc, const std::map<Word, Rat>& raw) {
  validate_strands(s);
  ChordSeries out;
  out.strands = std::move(s);
  out.trunc = trunc;
  out.coeffs = normal_form(out.strands, trunc, raw);
  return out;
}

inline ChordSeries chord_unit(StrandSet s, int trunc) {
  return make_series(std::move(s), trunc, {{Word{}, Rat(1)}});
}

inline ChordSeries chord_zero(StrandSet s, int trunc) {
  return make_series(std::move(s), trunc, {});
}

/// The generator t^{uv}.
inline ChordSeries chord_gen(StrandSet s, int trunc, const std::string& u,
                             const std::string& v) {
  int iu = s.index_of(u), iv = s.index_of(v);
  return make_series(std::move(s), trunc, {{Word{chord(iu, iv)}, Rat(1)}});
}

inline void require_same_algebra(const ChordSeries& a, const ChordSeries& b,
                                 const char* op) {
  if (!(a.strands == b.strands))
    throw Error(ErrorKind::io_parse, std::string(op) + ": strand sets differ");
  if (a.trunc != b.trunc)
    throw Error(ErrorKind::io_parse, std::string(op) + ": truncation degrees differ");
}

inline ChordSeries add(const ChordSeries& a, const ChordSeries& b) {
  require_same_algebra(a, b, "add");
  ChordSeries out = a;
  for (const auto& [w, c] : b.coeffs) {
    auto [it, fresh] = out.coeffs.emplace(w, c);
    if (!fresh) {
      it->second += c;
      if (it->second == 0) out.coeffs.erase(it);
    }
  }
  return out;
}

inline ChordSeries scale(const ChordSeries& a, const Rat& c) {
  ChordSeries out;
  out.strands = a.strands;
  out.trunc = a.trunc;
  if (c == 0) return out;
  for (const auto& [w, v] : a.coeffs) out.coeffs[w] = c * v;
  return out;
}

inline ChordSeries sub(const ChordSeries& a, const ChordSeries& b) {
  return add(a, scale(b, Rat(-1)));
}

/// Concatenation product, renormalized; degrees above the truncation drop.
inline ChordSeries mul(const ChordSeries& a, const ChordSeries& b) {
  require_same_algebra(a, b, "mul");
  std::map<Word, Rat> raw;
  for (const auto& [wa, ca] : a.coeffs)
    for (const auto& [wb, cb] : b.coeffs) {
      if (wa.size() + wb.size() > static_cast<std::size_t>(a.trunc)) continue;
      Word w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      auto [it, fresh] = raw.emplace(std::move(w), ca * cb);
      if (!fresh) it->second += ca * cb;
    }
  ChordSeries out;
  out.strands = a.strands;
  out.trunc = a.trunc;
  out.coeffs = normal_form(a.strands, a.trunc, raw);
  return out;
}

inline ChordSeries commutator(const ChordSeries& a, const ChordSeries& b) {
  return sub(mul(a, b), mul(b, a));
}

/// Truncated exponential; requires zero constant term.
inline ChordSeries exp_series(const ChordSeries& x) {
  if (x.coeff(Word{}) != 0)
    throw Error(ErrorKind::io_parse, "exp requires zero constant term");
  ChordSeries out = chord_unit(x.strands, x.trunc);
  ChordSeries pow = chord_unit(x.strands, x.trunc);
  Rat factorial(1);
  for (int k = 1; k <= x.trunc; ++k) {
    pow = mul(pow, x);
    factorial *= k;
    out = add(out, scale(pow, 1 / factorial));
  }
  return out;
}

/// Truncated logarithm; requires constant term 1.
inline ChordSeries log_series(const ChordSeries& a) {
  if (a.coeff(Word{}) != 1)
    throw Error(ErrorKind::io_parse, "log requires constant term 1");
  ChordSeries y = a;
  y.coeffs.erase(Word{});
  ChordSeries out = chord_zero(a.strands, a.trunc);
  ChordSeries pow = chord_unit(a.strands, a.trunc);
  for (int k = 1; k <= a.trunc; ++k) {
    pow = mul(pow, y);
    Rat c = Rat(k % 2 == 1 ? 1 : -1) / k;
    out = add(out, scale(pow, c));
  }
  return out;
}

/// Multiplicative inverse of a series with constant term 1.
inline ChordSeries inverse_series(const ChordSeries& a) {
  if (a.coeff(Word{}) != 1)
    throw Error(ErrorKind::io_parse, "inverse requires constant term 1");
  ChordSeries y = a;
  y.coeffs.erase(Word{});           // a = 1 + y
  ChordSeries out = chord_unit(a.strands, a.trunc);
  ChordSeries pow = chord_unit(a.strands, a.trunc);
  for (int k = 1; k <= a.trunc; ++k) {
    pow = mul(pow, y);
    out = add(out, scale(pow, Rat(k % 2 == 1 ? -1 : 1)));
  }
  return out;
}

/// Extract the degree-d homogeneous component as a raw word map.
inline std::map<Word, Rat> component(const ChordSeries& a, int d) {
  std::map<Word, Rat> out;
  for (const auto& [w, c] : a.coeffs)
    if (static_cast<int>(w.size()) == d) out.emplace(w, c);
  return out;
}

// ---------------------------------------------------------------------------
// Operadic strand maps

/// Split strand u into (u1, u2): t^{uv} becomes t^{u1,v} + t^{u2,v}.
/// The new strands take u's position, u1 first.
inline ChordSeries cable(const ChordSeries& a, const std::string& u,
                         const std::string& u1, const std::string& u2) {
  int iu = a.strands.index_of(u);
  if (a.strands.contains(u1) || a.strands.contains(u2) || u1 == u2)
    throw Error(ErrorKind::io_parse, "cable: new strand labels collide");
  StrandSet s2;
  for (int i = 0; i < static_cast<int>(a.strands.size()); ++i) {
    if (i == iu) {
      s2.strands.push_back(u1);
      s2.strands.push_back(u2);
    } else {
      s2.strands.push_back(a.strands.strands[i]);
    }
  }
  // Old index -> new index for untouched strands; u maps to {iu, iu+1}.
  auto shift = [iu](int i) { return i < iu ? i : i + 1; };
  std::map<Word, Rat> raw;
  for (const auto& [w, c] : a.coeffs) {
    std::vector<Word> expansions{Word{}};
    for (const auto& [p, q] : w) {
      std::vector<int> ps = p == iu ? std::vector<int>{iu, iu + 1} : std::vector<int>{shift(p)};
      std::vector<int> qs = q == iu ? std::vector<int>{iu, iu + 1} : std::vector<int>{shift(q)};
      std::vector<Word> next;
      for (const auto& base : expansions)
        for (int np : ps)
          for (int nq : qs) {
            Word e = base;
            e.push_back(chord(np, nq));
            next.push_back(std::move(e));
          }
      expansions = std::move(next);
    }
    for (auto& e : expansions) {
      auto [it, fresh] = raw.emplace(std::move(e), c);
      if (!fresh) it->second += c;
    }
  }
  ChordSeries out;
  out.strands = std::move(s2);
  out.trunc = a.trunc;
  out.coeffs = normal_form(out.strands, out.trunc, raw);
  return out;
}

/// Send every word touching strand u to zero and drop the strand.
inline ChordSeries delete_strand(const ChordSeries& a, const std::string& u) {
  int iu = a.strands.index_of(u);
  StrandSet s2;
  for (int i = 0; i < static_cast<int>(a.strands.size()); ++i)
    if (i != iu) s2.strands.push_back(a.strands.strands[i]);
  auto shift = [iu](int i) { return i < iu ? i : i - 1; };
  std::map<Word, Rat> raw;
  for (const auto& [w, c] : a.coeffs) {
    bool touches = false;
    for (const auto& [p, q] : w)
      if (p == iu || q == iu) {
        touches = true;
        break;
      }
    if (touches) continue;
    Word e;
    e.reserve(w.size());
    for (const auto& [p, q] : w) e.push_back(chord(shift(p), shift(q)));
    raw[std::move(e)] += c;
  }
  ChordSeries out;
  out.strands = std::move(s2);
  out.trunc = a.trunc;
  out.coeffs = normal_form(out.strands, out.trunc, raw);
  return out;
}

/// Relabel strands through an injection into a (possibly larger) strand set.
inline ChordSeries embed(const ChordSeries& a,
                         const std::map<std::string, std::string>& renaming,
                         StrandSet into) {
  validate_strands(into);
  std::map<int, int> f;
  std::set<int> hit;
  for (int i = 0; i < static_cast<int>(a.strands.size()); ++i) {
    auto it = renaming.find(a.strands.strands[i]);
    if (it == renaming.end())
      throw Error(ErrorKind::io_parse,
                  "embed: no image for strand '" + a.strands.strands[i] + "'");
    int j = into.index_of(it->second);
    if (!hit.insert(j).second)
      throw Error(ErrorKind::io_parse, "embed: renaming is not injective");
    f[i] = j;
  }
  std::map<Word, Rat> raw;
  for (const auto& [w, c] : a.coeffs) raw[detail::relabel(w, f)] += c;
  ChordSeries out;
  out.strands = std::move(into);
  out.trunc = a.trunc;
  out.coeffs = normal_form(out.strands, out.trunc, raw);
  return out;
}

/// Map every strand of `a` to a block of strands in `into`.  Each letter
/// t^{uv} expands multilinearly to the sum over (u-block) x (v-block); an
/// empty block therefore acts as deletion of that strand.  Blocks must be
/// pairwise disjoint.  Generalizes cable / embed / delete_strand in one step.
inline ChordSeries multi_cable(const ChordSeries& a,
                               const std::map<std::string, std::vector<std::string>>& blocks,
                               StrandSet into) {
  validate_strands(into);
  std::vector<std::vector<int>> img(a.strands.size());
  std::set<int> used;
  for (int i = 0; i < static_cast<int>(a.strands.size()); ++i) {
    auto it = blocks.find(a.strands.strands[i]);
    if (it == blocks.end())
      throw Error(ErrorKind::io_parse,
                  "multi_cable: no block for strand '" + a.strands.strands[i] + "'");
    for (const auto& label : it->second) {
      int j = into.index_of(label);
      if (!used.insert(j).second)
        throw Error(ErrorKind::io_parse, "multi_cable: blocks overlap at '" + label + "'");
      img[i].push_back(j);
    }
  }
  std::map<Word, Rat> raw;
  for (const auto& [w, c] : a.coeffs) {
    std::vector<Word> expansions{Word{}};
    for (const auto& [p, q] : w) {
      std::vector<Word> next;
      for (const auto& base : expansions)
        for (int np : img[p])
          for (int nq : img[q]) {
            Word e = base;
            e.push_back(chord(np, nq));
            next.push_back(std::move(e));
          }
      expansions = std::move(next);
    }
    for (auto& e : expansions) {
      auto [it, fresh] = raw.emplace(std::move(e), c);
      if (!fresh) it->second += c;
    }
  }
  ChordSeries out;
  out.strands = std::move(into);
  out.trunc = a.trunc;
  out.coeffs = normal_form(out.strands, out.trunc, raw);
  return out;
}

// ---------------------------------------------------------------------------
// Group-likeness

/// True iff the coproduct with primitive generators satisfies
/// delta(a) = a (x) a up to the truncation degree.
inline bool is_group_like(const ChordSeries& a) {
  if (a.coeff(Word{}) != 1) return false;
  // Tensor-square components, both factors kept in normal form.
  std::map<std::pair<Word, Word>, Rat> lhs, rhs;
  auto accumulate = [&](std::map<std::pair<Word, Word>, Rat>& acc, const Word& w1,
                        const Word& w2, const Rat& c) {
    if (c == 0) return;
    std::map<Word, Rat> n1 = normal_form(a.strands, a.trunc, {{w1, Rat(1)}});
    std::map<Word, Rat> n2 = normal_form(a.strands, a.trunc, {{w2, Rat(1)}});
    for (const auto& [u1, c1] : n1)
      for (const auto& [u2, c2] : n2) {
        auto key = std::make_pair(u1, u2);
        auto [it, fresh] = acc.emplace(key, c * c1 * c2);
        if (!fresh) {
          it->second += c * c1 * c2;
          if (it->second == 0) acc.erase(it);
        }
      }
  };
  for (const auto& [w, c] : a.coeffs) {
    // delta(w): split the letters over the two factors in all ways.
    int n = static_cast<int>(w.size());
    for (int mask = 0; mask < (1 << n); ++mask) {
      Word w1, w2;
      for (int i = 0; i < n; ++i) (mask >> i & 1 ? w1 : w2).push_back(w[i]);
      accumulate(lhs, w1, w2, c);
    }
  }
  for (const auto& [w1, c1] : a.coeffs)
    for (const auto& [w2, c2] : a.coeffs) {
      if (w1.size() + w2.size() > static_cast<std::size_t>(a.trunc)) continue;
      accumulate(rhs, w1, w2, c1 * c2);
    }
  return lhs == rhs;
}

/// Number of standard (normal-form) words of the given degree.
inline int graded_dimension(const StrandSet& s, int d) {
  if (d == 0) return 1;
  auto alphabet = detail::all_chords(static_cast<int>(s.size()));
  int count = 0;
  for (const auto& w : detail::all_words(alphabet, d)) {
    auto nf = normal_form(s, d, {{w, Rat(1)}});
    if (nf.size() == 1 && nf.begin()->first == w && nf.begin()->second == 1) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Canonical JSON form

inline nlohmann::ordered_json series_to_json(const ChordSeries& a) {
  nlohmann::ordered_json j;
  j["strands"] = a.strands.strands;
  j["trunc"] = a.trunc;
  auto terms = nlohmann::ordered_json::array();
  for (const auto& [w, c] : a.coeffs) {  // map order: degree interleaved, lex
    nlohmann::ordered_json word = nlohmann::ordered_json::array();
    for (const auto& [u, v] : w)
      word.push_back({a.strands.strands[u], a.strands.strands[v]});
    terms.push_back({{"word", word}, {"coeff", rat_to_string(c)}});
  }
  j["terms"] = std::move(terms);
  return j;
}

inline ChordSeries series_from_json(const nlohmann::json& j) {
  StrandSet s;
  for (const auto& x : j.at("strands")) s.strands.push_back(x.get<std::string>());
  validate_strands(s);
  int trunc = j.at("trunc").get<int>();
  std::map<Word, Rat> raw;
  for (const auto& term : j.at("terms")) {
    Word w;
    for (const auto& pair : term.at("word")) {
      if (pair.size() != 2)
        throw Error(ErrorKind::io_parse, "chord must list exactly two strands");
      w.push_back(chord(s.index_of(pair[0].get<std::string>()),
                        s.index_of(pair[1].get<std::string>())));
    }
    raw[w] += rat_from_string(term.at("coeff").get<std::string>());
  }
  return make_series(std::move(s), trunc, raw);
}

}  // namespace quilt
