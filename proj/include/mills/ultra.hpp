#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mills/dbstore.hpp"
#include "mills/retro_basic.hpp"
#include "mills/retro_multi.hpp"
#include "mills/unit.hpp"
#include "mills/workunits.hpp"

namespace mills {

// Exact non-negative-denominator fraction.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t n, std::int64_t d) {
    if (d == 0) throw Error("zero denominator");
    if (d < 0) n = -n, d = -d;
    std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    if (g > 1) n /= g, d /= g;
    return Rational{n, d};
  }
  friend bool operator==(const Rational& a, const Rational& b) { return a.num == b.num && a.den == b.den; }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
  }
  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const { return std::to_string(num) + "/" + std::to_string(den); }
};

enum class Heuristic { WdlRatio, StoneDifference };

inline Heuristic parse_heuristic(std::string_view s) {
  if (s == "wdl" || s == "wdlRatio") return Heuristic::WdlRatio;
  if (s == "stonediff" || s == "stoneDifference") return Heuristic::StoneDifference;
  throw Error("unknown heuristic '" + std::string(s) + "'");
}

// (W_s + L_-s + D_s/2 + D_-s/2) / (T_s + T_-s) for a non-transient pair member,
// (W_s + D_s/2) / T_s for a transient subspace (neg == nullptr).
inline Rational subspace_value(const SubspaceStats& s, const SubspaceStats* neg) {
  if (!neg) {
    if (s.total() == 0) throw Error("subspace with no positions");
    return Rational::make(static_cast<std::int64_t>(2 * s.wins + s.draws),
                          static_cast<std::int64_t>(2 * s.total()));
  }
  const std::uint64_t t = s.total() + neg->total();
  if (t == 0) throw Error("subspace with no positions");
  return Rational::make(static_cast<std::int64_t>(2 * s.wins + 2 * neg->losses + s.draws + neg->draws),
                        static_cast<std::int64_t>(2 * t));
}

inline Rational stone_difference_value(const SubspaceId& s) {
  return Rational{(s.wb + s.wf) - (s.bb + s.bf), 1};
}

struct RankTable {
  std::map<SubspaceId, int> ranks;
  std::vector<std::string> notes;  // comment lines, without the leading "# "

  int win_key() const {
    int m = 0;
    for (const auto& [s, r] : ranks) m = std::max(m, std::abs(r));
    return m + 1;
  }
  int loss_key() const { return -win_key(); }
  bool has(const SubspaceId& s) const { return ranks.count(s) > 0; }
  int rank(const SubspaceId& s) const {
    auto it = ranks.find(s);
    if (it == ranks.end()) throw Error("no rank for subspace " + s.to_string());
    return it->second;
  }
  std::string to_text() const {
    std::ostringstream o;
    for (const auto& n : notes) o << "# " << n << '\n';
    for (const auto& [s, r] : ranks) o << s.to_string() << '\t' << r << '\n';
    return o.str();
  }
  std::uint64_t digest() const {
    std::ostringstream o;
    for (const auto& [s, r] : ranks) o << s.to_string() << '\t' << r << '\n';
    return fnv1a64(o.str());
  }

  static RankTable parse(std::string_view text) {
    RankTable t;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
      ++lineNo;
      if (line.empty()) continue;
      if (line[0] == '#') {
        t.notes.push_back(line.size() > 2 && line[1] == ' ' ? line.substr(2) : line.substr(1));
        continue;
      }
      auto tab = line.find('\t');
      if (tab == std::string::npos) throw Error("rank file line " + std::to_string(lineNo) + ": missing tab");
      SubspaceId s = parse_subspace(line.substr(0, tab));
      int r;
      try {
        std::size_t used = 0;
        r = std::stoi(line.substr(tab + 1), &used);
        if (used != line.size() - tab - 1) throw Error("trailing text");
      } catch (const std::exception&) {
        throw Error("rank file line " + std::to_string(lineNo) + ": bad rank");
      }
      if (!t.ranks.emplace(s, r).second)
        throw Error("rank file line " + std::to_string(lineNo) + ": duplicate subspace " + s.to_string());
    }
    return t;
  }
  static RankTable load(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw Error(p.string() + ": cannot open rank file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
  }
  void save(const std::filesystem::path& p) const {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(p.string() + ": cannot write rank file");
    out << to_text();
  }

  // Every subspace of the DAG ranked 0.
  static RankTable zeros(const UnitDag& dag) {
    RankTable t;
    for (const auto& s : dag.all_subspaces()) t.ranks[s] = 0;
    return t;
  }
};

// Ranks are places in the sorted list of distinct values, centered so that
// the neutral value gets 0. Pair members get opposite ranks of equal
// magnitude, non-transient ESC subspaces get 0, overrides come last.
inline RankTable assign_ranks(const UnitDag& dag, const std::map<SubspaceId, Rational>& values,
                              const Rational& center, const std::map<SubspaceId, int>& overrides = {}) {
  std::set<Rational, std::less<>> distinct{center};
  for (const auto& [s, v] : values) distinct.insert(v);
  std::vector<Rational> sorted(distinct.begin(), distinct.end());
  auto place = [&](const Rational& v) {
    return static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
  };
  const int c = place(center);

  RankTable t;
  for (const auto& s : dag.all_subspaces()) {
    const WorkUnit& u = dag.units[dag.unitOf.at(s)];
    if (!u.transient && u.esc) {
      t.ranks[s] = 0;
      continue;
    }
    auto it = values.find(s);
    if (it == values.end()) throw Error("no value for subspace " + s.to_string());
    t.ranks[s] = place(it->second) - c;
  }
  for (const auto& u : dag.units) {
    if (u.transient || u.subspaces.size() != 2) continue;
    const SubspaceId& a = u.subspaces[0];
    const SubspaceId& b = u.subspaces[1];
    int mag = (std::abs(t.ranks[a]) + std::abs(t.ranks[b]) + 1) / 2;
    const Rational& va = values.at(a);
    int sign = center < va ? 1 : (va < center ? -1 : 0);
    t.ranks[a] = sign * mag;
    t.ranks[b] = -sign * mag;
  }
  for (const auto& [s, r] : overrides) {
    auto uit = dag.unitOf.find(s);
    if (uit == dag.unitOf.end()) throw Error("override for unknown subspace " + s.to_string());
    const WorkUnit& u = dag.units[uit->second];
    if (!u.transient && u.esc && r != 0)
      throw Error("override gives non-transient ESC subspace " + s.to_string() + " a nonzero rank");
    t.ranks[s] = r;
    if (!u.transient && u.subspaces.size() == 2) {
      SubspaceId partner = s.negate();
      auto o = overrides.find(partner);
      if (o != overrides.end() && o->second != -r)
        throw Error("overrides for " + s.to_string() + " and " + partner.to_string() +
                    " are not negations of each other");
      t.ranks[partner] = -r;
    }
    t.notes.push_back("override " + s.to_string() + " = " + std::to_string(r));
  }
  return t;
}

// Values per subspace from strong statistics, then ranks.
inline RankTable compute_ranks(const UnitDag& dag, const std::map<SubspaceId, SubspaceStats>& stats,
                               Heuristic h, const std::map<SubspaceId, int>& overrides = {}) {
  std::map<SubspaceId, Rational> values;
  for (const auto& u : dag.units) {
    if (!u.transient && u.esc) continue;
    for (const auto& s : u.subspaces) {
      if (h == Heuristic::StoneDifference) {
        values[s] = stone_difference_value(s);
        continue;
      }
      auto it = stats.find(s);
      if (it == stats.end()) throw Error("no statistics for subspace " + s.to_string());
      if (u.transient) {
        values[s] = subspace_value(it->second, nullptr);
      } else {
        auto jt = stats.find(s.negate());
        if (jt == stats.end()) throw Error("no statistics for subspace " + s.negate().to_string());
        values[s] = subspace_value(it->second, &jt->second);
      }
    }
  }
  Rational center = h == Heuristic::WdlRatio ? Rational{1, 2} : Rational{0, 1};
  RankTable t = assign_ranks(dag, values, center, overrides);
  t.notes.insert(t.notes.begin(), std::string("heuristic ") +
                                      (h == Heuristic::WdlRatio ? "wdl" : "stonediff"));
  return t;
}

// ---- unit solve -------------------------------------------------------------

struct UltraSolveOptions {
  std::uint64_t spillThreshold = 256ull << 20;
  std::filesystem::path scratch = default_scratch_dir();
};

struct UltraUnitResult {
  std::vector<std::vector<UltraRecord>> records;  // per primary slot
  std::uint64_t secondaryEntries = 0;
  MultiRunStats run;
};

inline int sign_of(int v) { return (v > 0) - (v < 0); }

// Key and dtw of a secondary record as seen when propagating into the
// primary `target`: shifted by the sum of both subspace ranks, dtw negated
// when the key changes sign. A zero result means "treat as count-state".
inline std::pair<int, int> adjust_secondary(const UltraRecord& r, int rankSecondary, int rankTarget) {
  int k = r.key + rankSecondary + rankTarget;
  if (k == 0) return {0, 0};
  if (r.is_count()) return {k, 0};
  int d = r.dtw;
  if (sign_of(k) != sign_of(r.key)) d = -d;
  return {k, d};
}

namespace detail {

// Routes stream entries of a unit solve to primary predecessors; a secondary
// entry only feeds the primary slot encoded in its payload.
struct UltraAdapter {
  const UnitSpace& space;
  const std::vector<std::shared_ptr<const Indexer>>& secIndex;
  std::vector<std::uint32_t> scratch;

  template <class F>
  void for_each_predecessor_of_ref(std::uint64_t ref, F&& f) {
    unsigned slot = ref_slot(ref);
    if (slot == kSeedSlot) {
      for_each_predecessor_of_node(static_cast<std::uint32_t>(ref_index(ref)), f);
      return;
    }
    const int target = static_cast<int>(slot & 1);
    Position pos = secIndex[slot >> 1]->unrank(ref_index(ref));
    space.for_each_predecessor(pos, scratch, [&](std::uint32_t p) {
      if (space.slot_of_node(p) == target) f(p);
    });
  }
  template <class F>
  void for_each_predecessor_of_node(std::uint32_t node, F&& f) {
    space.for_each_predecessor(space.position(node), scratch, f);
  }
};

}  // namespace detail

inline UltraUnitResult solve_ultra_unit(const UnitSpace& space, const std::vector<SubspaceId>& secondaries,
                                        const DbLoader& load, const RankTable& ranks,
                                        const UltraSolveOptions& opt = {}) {
  const BoardDef& board = space.board();
  const RuleFlags& rules = space.rules();
  const std::uint64_t n = space.size();
  const int winKey = ranks.win_key();
  const auto& prim = space.primaries();

  std::vector<int> primRank;
  for (const auto& s : prim) primRank.push_back(ranks.rank(s));
  if (prim.size() == 2 && primRank[0] + primRank[1] != 0)
    throw Error("ranks of pair " + prim[0].to_string() + " and " + prim[1].to_string() +
                " do not cancel");

  MultiQueue stream(opt.spillThreshold, opt.scratch);
  std::vector<MultiCell> cell(n);
  for (std::uint64_t node = 0; node < n; ++node) {
    Position pos = space.position(node);
    const int r = primRank[space.slot_of_node(node)];
    if (rules.fullBoardDraw && board_full(pos, board)) {
      cell[node] = MultiCell{0, kFrozenCount};
    } else if (has_winning_capture(pos, board, rules)) {
      cell[node] = MultiCell{checked_i16(winKey - r, "key"), 1};
      stream.push(MultiKey::of(winKey - r, 1), pack_seed(node));
    } else {
      int c = successor_count(pos, board, rules, space.indexers());
      if (c == 0) {
        cell[node] = MultiCell{checked_i16(-winKey - r, "key"), 0};
        stream.push(MultiKey::of(-winKey - r, 0), pack_seed(node));
      } else {
        cell[node] = MultiCell{0, checked_i16(c, "count")};
      }
    }
  }

  std::vector<std::shared_ptr<const Indexer>> secIndex;
  for (unsigned j = 0; j < secondaries.size(); ++j) {
    const SubspaceId& s1 = secondaries[j];
    auto db = load(s1);
    if (db->mode() != SolveMode::Ultra) throw Error("secondary " + s1.to_string() + " is not an ultra database");
    const int r1 = ranks.rank(s1);
    if (db->header().rank != r1 || db->header().winKey != winKey)
      throw Error("secondary " + s1.to_string() + " was solved with a different rank table");
    secIndex.push_back(space.indexers().get(s1));
    if (db->size() != secIndex.back()->size())
      throw Error("secondary " + s1.to_string() + " has the wrong record count");
    for (unsigned t = 0; t < prim.size(); ++t) {
      const auto targets = route(prim[t], board, rules).targets;
      if (std::find(targets.begin(), targets.end(), s1) == targets.end()) continue;
      for (std::uint64_t i = 0; i < db->size(); ++i) {
        auto [k, d] = adjust_secondary(db->ultra(i), r1, primRank[t]);
        if (k == 0) continue;
        stream.push(MultiKey::of(k, d), pack_ref(2 * j + t, i));
      }
    }
  }

  UltraUnitResult res;
  res.secondaryEntries = stream.size();

  detail::UltraAdapter adapter{space, secIndex, {}};
  res.run = run_multi(adapter, cell, stream);

  res.records.resize(prim.size());
  for (int slot = 0; slot < static_cast<int>(prim.size()); ++slot) {
    auto& out = res.records[slot];
    out.resize(space.slot_size(slot));
    for (std::uint64_t i = 0; i < out.size(); ++i) {
      const MultiCell& c = cell[space.offset(slot) + i];
      out[i] = c.key == 0 ? UltraRecord{} : UltraRecord{c.key, c.aux};
    }
  }
  return res;
}

// Strong value implied by an ultra record (wins and losses sit at +-winKey).
inline StrongValue ultra_to_strong(const UltraRecord& r, int rank, int winKey) {
  if (r.is_count()) return {};
  int abs = r.key + rank;
  if (abs == winKey) return StrongValue{Outcome::Win, r.dtw};
  if (abs == -winKey) return StrongValue{Outcome::Loss, r.dtw};
  return {};
}

}  // namespace mills
