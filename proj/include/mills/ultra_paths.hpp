#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mills/ultra.hpp"
#include "mills/verify.hpp"

namespace mills {

// Follows optimal play through a set of ultra databases. For every position
// g it derives, along the optimal path g = g_0, g_1, ..., g_n (n the first
// count-state or end state):
//   signedSum  sum over i < n of (-1)^i sgn(k1(g_i)), k1 the relative first key
//   reached    the subspace of g_n, or nothing for an end state
// Results are memoized per subspace.
class OptimalPaths {
public:
  struct Info {
    int signedSum = 0;
    int length = 0;
    std::optional<SubspaceId> reached;
  };

  explicit OptimalPaths(const DbSet& dbs) : dbs_(dbs) {
    if (dbs.mode() != SolveMode::Ultra) throw Error("optimal paths need ultra databases");
    for (const auto& s : dbs.available()) {
      slot_[s] = static_cast<int>(subspaces_.size());
      subspaces_.push_back(s);
    }
    memo_.resize(subspaces_.size());
  }

  const std::vector<SubspaceId>& subspaces() const { return subspaces_; }

  // Successor that realizes the stored record of `pos`; nothing for count-
  // states and end states.
  std::optional<Position> next(const Position& pos) const {
    auto db = dbs_.get(subspace_of(pos));
    UltraRecord r = db->ultra(dbs_.index_of(pos));
    if (r.is_count()) return std::nullopt;
    const BoardDef& board = *dbs_.variant().board;
    const RuleFlags& rules = dbs_.variant().rules;
    const UltraOption want{r.key, r.dtw};
    for (const Move& m : legal_moves(pos, board, rules)) {
      Position q = apply_move(pos, m, board, rules);
      if (ultra_option(dbs_, q, db->header().rank, db->header().winKey) == want) return q;
    }
    if (legal_moves(pos, board, rules).empty()) return std::nullopt;
    throw Error("no successor realizes the record at " + describe_position(pos, board));
  }

  Info at(const Position& pos) { return at(pos, 0); }

private:
  struct Cell {
    std::int16_t sum = 0;
    std::int16_t length = -1;  // -1: not computed
    std::int16_t reached = -1; // slot, or -1 for an end state
  };

  Info at(const Position& pos, int depth) {
    if (depth > 100000) throw Error("optimal path does not terminate");
    const SubspaceId s = subspace_of(pos);
    auto it = slot_.find(s);
    if (it == slot_.end()) throw Error("missing database " + s.to_string());
    const int slot = it->second;
    auto& memo = memo_[slot];
    if (memo.empty()) memo.resize(dbs_.get(s)->size());
    const std::uint64_t idx = dbs_.index_of(pos);
    Cell& c = memo[idx];
    if (c.length >= 0) return unpack(c);

    Info out;
    UltraRecord r = dbs_.get(s)->ultra(idx);
    if (r.is_count()) {
      out.reached = s;
    } else if (auto q = next(pos)) {
      if (q->my_total() < 3) {
        out.signedSum = sign_of(r.key);
        out.length = 1;
      } else {
        Info rest = at(*q, depth + 1);
        out.signedSum = sign_of(r.key) - rest.signedSum;
        out.length = rest.length + 1;
        out.reached = rest.reached;
      }
    }
    Cell& dst = memo_[slot][idx];
    dst.sum = checked_i16(out.signedSum, "path sum");
    dst.length = checked_i16(out.length, "path length");
    dst.reached = out.reached ? static_cast<std::int16_t>(slot_.at(*out.reached)) : std::int16_t{-1};
    return out;
  }

  Info unpack(const Cell& c) const {
    Info i{c.sum, c.length, std::nullopt};
    if (c.reached >= 0) i.reached = subspaces_[c.reached];
    return i;
  }

  const DbSet& dbs_;
  std::vector<SubspaceId> subspaces_;
  std::map<SubspaceId, int> slot_;
  std::vector<std::vector<Cell>> memo_;
};

// Checks d(g) = sgn(k1(g)) * signedSum(g) for every value-state, and that
// the absolute first key equals the reached subspace's rank (or the win/
// loss key for end states), negated once per ply.
inline VerifyReport check_dtw_paths(const DbSet& dbs, std::size_t keep = 20) {
  VerifyReport rep;
  OptimalPaths paths(dbs);
  const BoardDef& board = *dbs.variant().board;
  for (const auto& s : paths.subspaces()) {
    auto db = dbs.get(s);
    const int rank = db->header().rank;
    const int winKey = db->header().winKey;
    auto ix = dbs.indexers().get(s);
    for (std::uint64_t i = 0; i < db->size(); ++i) {
      UltraRecord r = db->ultra(i);
      if (r.is_count()) continue;
      ++rep.checked;
      Position pos = ix->unrank(i);
      OptimalPaths::Info info = paths.at(pos);
      std::string why;
      if (r.dtw != sign_of(r.key) * info.signedSum) {
        why = "dtw " + std::to_string(r.dtw) + " but path gives " + std::to_string(sign_of(r.key) * info.signedSum);
      } else {
        int endAbs = info.reached ? dbs.get(*info.reached)->header().rank : -winKey;
        int expect = (info.length % 2 == 0) ? endAbs : -endAbs;
        if (r.key + rank != expect)
          why = "absolute key " + std::to_string(r.key + rank) + " but path ends at " + std::to_string(expect);
      }
      if (why.empty()) continue;
      ++rep.violationCount;
      if (rep.first.size() < keep) rep.first.push_back(Violation{s, i, why + " at " + describe_position(pos, board)});
    }
  }
  return rep;
}

// Distribution of draws in ultra databases: by absolute first key, by the
// subspace optimal play settles in, and by that subspace's stone difference.
struct RankReport {
  std::uint64_t draws = 0;
  std::map<int, std::uint64_t> byAbsoluteKey;
  std::map<SubspaceId, std::uint64_t> byReached;
  std::map<int, std::uint64_t> byStoneDifference;
};

inline RankReport rank_report(const DbSet& dbs) {
  RankReport rep;
  OptimalPaths paths(dbs);
  for (const auto& s : paths.subspaces()) {
    auto db = dbs.get(s);
    const int rank = db->header().rank;
    const int winKey = db->header().winKey;
    auto ix = dbs.indexers().get(s);
    for (std::uint64_t i = 0; i < db->size(); ++i) {
      UltraRecord r = db->ultra(i);
      const int abs = r.key + rank;
      if (!r.is_count() && (abs == winKey || abs == -winKey)) continue;
      ++rep.draws;
      ++rep.byAbsoluteKey[abs];
      OptimalPaths::Info info = paths.at(ix->unrank(i));
      if (!info.reached) throw Error("draw at " + s.to_string() + " reaches an end state");
      ++rep.byReached[*info.reached];
      // Mover's perspective at the reached position alternates with each ply.
      const SubspaceId& t = *info.reached;
      int diff = (t.wb + t.wf) - (t.bb + t.bf);
      ++rep.byStoneDifference[info.length % 2 == 0 ? diff : -diff];
    }
  }
  return rep;
}

}  // namespace mills
