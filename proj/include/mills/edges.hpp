#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "mills/indexing.hpp"
#include "mills/position.hpp"
#include "mills/subspace.hpp"

namespace mills {

// One move's outcome in indexed form. A terminal win means the mover reduced
// the opponent below three stones; there is no successor position then.
struct Edge {
  SubspaceId subspace;
  std::uint64_t index = 0;
  bool terminalWin = false;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge& a, const Edge& b) {
    return std::tie(a.terminalWin, a.subspace, a.index) <=>
           std::tie(b.terminalWin, b.subspace, b.index);
  }
};

// Successors of a position, after the perspective swap. In canonical mode the
// list is deduplicated, so its length is the number of distinct successors.
inline std::vector<Edge> successors(const Position& pos, const BoardDef& board,
                                    const RuleFlags& rules, const IndexerCache& indexers) {
  std::vector<Edge> out;
  for_each_move(pos, board, rules, [&](const Move& m) {
    Position next = apply_unchecked(pos, m);
    if (next.my_total() < 3) {
      out.push_back(Edge{subspace_of(next), 0, true});
      return;
    }
    SubspaceId s = subspace_of(next);
    out.push_back(Edge{s, indexers.get(s)->canonical_rank(next), false});
  });
  if (indexers.mode() == IndexingMode::SymmetryCanonical) {
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  return out;
}

inline std::vector<Edge> successors(const SubspaceId& s, std::uint64_t index, const BoardDef& board,
                                    const RuleFlags& rules, const IndexerCache& indexers) {
  return successors(indexers.get(s)->unrank(index), board, rules, indexers);
}

// Enumerates every position p (seen from its mover) with a legal move that
// leads to `pos`. Un-captures re-add the taken stone on every empty point
// where taking it was legal. Predecessors are not restricted to any subspace
// and may repeat only if different moves of p lead to `pos`, which cannot
// happen.
template <class F>
void for_each_predecessor_position(const Position& pos, const BoardDef& board,
                                   const RuleFlags& rules, F&& f) {
  // The previous mover owns `pos.theirs`.
  const PointSet prevMine = pos.theirs;
  const PointSet prevTheirs = pos.mine;
  const int prevHand = pos.theirHand;
  const int prevTheirHand = pos.myHand;
  const PointSet empty = board.all() & ~pos.occupied();
  const bool noTargetsNow = capture_targets(prevTheirs, board, rules) == 0;

  auto emit_with_uncaptures = [&](int to, PointSet beforeMine, int beforeHand, PointSet freed) {
    const bool mill = board.closes_mill(to, prevMine);
    if (!mill) {
      f(Position{beforeMine, prevTheirs, beforeHand, prevTheirHand});
      return;
    }
    // A capture must have followed unless no legal target existed.
    PointSet spots = empty & ~freed;
    for_each_bit(spots, [&](int c) {
      PointSet restored = prevTheirs | bit(c);
      if (capture_targets(restored, board, rules) & bit(c))
        f(Position{beforeMine, restored, beforeHand, prevTheirHand});
    });
    if (noTargetsNow) f(Position{beforeMine, prevTheirs, beforeHand, prevTheirHand});
  };

  const bool prevMayMove = prevHand == 0 || rules.laskerPlacement;
  const bool prevFlies = rules.flyingAtThree && prevHand == 0 && popcount(prevMine) == 3;
  for_each_bit(prevMine, [&](int to) {
    if (prevHand + 1 <= rules.stonesToPlace)
      emit_with_uncaptures(to, prevMine ^ bit(to), prevHand + 1, 0);
    if (prevMayMove) {
      PointSet sources = prevFlies ? empty : (board.neighbors(to) & empty);
      for_each_bit(sources, [&](int from) {
        emit_with_uncaptures(to, prevMine ^ bit(to) ^ bit(from), prevHand, bit(from));
      });
    }
  });
}

// Indexed predecessors of (s, index) that lie in `primaries`, deduplicated.
inline std::vector<Edge> predecessors(const SubspaceId& s, std::uint64_t index,
                                      const std::vector<SubspaceId>& primaries,
                                      const BoardDef& board, const RuleFlags& rules,
                                      const IndexerCache& indexers) {
  std::vector<Edge> out;
  for_each_predecessor_position(indexers.get(s)->unrank(index), board, rules, [&](const Position& p) {
    SubspaceId ps = subspace_of(p);
    if (std::find(primaries.begin(), primaries.end(), ps) == primaries.end()) return;
    out.push_back(Edge{ps, indexers.get(ps)->canonical_rank(p), false});
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace mills
