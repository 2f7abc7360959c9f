#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <unordered_map>
#include <vector>

#include "mills/dbstore.hpp"
#include "mills/position.hpp"
#include "mills/retro_multi.hpp"

namespace mills {

struct PositionHash {
  std::size_t operator()(const Position& p) const {
    std::uint64_t h = (std::uint64_t{p.mine} << 32) | p.theirs;
    h ^= (std::uint64_t(p.myHand) << 5 | std::uint64_t(p.theirHand)) * 0x9e3779b97f4a7c15ull;
    h ^= h >> 29;
    h *= 0xbf58476d1ce4e5b9ull;
    return static_cast<std::size_t>(h ^ (h >> 32));
  }
};

// Every position reachable from `start`, as an explicit graph. Node 0 is a
// virtual node standing for "mover has fewer than three stones" (a loss);
// captures that end the game lead there. Full boards are terminal draws and
// blocked positions terminal losses when the rules say so.
struct ReachableGraph {
  GameGraph graph;
  std::vector<Position> positions;  // positions[0] is unused
  std::unordered_map<Position, int, PositionHash> id;
};

inline ReachableGraph build_reachable_graph(const Position& start, const Variant& v,
                                            std::size_t maxNodes = 20'000'000) {
  const BoardDef& board = *v.board;
  const RuleFlags& rules = v.rules;
  ReachableGraph out;
  out.positions.push_back(Position{});
  out.graph.succ.emplace_back();
  out.graph.terminal.push_back(-1);
  auto intern = [&](const Position& p) {
    auto [it, fresh] = out.id.try_emplace(p, static_cast<int>(out.positions.size()));
    if (fresh) {
      if (out.positions.size() >= maxNodes) throw Error("reachable graph exceeds the node limit");
      out.positions.push_back(p);
      out.graph.succ.emplace_back();
      out.graph.terminal.emplace_back();
    }
    return it->second;
  };
  intern(start);
  for (std::size_t u = 1; u < out.positions.size(); ++u) {
    const Position p = out.positions[u];
    if (rules.fullBoardDraw && board_full(p, board)) {
      out.graph.terminal[u] = 0;
      continue;
    }
    std::vector<int> succ;
    for (const Move& m : legal_moves(p, board, rules)) {
      Position q = apply_move(p, m, board, rules);
      succ.push_back(q.my_total() < 3 ? 0 : intern(q));
    }
    if (succ.empty()) {
      out.graph.terminal[u] = -1;
      continue;
    }
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
    out.graph.succ[u] = std::move(succ);
  }
  return out;
}

// Naive fixpoint solver. For each value class c = w..1, sweeps over all
// nodes not yet in a higher class, recomputing their class-c label from
// the current successor labels, until a full sweep changes nothing.
// Within a class a node is +c with dtw 1 + min over successors at -c, or
// -c with dtw 1 + max over successors at +c once every successor is at
// least +c. Nodes never labelled are 0. `order` (optional) fixes the sweep
// order; the fixpoint does not depend on it.
inline std::vector<MultiValue> oracle_solve(const GameGraph& g, int w, const std::vector<int>* order = nullptr) {
  const int n = g.size();
  std::vector<MultiValue> lab(n);
  std::vector<int> seq(n);
  std::iota(seq.begin(), seq.end(), 0);
  if (order) {
    if (static_cast<int>(order->size()) != n) throw Error("sweep order has the wrong length");
    seq = *order;
  }
  for (int u = 0; u < n; ++u)
    if (g.terminal[u] && *g.terminal[u] != 0) lab[u] = MultiValue{*g.terminal[u], 0, true};

  const std::uint64_t maxSweeps = 4ull * static_cast<std::uint64_t>(n) + 16;
  for (int c = w; c >= 1; --c) {
    for (std::uint64_t sweep = 0;; ++sweep) {
      if (sweep > maxSweeps) throw Error("oracle did not converge");
      bool changed = false;
      for (int u : seq) {
        if (g.terminal[u]) continue;
        if (lab[u].hasDtw && std::abs(lab[u].value) > c) continue;
        std::optional<int> bestWin, worstLoss;
        bool allAtLeastC = true;
        for (int s : g.succ[u]) {
          const MultiValue& t = lab[s];
          if (!t.hasDtw || t.value < c) allAtLeastC = false;
          if (t.hasDtw && t.value == -c) bestWin = std::min(bestWin.value_or(t.dtw), t.dtw);
          if (t.hasDtw && t.value == c) worstLoss = std::max(worstLoss.value_or(t.dtw), t.dtw);
        }
        MultiValue next{};
        if (bestWin) next = MultiValue{c, *bestWin + 1, true};
        else if (allAtLeastC && worstLoss) next = MultiValue{-c, *worstLoss + 1, true};
        if (!(next == lab[u])) {
          lab[u] = next;
          changed = true;
        }
      }
      if (!changed) break;
    }
  }
  return lab;
}

// Strong values of a reachable morris graph by the oracle.
inline std::vector<StrongValue> oracle_strong(const ReachableGraph& rg, const std::vector<int>* order = nullptr) {
  auto lab = oracle_solve(rg.graph, 1, order);
  std::vector<StrongValue> out(lab.size());
  for (std::size_t u = 0; u < lab.size(); ++u) {
    if (!lab[u].hasDtw) out[u] = StrongValue{Outcome::Draw, 0};
    else out[u] = StrongValue{lab[u].value > 0 ? Outcome::Win : Outcome::Loss, lab[u].dtw};
  }
  return out;
}

// Random cyclic game graph: about `terminalShare` of the nodes are terminal
// with payoffs in [-w, w]; the rest get 1..maxOut distinct successors.
inline GameGraph random_game_graph(std::uint64_t seed, int nodes, int w, int maxOut = 4,
                                   double terminalShare = 0.15) {
  std::mt19937_64 rng(seed);
  GameGraph g;
  g.succ.resize(nodes);
  g.terminal.resize(nodes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> payoff(-w, w);
  std::uniform_int_distribution<int> pick(0, nodes - 1);
  std::uniform_int_distribution<int> degree(1, maxOut);
  for (int u = 0; u < nodes; ++u) {
    if (unit(rng) < terminalShare) {
      g.terminal[u] = payoff(rng);
      continue;
    }
    int k = degree(rng);
    for (int i = 0; i < k; ++i) {
      int v = pick(rng);
      if (v != u && std::find(g.succ[u].begin(), g.succ[u].end(), v) == g.succ[u].end()) g.succ[u].push_back(v);
    }
    if (g.succ[u].empty()) g.succ[u].push_back((u + 1) % nodes);
  }
  return g;
}

}  // namespace mills
