#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "mills/indexing.hpp"
#include "mills/rules.hpp"
#include "mills/subspace.hpp"

namespace mills {

// A start (i, j): empty board, the first mover holds i stones, the other j.
struct Start {
  int first = 9;
  int second = 9;
  SubspaceId subspace() const { return SubspaceId{0, 0, first, second}; }
};

// Symbolic move routing between subspaces. Each quadruple that some legal
// move of some position of `s` can reach, seen from the next mover; subspaces
// where the opponent drops below three stones are terminal and omitted.
struct Routing {
  std::vector<SubspaceId> targets;
  bool shiftsToNegation = false;  // a non-capturing shift exists
};

inline Routing route(const SubspaceId& s, const BoardDef& board, const RuleFlags& rules) {
  Routing r;
  const int n = board.size();
  const bool hasEdge = !board.adjacency().empty();
  auto add = [&](SubspaceId t) {
    if (t.bb + t.wb > n) return;  // unreachable geometry
    if (t.wb + t.wf < 3) return;  // the opponent is out: terminal win
    if (!is_valid_subspace(t, n, rules)) return;
    if (std::find(r.targets.begin(), r.targets.end(), t) == r.targets.end()) r.targets.push_back(t);
  };
  const int empty = n - s.wb - s.bb;
  if (s.wf > 0 && empty > 0) {
    add(SubspaceId{s.bb, s.wb + 1, s.bf, s.wf - 1});
    if (s.wb + 1 >= 3 && s.bb >= 1) add(SubspaceId{s.bb - 1, s.wb + 1, s.bf, s.wf - 1});
  }
  const bool mayMove = s.wf == 0 || rules.laskerPlacement;
  const bool flies = rules.flyingAtThree && s.wf == 0 && s.wb == 3;
  if (mayMove && s.wb > 0 && empty > 0 && (hasEdge || flies)) {
    SubspaceId t{s.bb, s.wb, s.bf, s.wf};
    if (is_valid_subspace(t, n, rules)) r.shiftsToNegation = true;
    add(t);
    if (s.wb >= 3 && s.bb >= 1) add(SubspaceId{s.bb - 1, s.wb, s.bf, s.wf});
  }
  return r;
}

struct WorkUnit {
  std::vector<SubspaceId> subspaces;  // one, or {s, negate(s)}
  bool transient = false;
  bool esc = false;

  std::string name() const {
    std::string out = subspaces[0].to_string();
    if (subspaces.size() > 1) out += "|" + subspaces[1].to_string();
    return out;
  }
  bool contains(const SubspaceId& s) const {
    return std::find(subspaces.begin(), subspaces.end(), s) != subspaces.end();
  }
};

// Units with arcs u -> v when a move from u lands in v (v != u).
struct UnitDag {
  std::vector<WorkUnit> units;
  std::vector<std::vector<int>> arcs;
  std::map<SubspaceId, int> unitOf;

  // Secondary subspaces of a unit: successor subspaces outside it.
  std::vector<SubspaceId> secondaries(int u, const BoardDef& board, const RuleFlags& rules) const {
    std::set<SubspaceId> out;
    for (const auto& s : units[u].subspaces)
      for (const auto& t : route(s, board, rules).targets)
        if (!units[u].contains(t)) out.insert(t);
    return {out.begin(), out.end()};
  }

  std::vector<SubspaceId> all_subspaces() const {
    std::vector<SubspaceId> out;
    for (const auto& [s, u] : unitOf) out.push_back(s);
    return out;
  }

  // Longest distance to a sink; sinks are level 0.
  std::vector<int> levels() const {
    std::vector<int> level(units.size(), -1);
    std::vector<int> stack;
    for (int root = 0; root < static_cast<int>(units.size()); ++root) {
      if (level[root] >= 0) continue;
      // Iterative post-order; the graph is acyclic by construction.
      std::vector<std::pair<int, std::size_t>> st{{root, 0}};
      std::vector<char> onStack(units.size(), 0);
      onStack[root] = 1;
      while (!st.empty()) {
        auto& [u, i] = st.back();
        if (i < arcs[u].size()) {
          int v = arcs[u][i++];
          if (level[v] >= 0) continue;
          if (onStack[v]) throw Error("work unit graph has a cycle through " + units[v].name());
          onStack[v] = 1;
          st.push_back({v, 0});
          continue;
        }
        int l = 0;
        for (int v : arcs[u]) l = std::max(l, level[v] + 1);
        level[u] = l;
        onStack[u] = 0;
        st.pop_back();
      }
    }
    return level;
  }
};

// Closure of the given root subspaces under move routing, grouped into units.
inline UnitDag build_dag_from(const std::vector<SubspaceId>& roots, const BoardDef& board,
                              const RuleFlags& rules) {
  if (roots.empty()) throw Error("no start subspaces given");
  std::map<SubspaceId, Routing> seen;
  std::vector<SubspaceId> todo;
  for (const auto& s : roots) {
    if (!is_valid_subspace(s, board.size(), rules))
      throw Error("invalid subspace " + s.to_string() + " for these rules");
    if (!seen.count(s)) {
      seen.emplace(s, Routing{});
      todo.push_back(s);
    }
  }
  while (!todo.empty()) {
    SubspaceId s = todo.back();
    todo.pop_back();
    Routing r = route(s, board, rules);
    for (const auto& t : r.targets)
      if (!seen.count(t)) {
        seen.emplace(t, Routing{});
        todo.push_back(t);
      }
    seen[s] = std::move(r);
  }

  UnitDag dag;
  for (const auto& [s, r] : seen) {
    if (dag.unitOf.count(s)) continue;
    WorkUnit u;
    u.subspaces.push_back(s);
    u.esc = s.is_esc();
    const SubspaceId neg = s.negate();
    bool backAndForth = false;
    if (!u.esc && r.shiftsToNegation) {
      auto it = seen.find(neg);
      backAndForth = it != seen.end() && it->second.shiftsToNegation;
    }
    if (backAndForth) {
      u.subspaces.push_back(neg);
    }
    u.transient = !(u.esc ? r.shiftsToNegation : backAndForth);
    int id = static_cast<int>(dag.units.size());
    for (const auto& m : u.subspaces) dag.unitOf[m] = id;
    dag.units.push_back(std::move(u));
  }
  dag.arcs.resize(dag.units.size());
  for (const auto& [s, r] : seen) {
    int u = dag.unitOf[s];
    for (const auto& t : r.targets) {
      int v = dag.unitOf.at(t);
      if (v != u && std::find(dag.arcs[u].begin(), dag.arcs[u].end(), v) == dag.arcs[u].end())
        dag.arcs[u].push_back(v);
    }
  }
  for (auto& a : dag.arcs) std::sort(a.begin(), a.end());
  dag.levels();  // rejects cycles
  return dag;
}

inline UnitDag build_dag(const std::vector<Start>& starts, const BoardDef& board,
                         const RuleFlags& rules) {
  if (starts.empty()) throw Error("empty start set");
  std::vector<SubspaceId> roots;
  for (const auto& st : starts) {
    if (st.first < 3 || st.second < 3) throw Error("each start needs at least three stones per side");
    roots.push_back(st.subspace());
  }
  return build_dag_from(roots, board, rules);
}

// Bytes per in-memory record, by solve mode.
inline constexpr std::uint64_t kStrongCellBytes = 2;
inline constexpr std::uint64_t kMultiCellBytes = 4;
inline constexpr double kMemorySafety = 1.25;

// Cells plus FIFO slots for the primaries, packed queue entries for the
// secondaries, times the safety factor.
inline std::uint64_t unit_memory_estimate(const UnitDag& dag, int u, const BoardDef& board,
                                          const RuleFlags& rules, std::uint64_t cellBytes) {
  std::uint64_t primary = 0;
  for (const auto& s : dag.units[u].subspaces) primary += plain_size(s, board.size());
  std::uint64_t secondary = 0;
  for (const auto& s : dag.secondaries(u, board, rules)) secondary += plain_size(s, board.size());
  double bytes = static_cast<double>(primary * (cellBytes + 4) + secondary * 8) * kMemorySafety;
  return static_cast<std::uint64_t>(bytes);
}

struct Plan {
  std::vector<std::vector<int>> waves;  // units per wave, executed in order
  std::vector<std::uint64_t> estimates;
};

// Sinks first. Units in one wave never reach each other: they share a level.
inline Plan schedule(const UnitDag& dag, int workers, std::uint64_t memBudget,
                     const BoardDef& board, const RuleFlags& rules,
                     std::uint64_t cellBytes = kStrongCellBytes) {
  if (workers < 1) throw Error("need at least one worker");
  Plan plan;
  plan.estimates.resize(dag.units.size());
  for (int u = 0; u < static_cast<int>(dag.units.size()); ++u) {
    plan.estimates[u] = unit_memory_estimate(dag, u, board, rules, cellBytes);
    if (plan.estimates[u] > memBudget)
      throw Error("work unit " + dag.units[u].name() + " needs an estimated " +
                  std::to_string(plan.estimates[u]) + " bytes, over the budget of " +
                  std::to_string(memBudget));
  }
  std::vector<int> level = dag.levels();
  int maxLevel = level.empty() ? -1 : *std::max_element(level.begin(), level.end());
  for (int l = 0; l <= maxLevel; ++l) {
    std::vector<int> members;
    for (int u = 0; u < static_cast<int>(level.size()); ++u)
      if (level[u] == l) members.push_back(u);
    std::vector<int> wave;
    std::uint64_t used = 0;
    for (int u : members) {
      if (!wave.empty() &&
          (static_cast<int>(wave.size()) >= workers || used + plan.estimates[u] > memBudget)) {
        plan.waves.push_back(wave);
        wave.clear();
        used = 0;
      }
      wave.push_back(u);
      used += plan.estimates[u];
    }
    if (!wave.empty()) plan.waves.push_back(wave);
  }
  return plan;
}

}  // namespace mills
