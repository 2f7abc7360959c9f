#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <tuple>
#include <vector>

#include "mills/bucket_queue.hpp"
#include "mills/common.hpp"

namespace mills {

// key == 0: count-state; aux is the number of unprocessed successors, or
// kFrozenCount for a terminal 0 that is never decremented.
// key != 0: value-state; aux is the dtw.
struct MultiCell {
  std::int16_t key = 0;
  std::int16_t aux = 0;
};

inline constexpr std::int16_t kFrozenCount = -1;

// Queue order: larger |key| first, then smaller dtw, then smaller key. The
// sign tie-break only keeps buckets apart; entries equal in (|key|, dtw) may
// be processed in any order.
struct MultiKey {
  int negAbs = 0;
  int dtw = 0;
  int key = 0;

  static MultiKey of(int key, int dtw) { return MultiKey{-std::abs(key), dtw, key}; }
  friend bool operator==(const MultiKey&, const MultiKey&) = default;
  friend bool operator<(const MultiKey& a, const MultiKey& b) {
    return std::tie(a.negAbs, a.dtw, a.key) < std::tie(b.negAbs, b.dtw, b.key);
  }
  bool before_class(const MultiKey& o) const { return std::tie(negAbs, dtw) < std::tie(o.negAbs, o.dtw); }
};

using MultiQueue = BucketQueue<MultiKey>;

// Payload slot reserved for primary nodes seeded through the sorted stream.
inline constexpr unsigned kSeedSlot = 0xff;

inline std::uint64_t pack_seed(std::uint64_t node) { return pack_ref(kSeedSlot, node); }

struct MultiRunStats {
  std::uint64_t streamPops = 0;
  std::uint64_t primaryPops = 0;
};

inline std::int16_t checked_i16(int v, const char* what) {
  if (v <= std::numeric_limits<std::int16_t>::min() || v > std::numeric_limits<std::int16_t>::max())
    throw Error(std::string(what) + " out of 16-bit range");
  return static_cast<std::int16_t>(v);
}

// Two-queue multi-valued propagation. `stream` holds seeds and secondary
// entries in MultiKey order; primaries resolved on the way go to a FIFO,
// which stays sorted by (|key|, dtw) because each value class only produces
// its own class with dtw + 1.
//
// Graph:
//   for_each_predecessor_of_ref(payload, f)  predecessors of a stream entry
//   for_each_predecessor_of_node(node, f)    predecessors of a primary node
template <class Graph>
MultiRunStats run_multi(Graph& g, std::vector<MultiCell>& cell, MultiQueue& stream) {
  MultiRunStats st;
  std::vector<std::uint32_t> fifo;
  std::size_t head = 0;
  MultiQueue::Cursor sec(stream);
  std::optional<MultiKey> last;

  auto relax = [&](int k, int d) {
    return [&, k, d](std::uint32_t p) {
      MultiCell& c = cell[p];
      if (c.key != 0 || c.aux == kFrozenCount) return;
      if (k < 0) {
        c = MultiCell{checked_i16(-k, "key"), checked_i16(d + 1, "dtw")};
        fifo.push_back(p);
      } else if (--c.aux == 0) {
        c = MultiCell{checked_i16(-k, "key"), checked_i16(d + 1, "dtw")};
        fifo.push_back(p);
      }
    };
  };

  while (!sec.done() || head < fifo.size()) {
    std::optional<MultiKey> pk;
    if (head < fifo.size()) {
      const MultiCell& c = cell[fifo[head]];
      pk = MultiKey::of(c.key, c.aux);
    }
    const bool takeStream = !sec.done() && (!pk || !(*pk < sec.key()));
    MultiKey key = takeStream ? sec.key() : *pk;
    if (last && key.before_class(*last)) throw Error("internal error: popped key decreased");
    last = key;
    if (takeStream) {
      std::uint64_t ref = sec.payload();
      sec.next();
      ++st.streamPops;
      g.for_each_predecessor_of_ref(ref, relax(key.key, key.dtw));
    } else {
      std::uint32_t node = fifo[head++];
      ++st.primaryPops;
      g.for_each_predecessor_of_node(node, relax(key.key, key.dtw));
    }
  }
  return st;
}

// ---- explicit game graphs ---------------------------------------------------

// Node values are from the perspective of the player to move at the node.
// Terminal nodes carry a payoff and have no successors.
struct GameGraph {
  std::vector<std::vector<int>> succ;
  std::vector<std::optional<int>> terminal;

  int size() const { return static_cast<int>(succ.size()); }
};

// Value 0 with hasDtw false is a residual count-state (implicit 0).
struct MultiValue {
  int value = 0;
  int dtw = 0;
  bool hasDtw = false;

  friend bool operator==(const MultiValue&, const MultiValue&) = default;
};

namespace detail {

struct ExplicitGraph {
  const std::vector<std::vector<int>>* pred;
  template <class F>
  void for_each_predecessor_of_ref(std::uint64_t ref, F&& f) {
    for_each_predecessor_of_node(static_cast<std::uint32_t>(ref_index(ref)), f);
  }
  template <class F>
  void for_each_predecessor_of_node(std::uint32_t node, F&& f) {
    for (int p : (*pred)[node]) f(static_cast<std::uint32_t>(p));
  }
};

}  // namespace detail

// Multi-valued retrograde analysis over an explicit graph with payoffs in
// [-w, w]. Successor lists must be duplicate-free.
inline std::vector<MultiValue> solve_multi(const GameGraph& g, int w) {
  if (w < 1) throw Error("w must be at least 1");
  const int n = g.size();
  if (static_cast<int>(g.terminal.size()) != n) throw Error("terminal list size mismatch");
  std::vector<std::vector<int>> pred(n);
  std::vector<MultiCell> cell(n);
  MultiQueue stream;
  for (int u = 0; u < n; ++u) {
    if (g.terminal[u]) {
      int v = *g.terminal[u];
      if (v < -w || v > w) throw Error("terminal payoff out of range at node " + std::to_string(u));
      if (!g.succ[u].empty()) throw Error("terminal node " + std::to_string(u) + " has successors");
      if (v == 0) {
        cell[u] = MultiCell{0, kFrozenCount};
      } else {
        cell[u] = MultiCell{static_cast<std::int16_t>(v), 0};
        stream.push(MultiKey::of(v, 0), pack_seed(u));
      }
      continue;
    }
    if (g.succ[u].empty()) throw Error("non-terminal node " + std::to_string(u) + " has no moves");
    cell[u] = MultiCell{0, checked_i16(static_cast<int>(g.succ[u].size()), "out-degree")};
    for (int v : g.succ[u]) pred[v].push_back(u);
  }
  detail::ExplicitGraph eg{&pred};
  run_multi(eg, cell, stream);
  std::vector<MultiValue> out(n);
  for (int u = 0; u < n; ++u)
    if (cell[u].key != 0) out[u] = MultiValue{cell[u].key, cell[u].aux, true};
  return out;
}

}  // namespace mills
