#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

#include "mills/bucket_queue.hpp"
#include "mills/dbstore.hpp"
#include "mills/unit.hpp"

namespace mills {

using DbLoader = std::function<std::shared_ptr<const SubspaceDb>(const SubspaceId&)>;

struct StrongSolveOptions {
  std::uint64_t spillThreshold = 256ull << 20;
  std::filesystem::path scratch = default_scratch_dir();
};

struct StrongUnitResult {
  std::vector<std::vector<std::uint16_t>> codes;  // per primary slot
  std::uint64_t secondaryEntries = 0;
  std::uint64_t primaryPops = 0;
  bool spilled = false;
};

namespace strong_cell {

// bit 15 set: value, low bits hold the record code 1 + 2 dtw + win.
// Otherwise a count; kFrozen marks a terminal draw that is never decremented.
inline constexpr std::uint16_t kValue = 0x8000;
inline constexpr std::uint16_t kFrozen = 0x7fff;
inline constexpr std::uint16_t kMaxCount = 0x7ffe;

inline std::uint16_t value(bool win, int dtw) {
  return static_cast<std::uint16_t>(kValue | (1 + 2 * dtw + (win ? 1 : 0)));
}
inline bool is_value(std::uint16_t c) { return c & kValue; }
inline int dtw_of(std::uint16_t c) { return ((c & 0x7fff) - 1) >> 1; }

}  // namespace strong_cell

// Non-draw entries of the secondaries keyed by dtw, stable by (slot, index).
inline void build_secondary_queue(const std::vector<std::shared_ptr<const SubspaceDb>>& dbs,
                                  BucketQueue<int>& queue) {
  for (unsigned slot = 0; slot < dbs.size(); ++slot) {
    const SubspaceDb& db = *dbs[slot];
    if (db.mode() != SolveMode::Strong)
      throw Error("secondary " + db.subspace().to_string() + " is not a strong database");
    for (std::uint64_t i = 0; i < db.size(); ++i) {
      std::uint16_t code = db.strong_code(i);
      if (code == 0) continue;
      queue.push((code - 1) >> 1, pack_ref(slot, i));
    }
  }
}

// Strong solution of one work unit: every primary position gets win/loss with
// dtw, or draw. Secondary databases must already be solved.
inline StrongUnitResult solve_strong_unit(const UnitSpace& space,
                                          const std::vector<SubspaceId>& secondaries,
                                          const DbLoader& load,
                                          const StrongSolveOptions& opt = {}) {
  namespace sc = strong_cell;
  const BoardDef& board = space.board();
  const RuleFlags& rules = space.rules();
  const std::uint64_t n = space.size();

  std::vector<std::uint16_t> cell(n, 0);
  std::vector<std::uint32_t> fifo;
  fifo.reserve(1024);
  std::vector<std::uint32_t> winSeeds;

  // Pre-initialization, counting, blocked states.
  for (std::uint64_t node = 0; node < n; ++node) {
    Position pos = space.position(node);
    if (rules.fullBoardDraw && board_full(pos, board)) {
      cell[node] = sc::kFrozen;
    } else if (has_winning_capture(pos, board, rules)) {
      cell[node] = sc::value(true, 1);
      winSeeds.push_back(static_cast<std::uint32_t>(node));
    } else {
      int c = successor_count(pos, board, rules, space.indexers());
      if (c > sc::kMaxCount) throw Error("successor count overflow");
      if (c == 0) {
        cell[node] = sc::value(false, 0);
        fifo.push_back(static_cast<std::uint32_t>(node));
      } else {
        cell[node] = static_cast<std::uint16_t>(c);
      }
    }
  }
  fifo.insert(fifo.end(), winSeeds.begin(), winSeeds.end());
  winSeeds = {};

  std::vector<std::shared_ptr<const SubspaceDb>> dbs;
  std::vector<std::shared_ptr<const Indexer>> secIndex;
  for (const auto& s : secondaries) {
    dbs.push_back(load(s));
    if (dbs.back()->size() != space.indexers().get(s)->size())
      throw Error("secondary " + s.to_string() + " has the wrong record count");
    secIndex.push_back(space.indexers().get(s));
  }
  BucketQueue<int> secondary(opt.spillThreshold, opt.scratch);
  build_secondary_queue(dbs, secondary);
  dbs.clear();

  StrongUnitResult res;
  res.secondaryEntries = secondary.size();
  res.spilled = secondary.spilled();

  std::vector<std::uint32_t> scratch;
  auto propagate = [&](const Position& pos, bool win, int dtw) {
    space.for_each_predecessor(pos, scratch, [&](std::uint32_t p) {
      std::uint16_t c = cell[p];
      if (sc::is_value(c) || c == sc::kFrozen) return;
      if (!win) {
        cell[p] = sc::value(true, dtw + 1);
        fifo.push_back(p);
      } else if (--c == 0) {
        cell[p] = sc::value(false, dtw + 1);
        fifo.push_back(p);
      } else {
        cell[p] = c;
      }
    });
  };

  typename BucketQueue<int>::Cursor sec(secondary);
  std::size_t head = 0;
  int last = -1;
  while (!sec.done() || head < fifo.size()) {
    const int primaryKey = head < fifo.size() ? sc::dtw_of(cell[fifo[head]]) : -1;
    const bool takeSecondary = !sec.done() && (head >= fifo.size() || sec.key() <= primaryKey);
    int key;
    Position pos;
    if (takeSecondary) {
      key = sec.key();
      std::uint64_t ref = sec.payload();
      pos = secIndex[ref_slot(ref)]->unrank(ref_index(ref));
      sec.next();
    } else {
      std::uint32_t node = fifo[head++];
      key = primaryKey;
      pos = space.position(node);
      ++res.primaryPops;
    }
    if (key < last) throw Error("internal error: popped dtw decreased");
    last = key;
    propagate(pos, key & 1, key);
  }

  res.codes.resize(space.primaries().size());
  for (int slot = 0; slot < static_cast<int>(space.primaries().size()); ++slot) {
    auto& out = res.codes[slot];
    out.resize(space.slot_size(slot));
    for (std::uint64_t i = 0; i < out.size(); ++i) {
      std::uint16_t c = cell[space.offset(slot) + i];
      out[i] = sc::is_value(c) ? static_cast<std::uint16_t>(c & 0x7fff) : 0;
    }
  }
  return res;
}

}  // namespace mills
