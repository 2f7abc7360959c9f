#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <vector>

#include "mills/edges.hpp"
#include "mills/indexing.hpp"
#include "mills/rules.hpp"
#include "mills/subspace.hpp"

namespace mills {

// The primary subspaces of one work unit laid out in one array of nodes:
// node = offset[slot] + index.
class UnitSpace {
public:
  UnitSpace(const Variant& v, std::vector<SubspaceId> primaries, const IndexerCache& indexers)
      : variant_(&v), indexers_(&indexers), primaries_(std::move(primaries)) {
    std::uint64_t off = 0;
    for (const auto& s : primaries_) {
      auto ix = indexers.get(s);
      index_.push_back(ix);
      offset_.push_back(off);
      off += ix->size();
    }
    offset_.push_back(off);
    if (off > 0xffffffffull) throw Error("work unit too large for 32-bit node ids");
  }

  const Variant& variant() const { return *variant_; }
  const BoardDef& board() const { return *variant_->board; }
  const RuleFlags& rules() const { return variant_->rules; }
  const IndexerCache& indexers() const { return *indexers_; }
  const std::vector<SubspaceId>& primaries() const { return primaries_; }
  std::uint64_t size() const { return offset_.back(); }
  std::uint64_t offset(int slot) const { return offset_[slot]; }
  std::uint64_t slot_size(int slot) const { return offset_[slot + 1] - offset_[slot]; }
  bool canonical() const { return indexers_->mode() == IndexingMode::SymmetryCanonical; }

  int slot_of(const SubspaceId& s) const {
    for (int i = 0; i < static_cast<int>(primaries_.size()); ++i)
      if (primaries_[i] == s) return i;
    return -1;
  }
  int slot_of_node(std::uint64_t node) const { return node >= offset_[1] ? 1 : 0; }

  Position position(std::uint64_t node) const {
    int slot = slot_of_node(node);
    return index_[slot]->unrank(node - offset_[slot]);
  }

  // Primary nodes with a move to `pos`, each reported once.
  template <class F>
  void for_each_predecessor(const Position& pos, std::vector<std::uint32_t>& scratch, F&& f) const {
    scratch.clear();
    for_each_predecessor_position(pos, board(), rules(), [&](const Position& p) {
      int slot = slot_of(subspace_of(p));
      if (slot < 0) return;
      scratch.push_back(static_cast<std::uint32_t>(offset_[slot] + index_[slot]->canonical_rank(p)));
    });
    if (canonical() && scratch.size() > 1) {
      std::sort(scratch.begin(), scratch.end());
      scratch.erase(std::unique(scratch.begin(), scratch.end()), scratch.end());
    }
    for (std::uint32_t n : scratch) f(n);
  }

private:
  const Variant* variant_;
  const IndexerCache* indexers_;
  std::vector<SubspaceId> primaries_;
  std::vector<std::shared_ptr<const Indexer>> index_;
  std::vector<std::uint64_t> offset_;
};

// Number of distinct non-terminal successors.
inline int successor_count(const Position& pos, const BoardDef& board, const RuleFlags& rules,
                           const IndexerCache& indexers) {
  if (indexers.mode() == IndexingMode::Plain) {
    int n = 0;
    for_each_move(pos, board, rules, [&](const Move& m) {
      if (apply_unchecked(pos, m).my_total() >= 3) ++n;
    });
    return n;
  }
  int n = 0;
  for (const Edge& e : successors(pos, board, rules, indexers)) n += !e.terminalWin;
  return n;
}

}  // namespace mills
