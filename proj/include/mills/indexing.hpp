#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "mills/board.hpp"
#include "mills/subspace.hpp"

namespace mills {

enum class IndexingMode : std::uint8_t { Plain = 0, SymmetryCanonical = 1 };

inline std::string to_string(IndexingMode m) {
  return m == IndexingMode::Plain ? "plain" : "canonical";
}

inline IndexingMode parse_indexing_mode(std::string_view s) {
  if (s == "plain") return IndexingMode::Plain;
  if (s == "canonical" || s == "symmetry") return IndexingMode::SymmetryCanonical;
  throw Error("unknown indexing mode '" + std::string(s) + "'");
}

// Plain index of a (mine, theirs) pair: colex rank of the mover's stones,
// then colex rank of the opponent's stones among the remaining points.
inline std::uint64_t plain_subset_rank(PointSet mine, PointSet theirs, PointSet all,
                                       std::uint64_t theirCount) {
  return colex_rank(mine) * theirCount + colex_rank(extract_bits(theirs, all & ~mine));
}

inline std::uint64_t plain_size(const SubspaceId& s, int points) {
  return binomial(points, s.wb) * binomial(points - s.wb, s.bb);
}

// Bijection between the positions of one subspace and [0, size()).
//
// SymmetryCanonical only addresses positions that are the minimum of their
// orbit under the board's symmetry group, ordered by plain index. Positions
// must be canonicalized before ranking.
class Indexer {
public:
  Indexer(const BoardDef& board, SubspaceId s, IndexingMode mode)
      : board_(&board), sub_(s), mode_(mode) {
    const int n = board.size();
    if (s.wb + s.bb > n || s.wb < 0 || s.bb < 0) throw Error("subspace does not fit the board");
    mineCount_ = binomial(n, s.wb);
    theirCount_ = binomial(n - s.wb, s.bb);
    if (mode == IndexingMode::Plain) {
      size_ = mineCount_ * theirCount_;
    } else {
      build_canonical();
    }
  }

  const SubspaceId& subspace() const { return sub_; }
  IndexingMode mode() const { return mode_; }
  std::uint64_t size() const { return size_; }
  const BoardDef& board() const { return *board_; }

  std::uint64_t plain_rank(PointSet mine, PointSet theirs) const {
    return plain_subset_rank(mine, theirs, board_->all(), theirCount_);
  }

  // Requires a canonical position in SymmetryCanonical mode.
  std::uint64_t rank(const Position& p) const {
    if (mode_ == IndexingMode::Plain) return plain_rank(p.mine, p.theirs);
    std::uint64_t mr = colex_rank(p.mine);
    std::int32_t e = mineEntry_[mr];
    if (e < 0) throw Error("position is not canonical");
    const MineEntry& me = entries_[e];
    std::uint64_t tr = colex_rank(extract_bits(p.theirs, board_->all() & ~p.mine));
    if (me.count == kAll) return me.base + tr;
    auto first = partial_.begin() + me.offset;
    auto last = first + me.count;
    auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(tr));
    if (it == last || *it != tr) throw Error("position is not canonical");
    return me.base + static_cast<std::uint64_t>(it - first);
  }

  Position unrank(std::uint64_t index) const {
    if (index >= size_) throw Error("index " + std::to_string(index) + " out of range for subspace " +
                                    sub_.to_string());
    const int n = board_->size();
    std::uint64_t mr, tr;
    if (mode_ == IndexingMode::Plain) {
      mr = index / theirCount_;
      tr = index % theirCount_;
    } else {
      auto it = std::upper_bound(entries_.begin(), entries_.end(), index,
                                 [](std::uint64_t v, const MineEntry& e) { return v < e.base; });
      const MineEntry& me = *(it - 1);
      mr = me.mineRank;
      std::uint64_t off = index - me.base;
      tr = me.count == kAll ? off : partial_[me.offset + off];
    }
    PointSet mine = colex_unrank(mr, sub_.wb, n);
    PointSet theirs = deposit_bits(colex_unrank(tr, sub_.bb, n - sub_.wb), board_->all() & ~mine);
    return Position{mine, theirs, sub_.wf, sub_.bf};
  }

  // Orbit representative with the smallest plain index (identity in Plain mode).
  Position canonical(const Position& p) const {
    if (mode_ == IndexingMode::Plain) return p;
    return canonicalize(*board_, p);
  }

  // Colex order on equal-size subsets is numeric order of the bitmasks, so
  // images compare without ranking.
  static Position canonicalize(const BoardDef& board, const Position& p) {
    const PointSet all = board.all();
    PointSet bestMine = p.mine;
    PointSet bestTheirs = extract_bits(p.theirs, all & ~p.mine);
    Position best = p;
    for (int s = 1; s < board.symmetry_count(); ++s) {
      PointSet m = board.permute(s, p.mine);
      if (m > bestMine) continue;
      PointSet t = board.permute(s, p.theirs);
      PointSet tx = extract_bits(t, all & ~m);
      if (m < bestMine || tx < bestTheirs) {
        bestMine = m;
        bestTheirs = tx;
        best.mine = m;
        best.theirs = t;
      }
    }
    return best;
  }

  // Canonical-position rank; identical to rank(canonical(p)).
  std::uint64_t canonical_rank(const Position& p) const { return rank(canonical(p)); }

private:
  static constexpr std::uint32_t kAll = 0xffffffffu;

  struct MineEntry {
    std::uint64_t base = 0;
    std::uint32_t mineRank = 0;
    std::uint32_t offset = 0;
    std::uint32_t count = 0;  // kAll when every opponent set is canonical
  };

  void build_canonical() {
    const BoardDef& b = *board_;
    const int n = b.size();
    const PointSet all = b.all();
    const int syms = b.symmetry_count();
    mineEntry_.assign(mineCount_, -1);
    std::vector<int> stab;
    std::uint64_t base = 0;
    for (std::uint64_t mr = 0; mr < mineCount_; ++mr) {
      PointSet m = colex_unrank(mr, sub_.wb, n);
      bool minimal = true;
      stab.clear();
      for (int s = 1; s < syms && minimal; ++s) {
        PointSet img = b.permute(s, m);
        if (img == m) {
          stab.push_back(s);
        } else if (colex_rank(img) < mr) {
          minimal = false;
        }
      }
      if (!minimal) continue;
      MineEntry e;
      e.base = base;
      e.mineRank = static_cast<std::uint32_t>(mr);
      if (stab.empty()) {
        e.count = kAll;
        base += theirCount_;
      } else {
        e.offset = static_cast<std::uint32_t>(partial_.size());
        const PointSet rest = all & ~m;
        for (std::uint64_t tr = 0; tr < theirCount_; ++tr) {
          PointSet t = deposit_bits(colex_unrank(tr, sub_.bb, n - sub_.wb), rest);
          bool keep = true;
          for (int s : stab) {
            if (colex_rank(extract_bits(b.permute(s, t), rest)) < tr) {
              keep = false;
              break;
            }
          }
          if (keep) partial_.push_back(static_cast<std::uint32_t>(tr));
        }
        e.count = static_cast<std::uint32_t>(partial_.size() - e.offset);
        base += e.count;
      }
      mineEntry_[mr] = static_cast<std::int32_t>(entries_.size());
      entries_.push_back(e);
    }
    size_ = base;
  }

  const BoardDef* board_;
  SubspaceId sub_;
  IndexingMode mode_;
  std::uint64_t mineCount_ = 0;
  std::uint64_t theirCount_ = 0;
  std::uint64_t size_ = 0;
  std::vector<std::int32_t> mineEntry_;
  std::vector<MineEntry> entries_;
  std::vector<std::uint32_t> partial_;
};

inline std::uint64_t subspace_size(const SubspaceId& s, const BoardDef& board, IndexingMode mode) {
  if (mode == IndexingMode::Plain) return plain_size(s, board.size());
  return Indexer(board, s, mode).size();
}

// Lazily built, shared indexers. Thread-safe.
class IndexerCache {
public:
  IndexerCache(std::shared_ptr<const BoardDef> board, IndexingMode mode)
      : board_(std::move(board)), mode_(mode) {}

  std::shared_ptr<const Indexer> get(const SubspaceId& s) const {
    std::lock_guard lock(mu_);
    auto it = cache_.find(s);
    if (it != cache_.end()) return it->second;
    auto ix = std::make_shared<const Indexer>(*board_, s, mode_);
    cache_.emplace(s, ix);
    return ix;
  }

  IndexingMode mode() const { return mode_; }
  const BoardDef& board() const { return *board_; }

private:
  std::shared_ptr<const BoardDef> board_;
  IndexingMode mode_;
  mutable std::mutex mu_;
  mutable std::map<SubspaceId, std::shared_ptr<const Indexer>> cache_;
};

}  // namespace mills
