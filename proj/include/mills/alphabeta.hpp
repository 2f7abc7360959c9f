#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "mills/position.hpp"

namespace mills {

struct AbWeights {
  int stoneRatio = 10;
  int mobility = 1;
  int fourNeighborPoints = 2;
};

struct AbConfig {
  std::uint64_t nodeBudget = 20000;
  std::uint64_t seed = 1;
  std::size_t ttEntries = std::size_t{1} << 16;  // rounded down to a power of two
  int maxDepth = 64;
  AbWeights weights;
};

struct AbResult {
  Move move;
  int score = 0;
  int depth = 0;  // deepest completed iteration
  std::uint64_t nodes = 0;
};

// Iterative-deepening negamax alpha-beta with a transposition table,
// enhanced transposition cutoffs and two killer moves per ply. Stops once
// the node count passes the budget and returns the best move of the last
// completed iteration.
class AlphaBeta {
public:
  static constexpr int kMate = 1000000;

  AlphaBeta(const BoardDef& board, const RuleFlags& rules, AbConfig cfg)
      : board_(&board), rules_(rules), cfg_(cfg) {
    if (cfg_.nodeBudget == 0) throw Error("node budget must be positive");
    std::size_t n = 1;
    while (n * 2 <= std::max<std::size_t>(cfg_.ttEntries, 1)) n *= 2;
    tt_.assign(n, TtEntry{});
    std::mt19937_64 rng(cfg_.seed);
    for (auto& t : zMine_) t = rng();
    for (auto& t : zTheirs_) t = rng();
    for (auto& t : zHand_) t = rng();
    for (int p = 0; p < board.size(); ++p)
      if (popcount(board.neighbors(p)) >= 4) fourPoints_ |= bit(p);
  }

  // Static evaluation from the mover's perspective.
  int evaluate(const Position& p) const {
    const int my = p.my_total(), their = p.their_total();
    const int ratio = (100 * (my - their)) / std::max(1, my + their);
    const int mobility = slides(p.mine, p.occupied()) - slides(p.theirs, p.occupied());
    const int four = popcount(p.mine & fourPoints_) - popcount(p.theirs & fourPoints_);
    return cfg_.weights.stoneRatio * ratio + cfg_.weights.mobility * mobility +
           cfg_.weights.fourNeighborPoints * four;
  }

  AbResult search(const Position& root) {
    // Fresh tables per search keep results independent of earlier calls.
    nodes_ = 0;
    aborted_ = false;
    std::fill(tt_.begin(), tt_.end(), TtEntry{});
    for (auto& k : killers_) k = {Move{}, Move{}};
    path_.clear();
    std::vector<Move> moves = legal_moves(root, *board_, rules_);
    if (moves.empty()) throw Error("no legal move to search");
    // Seeded root order so equal scores resolve reproducibly per seed.
    std::mt19937_64 rng(cfg_.seed ^ hash(root));
    std::shuffle(moves.begin(), moves.end(), rng);

    AbResult res;
    res.move = moves.front();
    for (int depth = 1; depth <= cfg_.maxDepth; ++depth) {
      int alpha = -kMate - 1, beta = kMate + 1;
      Move bestMove = moves.front();
      int best = -kMate - 1;
      path_.push_back(hash(root));
      for (const Move& m : moves) {
        int v = -negamax(apply_unchecked(root, m), depth - 1, -beta, -alpha, 1);
        if (aborted_) break;
        if (v > best) {
          best = v;
          bestMove = m;
        }
        alpha = std::max(alpha, v);
      }
      path_.pop_back();
      if (aborted_) break;
      res.move = bestMove;
      res.score = best;
      res.depth = depth;
      // Best move first in the next iteration.
      std::iter_swap(moves.begin(), std::find(moves.begin(), moves.end(), bestMove));
      if (best >= kMate - depth || best <= -kMate + depth) break;
    }
    res.nodes = nodes_;
    return res;
  }

private:
  enum class Bound : std::uint8_t { None, Exact, Lower, Upper };
  struct TtEntry {
    std::uint64_t key = 0;
    int score = 0;
    std::int16_t depth = -1;
    Bound bound = Bound::None;
    Move best;
  };

  int slides(PointSet own, PointSet occ) const {
    int n = 0;
    for_each_bit(own, [&](int p) { n += popcount(board_->neighbors(p) & ~occ & board_->all()); });
    return n;
  }

  std::uint64_t hash(const Position& p) const {
    std::uint64_t h = 0;
    for_each_bit(p.mine, [&](int i) { h ^= zMine_[i]; });
    for_each_bit(p.theirs, [&](int i) { h ^= zTheirs_[i]; });
    h ^= zHand_[(p.myHand & 15) * 16 + (p.theirHand & 15)];
    return h;
  }

  TtEntry* probe(std::uint64_t key) {
    TtEntry& e = tt_[key & (tt_.size() - 1)];
    return e.key == key && e.bound != Bound::None ? &e : nullptr;
  }

  int negamax(const Position& p, int depth, int alpha, int beta, int ply) {
    if (++nodes_ > cfg_.nodeBudget) {
      aborted_ = true;
      return 0;
    }
    if (p.my_total() < 3) return -kMate + ply;
    if (rules_.fullBoardDraw && board_full(p, *board_)) return 0;
    const std::uint64_t key = hash(p);
    if (std::find(path_.begin(), path_.end(), key) != path_.end()) return 0;  // repetition

    std::vector<Move> moves = legal_moves(p, *board_, rules_);
    if (moves.empty()) return -kMate + ply;
    if (depth <= 0) return evaluate(p);

    const int alpha0 = alpha;
    Move ttMove{};
    bool haveTtMove = false;
    if (TtEntry* e = probe(key)) {
      ttMove = e->best;
      haveTtMove = true;
      if (e->depth >= depth) {
        if (e->bound == Bound::Exact) return e->score;
        if (e->bound == Bound::Lower && e->score >= beta) return e->score;
        if (e->bound == Bound::Upper && e->score <= alpha) return e->score;
      }
    }

    // Enhanced transposition cutoff: a child already known to refute.
    if (depth >= 2) {
      for (const Move& m : moves) {
        if (TtEntry* c = probe(hash(apply_unchecked(p, m)))) {
          if (c->depth >= depth - 1 && (c->bound == Bound::Exact || c->bound == Bound::Upper) &&
              -c->score >= beta)
            return -c->score;
        }
      }
    }

    // Order: table move, killers, captures, the rest.
    auto& killers = killers_[std::min<std::size_t>(ply, killers_.size() - 1)];
    auto score_of = [&](const Move& m) {
      if (haveTtMove && m == ttMove) return 4;
      if (m == killers[0]) return 3;
      if (m == killers[1]) return 2;
      return m.is_capture() ? 1 : 0;
    };
    std::stable_sort(moves.begin(), moves.end(),
                     [&](const Move& a, const Move& b) { return score_of(a) > score_of(b); });

    path_.push_back(key);
    int best = -kMate - 1;
    Move bestMove = moves.front();
    for (const Move& m : moves) {
      int v = -negamax(apply_unchecked(p, m), depth - 1, -beta, -alpha, ply + 1);
      if (aborted_) {
        path_.pop_back();
        return 0;
      }
      if (v > best) {
        best = v;
        bestMove = m;
      }
      alpha = std::max(alpha, v);
      if (alpha >= beta) {
        if (!m.is_capture() && !(m == killers[0])) {
          killers[1] = killers[0];
          killers[0] = m;
        }
        break;
      }
    }
    path_.pop_back();

    TtEntry& slot = tt_[key & (tt_.size() - 1)];
    if (slot.depth <= depth || slot.key != key) {
      slot.key = key;
      slot.score = best;
      slot.depth = static_cast<std::int16_t>(depth);
      slot.bound = best <= alpha0 ? Bound::Upper : best >= beta ? Bound::Lower : Bound::Exact;
      slot.best = bestMove;
    }
    return best;
  }

  const BoardDef* board_;
  RuleFlags rules_;
  AbConfig cfg_;
  std::vector<TtEntry> tt_;
  std::array<std::uint64_t, kMaxPoints> zMine_{}, zTheirs_{};
  std::array<std::uint64_t, 256> zHand_{};
  PointSet fourPoints_ = 0;
  std::array<std::array<Move, 2>, 128> killers_{};
  std::vector<std::uint64_t> path_;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
};

}  // namespace mills
