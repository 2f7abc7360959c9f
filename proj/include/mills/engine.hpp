#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mills/dbstore.hpp"
#include "mills/pipeline.hpp"
#include "mills/verify.hpp"

namespace mills {

// Outcome of a move for the player making it.
struct MoveAnalysis {
  Move move;
  std::string notation;
  StrongValue value;            // dtw counts plies from the position before the move
  std::optional<int> firstKey;  // ultra: absolute first key, mover's perspective
  std::optional<int> keyDtw;    // ultra: second key, sign contract of the relative key
  int relativeKey = 0;          // ultra: firstKey minus the mover's subspace rank
};

struct EngineConfig {
  std::filesystem::path dbDir;
  SolveMode mode = SolveMode::Strong;
  std::uint64_t seed = 1;
};

// Databases of a solve output directory, with its variant and indexing.
inline std::shared_ptr<DbSet> open_db_set(const std::filesystem::path& dir, SolveMode mode) {
  DirVariant dv = load_variant(dir);
  return std::make_shared<DbSet>(dir, dv.variant, mode, dv.indexing);
}

// Perfect player over the databases of one directory.
class Engine {
public:
  explicit Engine(const EngineConfig& cfg) : Engine(open_db_set(cfg.dbDir, cfg.mode), cfg.seed) {}

  Engine(std::shared_ptr<const DbSet> dbs, std::uint64_t seed) : dbs_(std::move(dbs)), rng_(seed) {}

  const DbSet& dbs() const { return *dbs_; }
  const Variant& variant() const { return dbs_->variant(); }
  SolveMode mode() const { return dbs_->mode(); }

  // Every legal move with its value; empty for a blocked or finished position.
  std::vector<MoveAnalysis> analyze(const Position& pos) const {
    const BoardDef& board = *variant().board;
    const RuleFlags& rules = variant().rules;
    std::vector<MoveAnalysis> out;
    if (terminal_value(pos, board, rules)) return out;
    int ownRank = 0, winKey = 0;
    if (mode() == SolveMode::Ultra) {
      auto db = dbs_->get(subspace_of(pos));
      ownRank = db->header().rank;
      winKey = db->header().winKey;
    }
    for (const Move& m : legal_moves(pos, board, rules)) {
      MoveAnalysis a;
      a.move = m;
      a.notation = format_move(m, board);
      Position q = apply_unchecked(pos, m);
      if (mode() == SolveMode::Strong) {
        StrongValue sv = q.my_total() < 3 ? StrongValue{Outcome::Loss, 0}
                                           : dbs_->get(subspace_of(q))->strong(dbs_->index_of(q));
        a.value = mover_view(sv);
      } else {
        UltraOption o = ultra_option(*dbs_, q, ownRank, winKey);
        a.relativeKey = o.key;
        a.firstKey = o.key + ownRank;
        if (o.key != 0) a.keyDtw = o.dtw;
        if (*a.firstKey == winKey) a.value = StrongValue{Outcome::Win, o.dtw};
        else if (*a.firstKey == -winKey) a.value = StrongValue{Outcome::Loss, o.dtw};
        else a.value = StrongValue{Outcome::Draw, 0};
      }
      out.push_back(std::move(a));
    }
    return out;
  }

  // True if a is strictly preferable to b.
  bool better(const MoveAnalysis& a, const MoveAnalysis& b) const {
    if (mode() == SolveMode::Ultra)
      return better_option(UltraOption{a.relativeKey, a.keyDtw.value_or(0)},
                           UltraOption{b.relativeKey, b.keyDtw.value_or(0)});
    return strong_better(a.value, b.value);
  }

  // Optimal moves (ties included).
  std::vector<MoveAnalysis> best_moves(const Position& pos) const {
    auto all = analyze(pos);
    std::vector<MoveAnalysis> best;
    for (auto& a : all) {
      if (!best.empty() && better(best.front(), a)) continue;
      if (!best.empty() && better(a, best.front())) best.clear();
      best.push_back(std::move(a));
    }
    return best;
  }

  // One optimal move, ties broken by the seeded generator.
  Move choose(const Position& pos) {
    auto best = best_moves(pos);
    if (best.empty()) throw Error("no legal move to choose");
    std::uniform_int_distribution<std::size_t> pick(0, best.size() - 1);
    return best[pick(rng_)].move;
  }

  static bool strong_better(const StrongValue& a, const StrongValue& b) {
    auto tier = [](Outcome o) { return o == Outcome::Win ? 2 : o == Outcome::Draw ? 1 : 0; };
    if (tier(a.outcome) != tier(b.outcome)) return tier(a.outcome) > tier(b.outcome);
    if (a.outcome == Outcome::Win) return a.dtw < b.dtw;
    if (a.outcome == Outcome::Loss) return a.dtw > b.dtw;
    return false;
  }

  // Value for the mover of a move whose successor has value `succ`.
  static StrongValue mover_view(const StrongValue& succ) {
    switch (succ.outcome) {
      case Outcome::Win: return StrongValue{Outcome::Loss, succ.dtw + 1};
      case Outcome::Loss: return StrongValue{Outcome::Win, succ.dtw + 1};
      case Outcome::Draw: break;
    }
    return StrongValue{Outcome::Draw, 0};
  }

private:
  std::shared_ptr<const DbSet> dbs_;
  std::mt19937_64 rng_;
};

}  // namespace mills
