#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mills/dbstore.hpp"
#include "mills/position.hpp"

namespace mills {

inline std::string describe_position(const Position& p, const BoardDef& board) {
  auto names = [&](PointSet s) {
    std::string out;
    for_each_bit(s, [&](int i) {
      if (!out.empty()) out += ',';
      out += board.point_name(i);
    });
    return out.empty() ? std::string("-") : out;
  };
  return "mine=" + names(p.mine) + " theirs=" + names(p.theirs) + " hands=" + std::to_string(p.myHand) +
         "/" + std::to_string(p.theirHand);
}

struct Violation {
  SubspaceId subspace;
  std::uint64_t index = 0;
  std::string detail;
};

struct VerifyReport {
  std::uint64_t checked = 0;
  std::uint64_t violationCount = 0;
  std::vector<Violation> first;  // up to the requested limit

  bool ok() const { return violationCount == 0; }
  std::string summary() const {
    std::ostringstream o;
    o << checked << " positions checked, " << violationCount << " violations";
    return o.str();
  }
};

// ---- strong -----------------------------------------------------------------

// Local consistency of one strong record with its successors. Returns the
// reason for a violation, if any.
inline std::optional<std::string> check_strong_record(const DbSet& dbs, const Position& pos,
                                                      const StrongValue& rec) {
  const BoardDef& board = *dbs.variant().board;
  const RuleFlags& rules = dbs.variant().rules;
  if (rules.fullBoardDraw && board_full(pos, board)) {
    if (rec.outcome != Outcome::Draw) return "full-board terminal draw recorded as " + rec.to_string();
    return std::nullopt;
  }
  const std::vector<Move> moves = legal_moves(pos, board, rules);
  if (moves.empty()) {
    if (!(rec.outcome == Outcome::Loss && rec.dtw == 0))
      return "blocked position recorded as " + rec.to_string();
    return std::nullopt;
  }
  int minLoss = -1;  // smallest dtw among losing successors (mover wins)
  int maxWin = -1;   // largest dtw among winning successors
  bool anyDraw = false, anyWin = false;
  for (const Move& m : moves) {
    Position q = apply_move(pos, m, board, rules);
    StrongValue sv;
    if (q.my_total() < 3) {
      sv = StrongValue{Outcome::Loss, 0};
    } else {
      SubspaceId s = subspace_of(q);
      sv = dbs.get(s)->strong(dbs.index_of(q));
    }
    if (sv.outcome == Outcome::Loss) minLoss = minLoss < 0 ? sv.dtw : std::min(minLoss, sv.dtw);
    else if (sv.outcome == Outcome::Win) {
      anyWin = true;
      maxWin = std::max(maxWin, sv.dtw);
    } else {
      anyDraw = true;
    }
  }
  switch (rec.outcome) {
    case Outcome::Win:
      if (rec.dtw % 2 != 1) return "win with even dtw " + std::to_string(rec.dtw);
      if (minLoss < 0) return "win " + std::to_string(rec.dtw) + " without a losing successor";
      if (minLoss != rec.dtw - 1)
        return "win " + std::to_string(rec.dtw) + " but fastest losing successor is L" + std::to_string(minLoss);
      return std::nullopt;
    case Outcome::Loss:
      if (rec.dtw % 2 != 0) return "loss with odd dtw " + std::to_string(rec.dtw);
      if (minLoss >= 0) return "loss although a successor loses (L" + std::to_string(minLoss) + ")";
      if (anyDraw) return "loss although a successor draws";
      if (!anyWin || maxWin != rec.dtw - 1)
        return "loss " + std::to_string(rec.dtw) + " but slowest winning successor is W" + std::to_string(maxWin);
      return std::nullopt;
    case Outcome::Draw:
      if (minLoss >= 0) return "draw although a successor loses (L" + std::to_string(minLoss) + ")";
      if (!anyDraw) return "draw without a drawing successor";
      return std::nullopt;
  }
  return std::nullopt;
}

// ---- ultra ------------------------------------------------------------------

struct UltraOption {
  int key = 0;  // relative to the mover's subspace; 0 means no dtw
  int dtw = 0;
  friend bool operator==(const UltraOption&, const UltraOption&) = default;
};

// What moving to `q` is worth to the mover of a position in a subspace of
// rank `ownRank`, from the stored record of `q` and its subspace's rank.
inline UltraOption ultra_option(const DbSet& dbs, const Position& q, int ownRank, int winKey) {
  if (q.my_total() < 3) return UltraOption{winKey - ownRank, 1};
  auto db = dbs.get(subspace_of(q));
  UltraRecord r = db->ultra(dbs.index_of(q));
  const int succAbs = r.key + db->header().rank;  // count-states sit at their subspace's rank
  const int rel = -succAbs - ownRank;
  if (rel == 0) return UltraOption{0, 0};
  if (r.is_count()) return UltraOption{rel, 1};
  // The stored dtw belongs to the successor's key; it flips with the key's
  // sign as seen from here.
  const bool flipped = (rel > 0) == (r.key > 0);
  return UltraOption{rel, (flipped ? -r.dtw : r.dtw) + 1};
}

inline bool better_option(const UltraOption& a, const UltraOption& b) {
  if (a.key != b.key) return a.key > b.key;
  if (a.key > 0) return a.dtw < b.dtw;
  if (a.key < 0) return a.dtw > b.dtw;
  return false;
}

// Best reachable option for the mover of `pos`; positive keys prefer small
// dtw, negative keys large dtw. Empty when the mover is blocked.
inline std::optional<UltraOption> best_ultra_option(const DbSet& dbs, const Position& pos, int ownRank,
                                                    int winKey) {
  const BoardDef& board = *dbs.variant().board;
  const RuleFlags& rules = dbs.variant().rules;
  std::optional<UltraOption> best;
  for (const Move& m : legal_moves(pos, board, rules)) {
    UltraOption o = ultra_option(dbs, apply_move(pos, m, board, rules), ownRank, winKey);
    if (!best || better_option(o, *best)) best = o;
  }
  return best;
}

inline std::optional<std::string> check_ultra_record(const DbSet& dbs, const Position& pos, int ownRank,
                                                     int winKey, const UltraRecord& rec) {
  const BoardDef& board = *dbs.variant().board;
  const RuleFlags& rules = dbs.variant().rules;
  auto show = [](const UltraRecord& r) {
    return r.is_count() ? std::string("count-state")
                        : "(" + std::to_string(r.key) + ", " + std::to_string(r.dtw) + ")";
  };
  if (!rec.is_count() && rec.dtw == kNoDtw) return "value-state with the no-dtw sentinel";
  if (rec.is_count() && rec.dtw != kNoDtw) return "count-state with a dtw";
  if (rules.fullBoardDraw && board_full(pos, board)) {
    if (!rec.is_count()) return "full-board terminal draw recorded as " + show(rec);
    return std::nullopt;
  }
  auto best = best_ultra_option(dbs, pos, ownRank, winKey);
  if (!best) {
    UltraRecord want{static_cast<std::int16_t>(-winKey - ownRank), 0};
    if (!(rec == want)) return "blocked position recorded as " + show(rec);
    return std::nullopt;
  }
  if (best->key == 0) {
    if (!rec.is_count()) return "record " + show(rec) + " but best successor option is a count-state";
    return std::nullopt;
  }
  if (rec.key != best->key || rec.dtw != best->dtw)
    return "record " + show(rec) + " but successors give (" + std::to_string(best->key) + ", " +
           std::to_string(best->dtw) + ")";
  return std::nullopt;
}

// ---- drivers ----------------------------------------------------------------

inline std::optional<std::string> check_record(const DbSet& dbs, const SubspaceDb& db, std::uint64_t i) {
  Position pos = dbs.indexers().get(db.subspace())->unrank(i);
  if (db.mode() == SolveMode::Strong) return check_strong_record(dbs, pos, db.strong(i));
  return check_ultra_record(dbs, pos, db.header().rank, db.header().winKey, db.ultra(i));
}

inline void verify_db(const DbSet& dbs, const SubspaceDb& db, VerifyReport& rep, std::size_t keep = 20) {
  const BoardDef& board = *dbs.variant().board;
  if (db.size() != dbs.indexers().get(db.subspace())->size())
    throw Error("database " + db.subspace().to_string() + " has the wrong record count");
  for (std::uint64_t i = 0; i < db.size(); ++i) {
    ++rep.checked;
    auto why = check_record(dbs, db, i);
    if (!why) continue;
    ++rep.violationCount;
    if (rep.first.size() < keep) {
      Position pos = dbs.indexers().get(db.subspace())->unrank(i);
      rep.first.push_back(Violation{db.subspace(), i, *why + " at " + describe_position(pos, board)});
    }
  }
}

// Verifies every database of the set's mode in its directory.
inline VerifyReport verify_all(const DbSet& dbs, std::size_t keep = 20) {
  VerifyReport rep;
  for (const auto& s : dbs.available()) verify_db(dbs, *dbs.get(s), rep, keep);
  return rep;
}

}  // namespace mills
