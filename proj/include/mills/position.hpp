#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "mills/board.hpp"
#include "mills/rules.hpp"

namespace mills {

// Always seen from the player to move: `mine` belongs to the mover.
struct Position {
  PointSet mine = 0;
  PointSet theirs = 0;
  int myHand = 0;
  int theirHand = 0;

  int my_total() const { return popcount(mine) + myHand; }
  int their_total() const { return popcount(theirs) + theirHand; }
  PointSet occupied() const { return mine | theirs; }

  // The same position with the roles of the players exchanged.
  Position swapped() const { return Position{theirs, mine, theirHand, myHand}; }

  friend bool operator==(const Position&, const Position&) = default;
};

enum class MoveKind : std::uint8_t { Place, Shift, Fly };

struct Move {
  MoveKind kind = MoveKind::Place;
  int from = -1;
  int to = -1;
  int capture = -1;

  bool is_capture() const { return capture >= 0; }
  // Neither places nor captures a stone.
  bool is_quiet() const { return kind != MoveKind::Place && capture < 0; }

  friend bool operator==(const Move&, const Move&) = default;
  friend auto operator<=>(const Move& a, const Move& b) {
    return std::tie(a.kind, a.from, a.to, a.capture) <=> std::tie(b.kind, b.from, b.to, b.capture);
  }
};

enum class Terminal { Loss, Draw };

// Opponent stones the mover may take after closing a mill. Empty when nothing
// can be taken (no stones on the board, or all protected with the flag off).
inline PointSet capture_targets(PointSet theirs, const BoardDef& board, const RuleFlags& rules) {
  PointSet free = theirs & ~board.in_mills(theirs);
  if (free) return free;
  return rules.captureFromMillWhenAllInMills ? theirs : 0;
}

inline bool is_flying(const Position& pos, const RuleFlags& rules) {
  return rules.flyingAtThree && pos.myHand == 0 && popcount(pos.mine) == 3;
}

inline bool can_place(const Position& pos) { return pos.myHand > 0; }

inline bool can_move_stones(const Position& pos, const RuleFlags& rules) {
  return pos.myHand == 0 || rules.laskerPlacement;
}

// Enumerates every legal move. A mill-closing move is expanded into one move
// per legal capture target.
template <class F>
void for_each_move(const Position& pos, const BoardDef& board, const RuleFlags& rules, F&& f) {
  const PointSet empty = board.all() & ~pos.occupied();
  auto emit = [&](MoveKind kind, int from, int to, PointSet newMine) {
    if (board.closes_mill(to, newMine)) {
      PointSet targets = capture_targets(pos.theirs, board, rules);
      if (targets) {
        for_each_bit(targets, [&](int c) { f(Move{kind, from, to, c}); });
        return;
      }
    }
    f(Move{kind, from, to, -1});
  };
  if (can_place(pos)) {
    for_each_bit(empty, [&](int to) { emit(MoveKind::Place, -1, to, pos.mine | bit(to)); });
  }
  if (can_move_stones(pos, rules)) {
    const bool fly = is_flying(pos, rules);
    for_each_bit(pos.mine, [&](int from) {
      PointSet dests = fly ? empty : (board.neighbors(from) & empty);
      for_each_bit(dests, [&](int to) {
        emit(fly ? MoveKind::Fly : MoveKind::Shift, from, to, pos.mine ^ bit(from) ^ bit(to));
      });
    });
  }
}

inline std::vector<Move> legal_moves(const Position& pos, const BoardDef& board,
                                     const RuleFlags& rules) {
  std::vector<Move> out;
  for_each_move(pos, board, rules, [&](const Move& m) { out.push_back(m); });
  return out;
}

inline int count_moves(const Position& pos, const BoardDef& board, const RuleFlags& rules) {
  int n = 0;
  for_each_move(pos, board, rules, [&](const Move&) { ++n; });
  return n;
}

// Successor seen from the next mover. No legality checks.
inline Position apply_unchecked(const Position& pos, const Move& m) {
  PointSet mine = pos.mine;
  int hand = pos.myHand;
  if (m.kind == MoveKind::Place) {
    --hand;
  } else {
    mine ^= bit(m.from);
  }
  mine |= bit(m.to);
  PointSet theirs = pos.theirs;
  if (m.capture >= 0) theirs ^= bit(m.capture);
  return Position{theirs, mine, pos.theirHand, hand};
}

// Returns the reason a move is illegal, or nullopt if it is legal.
inline std::optional<std::string> check_move(const Position& pos, const Move& m,
                                             const BoardDef& board, const RuleFlags& rules) {
  const int n = board.size();
  if (m.to < 0 || m.to >= n) return "unknown destination";
  if (pos.occupied() & bit(m.to)) return "occupied destination";
  PointSet newMine = 0;
  if (m.kind == MoveKind::Place) {
    if (!can_place(pos)) return "no stones left to place";
    newMine = pos.mine | bit(m.to);
  } else {
    if (!can_move_stones(pos, rules)) return "stones must be placed first";
    if (m.from < 0 || m.from >= n || !(pos.mine & bit(m.from))) return "no own stone at source";
    const bool fly = is_flying(pos, rules);
    if (!fly && !(board.neighbors(m.from) & bit(m.to))) return "destination not adjacent";
    if ((m.kind == MoveKind::Fly) != fly) return fly ? "move must be a flight" : "flying not allowed";
    newMine = pos.mine ^ bit(m.from) ^ bit(m.to);
  }
  const bool mill = board.closes_mill(m.to, newMine);
  const PointSet targets = mill ? capture_targets(pos.theirs, board, rules) : 0;
  if (m.capture >= 0) {
    if (!mill) return "no mill for capture";
    if (m.capture >= n || !(pos.theirs & bit(m.capture))) return "no opponent stone to capture";
    if (!(targets & bit(m.capture))) return "capture target protected";
  } else if (targets) {
    return "mill closed: a capture is required";
  }
  return std::nullopt;
}

class IllegalMove : public Error {
public:
  using Error::Error;
};

inline Position apply_move(const Position& pos, const Move& m, const BoardDef& board,
                           const RuleFlags& rules) {
  if (auto why = check_move(pos, m, board, rules)) throw IllegalMove(*why);
  return apply_unchecked(pos, m);
}

// True if the mover can end the game at once by reducing the opponent below
// three stones.
inline bool has_winning_capture(const Position& pos, const BoardDef& board, const RuleFlags& rules) {
  if (pos.their_total() > 3) return false;
  bool found = false;
  for_each_move(pos, board, rules, [&](const Move& m) { found |= m.is_capture(); });
  return found;
}

inline bool board_full(const Position& pos, const BoardDef& board) {
  return pos.occupied() == board.all();
}

// Loss if the mover has fewer than three stones or no legal move; draw for a
// full board under the full-board rule; nullopt otherwise.
inline std::optional<Terminal> terminal_value(const Position& pos, const BoardDef& board,
                                              const RuleFlags& rules) {
  if (pos.my_total() < 3) return Terminal::Loss;
  if (rules.fullBoardDraw && board_full(pos, board)) return Terminal::Draw;
  bool any = false;
  for_each_move(pos, board, rules, [&](const Move&) { any = true; });
  if (!any) return Terminal::Loss;
  return std::nullopt;
}

// Notation: "d1" place, "a7-d7" shift or flight, either followed by "x<point>".
inline std::string format_move(const Move& m, const BoardDef& board) {
  std::string s;
  if (m.kind != MoveKind::Place) s = board.point_name(m.from) + "-";
  s += board.point_name(m.to);
  if (m.capture >= 0) s += "x" + board.point_name(m.capture);
  return s;
}

// Parses notation without checking legality. Shifts and flights share a
// syntax; the kind is resolved against `pos` when given.
inline Move parse_move(std::string_view text, const BoardDef& board,
                       const Position* pos = nullptr, const RuleFlags* rules = nullptr) {
  auto point = [&](std::string_view n) {
    if (n.empty()) throw Error("move syntax error: '" + std::string(text) + "'");
    auto p = board.find_point(n);
    if (!p) throw Error("unknown point '" + std::string(n) + "'");
    return *p;
  };
  Move m;
  std::string_view body = text;
  if (auto x = body.find('x'); x != std::string_view::npos) {
    m.capture = point(body.substr(x + 1));
    body = body.substr(0, x);
  }
  if (auto dash = body.find('-'); dash != std::string_view::npos) {
    m.from = point(body.substr(0, dash));
    m.to = point(body.substr(dash + 1));
    m.kind = MoveKind::Shift;
    if (pos && rules && is_flying(*pos, *rules)) m.kind = MoveKind::Fly;
  } else {
    m.to = point(body);
    m.kind = MoveKind::Place;
  }
  return m;
}

}  // namespace mills
