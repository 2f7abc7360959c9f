#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mills/position.hpp"
#include "mills/rules.hpp"
#include "support.hpp"

using namespace mills;
using mills::test::pos_of;

namespace {

const Variant& standard() {
  static Variant v = make_variant("standard");
  return v;
}
const Variant& morabaraba() {
  static Variant v = make_variant("morabaraba");
  return v;
}

// Mills recomputed from the drawing: three points in a straight line where
// the middle one touches both ends.
std::set<PointSet> collinear_adjacent_triples(const BoardDef& b) {
  std::set<PointSet> out;
  const auto& xy = b.layout();
  for (int mid = 0; mid < b.size(); ++mid) {
    std::vector<int> nb;
    for_each_bit(b.neighbors(mid), [&](int q) { nb.push_back(q); });
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        int ax = xy[nb[i]].x - xy[mid].x, ay = xy[nb[i]].y - xy[mid].y;
        int cx = xy[nb[j]].x - xy[mid].x, cy = xy[nb[j]].y - xy[mid].y;
        if (ax * cy - ay * cx == 0 && ax * cx + ay * cy < 0) out.insert(bit(mid) | bit(nb[i]) | bit(nb[j]));
      }
  }
  return out;
}

Position random_position(std::mt19937_64& rng, const BoardDef& b, int mine, int theirs, int myHand,
                         int theirHand) {
  std::vector<int> pts(b.size());
  for (int i = 0; i < b.size(); ++i) pts[i] = i;
  std::shuffle(pts.begin(), pts.end(), rng);
  Position p;
  for (int i = 0; i < mine; ++i) p.mine |= bit(pts[i]);
  for (int i = mine; i < mine + theirs; ++i) p.theirs |= bit(pts[i]);
  p.myHand = myHand;
  p.theirHand = theirHand;
  return p;
}

Move permute_move(const Move& m, const std::vector<int>& perm) {
  Move out = m;
  if (out.from >= 0) out.from = perm[out.from];
  out.to = perm[out.to];
  if (out.capture >= 0) out.capture = perm[out.capture];
  return out;
}

std::string board_with_mill(const std::string& mill) {
  return "mills-board 1\n[points]\na b c\n[adjacency]\na b\nb c\n[mills]\n" + mill + "\n";
}

}  // namespace

TEST(BoardDef, StandardHas24PointsAnd16Mills) {
  const BoardDef& b = *standard().board;
  EXPECT_EQ(b.size(), 24);
  EXPECT_EQ(b.mills().size(), 16u);
  auto oracle = collinear_adjacent_triples(b);
  EXPECT_EQ(oracle.size(), 16u);
  EXPECT_EQ(std::set<PointSet>(b.mills().begin(), b.mills().end()), oracle);
  EXPECT_EQ(b.symmetry_count(), 16);
}

TEST(BoardDef, MorabarabaHas20MillsIncludingCornerDiagonals) {
  const BoardDef& b = *morabaraba().board;
  EXPECT_EQ(b.size(), 24);
  EXPECT_EQ(b.mills().size(), 20u);
  auto oracle = collinear_adjacent_triples(b);
  EXPECT_EQ(oracle.size(), 20u);
  EXPECT_EQ(std::set<PointSet>(b.mills().begin(), b.mills().end()), oracle);
  // The four extra mills are the diagonals a7-b6-c5 and its images.
  std::set<PointSet> std16(standard().board->mills().begin(), standard().board->mills().end());
  int extra = 0;
  for (PointSet m : b.mills()) extra += !std16.count(m);
  EXPECT_EQ(extra, 4);
}

TEST(BoardDef, MiniBoardsParse) {
  for (const char* name : {"ring8", "grid9"}) {
    Variant v = make_variant(name);
    EXPECT_EQ(collinear_adjacent_triples(*v.board), std::set<PointSet>(v.board->mills().begin(), v.board->mills().end()))
        << name;
  }
}

TEST(BoardDef, UnknownPointInMillIsRejected) {
  try {
    BoardDef::parse(board_with_mill("a b z9"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("unknown point"), std::string::npos) << e.what();
  }
}

TEST(BoardDef, MillOffAdjacencyLineIsRejected) {
  EXPECT_THROW(BoardDef::parse("mills-board 1\n[points]\na b c\n[adjacency]\na b\n[mills]\na b c\n"), Error);
}

TEST(BoardDef, SymmetrySetMustBeAGroup) {
  // The reflection alone lacks the identity.
  const std::string base = board_with_mill("a b c");
  EXPECT_NO_THROW(BoardDef::parse(base + "[symmetries]\na b c\nc b a\n"));
  EXPECT_THROW(BoardDef::parse(base + "[symmetries]\nc b a\n"), Error);
  // Not adjacency preserving.
  EXPECT_THROW(BoardDef::parse(base + "[symmetries]\na b c\nb a c\n"), Error);
}

TEST(BoardDef, TextRoundTrip) {
  const BoardDef& b = *morabaraba().board;
  BoardDef again = BoardDef::parse(b.to_text());
  EXPECT_EQ(again.digest(), b.digest());
  EXPECT_EQ(again.symmetries(), b.symmetries());
}

TEST(RuleFlags, Presets) {
  EXPECT_EQ(RuleFlags::standard().stonesToPlace, 9);
  EXPECT_FALSE(RuleFlags::standard().laskerPlacement);
  EXPECT_EQ(RuleFlags::lasker().stonesToPlace, 10);
  EXPECT_TRUE(RuleFlags::lasker().laskerPlacement);
  EXPECT_EQ(RuleFlags::morabaraba().stonesToPlace, 12);
  EXPECT_FALSE(RuleFlags::morabaraba().laskerPlacement);
  RuleFlags r;
  r.stonesToPlace = 2;
  EXPECT_THROW(r.validate(), Error);
}

TEST(LegalMoves, MorabarabaStartHas24Placements) {
  const Variant& v = morabaraba();
  auto moves = legal_moves(Position{0, 0, 12, 12}, *v.board, v.rules);
  ASSERT_EQ(moves.size(), 24u);
  PointSet dest = 0;
  for (const Move& m : moves) {
    EXPECT_EQ(m.kind, MoveKind::Place);
    dest |= bit(m.to);
  }
  EXPECT_EQ(dest, v.board->all());
}

TEST(LegalMoves, BlockedMoverHasNoMoves) {
  const Variant& v = standard();
  Position p = pos_of(*v.board, {"a7", "d7", "g7", "a4"}, {"d6", "g4", "a1", "b4"});
  EXPECT_TRUE(legal_moves(p, *v.board, v.rules).empty());
  EXPECT_EQ(terminal_value(p, *v.board, v.rules), Terminal::Loss);
}

TEST(LegalMoves, FlyingWithThreeStonesGives54Moves) {
  const Variant& v = standard();
  const BoardDef& b = *v.board;
  Position p = pos_of(b, {"a7", "d5", "g1"}, {"b6", "f2", "c3"});
  auto moves = legal_moves(p, b, v.rules);
  // Every (own stone, empty point) pair, none of which closes a mill here.
  std::set<std::pair<int, int>> oracle;
  for_each_bit(p.mine, [&](int from) {
    for_each_bit(b.all() & ~p.occupied(), [&](int to) {
      EXPECT_FALSE(b.closes_mill(to, p.mine ^ bit(from) ^ bit(to)));
      oracle.insert({from, to});
    });
  });
  std::set<std::pair<int, int>> got;
  for (const Move& m : moves) {
    EXPECT_EQ(m.kind, MoveKind::Fly);
    got.insert({m.from, m.to});
  }
  EXPECT_EQ(moves.size(), 54u);
  EXPECT_EQ(got, oracle);
}

TEST(LegalMoves, LaskerAllowsShiftsWithStonesInHand) {
  Variant v = make_variant("lasker");
  const BoardDef& b = *v.board;
  Position p = pos_of(b, {"d7"}, {"a1"}, 5, 5);
  int shifts = 0, places = 0;
  for (const Move& m : legal_moves(p, b, v.rules)) (m.kind == MoveKind::Place ? places : shifts)++;
  EXPECT_EQ(places, 22);
  EXPECT_EQ(shifts, 3);
  EXPECT_EQ(count_moves(p, b, standard().rules), 22);
}

TEST(ApplyMove, MillClosingPlacementCapturesExactlyOne) {
  const Variant& v = standard();
  const BoardDef& b = *v.board;
  Position p = pos_of(b, {"a7", "d7"}, {"b6", "f6", "d2"}, 4, 4);
  int captures = 0;
  for (const Move& m : legal_moves(p, b, v.rules)) {
    if (m.to != *b.find_point("g7")) continue;
    ASSERT_TRUE(m.is_capture());
    ++captures;
    Position q = apply_move(p, m, b, v.rules);
    EXPECT_EQ(popcount(q.mine), popcount(p.theirs) - 1);
    EXPECT_EQ(q.myHand, p.theirHand);
  }
  EXPECT_EQ(captures, 3);
}

TEST(ApplyMove, DoubleMillStillCapturesOne) {
  const Variant& v = standard();
  const BoardDef& b = *v.board;
  Position p = pos_of(b, {"a7", "d7", "g4", "g1"}, {"b6", "f6", "d2"}, 2, 2);
  const int g7 = *b.find_point("g7");
  int n = 0;
  for (const Move& m : legal_moves(p, b, v.rules)) {
    if (m.to != g7) continue;
    ++n;
    ASSERT_TRUE(m.is_capture());
    Position q = apply_move(p, m, b, v.rules);
    EXPECT_EQ(popcount(q.mine), 2);
  }
  EXPECT_EQ(n, 3);  // one move per target, not per pair of targets
}

TEST(ApplyMove, ShiftThenReverseShiftRestoresBoard) {
  const Variant& v = standard();
  const BoardDef& b = *v.board;
  Position p = pos_of(b, {"a7", "d6", "e4", "b2"}, {"g7", "c5", "d1", "f2"});
  for (const Move& m : legal_moves(p, b, v.rules)) {
    if (m.is_capture()) continue;
    Position q = apply_move(p, m, b, v.rules);
    // Give the move back to the original mover and undo it.
    Position back = q.swapped();
    Move rev{MoveKind::Shift, m.to, m.from, -1};
    ASSERT_FALSE(check_move(back, rev, b, v.rules)) << format_move(m, b);
    Position r = apply_move(back, rev, b, v.rules).swapped();
    EXPECT_EQ(r, p);
  }
}

TEST(ApplyMove, RejectsWithReasons) {
  const Variant& v = standard();
  const BoardDef& b = *v.board;
  Position p = pos_of(b, {"a7", "d7"}, {"a1", "g1", "d1", "b6"}, 4, 4);
  auto reason = [&](const std::string& text) {
    auto why = check_move(p, parse_move(text, b, &p, &v.rules), b, v.rules);
    return why.value_or("legal");
  };
  EXPECT_EQ(reason("a1"), "occupied destination");
  EXPECT_EQ(reason("f6xa1"), "no mill for capture");
  EXPECT_EQ(reason("g7"), "mill closed: a capture is required");
  EXPECT_EQ(reason("g7xa1"), "capture target protected");
  EXPECT_EQ(reason("g7xf6"), "no opponent stone to capture");
  EXPECT_EQ(reason("a7-a4"), "stones must be placed first");
  EXPECT_EQ(reason("g7xb6"), "legal");
  EXPECT_THROW(apply_move(p, parse_move("a1", b), b, v.rules), IllegalMove);
}

TEST(ApplyMove, CaptureFromMillOnlyWhenAllInMills) {
  const Variant& v = standard();
  const BoardDef& b = *v.board;
  Position p = pos_of(b, {"a7", "d7"}, {"a1", "g1", "d1"}, 4, 4);
  EXPECT_FALSE(check_move(p, parse_move("g7xd1", b), b, v.rules));
  RuleFlags strict = v.rules;
  strict.captureFromMillWhenAllInMills = false;
  EXPECT_TRUE(check_move(p, parse_move("g7", b), b, strict) == std::nullopt);
}

TEST(TerminalValue, Cases) {
  const Variant& m = morabaraba();
  const BoardDef& b = *m.board;
  Position full{0, 0, 0, 0};
  for (int i = 0; i < 24; ++i) (i % 2 ? full.theirs : full.mine) |= bit(i);
  Variant fbd = make_variant("morabaraba-fbd");
  EXPECT_EQ(terminal_value(full, b, fbd.rules), Terminal::Draw);
  Position mid = pos_of(*standard().board, {"a7", "d6", "e4", "b2"}, {"g7", "c5", "d1", "f2"});
  EXPECT_EQ(terminal_value(mid, *standard().board, standard().rules), std::nullopt);
  Position two = pos_of(*standard().board, {"a7", "d6"}, {"g7", "c5", "d1"});
  EXPECT_EQ(terminal_value(two, *standard().board, standard().rules), Terminal::Loss);
}

TEST(Notation, ParseAndFormat) {
  const BoardDef& b = *standard().board;
  Move m = parse_move("d1xf6", b);
  EXPECT_EQ(m.kind, MoveKind::Place);
  EXPECT_EQ(m.to, *b.find_point("d1"));
  EXPECT_EQ(m.capture, *b.find_point("f6"));
  m = parse_move("a7-d7", b);
  EXPECT_EQ(m.kind, MoveKind::Shift);
  EXPECT_EQ(m.from, *b.find_point("a7"));
  EXPECT_EQ(m.to, *b.find_point("d7"));
  EXPECT_EQ(m.capture, -1);
  m = parse_move("d7-a7xc5", b);
  EXPECT_EQ(m.from, *b.find_point("d7"));
  EXPECT_EQ(m.to, *b.find_point("a7"));
  EXPECT_EQ(m.capture, *b.find_point("c5"));
  for (const char* t : {"d1xf6", "a7-d7", "d7-a7xc5", "g1"}) EXPECT_EQ(format_move(parse_move(t, b), b), t);
  EXPECT_THROW(parse_move("z9", b), Error);
  EXPECT_THROW(parse_move("a7-", b), Error);
  EXPECT_THROW(parse_move("", b), Error);
}

// Properties over random positions of several shapes.
TEST(MoveProperties, EquivarianceConservationRoundTrip) {
  std::mt19937_64 rng(7);
  for (const Variant* v : {&standard(), &morabaraba()}) {
    const BoardDef& b = *v->board;
    const int shapes[][4] = {{3, 3, 0, 0}, {4, 3, 0, 0}, {6, 5, 0, 0}, {3, 5, 0, 0}, {2, 3, 4, 3}, {5, 5, 1, 1}};
    for (auto& sh : shapes) {
      for (int rep = 0; rep < 40; ++rep) {
        Position p = random_position(rng, b, sh[0], sh[1], sh[2], sh[3]);
        auto moves = legal_moves(p, b, v->rules);
        std::set<Move> base(moves.begin(), moves.end());
        ASSERT_EQ(base.size(), moves.size()) << "duplicate move";
        const int before = p.my_total() + p.their_total();
        for (const Move& m : moves) {
          ASSERT_FALSE(check_move(p, m, b, v->rules));
          Position q = apply_move(p, m, b, v->rules);
          EXPECT_EQ(q.my_total() + q.their_total(), before - (m.is_capture() ? 1 : 0));
          Move back = parse_move(format_move(m, b), b, &p, &v->rules);
          EXPECT_EQ(back, m);
        }
        for (int s = 0; s < b.symmetry_count(); ++s) {
          const auto& perm = b.symmetries()[s];
          Position ps{b.permute(s, p.mine), b.permute(s, p.theirs), p.myHand, p.theirHand};
          auto img = legal_moves(ps, b, v->rules);
          std::set<Move> mapped;
          for (const Move& m : moves) mapped.insert(permute_move(m, perm));
          EXPECT_EQ(std::set<Move>(img.begin(), img.end()), mapped);
        }
      }
    }
  }
}

// Every rejected move is absent from the legal list.
TEST(MoveProperties, RejectedMovesAreNotListed) {
  std::mt19937_64 rng(11);
  const Variant& v = standard();
  const BoardDef& b = *v.board;
  for (int rep = 0; rep < 200; ++rep) {
    Position p = random_position(rng, b, 3 + rep % 4, 3 + rep % 3, rep % 2, rep % 2);
    auto moves = legal_moves(p, b, v.rules);
    std::set<Move> legal(moves.begin(), moves.end());
    for (int from = -1; from < b.size(); ++from)
      for (int to = 0; to < b.size(); ++to)
        for (int cap = -1; cap < b.size(); cap += (cap < 0 ? 1 : 5)) {
          MoveKind kind = from < 0 ? MoveKind::Place : (is_flying(p, v.rules) ? MoveKind::Fly : MoveKind::Shift);
          Move m{kind, from, to, cap};
          EXPECT_EQ(!check_move(p, m, b, v.rules).has_value(), legal.count(m) > 0);
        }
  }
}
