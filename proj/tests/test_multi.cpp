#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "mills/oracle.hpp"
#include "mills/retro_multi.hpp"
#include "support.hpp"

using namespace mills;

namespace {

GameGraph graph(std::vector<std::vector<int>> succ, std::vector<std::optional<int>> terminal) {
  return GameGraph{std::move(succ), std::move(terminal)};
}

std::string show(const MultiValue& v) {
  return v.hasDtw ? std::to_string(v.value) + "@" + std::to_string(v.dtw) : "count";
}

}  // namespace

TEST(SolveMulti, PureCycleStaysCountState) {
  auto g = graph({{1}, {0}}, {std::nullopt, std::nullopt});
  auto r = solve_multi(g, 3);
  EXPECT_FALSE(r[0].hasDtw);
  EXPECT_FALSE(r[1].hasDtw);
  EXPECT_EQ(r[0].value, 0);
}

TEST(SolveMulti, OnlySuccessorLostInZeroIsWinInOne) {
  auto g = graph({{1}, {}}, {std::nullopt, -1});
  auto r = solve_multi(g, 1);
  EXPECT_EQ(r[0], (MultiValue{1, 1, true}));
  EXPECT_EQ(r[1], (MultiValue{-1, 0, true}));
}

TEST(SolveMulti, CycleOfDrawsFeedsNothing) {
  // 0 and 1 cycle; 2 can only enter the cycle; 3 is a zero terminal.
  auto g = graph({{1, 3}, {0}, {0}, {}}, {std::nullopt, std::nullopt, std::nullopt, 0});
  auto r = solve_multi(g, 2);
  for (const auto& v : r) EXPECT_FALSE(v.hasDtw) << show(v);
}

TEST(SolveMulti, PrefersLargerPayoffThenShorterWin) {
  // 0 can move to 1 (payoff -2 for its mover) or 2 (payoff -1).
  auto g = graph({{1, 2}, {}, {}}, {std::nullopt, -2, -1});
  EXPECT_EQ(solve_multi(g, 2)[0], (MultiValue{2, 1, true}));
  // Two ways to the same value: the shorter one counts.
  auto h = graph({{1, 2}, {3}, {}, {}}, {std::nullopt, std::nullopt, -1, 1});
  auto r = solve_multi(h, 1);
  EXPECT_EQ(r[1], (MultiValue{-1, 1, true}));
  EXPECT_EQ(r[0], (MultiValue{1, 1, true}));
}

TEST(SolveMulti, LosingSideDelaysAsLongAsPossible) {
  // 0 has two moves, both to positions that win for their mover.
  auto g = graph({{1, 2}, {3}, {}, {}}, {std::nullopt, std::nullopt, 1, -1});
  auto r = solve_multi(g, 1);
  EXPECT_EQ(r[1], (MultiValue{1, 1, true}));
  EXPECT_EQ(r[0], (MultiValue{-1, 2, true}));
}

TEST(SolveMulti, RejectsMalformedGraphs) {
  EXPECT_THROW(solve_multi(graph({{}}, {1}), 0), Error);
  EXPECT_THROW(solve_multi(graph({{}}, {4}), 3), Error);
  EXPECT_THROW(solve_multi(graph({{0}}, {1}), 1), Error);
  EXPECT_THROW(solve_multi(graph({{}}, {std::nullopt}), 1), Error);
  EXPECT_THROW(solve_multi(graph({{}, {}}, {1}), 1), Error);
}

// The fixpoint does not depend on the sweep order.
TEST(Oracle, IndependentOfSweepOrder) {
  std::mt19937_64 rng(99);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    GameGraph g = random_game_graph(seed, 120, 3);
    auto base = oracle_solve(g, 3);
    std::vector<int> order(g.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    EXPECT_EQ(oracle_solve(g, 3, &order), base) << "seed " << seed;
    std::reverse(order.begin(), order.end());
    EXPECT_EQ(oracle_solve(g, 3, &order), base) << "seed " << seed;
  }
}

TEST(SolveMulti, EqualsOracleOnRandomGraphs) {
  int mismatched = 0, nonzero = 0;
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    const int w = 1 + static_cast<int>(seed % 3);
    const int nodes = 20 + static_cast<int>((seed * 37) % 181);
    GameGraph g = random_game_graph(seed, nodes, w, 1 + static_cast<int>(seed % 5));
    auto got = solve_multi(g, w);
    auto want = oracle_solve(g, w);
    for (int u = 0; u < g.size(); ++u) {
      nonzero += want[u].hasDtw;
      if (!(got[u] == want[u]) && ++mismatched <= 5)
        ADD_FAILURE() << "seed " << seed << " node " << u << " solver " << show(got[u]) << " oracle "
                      << show(want[u]);
    }
  }
  EXPECT_EQ(mismatched, 0);
  EXPECT_GT(nonzero, 0);
}

// With w = 1 the multi-valued solver reduces to win/loss/draw.
TEST(SolveMulti, WidthOneEqualsStrongOnAMorrisGraph) {
  Variant v = make_variant("ring8");
  auto rg = build_reachable_graph(Position{0, 0, 4, 4}, v);
  auto multi = solve_multi(rg.graph, 1);
  auto strong = oracle_strong(rg);
  int wins = 0;
  for (std::size_t u = 0; u < multi.size(); ++u) {
    StrongValue s = !multi[u].hasDtw ? StrongValue{}
                                     : StrongValue{multi[u].value > 0 ? Outcome::Win : Outcome::Loss, multi[u].dtw};
    EXPECT_EQ(s, strong[u]) << u;
    wins += s.outcome == Outcome::Win;
  }
  EXPECT_GT(wins, 0);
}
