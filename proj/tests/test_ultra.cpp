#include <gtest/gtest.h>

#include "mills/ultra.hpp"
#include "mills/ultra_paths.hpp"
#include "support.hpp"

using namespace mills;

namespace {

const Variant& standard() {
  static Variant v = make_variant("standard");
  return v;
}

const Variant& grid9() {
  static Variant v = make_variant("grid9");
  return v;
}

SolveConfig grid9_extended() {
  SolveConfig c;
  c.variant = grid9();
  for (int i = 3; i <= 4; ++i)
    for (int j = 3; j <= 4; ++j) c.starts.push_back(Start{i, j});
  return c;
}

struct UltraFixture {
  std::filesystem::path strongDir, ultraDir;
  RankTable ranks;
  UnitDag dag;
};

// Strong pass, ranks from its statistics (or all zero), ultra pass.
UltraFixture solve_both(const std::string& label, bool zero) {
  auto& cache = test::SolvedCache::instance();
  SolveConfig c = grid9_extended();
  UltraFixture f;
  f.strongDir = cache.get("g9ext-strong", c);
  f.dag = dag_for(c);
  f.ranks = zero ? RankTable::zeros(f.dag)
                 : compute_ranks(f.dag, collect_stats(f.strongDir, SolveMode::Strong), Heuristic::WdlRatio);
  c.mode = SolveMode::Ultra;
  c.ranks = f.ranks;
  f.ultraDir = cache.get(label, c);
  return f;
}

SubspaceStats stats(std::uint64_t w, std::uint64_t l, std::uint64_t d) { return SubspaceStats{w, l, d, 0}; }

}  // namespace

TEST(RankValues, PairFormula) {
  SubspaceStats s = stats(50, 10, 40), neg = stats(20, 30, 50);
  Rational a = subspace_value(s, &neg), b = subspace_value(neg, &s);
  EXPECT_EQ(a, Rational::make(5, 8));
  EXPECT_EQ(b, Rational::make(3, 8));
  EXPECT_EQ(a + b, Rational::make(1, 1));
  EXPECT_DOUBLE_EQ(a.to_double(), 0.625);
}

TEST(RankValues, TransientFormula) {
  EXPECT_EQ(subspace_value(stats(30, 60, 10), nullptr), Rational::make(7, 20));
  EXPECT_THROW(subspace_value(stats(0, 0, 0), nullptr), Error);
}

TEST(RankAssignment, PairGetsOppositeRanksAndEscGetsZero) {
  const Variant& v = standard();
  UnitDag dag = build_dag_from({SubspaceId{4, 3, 0, 0}}, *v.board, v.rules);
  ASSERT_EQ(dag.units.size(), 2u);
  std::map<SubspaceId, SubspaceStats> st{{{4, 3, 0, 0}, stats(50, 10, 40)},
                                         {{3, 4, 0, 0}, stats(20, 30, 50)},
                                         {{3, 3, 0, 0}, stats(83, 17, 0)}};
  RankTable t = compute_ranks(dag, st, Heuristic::WdlRatio);
  EXPECT_EQ(t.rank({4, 3, 0, 0}), 1);
  EXPECT_EQ(t.rank({3, 4, 0, 0}), -1);
  EXPECT_EQ(t.rank({3, 3, 0, 0}), 0);
  EXPECT_EQ(t.win_key(), 2);
  EXPECT_EQ(RankTable::parse(t.to_text()).ranks, t.ranks);
  EXPECT_EQ(RankTable::parse(t.to_text()).digest(), t.digest());
}

TEST(RankAssignment, OverrideRecentersPair) {
  const Variant& v = standard();
  UnitDag dag = build_dag_from({SubspaceId{4, 3, 0, 0}}, *v.board, v.rules);
  std::map<SubspaceId, SubspaceStats> st{{{4, 3, 0, 0}, stats(50, 10, 40)},
                                         {{3, 4, 0, 0}, stats(20, 30, 50)},
                                         {{3, 3, 0, 0}, stats(83, 17, 0)}};
  RankTable t = compute_ranks(dag, st, Heuristic::WdlRatio, {{{3, 4, 0, 0}, -5}});
  EXPECT_EQ(t.rank({3, 4, 0, 0}), -5);
  EXPECT_EQ(t.rank({4, 3, 0, 0}), 5);
  EXPECT_THROW(compute_ranks(dag, st, Heuristic::WdlRatio, {{{3, 3, 0, 0}, 2}}), Error);
  EXPECT_THROW(compute_ranks(dag, st, Heuristic::WdlRatio, {{{3, 4, 0, 0}, -5}, {{4, 3, 0, 0}, 4}}), Error);
  EXPECT_THROW(compute_ranks(dag, st, Heuristic::WdlRatio, {{{9, 3, 0, 0}, 1}}), Error);
}

TEST(RankAssignment, StoneDifferenceHeuristic) {
  const Variant& v = standard();
  UnitDag dag = build_dag_from({SubspaceId{6, 3, 0, 0}}, *v.board, v.rules);
  RankTable t = compute_ranks(dag, {}, Heuristic::StoneDifference);
  EXPECT_EQ(t.rank({3, 3, 0, 0}), 0);
  EXPECT_GT(t.rank({6, 3, 0, 0}), t.rank({5, 3, 0, 0}));
  EXPECT_GT(t.rank({5, 3, 0, 0}), t.rank({4, 3, 0, 0}));
  EXPECT_GT(t.rank({4, 3, 0, 0}), 0);
  for (int k = 4; k <= 6; ++k) EXPECT_EQ(t.rank({k, 3, 0, 0}), -t.rank({3, k, 0, 0}));
}

TEST(RankTable, ParseErrors) {
  EXPECT_THROW(RankTable::parse("3,3,0,0 1\n"), Error);
  EXPECT_THROW(RankTable::parse("3,3,0,0\tx\n"), Error);
  EXPECT_THROW(RankTable::parse("3,3,0,0\t1\n3,3,0,0\t2\n"), Error);
  RankTable t = RankTable::parse("# heuristic wdl\n4,3,0,0\t2\n3,4,0,0\t-2\n");
  EXPECT_EQ(t.notes, std::vector<std::string>{"heuristic wdl"});
  EXPECT_EQ(t.win_key(), 3);
}

TEST(UltraAdjust, SecondaryRecordsShiftByBothRanks) {
  // Count-state of a secondary at rank 2 seen from a target at rank 1.
  EXPECT_EQ(adjust_secondary(UltraRecord{0, kNoDtw}, 2, 1), (std::pair<int, int>{3, 0}));
  EXPECT_EQ(adjust_secondary(UltraRecord{0, kNoDtw}, 2, -2), (std::pair<int, int>{0, 0}));
  EXPECT_EQ(adjust_secondary(UltraRecord{4, 3}, 1, 1), (std::pair<int, int>{6, 3}));
  EXPECT_EQ(adjust_secondary(UltraRecord{-1, 3}, 0, 3), (std::pair<int, int>{2, -3}));
  EXPECT_EQ(ultra_to_strong(UltraRecord{5, 7}, 2, 7), (StrongValue{Outcome::Win, 7}));
  EXPECT_EQ(ultra_to_strong(UltraRecord{-9, 4}, 2, 7), (StrongValue{Outcome::Loss, 4}));
  EXPECT_EQ(ultra_to_strong(UltraRecord{3, 4}, 2, 7), StrongValue{});
}

TEST(UltraSolve, NeedsACompleteRankTable) {
  SolveConfig c = grid9_extended();
  c.mode = SolveMode::Ultra;
  test::TempDir dir("noranks");
  c.outDir = dir.path();
  EXPECT_THROW(test::solve_quiet(c), Error);
  c.ranks = RankTable::parse("3,3,0,0\t0\n");
  EXPECT_THROW(test::solve_quiet(c), Error);
}

// All ranks zero: every key is +-1, so ultra collapses to win/loss/draw.
TEST(UltraSolve, ZeroRanksCollapseToStrong) {
  UltraFixture f = solve_both("g9ext-ultra0", true);
  DbSet sd(f.strongDir, grid9(), SolveMode::Strong, IndexingMode::Plain);
  DbSet ud(f.ultraDir, grid9(), SolveMode::Ultra, IndexingMode::Plain);
  ASSERT_EQ(sd.available(), ud.available());
  std::uint64_t n = 0;
  for (const auto& s : ud.available()) {
    auto a = sd.get(s), b = ud.get(s);
    EXPECT_EQ(b->header().winKey, 1);
    for (std::uint64_t i = 0; i < a->size(); ++i, ++n) {
      UltraRecord r = b->ultra(i);
      ASSERT_TRUE(r.is_count() || r.key == 1 || r.key == -1) << s.to_string() << " " << i;
      ASSERT_EQ(ultra_to_strong(r, 0, 1), a->strong(i)) << s.to_string() << " " << i;
    }
  }
  EXPECT_GT(n, 0u);
}

class UltraRanked : public ::testing::Test {
protected:
  static void SetUpTestSuite() { f_ = new UltraFixture(solve_both("g9ext-ultra", false)); }
  static void TearDownTestSuite() { delete f_; }
  static UltraFixture* f_;
};
UltraFixture* UltraRanked::f_ = nullptr;

TEST_F(UltraRanked, RanksAreAntisymmetricAndEscIsZero) {
  int nonzero = 0;
  for (const auto& u : f_->dag.units) {
    if (u.transient) continue;
    if (u.esc) EXPECT_EQ(f_->ranks.rank(u.subspaces[0]), 0);
    if (u.subspaces.size() == 2) {
      EXPECT_EQ(f_->ranks.rank(u.subspaces[0]), -f_->ranks.rank(u.subspaces[1]));
      nonzero += f_->ranks.rank(u.subspaces[0]) != 0;
    }
  }
  EXPECT_GT(nonzero, 0);
}

TEST_F(UltraRanked, WinsAndLossesMatchStrong) {
  DbSet sd(f_->strongDir, grid9(), SolveMode::Strong, IndexingMode::Plain);
  DbSet ud(f_->ultraDir, grid9(), SolveMode::Ultra, IndexingMode::Plain);
  for (const auto& s : ud.available()) {
    auto a = sd.get(s), b = ud.get(s);
    EXPECT_EQ(b->header().rank, f_->ranks.rank(s));
    for (std::uint64_t i = 0; i < a->size(); ++i)
      ASSERT_EQ(ultra_to_strong(b->ultra(i), b->header().rank, b->header().winKey), a->strong(i));
  }
}

TEST_F(UltraRanked, VerifierAndPathIdentityHold) {
  DbSet ud(f_->ultraDir, grid9(), SolveMode::Ultra, IndexingMode::Plain);
  VerifyReport v = verify_all(ud);
  EXPECT_TRUE(v.ok()) << v.summary() << (v.first.empty() ? "" : ": " + v.first[0].detail);
  VerifyReport p = check_dtw_paths(ud);
  EXPECT_TRUE(p.ok()) << p.summary() << (p.first.empty() ? "" : ": " + p.first[0].detail);
  EXPECT_GT(p.checked, 0u);
  EXPECT_LE(p.checked, v.checked);
}

// Stable draws inside a non-transient unit sit at that unit's rank.
TEST_F(UltraRanked, StableDrawsSitAtTheirUnitsRank) {
  DbSet ud(f_->ultraDir, grid9(), SolveMode::Ultra, IndexingMode::Plain);
  OptimalPaths paths(ud);
  std::uint64_t stable = 0;
  for (const auto& s : ud.available()) {
    const WorkUnit& u = f_->dag.units[f_->dag.unitOf.at(s)];
    if (u.transient) continue;
    auto db = ud.get(s);
    auto ix = ud.indexers().get(s);
    for (std::uint64_t i = 0; i < db->size(); ++i) {
      UltraRecord r = db->ultra(i);
      if (r.is_count()) {
        ++stable;
        EXPECT_EQ(r.key + db->header().rank, db->header().rank);
        continue;
      }
      auto info = paths.at(ix->unrank(i));
      if (info.reached && u.contains(*info.reached) && info.length % 2 == 0 && *info.reached == s)
        EXPECT_EQ(r.key + db->header().rank, db->header().rank);
    }
  }
  EXPECT_GT(stable, 0u);
}

TEST_F(UltraRanked, RankReportPartitionsDraws) {
  DbSet ud(f_->ultraDir, grid9(), SolveMode::Ultra, IndexingMode::Plain);
  RankReport r = rank_report(ud);
  std::uint64_t draws = 0;
  for (const auto& [s, st] : collect_stats(f_->strongDir, SolveMode::Strong)) draws += st.draws;
  EXPECT_EQ(r.draws, draws);
  auto sum = [](const auto& m) {
    std::uint64_t t = 0;
    for (const auto& [k, n] : m) t += n;
    return t;
  };
  EXPECT_EQ(sum(r.byAbsoluteKey), draws);
  EXPECT_EQ(sum(r.byReached), draws);
  EXPECT_EQ(sum(r.byStoneDifference), draws);
  for (const auto& [d, n] : r.byStoneDifference) {
    EXPECT_GE(d, -5);
    EXPECT_LE(d, 5);
  }
}

TEST_F(UltraRanked, SpilledStreamGivesIdenticalOutput) {
  SolveConfig c = grid9_extended();
  c.mode = SolveMode::Ultra;
  c.ranks = f_->ranks;
  test::TempDir dir("uspill");
  // Strong files are the secondaries' source of truth only for strong mode;
  // ultra solves read their own earlier output.
  c.outDir = dir.path();
  c.spillThreshold = 64;
  c.scratch = dir.path() / "scratch";
  test::solve_quiet(c);
  DbSet a(f_->ultraDir, grid9(), SolveMode::Ultra, IndexingMode::Plain);
  DbSet b(dir.path(), grid9(), SolveMode::Ultra, IndexingMode::Plain);
  ASSERT_EQ(a.available(), b.available());
  for (const auto& s : a.available()) EXPECT_EQ(a.get(s)->payload(), b.get(s)->payload()) << s.to_string();
}
