#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mills/alphabeta.hpp"
#include "mills/engine.hpp"

namespace mills {

class Player {
public:
  virtual ~Player() = default;
  virtual std::string name() const = 0;
  // Called before each game with that game's node budget and seed.
  virtual void new_game(std::uint64_t budget, std::uint64_t seed) {
    (void)budget;
    (void)seed;
  }
  virtual Move choose(const Position& pos) = 0;
};

class EnginePlayer : public Player {
public:
  EnginePlayer(std::shared_ptr<const DbSet> dbs, std::string name)
      : dbs_(std::move(dbs)), name_(std::move(name)), engine_(dbs_, 0) {}
  std::string name() const override { return name_; }
  void new_game(std::uint64_t, std::uint64_t seed) override { engine_ = Engine(dbs_, seed); }
  Move choose(const Position& pos) override { return engine_.choose(pos); }

private:
  std::shared_ptr<const DbSet> dbs_;
  std::string name_;
  Engine engine_;
};

class AlphaBetaPlayer : public Player {
public:
  AlphaBetaPlayer(const Variant& v, AbConfig cfg, std::string name = "alphabeta")
      : variant_(v), cfg_(cfg), name_(std::move(name)) {}
  std::string name() const override { return name_; }
  void new_game(std::uint64_t budget, std::uint64_t seed) override {
    cfg_.nodeBudget = budget;
    cfg_.seed = seed;
    ab_ = std::make_unique<AlphaBeta>(*variant_.board, variant_.rules, cfg_);
  }
  Move choose(const Position& pos) override {
    if (!ab_) new_game(cfg_.nodeBudget, cfg_.seed);
    return ab_->search(pos).move;
  }

private:
  Variant variant_;
  AbConfig cfg_;
  std::string name_;
  std::unique_ptr<AlphaBeta> ab_;
};

class RandomPlayer : public Player {
public:
  explicit RandomPlayer(const Variant& v) : variant_(v) {}
  std::string name() const override { return "random"; }
  void new_game(std::uint64_t, std::uint64_t seed) override { rng_.seed(seed); }
  Move choose(const Position& pos) override {
    auto moves = legal_moves(pos, *variant_.board, variant_.rules);
    if (moves.empty()) throw Error("no legal move to choose");
    return moves[std::uniform_int_distribution<std::size_t>(0, moves.size() - 1)(rng_)];
  }

private:
  Variant variant_;
  std::mt19937_64 rng_{1};
};

enum class GameResult { WhiteWins, BlackWins, Draw };

struct GameRecord {
  std::string white, black;
  GameResult result = GameResult::Draw;
  std::string reason;
  std::uint64_t budget = 0;
  std::vector<std::string> moves;

  // "w, b; w, b; ..." with one entry per move.
  std::string transcript() const {
    std::string s;
    for (std::size_t i = 0; i < moves.size(); ++i) {
      if (i > 0) s += (i % 2 == 1) ? ", " : "; ";
      s += moves[i];
    }
    return s;
  }
};

struct MatchConfig {
  int games = 10;
  int quietDrawAfter = 50;  // consecutive moves without a placement or capture
  int whiteStones = 9;      // stones in hand at the start
  int blackStones = 9;
  std::uint64_t budgetMin = 1000;
  std::uint64_t budgetMax = 1000;
  std::uint64_t seed = 1;
  int maxPlies = 5000;  // safety net; the quiet rule normally ends games first
};

struct Tally {
  int games = 0, wins = 0, draws = 0, losses = 0, asWhite = 0;
};

struct MatchResult {
  std::string a, b;
  Tally tallyA, tallyB;
  std::vector<GameRecord> games;
  std::string error;  // set when a player failed; tallies cover finished games

  std::string csv() const {
    std::ostringstream o;
    o << "player,games,wins,draws,losses,as_white\n";
    for (const auto& [n, t] : {std::pair{a, tallyA}, std::pair{b, tallyB}})
      o << n << ',' << t.games << ',' << t.wins << ',' << t.draws << ',' << t.losses << ',' << t.asWhite << '\n';
    return o.str();
  }
};

// Plays one game from the start with the given hands; White moves first.
inline GameRecord play_game(Player& white, Player& black, const Variant& v, const MatchConfig& cfg) {
  const BoardDef& board = *v.board;
  GameRecord g;
  g.white = white.name();
  g.black = black.name();
  Position pos{0, 0, cfg.whiteStones, cfg.blackStones};
  bool whiteToMove = true;
  int quiet = 0;
  for (int ply = 0;; ++ply) {
    if (auto t = terminal_value(pos, board, v.rules)) {
      if (*t == Terminal::Draw) {
        g.result = GameResult::Draw;
        g.reason = "full board";
      } else {
        g.result = whiteToMove ? GameResult::BlackWins : GameResult::WhiteWins;
        g.reason = pos.my_total() < 3 ? "fewer than three stones" : "blocked";
      }
      return g;
    }
    if (quiet >= cfg.quietDrawAfter) {
      g.result = GameResult::Draw;
      g.reason = std::to_string(cfg.quietDrawAfter) + " quiet moves";
      return g;
    }
    if (ply >= cfg.maxPlies) {
      g.result = GameResult::Draw;
      g.reason = "ply limit";
      return g;
    }
    Player& p = whiteToMove ? white : black;
    Move m = p.choose(pos);
    pos = apply_move(pos, m, board, v.rules);
    g.moves.push_back(format_move(m, board));
    quiet = m.is_quiet() ? quiet + 1 : 0;
    whiteToMove = !whiteToMove;
  }
}

// Colors alternate, `a` taking White in even games. Each game draws its node
// budget uniformly from [budgetMin, budgetMax] and derives player seeds from
// the match seed.
inline MatchResult run_match(Player& a, Player& b, const Variant& v, const MatchConfig& cfg) {
  if (cfg.budgetMin == 0 || cfg.budgetMin > cfg.budgetMax) throw Error("invalid budget interval");
  MatchResult r;
  r.a = a.name();
  r.b = b.name();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::uint64_t> budget(cfg.budgetMin, cfg.budgetMax);
  auto score = [](Tally& t, int s) {
    ++t.games;
    if (s > 0) ++t.wins;
    else if (s < 0) ++t.losses;
    else ++t.draws;
  };
  for (int i = 0; i < cfg.games; ++i) {
    const bool aWhite = i % 2 == 0;
    const std::uint64_t bud = budget(rng);
    a.new_game(bud, rng());
    b.new_game(bud, rng());
    GameRecord g;
    try {
      g = aWhite ? play_game(a, b, v, cfg) : play_game(b, a, v, cfg);
    } catch (const std::exception& e) {
      r.error = "game " + std::to_string(i + 1) + ": " + e.what();
      return r;
    }
    g.budget = bud;
    int whiteScore = g.result == GameResult::WhiteWins ? 1 : g.result == GameResult::BlackWins ? -1 : 0;
    score(r.tallyA, aWhite ? whiteScore : -whiteScore);
    score(r.tallyB, aWhite ? -whiteScore : whiteScore);
    (aWhite ? r.tallyA : r.tallyB).asWhite++;
    r.games.push_back(std::move(g));
  }
  return r;
}

}  // namespace mills
