#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

#include "mills/board.hpp"

#ifndef MILLS_DATA_DIR
#define MILLS_DATA_DIR "boards"
#endif

namespace mills {

struct RuleFlags {
  int stonesToPlace = 9;
  bool laskerPlacement = false;
  bool fullBoardDraw = false;
  bool captureFromMillWhenAllInMills = true;
  bool flyingAtThree = true;

  std::uint8_t flag_bits() const {
    return static_cast<std::uint8_t>((laskerPlacement ? 1 : 0) | (fullBoardDraw ? 2 : 0) |
                                     (captureFromMillWhenAllInMills ? 4 : 0) |
                                     (flyingAtThree ? 8 : 0));
  }
  static RuleFlags from_bits(int stones, std::uint8_t bits) {
    RuleFlags r;
    r.stonesToPlace = stones;
    r.laskerPlacement = bits & 1;
    r.fullBoardDraw = bits & 2;
    r.captureFromMillWhenAllInMills = bits & 4;
    r.flyingAtThree = bits & 8;
    return r;
  }
  void validate() const {
    if (stonesToPlace < 3) throw Error("rules: stonesToPlace must be at least 3");
  }
  friend bool operator==(const RuleFlags&, const RuleFlags&) = default;

  static RuleFlags standard() { return RuleFlags{}; }
  static RuleFlags lasker() {
    RuleFlags r;
    r.stonesToPlace = 10;
    r.laskerPlacement = true;
    return r;
  }
  static RuleFlags morabaraba(bool fullBoardDraw = false) {
    RuleFlags r;
    r.stonesToPlace = 12;
    r.fullBoardDraw = fullBoardDraw;
    return r;
  }
};

// A board plus rules; shared read-only by every component.
struct Variant {
  std::string name;
  std::shared_ptr<const BoardDef> board;
  RuleFlags rules;
};

inline std::filesystem::path default_board_dir() {
  if (const char* env = std::getenv("MILLS_BOARD_DIR")) return env;
  return MILLS_DATA_DIR;
}

// "standard", "lasker", "morabaraba" (optionally with "-fbd" for the full
// board draw rule), or a board name found in the board directory with
// standard rules.
inline Variant make_variant(const std::string& name,
                            const std::filesystem::path& boardDir = default_board_dir()) {
  Variant v;
  v.name = name;
  std::string boardName = name;
  if (name == "standard") {
    v.rules = RuleFlags::standard();
  } else if (name == "lasker") {
    v.rules = RuleFlags::lasker();
    boardName = "standard";
  } else if (name == "morabaraba" || name == "morabaraba-fbd") {
    v.rules = RuleFlags::morabaraba(name == "morabaraba-fbd");
    boardName = "morabaraba";
  }
  v.board = std::make_shared<const BoardDef>(BoardDef::load(boardDir / (boardName + ".board")));
  v.rules.validate();
  return v;
}

inline Variant make_variant(std::shared_ptr<const BoardDef> board, RuleFlags rules,
                            std::string name = "custom") {
  rules.validate();
  return Variant{std::move(name), std::move(board), rules};
}

}  // namespace mills
