#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mills/indexing.hpp"
#include "mills/rules.hpp"
#include "mills/subspace.hpp"

namespace mills {

enum class SolveMode : std::uint8_t { Strong = 0, Ultra = 1 };

inline std::string to_string(SolveMode m) { return m == SolveMode::Strong ? "strong" : "ultra"; }

inline SolveMode parse_solve_mode(std::string_view s) {
  if (s == "strong") return SolveMode::Strong;
  if (s == "ultra") return SolveMode::Ultra;
  throw Error("unknown solve mode '" + std::string(s) + "'");
}

enum class Outcome : std::uint8_t { Draw, Win, Loss };

// Strong value of a position from its mover's perspective.
struct StrongValue {
  Outcome outcome = Outcome::Draw;
  int dtw = 0;

  friend bool operator==(const StrongValue&, const StrongValue&) = default;
  std::string to_string() const {
    if (outcome == Outcome::Draw) return "D";
    return (outcome == Outcome::Win ? "W" : "L") + std::to_string(dtw);
  }
};

// 0 = draw; otherwise 1 + 2 dtw + win. Wins have odd dtw, losses even.
inline constexpr int kMaxStrongDtw = (0xffff - 2) / 2;

inline std::uint16_t encode_strong(const StrongValue& v) {
  if (v.outcome == Outcome::Draw) return 0;
  if (v.dtw < 0 || v.dtw > kMaxStrongDtw) throw Error("dtw out of range");
  return static_cast<std::uint16_t>(1 + 2 * v.dtw + (v.outcome == Outcome::Win ? 1 : 0));
}

inline StrongValue decode_strong(std::uint16_t code) {
  if (code == 0) return {};
  int c = code - 1;
  return StrongValue{(c & 1) ? Outcome::Win : Outcome::Loss, c >> 1};
}

// Ultra record: relative first key and signed dtw. A residual count-state is
// key 0 with the sentinel dtw.
inline constexpr std::int16_t kNoDtw = std::numeric_limits<std::int16_t>::min();

struct UltraRecord {
  std::int16_t key = 0;
  std::int16_t dtw = kNoDtw;

  bool is_count() const { return key == 0; }
  friend bool operator==(const UltraRecord&, const UltraRecord&) = default;
};

// ---- header -----------------------------------------------------------------

inline constexpr std::array<char, 4> kDbMagic{'M', 'M', 'D', 'B'};
inline constexpr std::uint16_t kDbVersion = 1;
inline constexpr std::size_t kHeaderSize = 128;

struct SubspaceStats {
  std::uint64_t wins = 0;
  std::uint64_t losses = 0;
  std::uint64_t draws = 0;
  int maxDtw = 0;

  std::uint64_t total() const { return wins + losses + draws; }
  friend bool operator==(const SubspaceStats&, const SubspaceStats&) = default;
};

struct DbHeader {
  std::uint16_t version = kDbVersion;
  SolveMode mode = SolveMode::Strong;
  IndexingMode indexing = IndexingMode::Plain;
  std::uint64_t boardDigest = 0;
  int stones = 9;
  std::uint8_t flagBits = 0;
  std::uint8_t recordWidth = 2;
  SubspaceId subspace;
  std::uint64_t records = 0;
  std::int32_t rank = 0;
  std::int32_t winKey = 0;
  std::uint64_t rankDigest = 0;
  std::uint64_t checksum = 0;
  SubspaceStats stats;
};

namespace detail {

template <class T>
void put(unsigned char* p, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) p[i] = static_cast<unsigned char>(
      static_cast<std::make_unsigned_t<T>>(v) >> (8 * i));
}

template <class T>
T get(const unsigned char* p) {
  std::make_unsigned_t<T> v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<std::make_unsigned_t<T>>(p[i]) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace detail

inline std::array<unsigned char, kHeaderSize> encode_header(const DbHeader& h) {
  using detail::put;
  std::array<unsigned char, kHeaderSize> b{};
  std::memcpy(b.data(), kDbMagic.data(), 4);
  put<std::uint16_t>(&b[4], h.version);
  b[6] = static_cast<unsigned char>(h.mode);
  b[7] = static_cast<unsigned char>(h.indexing);
  put<std::uint64_t>(&b[8], h.boardDigest);
  b[16] = static_cast<unsigned char>(h.stones);
  b[17] = h.flagBits;
  b[18] = h.recordWidth;
  b[20] = static_cast<unsigned char>(h.subspace.wb);
  b[21] = static_cast<unsigned char>(h.subspace.bb);
  b[22] = static_cast<unsigned char>(h.subspace.wf);
  b[23] = static_cast<unsigned char>(h.subspace.bf);
  put<std::uint64_t>(&b[24], h.records);
  put<std::int32_t>(&b[32], h.rank);
  put<std::int32_t>(&b[36], h.winKey);
  put<std::uint64_t>(&b[40], h.rankDigest);
  put<std::uint64_t>(&b[48], h.checksum);
  put<std::uint64_t>(&b[56], h.stats.wins);
  put<std::uint64_t>(&b[64], h.stats.losses);
  put<std::uint64_t>(&b[72], h.stats.draws);
  put<std::int32_t>(&b[80], h.stats.maxDtw);
  return b;
}

inline DbHeader decode_header(const unsigned char* b, const std::string& context) {
  using detail::get;
  if (std::memcmp(b, kDbMagic.data(), 4) != 0) throw Error(context + ": not a database file");
  DbHeader h;
  h.version = get<std::uint16_t>(&b[4]);
  if (h.version != kDbVersion)
    throw Error(context + ": unsupported format version " + std::to_string(h.version));
  h.mode = static_cast<SolveMode>(b[6]);
  h.indexing = static_cast<IndexingMode>(b[7]);
  h.boardDigest = get<std::uint64_t>(&b[8]);
  h.stones = b[16];
  h.flagBits = b[17];
  h.recordWidth = b[18];
  h.subspace = SubspaceId{b[20], b[21], b[22], b[23]};
  h.records = get<std::uint64_t>(&b[24]);
  h.rank = get<std::int32_t>(&b[32]);
  h.winKey = get<std::int32_t>(&b[36]);
  h.rankDigest = get<std::uint64_t>(&b[40]);
  h.checksum = get<std::uint64_t>(&b[48]);
  h.stats.wins = get<std::uint64_t>(&b[56]);
  h.stats.losses = get<std::uint64_t>(&b[64]);
  h.stats.draws = get<std::uint64_t>(&b[72]);
  h.stats.maxDtw = get<std::int32_t>(&b[80]);
  return h;
}

// ---- database ---------------------------------------------------------------

// One solved subspace: header plus little-endian records.
class SubspaceDb {
public:
  SubspaceDb() = default;
  SubspaceDb(DbHeader header, std::vector<unsigned char> payload)
      : header_(header), payload_(std::move(payload)) {}

  const DbHeader& header() const { return header_; }
  const SubspaceId& subspace() const { return header_.subspace; }
  SolveMode mode() const { return header_.mode; }
  std::uint64_t size() const { return header_.records; }
  const std::vector<unsigned char>& payload() const { return payload_; }

  StrongValue strong(std::uint64_t i) const {
    return decode_strong(detail::get<std::uint16_t>(&payload_[2 * i]));
  }
  UltraRecord ultra(std::uint64_t i) const {
    return UltraRecord{detail::get<std::int16_t>(&payload_[4 * i]),
                       detail::get<std::int16_t>(&payload_[4 * i + 2])};
  }
  std::uint16_t strong_code(std::uint64_t i) const { return detail::get<std::uint16_t>(&payload_[2 * i]); }

  // Test hook: raw payload access for fault injection.
  std::vector<unsigned char>& mutable_payload() { return payload_; }

private:
  DbHeader header_;
  std::vector<unsigned char> payload_;
};

inline std::string db_file_name(const SubspaceId& s, SolveMode mode) {
  return s.file_stem() + "." + to_string(mode) + ".mmdb";
}

inline SubspaceStats compute_strong_stats(const std::vector<std::uint16_t>& codes) {
  SubspaceStats st;
  for (std::uint16_t c : codes) {
    StrongValue v = decode_strong(c);
    if (v.outcome == Outcome::Draw) ++st.draws;
    else {
      (v.outcome == Outcome::Win ? st.wins : st.losses) += 1;
      st.maxDtw = std::max(st.maxDtw, v.dtw);
    }
  }
  return st;
}

// Classes by absolute key: +winKey wins, -winKey losses, anything else draws.
// maxDtw covers wins and losses only.
inline SubspaceStats compute_ultra_stats(const std::vector<UltraRecord>& recs, int rank, int winKey) {
  SubspaceStats st;
  for (const auto& r : recs) {
    int abs = r.key + rank;
    if (!r.is_count() && abs == winKey) ++st.wins;
    else if (!r.is_count() && abs == -winKey) ++st.losses;
    else {
      ++st.draws;
      continue;
    }
    st.maxDtw = std::max(st.maxDtw, static_cast<int>(r.dtw));
  }
  return st;
}

inline SubspaceDb make_strong_db(DbHeader h, const std::vector<std::uint16_t>& codes) {
  h.mode = SolveMode::Strong;
  h.recordWidth = 2;
  h.records = codes.size();
  h.stats = compute_strong_stats(codes);
  std::vector<unsigned char> payload(codes.size() * 2);
  for (std::size_t i = 0; i < codes.size(); ++i) detail::put<std::uint16_t>(&payload[2 * i], codes[i]);
  h.checksum = fnv1a64(payload.data(), payload.size());
  return SubspaceDb(h, std::move(payload));
}

inline SubspaceDb make_ultra_db(DbHeader h, const std::vector<UltraRecord>& recs) {
  h.mode = SolveMode::Ultra;
  h.recordWidth = 4;
  h.records = recs.size();
  h.stats = compute_ultra_stats(recs, h.rank, h.winKey);
  std::vector<unsigned char> payload(recs.size() * 4);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    detail::put<std::int16_t>(&payload[4 * i], recs[i].key);
    detail::put<std::int16_t>(&payload[4 * i + 2], recs[i].dtw);
  }
  h.checksum = fnv1a64(payload.data(), payload.size());
  return SubspaceDb(h, std::move(payload));
}

inline DbHeader base_header(const Variant& v, const SubspaceId& s, IndexingMode indexing) {
  DbHeader h;
  h.indexing = indexing;
  h.boardDigest = v.board->digest();
  h.stones = v.rules.stonesToPlace;
  h.flagBits = v.rules.flag_bits();
  h.subspace = s;
  return h;
}

// Writes to a temporary name in the same directory, then renames.
inline void write_db(const std::filesystem::path& path, const SubspaceDb& db) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(tmp.string() + ": cannot open for writing");
    auto h = encode_header(db.header());
    out.write(reinterpret_cast<const char*>(h.data()), h.size());
    out.write(reinterpret_cast<const char*>(db.payload().data()),
              static_cast<std::streamsize>(db.payload().size()));
    if (!out) throw Error(tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

inline DbHeader read_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(path.string() + ": cannot open");
  std::array<unsigned char, kHeaderSize> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (in.gcount() != static_cast<std::streamsize>(b.size())) throw Error(path.string() + ": truncated header");
  return decode_header(b.data(), path.string());
}

// What a reader expects; unset fields are not checked.
struct DbRequest {
  std::optional<SolveMode> mode;
  std::optional<std::uint64_t> boardDigest;
  std::optional<std::uint8_t> flagBits;
  std::optional<SubspaceId> subspace;
  std::optional<IndexingMode> indexing;
};

inline SubspaceDb read_db(const std::filesystem::path& path, const DbRequest& req = {}) {
  const std::string ctx = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ctx + ": cannot open");
  std::array<unsigned char, kHeaderSize> b{};
  in.read(reinterpret_cast<char*>(b.data()), b.size());
  if (in.gcount() != static_cast<std::streamsize>(b.size())) throw Error(ctx + ": truncated header");
  DbHeader h = decode_header(b.data(), ctx);
  if (req.mode && *req.mode != h.mode)
    throw Error(ctx + ": mode mismatch (file is " + to_string(h.mode) + ", requested " +
                to_string(*req.mode) + ")");
  if (req.boardDigest && *req.boardDigest != h.boardDigest) throw Error(ctx + ": board mismatch");
  if (req.flagBits && *req.flagBits != h.flagBits) throw Error(ctx + ": rule flag mismatch");
  if (req.subspace && *req.subspace != h.subspace)
    throw Error(ctx + ": subspace mismatch (file holds " + h.subspace.to_string() + ")");
  if (req.indexing && *req.indexing != h.indexing) throw Error(ctx + ": indexing mode mismatch");
  const std::uint64_t width = h.mode == SolveMode::Strong ? 2 : 4;
  if (h.recordWidth != width) throw Error(ctx + ": bad record width");
  std::vector<unsigned char> payload(h.records * width);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (in.gcount() != static_cast<std::streamsize>(payload.size())) throw Error(ctx + ": truncated payload");
  if (in.peek() != std::char_traits<char>::eof()) throw Error(ctx + ": trailing bytes after payload");
  if (fnv1a64(payload.data(), payload.size()) != h.checksum) throw Error(ctx + ": checksum mismatch");
  return SubspaceDb(h, std::move(payload));
}

// Lazily loaded databases of one directory, shared read-only.
class DbSet {
public:
  DbSet(std::filesystem::path dir, Variant variant, SolveMode mode, IndexingMode indexing)
      : dir_(std::move(dir)), variant_(std::move(variant)), mode_(mode),
        indexers_(variant_.board, indexing) {}

  const Variant& variant() const { return variant_; }
  SolveMode mode() const { return mode_; }
  IndexingMode indexing() const { return indexers_.mode(); }
  const IndexerCache& indexers() const { return indexers_; }
  const std::filesystem::path& dir() const { return dir_; }

  bool has(const SubspaceId& s) const {
    std::lock_guard lock(mu_);
    return dbs_.count(s) || std::filesystem::exists(dir_ / db_file_name(s, mode_));
  }

  std::shared_ptr<const SubspaceDb> get(const SubspaceId& s) const {
    std::lock_guard lock(mu_);
    auto it = dbs_.find(s);
    if (it != dbs_.end()) return it->second;
    auto path = dir_ / db_file_name(s, mode_);
    if (!std::filesystem::exists(path))
      throw Error("missing database for subspace " + s.to_string() + " (" + path.string() + ")");
    DbRequest req;
    req.mode = mode_;
    req.boardDigest = variant_.board->digest();
    req.flagBits = variant_.rules.flag_bits();
    req.subspace = s;
    req.indexing = indexers_.mode();
    auto db = std::make_shared<const SubspaceDb>(read_db(path, req));
    dbs_.emplace(s, db);
    return db;
  }

  // Installs an in-memory database (tests, freshly solved units).
  void put(std::shared_ptr<const SubspaceDb> db) {
    std::lock_guard lock(mu_);
    dbs_[db->subspace()] = std::move(db);
  }

  void drop(const SubspaceId& s) {
    std::lock_guard lock(mu_);
    dbs_.erase(s);
  }

  std::uint64_t index_of(const Position& p) const {
    return indexers_.get(subspace_of(p))->canonical_rank(p);
  }

  // Every subspace with a file of this mode in the directory.
  std::vector<SubspaceId> available() const {
    std::vector<SubspaceId> out;
    if (!std::filesystem::exists(dir_)) return out;
    const std::string suffix = "." + to_string(mode_) + ".mmdb";
    for (const auto& e : std::filesystem::directory_iterator(dir_)) {
      std::string n = e.path().filename().string();
      if (n.size() > suffix.size() && n.compare(n.size() - suffix.size(), suffix.size(), suffix) == 0) {
        try {
          out.push_back(parse_subspace(n.substr(0, n.size() - suffix.size())));
        } catch (const Error&) {
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

private:
  std::filesystem::path dir_;
  Variant variant_;
  SolveMode mode_;
  IndexerCache indexers_;
  mutable std::mutex mu_;
  mutable std::map<SubspaceId, std::shared_ptr<const SubspaceDb>> dbs_;
};

// ---- statistics rendering ---------------------------------------------------

// Rounds half away from zero; "0⁺" marks a nonzero share that rounds to 0.
inline std::string format_percent(std::uint64_t part, std::uint64_t total) {
  if (total == 0) return "-";
  double pct = 100.0 * static_cast<double>(part) / static_cast<double>(total);
  long r = std::lround(pct);
  if (r == 0 && part > 0) return "0⁺";
  return std::to_string(r);
}

inline std::string format_wdl(const SubspaceStats& st) {
  return format_percent(st.wins, st.total()) + " / " + format_percent(st.draws, st.total()) + " / " +
         format_percent(st.losses, st.total());
}

inline std::string stats_csv_header() { return "subspace,total,wins,draws,losses,win_pct,draw_pct,loss_pct,max_dtw"; }

inline std::string stats_csv_row(const SubspaceId& s, const SubspaceStats& st) {
  std::ostringstream o;
  auto pct = [&](std::uint64_t x) {
    std::ostringstream p;
    p << std::fixed << std::setprecision(4)
      << (st.total() ? 100.0 * static_cast<double>(x) / static_cast<double>(st.total()) : 0.0);
    return p.str();
  };
  o << '"' << s.to_string() << '"' << ',' << st.total() << ',' << st.wins << ',' << st.draws << ','
    << st.losses << ',' << pct(st.wins) << ',' << pct(st.draws) << ',' << pct(st.losses) << ','
    << st.maxDtw;
  return o.str();
}

// Grid of (wb, bb) cells for subspaces with empty hands: rows are the mover's
// stones, columns the opponent's. `cell` renders one entry.
template <class Cell>
std::string render_grid(const std::map<SubspaceId, SubspaceStats>& stats, Cell cell) {
  int lo = 99, hi = -1;
  for (const auto& [s, st] : stats) {
    if (s.wf != 0 || s.bf != 0) continue;
    lo = std::min({lo, s.wb, s.bb});
    hi = std::max({hi, s.wb, s.bb});
  }
  if (hi < 0) return "";
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> head{"w\\b"};
  for (int b = lo; b <= hi; ++b) head.push_back(std::to_string(b));
  rows.push_back(head);
  for (int w = lo; w <= hi; ++w) {
    std::vector<std::string> r{std::to_string(w)};
    for (int b = lo; b <= hi; ++b) {
      auto it = stats.find(SubspaceId{w, b, 0, 0});
      r.push_back(it == stats.end() ? "" : cell(it->second));
    }
    rows.push_back(r);
  }
  std::vector<std::size_t> width(rows[0].size(), 0);
  auto visible = [](const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
  };
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], visible(r[i]));
  std::ostringstream o;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) o << "  ";
      o << std::string(width[i] - visible(r[i]), ' ') << r[i];
    }
    o << '\n';
  }
  return o.str();
}

}  // namespace mills
