#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mills/common.hpp"

namespace mills {

// Bucket sort of 64-bit payloads by an ordered key. Buckets keep insertion
// order, so the stream is stable. Once the buffered payloads exceed the
// threshold, every bucket is appended to its own scratch file.
template <class Key>
class BucketQueue {
public:
  explicit BucketQueue(std::uint64_t memThresholdBytes = 256ull << 20,
                       std::filesystem::path scratch = {})
      : threshold_(memThresholdBytes), scratch_(std::move(scratch)) {}

  BucketQueue(const BucketQueue&) = delete;
  BucketQueue& operator=(const BucketQueue&) = delete;

  ~BucketQueue() {
    for (auto& [k, b] : buckets_)
      if (!b.file.empty()) std::filesystem::remove(b.file);
  }

  void push(const Key& key, std::uint64_t payload) {
    buckets_[key].mem.push_back(payload);
    ++size_;
    if (++buffered_ * sizeof(std::uint64_t) > threshold_) spill();
  }

  std::uint64_t size() const { return size_; }
  bool spilled() const { return spills_ > 0; }

  // Calls f(key, payload) in key order; the queue is consumed.
  template <class F>
  void drain(F&& f) {
    while (!buckets_.empty()) {
      auto it = buckets_.begin();
      Bucket b = std::move(it->second);
      Key key = it->first;
      buckets_.erase(it);
      if (!b.file.empty()) {
        std::unique_ptr<std::FILE, int (*)(std::FILE*)> in(std::fopen(b.file.c_str(), "rb"), &std::fclose);
        if (!in) throw Error(b.file.string() + ": cannot reopen bucket file");
        std::vector<std::uint64_t> chunk(1 << 16);
        std::size_t n;
        while ((n = std::fread(chunk.data(), sizeof(std::uint64_t), chunk.size(), in.get())) > 0)
          for (std::size_t i = 0; i < n; ++i) f(key, chunk[i]);
        in.reset();
        std::filesystem::remove(b.file);
      }
      for (std::uint64_t p : b.mem) f(key, p);
    }
    size_ = 0;
    buffered_ = 0;
  }

  // Stepwise consumption for merging with another queue.
  class Cursor {
  public:
    explicit Cursor(BucketQueue& q) : q_(&q) { load(); }
    bool done() const { return pos_ >= chunk_.size() && !more(); }
    const Key& key() const { return key_; }
    std::uint64_t payload() const { return chunk_[pos_]; }
    void next() {
      ++pos_;
      if (pos_ >= chunk_.size()) load();
    }

  private:
    bool more() const { return file_ != nullptr || !q_->buckets_.empty(); }
    void load() {
      chunk_.clear();
      pos_ = 0;
      while (chunk_.empty()) {
        if (file_) {
          chunk_.resize(1 << 16);
          std::size_t n = std::fread(chunk_.data(), sizeof(std::uint64_t), chunk_.size(), file_.get());
          chunk_.resize(n);
          if (n > 0) return;
          file_.reset();
          std::filesystem::remove(fileName_);
          chunk_ = std::move(tailMem_);
          tailMem_.clear();
          if (!chunk_.empty()) return;
          continue;
        }
        if (q_->buckets_.empty()) return;
        auto it = q_->buckets_.begin();
        key_ = it->first;
        Bucket b = std::move(it->second);
        q_->buckets_.erase(it);
        if (b.file.empty()) {
          chunk_ = std::move(b.mem);
        } else {
          file_.reset(std::fopen(b.file.c_str(), "rb"));
          if (!file_) throw Error(b.file.string() + ": cannot reopen bucket file");
          fileName_ = b.file;
          tailMem_ = std::move(b.mem);
        }
      }
    }

    struct Closer {
      void operator()(std::FILE* f) const { std::fclose(f); }
    };
    BucketQueue* q_;
    Key key_{};
    std::vector<std::uint64_t> chunk_;
    std::size_t pos_ = 0;
    std::unique_ptr<std::FILE, Closer> file_;
    std::filesystem::path fileName_;
    std::vector<std::uint64_t> tailMem_;
  };

private:
  struct Bucket {
    std::vector<std::uint64_t> mem;
    std::filesystem::path file;
  };

  void spill() {
    std::filesystem::path dir = scratch_.empty() ? std::filesystem::temp_directory_path() : scratch_;
    std::filesystem::create_directories(dir);
    for (auto& [k, b] : buckets_) {
      if (b.mem.empty()) continue;
      if (b.file.empty())
        b.file = dir / ("mills-bucket-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "-" +
                        std::to_string(fileCounter_++) + ".bin");
      std::unique_ptr<std::FILE, int (*)(std::FILE*)> out(std::fopen(b.file.c_str(), "ab"), &std::fclose);
      if (!out) throw Error(b.file.string() + ": cannot open bucket file");
      if (std::fwrite(b.mem.data(), sizeof(std::uint64_t), b.mem.size(), out.get()) != b.mem.size())
        throw Error(b.file.string() + ": bucket write failed");
      b.mem.clear();
      b.mem.shrink_to_fit();
    }
    buffered_ = 0;
    ++spills_;
  }

  std::uint64_t threshold_;
  std::filesystem::path scratch_;
  std::map<Key, Bucket> buckets_;
  std::uint64_t size_ = 0;
  std::uint64_t buffered_ = 0;
  std::uint64_t spills_ = 0;
  std::uint64_t fileCounter_ = 0;
};

// Queue payload: slot in the top byte, index below.
inline std::uint64_t pack_ref(unsigned slot, std::uint64_t index) {
  return (static_cast<std::uint64_t>(slot) << 56) | index;
}
inline unsigned ref_slot(std::uint64_t p) { return static_cast<unsigned>(p >> 56); }
inline std::uint64_t ref_index(std::uint64_t p) { return p & ((std::uint64_t{1} << 56) - 1); }

// Scratch directory from MILLS_SCRATCH, else the system temp directory.
inline std::filesystem::path default_scratch_dir() {
  if (const char* env = std::getenv("MILLS_SCRATCH")) return env;
  return std::filesystem::temp_directory_path();
}

}  // namespace mills
