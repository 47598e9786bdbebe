#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace forestore {

// Fixed-size packed bit vector. Coverage sets and coverage-matrix columns are
// stored this way; all binary operations require equal sizes.
class BitSet {
 public:
  BitSet() = default;
  explicit BitSet(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  void set(std::size_t i) { words_[i >> 6] |= (uint64_t{1} << (i & 63)); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(uint64_t{1} << (i & 63)); }
  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }

  void set_all() {
    for (auto& w : words_) w = ~uint64_t{0};
    trim();
  }

  std::size_t count() const {
    std::size_t c = 0;
    for (uint64_t w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool any() const {
    for (uint64_t w : words_)
      if (w != 0) return true;
    return false;
  }
  bool none() const { return !any(); }

  std::size_t intersect_count(const BitSet& other) const {
    std::size_t c = 0;
    for (std::size_t k = 0; k < words_.size(); ++k)
      c += static_cast<std::size_t>(std::popcount(words_[k] & other.words_[k]));
    return c;
  }
  std::size_t union_count(const BitSet& other) const {
    std::size_t c = 0;
    for (std::size_t k = 0; k < words_.size(); ++k)
      c += static_cast<std::size_t>(std::popcount(words_[k] | other.words_[k]));
    return c;
  }
  bool is_subset_of(const BitSet& other) const {
    for (std::size_t k = 0; k < words_.size(); ++k)
      if ((words_[k] & ~other.words_[k]) != 0) return false;
    return true;
  }

  BitSet& operator&=(const BitSet& other) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= other.words_[k];
    return *this;
  }
  BitSet& operator|=(const BitSet& other) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] |= other.words_[k];
    return *this;
  }
  // Removes every bit set in `other`.
  BitSet& subtract(const BitSet& other) {
    for (std::size_t k = 0; k < words_.size(); ++k) words_[k] &= ~other.words_[k];
    return *this;
  }
  BitSet operator~() const {
    BitSet out(*this);
    for (auto& w : out.words_) w = ~w;
    out.trim();
    return out;
  }
  friend BitSet operator&(BitSet a, const BitSet& b) { return a &= b; }
  friend BitSet operator|(BitSet a, const BitSet& b) { return a |= b; }
  friend bool operator==(const BitSet&, const BitSet&) = default;

  template <typename F>
  void for_each(F&& fn) const {
    for (std::size_t k = 0; k < words_.size(); ++k) {
      uint64_t w = words_[k];
      while (w != 0) {
        const int bit = std::countr_zero(w);
        fn(k * 64 + static_cast<std::size_t>(bit));
        w &= w - 1;
      }
    }
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    out.reserve(count());
    for_each([&](std::size_t i) { out.push_back(i); });
    return out;
  }

  std::span<const uint64_t> words() const { return words_; }
  std::span<uint64_t> mutable_words() { return words_; }

 private:
  void trim() {
    if (size_ % 64 != 0 && !words_.empty())
      words_.back() &= (uint64_t{1} << (size_ % 64)) - 1;
  }

  std::size_t size_ = 0;
  std::vector<uint64_t> words_;
};

}  // namespace forestore
