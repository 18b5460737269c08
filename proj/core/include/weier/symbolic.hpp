#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace weier {

// Finite sequence over {0, ..., b-1}.
class Word {
 public:
  Word() = default;
  Word(int b, std::vector<std::uint8_t> symbols);

  static Word parse(int b, std::string_view digits);
  // The length-len word whose base-b digits spell idx, first symbol most significant.
  static Word from_index(int b, int len, std::uint64_t idx);

  int base() const { return b_; }
  std::size_t size() const { return s_.size(); }
  bool empty() const { return s_.empty(); }
  int operator[](std::size_t i) const { return s_[i]; }
  const std::vector<std::uint8_t>& symbols() const { return s_; }

  Word reversed() const;
  Word prefix(std::size_t n) const;
  Word operator+(const Word& o) const;
  // x-coordinate of g_word(0,0): sum_k i_k b^{-k}
  double address() const;
  std::string str() const;

  bool operator==(const Word&) const = default;

 private:
  int b_ = 2;
  std::vector<std::uint8_t> s_;
};

// Eventually periodic element preperiod . cycle^infinity of the full shift.
class Code {
 public:
  Code(Word preperiod, Word cycle);

  static Code periodic(Word cycle);
  static Code constant(int b, int symbol);
  // Seeded stand-in for a typical point of the Bernoulli measure: a random
  // prefix followed by a random cycle, both drawn from the seed.
  static Code random(int b, std::uint64_t seed, std::size_t prefix_len = 256, std::size_t cycle_len = 64);
  // "pre(cycle)" or "(cycle)", digits only.
  static Code parse(int b, std::string_view text);

  int base() const { return cycle_.base(); }
  // Symbol j_{n+1} (zero based).
  int at(std::size_t n) const {
    const std::size_t p = pre_.size();
    return n < p ? pre_[n] : cycle_[(n - p) % cycle_.size()];
  }
  const Word& preperiod() const { return pre_; }
  const Word& cycle() const { return cycle_; }

  Code shift(std::size_t k = 1) const;
  // word . code
  Code prepend(const Word& w) const;
  bool same_sequence(const Code& o) const;
  std::string str() const;

  bool operator==(const Code&) const = default;

 private:
  Word pre_;
  Word cycle_;
};

}  // namespace weier
