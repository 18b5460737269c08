#include "weier/symbolic.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "weier/errors.hpp"

namespace weier {

Word::Word(int b, std::vector<std::uint8_t> symbols) : b_(b), s_(std::move(symbols)) {
  if (b < 2 || b > 255) throw InvalidArgument("alphabet size must lie in [2,255]");
  for (auto c : s_)
    if (c >= b) throw InvalidArgument("symbol " + std::to_string(c) + " outside alphabet of size " + std::to_string(b));
}

Word Word::parse(int b, std::string_view digits) {
  std::vector<std::uint8_t> s;
  for (char ch : digits) {
    if (ch < '0' || ch > '9') throw InvalidArgument("word digits must be 0-9, got '" + std::string(1, ch) + "'");
    s.push_back(static_cast<std::uint8_t>(ch - '0'));
  }
  return Word(b, std::move(s));
}

Word Word::from_index(int b, int len, std::uint64_t idx) {
  std::vector<std::uint8_t> s(static_cast<std::size_t>(len));
  for (int i = len - 1; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(idx % static_cast<std::uint64_t>(b));
    idx /= static_cast<std::uint64_t>(b);
  }
  return Word(b, std::move(s));
}

Word Word::reversed() const {
  Word w = *this;
  std::reverse(w.s_.begin(), w.s_.end());
  return w;
}

Word Word::prefix(std::size_t n) const {
  Word w = *this;
  w.s_.resize(std::min(n, s_.size()));
  return w;
}

Word Word::operator+(const Word& o) const {
  if (!s_.empty() && !o.s_.empty() && o.b_ != b_) throw InvalidArgument("concatenating words over different alphabets");
  Word w = s_.empty() ? Word(o.b_, {}) : *this;
  w.s_.insert(w.s_.end(), o.s_.begin(), o.s_.end());
  return w;
}

double Word::address() const {
  double x = 0.0;
  for (auto it = s_.rbegin(); it != s_.rend(); ++it) x = (x + *it) / b_;
  return x;
}

std::string Word::str() const {
  std::string out;
  for (auto c : s_) {
    if (b_ <= 10) out.push_back(static_cast<char>('0' + c));
    else {
      if (!out.empty()) out.push_back('.');
      out += std::to_string(c);
    }
  }
  return out;
}

Code::Code(Word preperiod, Word cycle) : pre_(std::move(preperiod)), cycle_(std::move(cycle)) {
  if (cycle_.empty()) throw InvalidArgument("code cycle must be nonempty");
  if (!pre_.empty() && pre_.base() != cycle_.base()) throw InvalidArgument("preperiod and cycle alphabets differ");
  if (pre_.empty()) pre_ = Word(cycle_.base(), {});
}

Code Code::periodic(Word cycle) { return Code(Word(cycle.base(), {}), std::move(cycle)); }

Code Code::constant(int b, int symbol) {
  return periodic(Word(b, {static_cast<std::uint8_t>(symbol)}));
}

Code Code::random(int b, std::uint64_t seed, std::size_t prefix_len, std::size_t cycle_len) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, b - 1);
  std::vector<std::uint8_t> pre(prefix_len), cyc(std::max<std::size_t>(cycle_len, 1));
  for (auto& c : pre) c = static_cast<std::uint8_t>(d(rng));
  for (auto& c : cyc) c = static_cast<std::uint8_t>(d(rng));
  return Code(Word(b, std::move(pre)), Word(b, std::move(cyc)));
}

Code Code::parse(int b, std::string_view text) {
  const auto open = text.find('(');
  const auto close = text.find(')');
  if (open == std::string_view::npos || close == std::string_view::npos || close != text.size() - 1 || close <= open + 1)
    throw InvalidArgument("code must look like pre(cycle), e.g. 1(0)");
  return Code(Word::parse(b, text.substr(0, open)), Word::parse(b, text.substr(open + 1, close - open - 1)));
}

Code Code::shift(std::size_t k) const {
  const std::size_t p = pre_.size();
  if (k <= p) {
    std::vector<std::uint8_t> s(pre_.symbols().begin() + static_cast<std::ptrdiff_t>(k), pre_.symbols().end());
    return Code(Word(base(), std::move(s)), cycle_);
  }
  const std::size_t r = (k - p) % cycle_.size();
  std::vector<std::uint8_t> c(cycle_.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = cycle_.symbols()[(r + i) % cycle_.size()];
  return Code(Word(base(), {}), Word(base(), std::move(c)));
}

Code Code::prepend(const Word& w) const { return Code(w + pre_, cycle_); }

bool Code::same_sequence(const Code& o) const {
  if (base() != o.base()) return false;
  const std::size_t L = std::max(pre_.size(), o.pre_.size()) + std::lcm(cycle_.size(), o.cycle_.size());
  for (std::size_t i = 0; i < L; ++i)
    if (at(i) != o.at(i)) return false;
  return true;
}

std::string Code::str() const { return pre_.str() + "(" + cycle_.str() + ")"; }

}  // namespace weier
