#include "busweaver/bitvector.hpp"

#include <algorithm>
#include <stdexcept>

namespace busweaver {

namespace {
std::size_t word_count(Width width) { return (width + 63) / 64; }
}  // namespace

BitVector::BitVector(Width width, std::uint64_t value)
    : width_(width), words_(word_count(width), 0) {
  if (!words_.empty()) words_[0] = value;
  clear_padding();
}

BitVector BitVector::ones(Width width) {
  BitVector v(width);
  std::fill(v.words_.begin(), v.words_.end(), ~std::uint64_t{0});
  v.clear_padding();
  return v;
}

BitVector BitVector::from_binary(std::string_view bits) {
  std::string digits;
  for (char c : bits) {
    if (c == '_') continue;
    if (c != '0' && c != '1') throw std::invalid_argument("non-binary digit in bit string");
    digits.push_back(c);
  }
  BitVector v(static_cast<Width>(digits.size()));
  for (Width i = 0; i < v.width_; ++i) v.set(i, digits[digits.size() - 1 - i] == '1');
  return v;
}

void BitVector::set(Width bit, bool value) {
  const std::uint64_t mask = std::uint64_t{1} << (bit % 64);
  if (value)
    words_[bit / 64] |= mask;
  else
    words_[bit / 64] &= ~mask;
}

bool BitVector::is_zero() const {
  return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
}

void BitVector::clear_padding() {
  if (width_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (width_ % 64)) - 1;
}

BitVector BitVector::slice(Width low, Width width) const {
  if (low + width > width_) throw std::out_of_range("BitVector::slice beyond width");
  BitVector out(width);
  if (low % 64 == 0) {
    for (std::size_t w = 0; w < out.words_.size(); ++w) out.words_[w] = words_[low / 64 + w];
    out.clear_padding();
    return out;
  }
  for (Width i = 0; i < width; ++i) out.set(i, get(low + i));
  return out;
}

BitVector BitVector::concat(const BitVector& hi, const BitVector& lo) {
  BitVector out(hi.width_ + lo.width_);
  out.words_ = lo.words_;
  out.words_.resize(word_count(out.width_), 0);
  if (lo.width_ % 64 == 0) {
    for (std::size_t w = 0; w < hi.words_.size(); ++w) out.words_[lo.width_ / 64 + w] = hi.words_[w];
  } else {
    for (Width i = 0; i < hi.width_; ++i) out.set(lo.width_ + i, hi.get(i));
  }
  return out;
}

BitVector BitVector::reversed() const {
  BitVector out(width_);
  for (Width i = 0; i < width_; ++i) out.set(width_ - 1 - i, get(i));
  return out;
}

BitVector BitVector::replicated(std::uint32_t count) const {
  BitVector out(0);
  for (std::uint32_t k = 0; k < count; ++k) out = concat(*this, out);
  return out;
}

BitVector BitVector::operator~() const {
  BitVector out = *this;
  for (auto& w : out.words_) w = ~w;
  out.clear_padding();
  return out;
}

#define BUSWEAVER_BITWISE(OP)                                                           \
  BitVector BitVector::operator OP(const BitVector& rhs) const {                        \
    if (rhs.width_ != width_) throw std::invalid_argument("BitVector width mismatch");  \
    BitVector out = *this;                                                              \
    for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] OP## = rhs.words_[w]; \
    return out;                                                                         \
  }
BUSWEAVER_BITWISE(&)
BUSWEAVER_BITWISE(|)
BUSWEAVER_BITWISE(^)
#undef BUSWEAVER_BITWISE

BitVector BitVector::operator+(const BitVector& rhs) const {
  if (rhs.width_ != width_) throw std::invalid_argument("BitVector width mismatch");
  BitVector out(width_);
  unsigned carry = 0;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    const std::uint64_t a = words_[w];
    const std::uint64_t s = a + rhs.words_[w];
    const std::uint64_t t = s + carry;
    carry = (s < a || t < s) ? 1 : 0;
    out.words_[w] = t;
  }
  out.clear_padding();
  return out;
}

BitVector BitVector::operator-(const BitVector& rhs) const {
  BitVector one(width_, 1);
  return *this + (~rhs + one);
}

std::string BitVector::to_binary() const {
  std::string s;
  s.reserve(width_);
  for (Width i = width_; i-- > 0;) s.push_back(get(i) ? '1' : '0');
  return s;
}

std::string BitVector::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const Width nibbles = (width_ + 3) / 4;
  std::string s;
  s.reserve(nibbles);
  for (Width n = nibbles; n-- > 0;) {
    unsigned digit = 0;
    for (Width b = 0; b < 4; ++b) {
      const Width bit = n * 4 + b;
      if (bit < width_ && get(bit)) digit |= 1u << b;
    }
    s.push_back(kDigits[digit]);
  }
  return s;
}

}  // namespace busweaver
