#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace busweaver {

using Width = std::uint32_t;

/// Fixed-width two-valued bit vector. Bit 0 is the least significant bit.
/// Storage beyond `width()` is always kept zero so that equality and hashing
/// can compare words directly.
class BitVector {
public:
  BitVector() = default;
  explicit BitVector(Width width, std::uint64_t value = 0);

  static BitVector ones(Width width);
  /// Parses a string of '0'/'1' characters, MSB first. Underscores are ignored.
  static BitVector from_binary(std::string_view bits);

  Width width() const { return width_; }
  bool get(Width bit) const { return (words_[bit / 64] >> (bit % 64)) & 1u; }
  void set(Width bit, bool value);

  /// Low 64 bits of the value.
  std::uint64_t to_u64() const { return words_.empty() ? 0 : words_[0]; }
  bool is_zero() const;

  BitVector slice(Width low, Width width) const;
  /// Concatenation in Verilog order: `hi` occupies the most significant bits.
  static BitVector concat(const BitVector& hi, const BitVector& lo);
  BitVector reversed() const;
  BitVector replicated(std::uint32_t count) const;

  BitVector operator~() const;
  BitVector operator&(const BitVector& rhs) const;
  BitVector operator|(const BitVector& rhs) const;
  BitVector operator^(const BitVector& rhs) const;
  BitVector operator+(const BitVector& rhs) const;
  BitVector operator-(const BitVector& rhs) const;

  bool operator==(const BitVector& rhs) const = default;

  /// MSB-first string of '0'/'1'.
  std::string to_binary() const;
  /// Lowercase hex digits, MSB first, width rounded up to a nibble.
  std::string to_hex() const;

  const std::vector<std::uint64_t>& words() const { return words_; }

private:
  void clear_padding();

  Width width_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace busweaver
