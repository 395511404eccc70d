#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace minergraph {

// A 20-byte account address. Ordering is bytewise, which coincides with the
// lexicographic order of the normalized lowercase hex form.
class Address {
 public:
  static constexpr std::size_t kBytes = 20;

  constexpr Address() = default;
  explicit constexpr Address(const std::array<std::uint8_t, kBytes>& bytes) : bytes_(bytes) {}

  // Accepts "0x" or "0X" followed by 40 hex digits of either case.
  static std::optional<Address> parse(std::string_view text) {
    if (text.size() != 2 + 2 * kBytes || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) {
      return std::nullopt;
    }
    Address out;
    for (std::size_t i = 0; i < kBytes; ++i) {
      const int hi = hex_value(text[2 + 2 * i]);
      const int lo = hex_value(text[3 + 2 * i]);
      if (hi < 0 || lo < 0) return std::nullopt;
      out.bytes_[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
  }

  std::string str() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out(2 + 2 * kBytes, '0');
    out[1] = 'x';
    for (std::size_t i = 0; i < kBytes; ++i) {
      out[2 + 2 * i] = kDigits[bytes_[i] >> 4];
      out[3 + 2 * i] = kDigits[bytes_[i] & 0xF];
    }
    return out;
  }

  const std::array<std::uint8_t, kBytes>& bytes() const noexcept { return bytes_; }

  friend constexpr auto operator<=>(const Address&, const Address&) = default;
  friend constexpr bool operator==(const Address&, const Address&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Address& a) { return os << a.str(); }

 private:
  static constexpr int hex_value(char c) noexcept {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  }

  std::array<std::uint8_t, kBytes> bytes_{};
};

struct AddressHash {
  std::size_t operator()(const Address& a) const noexcept {
    std::uint64_t h;
    std::memcpy(&h, a.bytes().data() + 4, sizeof h);
    return static_cast<std::size_t>(h * 0x9E3779B97F4A7C15ull);
  }
};

}  // namespace minergraph
