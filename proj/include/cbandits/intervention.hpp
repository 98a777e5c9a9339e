#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cbandits/errors.hpp"

namespace cbandits {

/// A do() assignment over the observed vertices: each coordinate is 0, 1, or
/// unset ('*'). Latent vertices are not indexed and can never be intervened.
class Intervention {
 public:
  static constexpr std::uint8_t kUnset = 2;

  Intervention() = default;
  explicit Intervention(int n) : values_(static_cast<std::size_t>(n), kUnset) {}

  /// Parses a string over the alphabet {0,1,*}.
  static Intervention parse(std::string_view text) {
    Intervention out(static_cast<int>(text.size()));
    for (std::size_t i = 0; i < text.size(); ++i) {
      switch (text[i]) {
        case '0': out.values_[i] = 0; break;
        case '1': out.values_[i] = 1; break;
        case '*': out.values_[i] = kUnset; break;
        default: throw ParseError("intervention string may contain only 0, 1, *");
      }
    }
    return out;
  }

  std::string str() const {
    std::string s(values_.size(), '*');
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (values_[i] != kUnset) s[i] = static_cast<char>('0' + values_[i]);
    }
    return s;
  }

  int size() const { return static_cast<int>(values_.size()); }
  bool intervened(int i) const { return values_[static_cast<std::size_t>(i)] != kUnset; }

  /// Assigned value; meaningful only when intervened(i).
  int value(int i) const { return values_[static_cast<std::size_t>(i)]; }

  void set(int i, int v) { values_[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v & 1); }
  void unset(int i) { values_[static_cast<std::size_t>(i)] = kUnset; }

  int num_intervened() const {
    int c = 0;
    for (auto v : values_) c += (v != kUnset);
    return c;
  }

  bool empty_intervention() const { return num_intervened() == 0; }

  const std::vector<std::uint8_t>& raw() const { return values_; }

  friend bool operator==(const Intervention&, const Intervention&) = default;

 private:
  std::vector<std::uint8_t> values_;
};

/// A realized binary assignment to the observed vertices.
struct Assignment {
  std::vector<std::uint8_t> bits;

  Assignment() = default;
  explicit Assignment(int n) : bits(static_cast<std::size_t>(n), 0) {}

  int size() const { return static_cast<int>(bits.size()); }
  std::uint8_t operator[](int i) const { return bits[static_cast<std::size_t>(i)]; }
  std::uint8_t& operator[](int i) { return bits[static_cast<std::size_t>(i)]; }

  std::string str() const {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i) s[i] = static_cast<char>('0' + bits[i]);
    return s;
  }

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Membership test for Z(A): the assignment agrees with every set coordinate.
inline bool complies(const Assignment& z, const Intervention& a) {
  for (int i = 0; i < a.size(); ++i) {
    if (a.intervened(i) && z[i] != a.value(i)) return false;
  }
  return true;
}

}  // namespace cbandits
