#pragma once

#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rwa/error.hpp"

namespace rwa {

inline constexpr unsigned kDefaultOrderCap = 8;

/// Exponent vector (s_1, ..., s_k) of a mixed moment E[prod_j X_j^{s_j}].
class MomentIndex {
 public:
  explicit MomentIndex(std::vector<unsigned> s, unsigned order_cap = kDefaultOrderCap)
      : s_(std::move(s)) {
    if (total_order() > order_cap)
      throw CapExceeded("moment total order " + std::to_string(total_order()) +
                        " exceeds the order cap " + std::to_string(order_cap));
  }

  std::size_t size() const noexcept { return s_.size(); }
  unsigned operator[](std::size_t j) const { return s_[j]; }
  unsigned total_order() const noexcept { return std::accumulate(s_.begin(), s_.end(), 0u); }
  bool is_zero() const noexcept { return total_order() == 0; }

  std::span<const unsigned> values() const noexcept { return s_; }
  operator std::span<const unsigned>() const noexcept { return s_; }

  std::string to_string() const {
    std::string out = "(";
    for (std::size_t j = 0; j < s_.size(); ++j) {
      if (j) out += ',';
      out += std::to_string(s_[j]);
    }
    return out + ')';
  }

  friend bool operator==(const MomentIndex&, const MomentIndex&) = default;

 private:
  std::vector<unsigned> s_;
};

/// Every exponent vector of length k with 1 <= total order <= max_order
/// (or 0 <= ... when include_zero), ordered by total order then lexicographically
/// descending in the leading coordinate.
inline std::vector<MomentIndex> moment_indices_up_to(std::size_t k, unsigned max_order,
                                                     bool include_zero = false) {
  std::vector<MomentIndex> out;
  std::vector<unsigned> cur(k, 0);
  // Recursive fill of compositions of `order` into k parts.
  auto fill = [&](auto&& self, std::size_t pos, unsigned remaining) -> void {
    if (pos + 1 == k) {
      cur[pos] = remaining;
      out.emplace_back(cur, max_order);
      return;
    }
    for (unsigned v = remaining + 1; v-- > 0;) {
      cur[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  for (unsigned order = include_zero ? 0 : 1; order <= max_order; ++order) fill(fill, 0, order);
  return out;
}

}  // namespace rwa
