#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace hcnas {

// Minimal arbitrary-precision unsigned integer: enough for exact search-space
// counts, which overflow 64 bits already at moderate sizes.
class BigUint {
 public:
  BigUint() = default;

  explicit BigUint(std::uint64_t v) {
    while (v > 0) {
      limbs_.push_back(static_cast<std::uint32_t>(v % kBase));
      v /= kBase;
    }
  }

  bool is_zero() const { return limbs_.empty(); }

  BigUint& operator+=(const BigUint& o) {
    const std::size_t n = std::max(limbs_.size(), o.limbs_.size());
    limbs_.resize(n, 0);
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint64_t s = carry + limbs_[i];
      if (i < o.limbs_.size()) s += o.limbs_[i];
      limbs_[i] = static_cast<std::uint32_t>(s % kBase);
      carry = s / kBase;
    }
    if (carry > 0) limbs_.push_back(static_cast<std::uint32_t>(carry));
    return *this;
  }

  BigUint& operator*=(std::uint64_t m) {
    if (m == 0) {
      limbs_.clear();
      return *this;
    }
    std::uint64_t carry = 0;
    for (auto& limb : limbs_) {
      const std::uint64_t p = static_cast<std::uint64_t>(limb) * m + carry;
      limb = static_cast<std::uint32_t>(p % kBase);
      carry = p / kBase;
    }
    while (carry > 0) {
      limbs_.push_back(static_cast<std::uint32_t>(carry % kBase));
      carry /= kBase;
    }
    return *this;
  }

  BigUint& operator*=(const BigUint& o) {
    std::vector<std::uint32_t> out(limbs_.size() + o.limbs_.size(), 0);
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
      std::uint64_t carry = 0;
      for (std::size_t j = 0; j < o.limbs_.size(); ++j) {
        std::uint64_t cur = out[i + j] + carry +
                            static_cast<std::uint64_t>(limbs_[i]) * o.limbs_[j];
        out[i + j] = static_cast<std::uint32_t>(cur % kBase);
        carry = cur / kBase;
      }
      std::size_t k = i + o.limbs_.size();
      while (carry > 0) {
        std::uint64_t cur = out[k] + carry;
        out[k] = static_cast<std::uint32_t>(cur % kBase);
        carry = cur / kBase;
        ++k;
      }
    }
    while (!out.empty() && out.back() == 0) out.pop_back();
    limbs_ = std::move(out);
    return *this;
  }

  BigUint pow(unsigned e) const {
    BigUint result(1);
    BigUint base = *this;
    while (e > 0) {
      if (e & 1u) result *= base;
      base *= base;
      e >>= 1u;
    }
    return result;
  }

  // Returns the value if it fits in uint64, otherwise max().
  std::uint64_t to_u64_saturating() const {
    std::uint64_t v = 0;
    for (std::size_t i = limbs_.size(); i-- > 0;) {
      if (v > (std::numeric_limits<std::uint64_t>::max() - limbs_[i]) / kBase)
        return std::numeric_limits<std::uint64_t>::max();
      v = v * kBase + limbs_[i];
    }
    return v;
  }

  std::string to_string() const {
    if (limbs_.empty()) return "0";
    std::string s = std::to_string(limbs_.back());
    for (std::size_t i = limbs_.size() - 1; i-- > 0;) {
      std::string part = std::to_string(limbs_[i]);
      s += std::string(9 - part.size(), '0') + part;
    }
    return s;
  }

  friend bool operator==(const BigUint& a, const BigUint& b) {
    return a.limbs_ == b.limbs_;
  }

  friend bool operator<=(const BigUint& a, std::uint64_t b) {
    return a.to_u64_saturating() <= b;
  }

 private:
  static constexpr std::uint64_t kBase = 1000000000;
  std::vector<std::uint32_t> limbs_;  // little-endian, base 1e9
};

}  // namespace hcnas
