#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "varicon/errors.hpp"

namespace varicon {

inline constexpr int kMaxJetOrder = 3;

// Symmetric multi-index over base coordinates.  Always stored sorted, so two
// derivative paths that differ only by ordering compare equal.  Length 0
// denotes the field value itself.
class MultiIndex {
 public:
  MultiIndex() = default;

  MultiIndex(std::initializer_list<int> entries) {
    for (int e : entries) push(e);
  }

  // Returns a copy with `mu` merged in, keeping the sorted invariant.
  // Throws OrderError once the result would exceed order 3.
  static MultiIndex raised(const MultiIndex& mi, int mu) {
    MultiIndex out = mi;
    out.push(mu);
    return out;
  }

  int order() const noexcept { return len_; }

  int operator[](int k) const { return idx_[static_cast<std::size_t>(k)]; }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    if (a.len_ != b.len_) return false;
    for (int k = 0; k < a.len_; ++k)
      if (a.idx_[static_cast<std::size_t>(k)] != b.idx_[static_cast<std::size_t>(k)]) return false;
    return true;
  }

  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
    if (a.len_ != b.len_) return a.len_ <=> b.len_;
    for (int k = 0; k < a.len_; ++k) {
      if (auto c = a.idx_[static_cast<std::size_t>(k)] <=> b.idx_[static_cast<std::size_t>(k)];
          c != std::strong_ordering::equal)
        return c;
    }
    return std::strong_ordering::equal;
  }

 private:
  void push(int mu) {
    if (mu < 0) throw SchemaError("multi-index entry must be a base-coordinate index");
    if (len_ >= kMaxJetOrder)
      throw OrderError("order overflow (result would need order-4 jets)");
    // insertion keeping idx_ sorted
    int k = len_;
    while (k > 0 && idx_[static_cast<std::size_t>(k - 1)] > mu) {
      idx_[static_cast<std::size_t>(k)] = idx_[static_cast<std::size_t>(k - 1)];
      --k;
    }
    idx_[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(mu);
    ++len_;
  }

  std::uint8_t len_ = 0;
  std::array<std::uint8_t, kMaxJetOrder> idx_{};
};

// One jet coordinate y^i_I: a field index plus a symmetric multi-index.
struct JetCoord {
  int field = 0;
  MultiIndex index;

  int order() const noexcept { return index.order(); }

  friend bool operator==(const JetCoord&, const JetCoord&) = default;
  friend std::strong_ordering operator<=>(const JetCoord& a, const JetCoord& b) {
    if (auto c = a.field <=> b.field; c != std::strong_ordering::equal) return c;
    return a.index <=> b.index;
  }
};

// Ambient fibered chart: m base coordinates x0..x{m-1}, a list of field
// names, and a list of named real parameters.  Field and parameter names
// share one flat namespace and may not shadow base coordinates, the alias
// `t` (m = 1 only), or the function keywords of the expression grammar.
class Space {
 public:
  Space(int base_dim, std::vector<std::string> fields,
        std::vector<std::string> params = {});

  int base_dim() const noexcept { return base_dim_; }
  int field_count() const noexcept { return static_cast<int>(fields_.size()); }
  int param_count() const noexcept { return static_cast<int>(params_.size()); }

  const std::vector<std::string>& fields() const noexcept { return fields_; }
  const std::vector<std::string>& params() const noexcept { return params_; }

  const std::string& field_name(int i) const { return fields_.at(static_cast<std::size_t>(i)); }
  const std::string& param_name(int i) const { return params_.at(static_cast<std::size_t>(i)); }

  // Return the index of a field / parameter, or -1 when absent.
  int field_index(std::string_view name) const noexcept;
  int param_index(std::string_view name) const noexcept;

  // Resolve x0..x{m-1} (and `t` when m = 1) to a base index, or -1.
  int base_index(std::string_view name) const noexcept;

 private:
  int base_dim_;
  std::vector<std::string> fields_;
  std::vector<std::string> params_;
};

using SpacePtr = std::shared_ptr<const Space>;

SpacePtr make_space(int base_dim, std::vector<std::string> fields,
                    std::vector<std::string> params = {});

}  // namespace varicon
