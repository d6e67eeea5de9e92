#pragma once

#include <vector>

#include "varicon/space.hpp"

namespace varicon {

// Numeric data of a jet of a section at one base point: base coordinates,
// field values, and symmetric derivative tables up to `order` (at most 3).
// Symmetry of mixed derivatives is an invariant of the storage itself: each
// unordered derivative combination occupies exactly one slot.
class JetPoint {
 public:
  JetPoint(int base_dim, int field_count, int order);

  int base_dim() const noexcept { return base_dim_; }
  int field_count() const noexcept { return field_count_; }
  int order() const noexcept { return order_; }

  double base(int mu) const;
  void set_base(int mu, double v);

  // coord with an empty multi-index reads/writes the field value.
  double coord(const JetCoord& c) const;
  void set_coord(const JetCoord& c, double v);

  // Number of distinct symmetric multi-indices of length k over m symbols.
  static int sym_count(int m, int k);
  // Rank of a sorted multi-index among all sorted multi-indices of its
  // length, in lexicographic order.
  static int sym_rank(const MultiIndex& mi, int m);

 private:
  const std::vector<double>& table(int k) const;
  std::vector<double>& table(int k);

  int base_dim_;
  int field_count_;
  int order_;
  std::vector<double> base_;
  std::vector<double> values_;
  std::vector<double> d1_, d2_, d3_;  // field-major: slot = field * sym_count + rank
};

}  // namespace varicon
