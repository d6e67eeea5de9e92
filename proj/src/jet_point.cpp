#include "varicon/jet_point.hpp"

#include <string>

namespace varicon {
namespace {

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<int>(r);
}

}  // namespace

JetPoint::JetPoint(int base_dim, int field_count, int order)
    : base_dim_(base_dim), field_count_(field_count), order_(order) {
  if (base_dim < 1 || field_count < 1)
    throw SchemaError("jet point needs positive base and field dimensions");
  if (order < 0 || order > kMaxJetOrder)
    throw OrderError("jet order must lie in [0, 3]");
  base_.assign(static_cast<std::size_t>(base_dim), 0.0);
  values_.assign(static_cast<std::size_t>(field_count), 0.0);
  if (order >= 1) d1_.assign(static_cast<std::size_t>(field_count * sym_count(base_dim, 1)), 0.0);
  if (order >= 2) d2_.assign(static_cast<std::size_t>(field_count * sym_count(base_dim, 2)), 0.0);
  if (order >= 3) d3_.assign(static_cast<std::size_t>(field_count * sym_count(base_dim, 3)), 0.0);
}

double JetPoint::base(int mu) const {
  if (mu < 0 || mu >= base_dim_) throw EvalError("base-coordinate index out of range");
  return base_[static_cast<std::size_t>(mu)];
}

void JetPoint::set_base(int mu, double v) {
  if (mu < 0 || mu >= base_dim_) throw EvalError("base-coordinate index out of range");
  base_[static_cast<std::size_t>(mu)] = v;
}

double JetPoint::coord(const JetCoord& c) const {
  if (c.field < 0 || c.field >= field_count_)
    throw EvalError("field index out of range in jet coordinate");
  const int k = c.index.order();
  if (k == 0) return values_[static_cast<std::size_t>(c.field)];
  if (k > order_)
    throw EvalError("jet point stores order " + std::to_string(order_) +
                    " but order " + std::to_string(k) + " was requested");
  for (int j = 0; j < k; ++j)
    if (c.index[j] >= base_dim_) throw EvalError("multi-index entry exceeds base dimension");
  const int slot = c.field * sym_count(base_dim_, k) + sym_rank(c.index, base_dim_);
  return table(k)[static_cast<std::size_t>(slot)];
}

void JetPoint::set_coord(const JetCoord& c, double v) {
  if (c.field < 0 || c.field >= field_count_)
    throw EvalError("field index out of range in jet coordinate");
  const int k = c.index.order();
  if (k == 0) {
    values_[static_cast<std::size_t>(c.field)] = v;
    return;
  }
  if (k > order_) throw EvalError("jet point does not store this order");
  for (int j = 0; j < k; ++j)
    if (c.index[j] >= base_dim_) throw EvalError("multi-index entry exceeds base dimension");
  const int slot = c.field * sym_count(base_dim_, k) + sym_rank(c.index, base_dim_);
  table(k)[static_cast<std::size_t>(slot)] = v;
}

int JetPoint::sym_count(int m, int k) { return binomial(m + k - 1, k); }

int JetPoint::sym_rank(const MultiIndex& mi, int m) {
  // Count sorted sequences lexicographically below mi.  A sorted sequence of
  // length r with entries >= v exists in binomial(m - v + r - 1, r) variants.
  const int k = mi.order();
  int rank = 0;
  int lo = 0;
  for (int j = 0; j < k; ++j) {
    const int remaining = k - j - 1;
    for (int v = lo; v < mi[j]; ++v)
      rank += binomial(m - v + remaining - 1, remaining);
    lo = mi[j];
  }
  return rank;
}

const std::vector<double>& JetPoint::table(int k) const {
  return k == 1 ? d1_ : k == 2 ? d2_ : d3_;
}

std::vector<double>& JetPoint::table(int k) {
  return k == 1 ? d1_ : k == 2 ? d2_ : d3_;
}

}  // namespace varicon
