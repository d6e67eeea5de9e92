#include "varicon/quadrature.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "varicon/errors.hpp"

namespace varicon {

int worker_count() {
  if (const char* env = std::getenv("VARICON_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed >= 1) return std::min(parsed, 64);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 8u));
}

namespace {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace

double integrate_on_section(const ExprPtr& integrand, const SectionExpr& sigma,
                            std::span<const double> lo, std::span<const double> hi,
                            int cells, std::span<const double> params, int threads) {
  if (!integrand) throw Error("null integrand");
  const int m = sigma.space()->base_dim();
  if (static_cast<int>(lo.size()) != m || static_cast<int>(hi.size()) != m) {
    throw Error("integration box must have one bound pair per base dimension");
  }
  for (int mu = 0; mu < m; ++mu) {
    if (!(hi[mu] > lo[mu])) {
      throw Error("integration box is empty along axis " + std::to_string(mu));
    }
  }
  if (cells < 1) throw Error("integration needs at least one cell per axis");

  const Prolongation prolonged(sigma, integrand->jet_order(), params);

  std::vector<double> h(m);
  for (int mu = 0; mu < m; ++mu) h[mu] = (hi[mu] - lo[mu]) / cells;
  const std::size_t nodes = static_cast<std::size_t>(cells) + 1;
  std::size_t total = 1;
  for (int mu = 0; mu < m; ++mu) total *= nodes;

  std::vector<double> weighted(total);
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto fill = [&](std::size_t begin, std::size_t end) {
    try {
      std::vector<double> pt(m);
      for (std::size_t idx = begin; idx < end; ++idx) {
        std::size_t rem = idx;
        double w = 1.0;
        for (int mu = 0; mu < m; ++mu) {
          const std::size_t node = rem % nodes;
          rem /= nodes;
          pt[mu] = node == nodes - 1 ? hi[mu] : lo[mu] + h[mu] * node;
          w *= (node == 0 || node == nodes - 1) ? h[mu] / 2 : h[mu];
        }
        weighted[idx] = w * eval(integrand, prolonged.at(pt), params);
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  const std::size_t workers =
      std::min<std::size_t>(threads > 0 ? threads : worker_count(), total);
  if (workers <= 1) {
    fill(0, total);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (total + workers - 1) / workers;
    for (std::size_t w = 1; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      if (begin >= total) break;
      pool.emplace_back(fill, begin, std::min(begin + chunk, total));
    }
    fill(0, std::min(chunk, total));
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  return pairwise_sum(weighted);
}

RefinedIntegral integrate_refined(const ExprPtr& integrand, const SectionExpr& sigma,
                                  std::span<const double> lo, std::span<const double> hi,
                                  int cells, std::span<const double> params, int threads) {
  RefinedIntegral out;
  out.coarse = integrate_on_section(integrand, sigma, lo, hi, cells, params, threads);
  out.fine = integrate_on_section(integrand, sigma, lo, hi, 2 * cells, params, threads);
  out.value = out.fine + (out.fine - out.coarse) / 3.0;
  return out;
}

}  // namespace varicon
