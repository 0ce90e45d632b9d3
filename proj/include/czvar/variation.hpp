#pragma once

#include <span>
#include <vector>

#include "czvar/operators.hpp"

namespace czvar {

/// Value of the rho-variation together with a maximizing chain of grid
/// indices. Re-summing |F_{i_{k+1}} - F_{i_k}|^rho over the chain
/// reproduces value^rho.
struct VariationResult {
  double value = 0.0;
  std::vector<int> chain;
};

/// Exact supremum of (sum_k |F_{i_{k+1}} - F_{i_k}|^rho)^{1/rho} over all
/// strictly increasing index chains, by the O(m^2) dynamic program
/// best[j] = max_{i<j} best[i] + |F_j - F_i|^rho. Chains of length one
/// contribute the empty sum 0; ties keep the earliest predecessor and the
/// earliest endpoint.
inline VariationResult rho_variation(std::span<const Complex> F, double rho) {
  if (rho < 1.0) throw std::domain_error("rho_variation: rho < 1");
  const int m = static_cast<int>(F.size());
  if (m < 2) return {0.0, {}};
  std::vector<double> best(m, 0.0);
  std::vector<int> parent(m, -1);
  for (int j = 1; j < m; ++j) {
    for (int i = 0; i < j; ++i) {
      double cand = best[i] + std::pow(std::abs(F[j] - F[i]), rho);
      if (cand > best[j]) {
        best[j] = cand;
        parent[j] = i;
      }
    }
  }
  int end = 0;
  for (int j = 1; j < m; ++j)
    if (best[j] > best[end]) end = j;
  VariationResult res;
  res.value = std::pow(best[end], 1.0 / rho);
  if (best[end] > 0.0) {
    for (int j = end; j != -1; j = parent[j]) res.chain.push_back(j);
    std::reverse(res.chain.begin(), res.chain.end());
  }
  return res;
}

/// Exhaustive enumeration over all chains, the oracle for rho_variation.
/// Chains are visited in lexicographic order with strictly-greater updates,
/// and sums accumulate left to right exactly as in the dynamic program.
inline VariationResult rho_variation_bruteforce(std::span<const Complex> F, double rho) {
  if (rho < 1.0) throw std::domain_error("rho_variation: rho < 1");
  const int m = static_cast<int>(F.size());
  if (m > 20) throw std::invalid_argument("bruteforce: |F| > 20");
  if (m < 2) return {0.0, {}};
  VariationResult best{0.0, {}};
  std::vector<int> chain;
  auto extend = [&](auto&& self, int last, double sum) -> void {
    if (sum > best.value) {  // best.value holds sum^1 until the end
      best.value = sum;
      best.chain = chain;
    }
    for (int j = last + 1; j < m; ++j) {
      chain.push_back(j);
      self(self, j, sum + std::pow(std::abs(F[j] - F[last]), rho));
      chain.pop_back();
    }
  };
  for (int i = 0; i < m; ++i) {
    chain = {i};
    extend(extend, i, 0.0);
  }
  best.value = std::pow(best.value, 1.0 / rho);
  if (best.chain.size() < 2) best.chain.clear();
  return best;
}

/// Oscillation with fixed windows: sqrt(sum_m D_m^2) where D_m is the
/// diameter in the complex plane of the values at grid scales inside the
/// closed window [r_{m+1}, r_m]. Boundary scales belong to both adjacent
/// windows.
inline double oscillation(std::span<const Complex> F, const TruncationGrid& grid,
                          std::span<const double> r) {
  for (size_t i = 0; i + 1 < r.size(); ++i)
    if (!(r[i] > r[i + 1])) throw std::domain_error("oscillation: r must strictly decrease");
  double total = 0.0;
  for (size_t w = 0; w + 1 < r.size(); ++w) {
    double hi = r[w], lo = r[w + 1];
    double diam = 0.0;
    for (size_t i = 0; i < grid.size(); ++i) {
      if (grid.scales[i] > hi || grid.scales[i] < lo) continue;
      for (size_t j = i + 1; j < grid.size(); ++j) {
        if (grid.scales[j] > hi || grid.scales[j] < lo) continue;
        diam = std::max(diam, std::abs(F[i] - F[j]));
      }
    }
    total += diam * diam;
  }
  return std::sqrt(total);
}

struct VariationFunctional {
  enum class Kind { Variation, Oscillation } kind = Kind::Variation;
  double rho = 2.1;
  std::vector<double> r;  // oscillation windows

  static VariationFunctional variation(double rho) {
    return {Kind::Variation, rho, {}};
  }
  static VariationFunctional osc(std::vector<double> r) {
    return {Kind::Oscillation, 2.0, std::move(r)};
  }
};

/// (V_rho o T) nu or (O o T) nu evaluated pointwise: the truncation family
/// followed by the per-point functional.
inline std::vector<double> variation_field(const KernelSpec& k, const DiscreteMeasure& nu,
                                           const std::vector<Vec>& points,
                                           const TruncationGrid& grid,
                                           const VariationFunctional& fn,
                                           TruncationMode mode = TruncationMode::Rough) {
  FamilyValues fv = family_eval(k, nu, points, grid, mode);
  std::vector<double> field(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    if (fn.kind == VariationFunctional::Kind::Variation)
      field[i] = rho_variation(fv.values[i], fn.rho).value;
    else
      field[i] = oscillation(fv.values[i], grid, fn.r);
  }
  return field;
}

inline void write_field_csv(const std::string& path, const std::vector<Vec>& points,
                            const std::vector<double>& field, int d) {
  std::vector<std::string> header{"point_index"};
  for (int i = 1; i <= d; ++i) header.push_back("x_" + std::to_string(i));
  header.push_back("value");
  CsvWriter w(path, header);
  for (size_t i = 0; i < points.size(); ++i) {
    std::vector<std::string> cells{std::to_string(i)};
    for (int j = 0; j < d; ++j) cells.push_back(g17(points[i][j]));
    cells.push_back(g17(field[i]));
    w.row(cells);
  }
}

}  // namespace czvar
