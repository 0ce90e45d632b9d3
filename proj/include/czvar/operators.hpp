#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "czvar/csv.hpp"
#include "czvar/kernels.hpp"
#include "czvar/measures.hpp"

namespace czvar {

/// Strictly decreasing positive truncation scales, at least two.
struct TruncationGrid {
  std::vector<double> scales;

  explicit TruncationGrid(std::vector<double> s) : scales(std::move(s)) {
    if (scales.size() < 2) throw std::invalid_argument("grid: need >= 2 scales");
    for (size_t i = 0; i < scales.size(); ++i) {
      if (!(scales[i] > 0)) throw std::invalid_argument("grid: scales must be positive");
      if (i > 0 && !(scales[i] < scales[i - 1]))
        throw std::invalid_argument("grid: scales must strictly decrease");
    }
  }

  static TruncationGrid dyadic(double eps_max, int count) {
    std::vector<double> s(count);
    for (int j = 0; j < count; ++j) s[j] = eps_max * std::pow(2.0, -j);
    return TruncationGrid(std::move(s));
  }

  static TruncationGrid geometric(double eps_max, double eps_min, int count) {
    std::vector<double> s(count);
    double q = std::pow(eps_min / eps_max, 1.0 / (count - 1));
    for (int j = 0; j < count; ++j) s[j] = eps_max * std::pow(q, j);
    s.back() = eps_min;
    return TruncationGrid(std::move(s));
  }

  size_t size() const { return scales.size(); }
  double min() const { return scales.back(); }
  double max() const { return scales.front(); }
};

/// Nondecreasing C^2 cutoff pinned between the indicators of [2,inf) and
/// [1/2,inf). The default is the quintic smoothstep in t = (r - 1/2)/(3/2).
struct SmoothCutoff {
  std::function<double(double)> phi;

  static SmoothCutoff smoothstep() {
    return SmoothCutoff{[](double r) {
      if (r <= 0.5) return 0.0;
      if (r >= 2.0) return 1.0;
      double t = (r - 0.5) / 1.5;
      return ((6.0 * t - 15.0) * t + 10.0) * t * t * t;
    }};
  }
};

/// T_eps nu(x) = sum of K(x - p) w_p over atoms with |x - p| > eps.
/// Atoms at x itself are always excluded.
inline Complex truncated(const KernelSpec& k, const DiscreteMeasure& nu, const Vec& x,
                         double eps) {
  if (!(eps > 0)) throw std::invalid_argument("truncated: eps <= 0");
  Complex s = 0;
  for (const Atom& a : nu.atoms) {
    Vec diff = x - a.pos;
    if (diff.norm() > eps) s += k.eval(diff) * a.w;
  }
  return s;
}

/// Sum over the half-open shell eps < |x - p| <= delta; atoms exactly at
/// radius eps belong to this window, not to the truncated tail.
inline Complex truncated_window(const KernelSpec& k, const DiscreteMeasure& nu,
                                const Vec& x, double eps, double delta) {
  if (!(eps > 0) || eps > delta) throw std::domain_error("window: need 0 < eps <= delta");
  Complex s = 0;
  for (const Atom& a : nu.atoms) {
    Vec diff = x - a.pos;
    double r = diff.norm();
    if (r > eps && r <= delta) s += k.eval(diff) * a.w;
  }
  return s;
}

/// Smooth truncation: sum of phi(|x-p|/eps) K(x-p) w_p over atoms p != x.
inline Complex smooth_truncated(const KernelSpec& k, const DiscreteMeasure& nu,
                                const Vec& x, double eps, const SmoothCutoff& cutoff) {
  if (!(eps > 0)) throw std::invalid_argument("smooth_truncated: eps <= 0");
  Complex s = 0;
  for (const Atom& a : nu.atoms) {
    Vec diff = x - a.pos;
    double r = diff.norm();
    if (r == 0.0) continue;
    double f = cutoff.phi(r / eps);
    if (f != 0.0) s += f * k.eval(diff) * a.w;
  }
  return s;
}

enum class TruncationMode { Rough, Smooth };

/// The family {T_eps nu(x)} over evaluation points and a truncation grid,
/// plus the per-point maximal value sup_eps |T_eps|.
struct FamilyValues {
  std::vector<Vec> points;
  TruncationGrid grid;
  std::vector<std::vector<Complex>> values;  // [point][scale]
  std::vector<double> maximal;
};

/// Rough mode makes a single pass over the atoms per point, binning each
/// atom at the first grid index that includes it and prefix-summing, so the
/// whole matrix costs O(atoms log m) per point instead of O(atoms m).
inline FamilyValues family_eval(const KernelSpec& k, const DiscreteMeasure& nu,
                                const std::vector<Vec>& points,
                                const TruncationGrid& grid,
                                TruncationMode mode = TruncationMode::Rough,
                                const SmoothCutoff& cutoff = SmoothCutoff::smoothstep()) {
  FamilyValues out{points, grid, {}, {}};
  const size_t m = grid.size();
  out.values.assign(points.size(), std::vector<Complex>(m, Complex(0, 0)));
  out.maximal.assign(points.size(), 0.0);
  std::vector<Complex> bins(m);
  for (size_t pi = 0; pi < points.size(); ++pi) {
    const Vec& x = points[pi];
    auto& row = out.values[pi];
    if (mode == TruncationMode::Rough) {
      std::fill(bins.begin(), bins.end(), Complex(0, 0));
      for (const Atom& a : nu.atoms) {
        Vec diff = x - a.pos;
        double r = diff.norm();
        if (r == 0.0) continue;
        // first index whose scale lies strictly below r (scales decrease)
        auto it = std::upper_bound(grid.scales.begin(), grid.scales.end(), r,
                                   std::greater<double>());
        size_t idx = static_cast<size_t>(it - grid.scales.begin());
        if (idx < m) bins[idx] += k.eval(diff) * a.w;
      }
      Complex acc = 0;
      for (size_t j = 0; j < m; ++j) {
        acc += bins[j];
        row[j] = acc;
      }
    } else {
      for (size_t j = 0; j < m; ++j)
        row[j] = smooth_truncated(k, nu, x, grid.scales[j], cutoff);
    }
    double mx = 0;
    for (const Complex& v : row) mx = std::max(mx, std::abs(v));
    out.maximal[pi] = mx;
  }
  return out;
}

inline void write_family_csv(const std::string& path, const FamilyValues& fv) {
  CsvWriter w(path, {"point_index", "epsilon", "re", "im"});
  for (size_t i = 0; i < fv.points.size(); ++i)
    for (size_t j = 0; j < fv.grid.size(); ++j)
      w.row({std::to_string(i), g17(fv.grid.scales[j]), g17(fv.values[i][j].real()),
             g17(fv.values[i][j].imag())});
}

inline void write_maximal_csv(const std::string& path, const FamilyValues& fv) {
  CsvWriter w(path, {"point_index", "maximal"});
  for (size_t i = 0; i < fv.points.size(); ++i)
    w.row({std::to_string(i), g17(fv.maximal[i])});
}

}  // namespace czvar
