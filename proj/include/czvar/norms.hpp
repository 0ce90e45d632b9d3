#pragma once

#include <numeric>
#include <span>
#include <vector>

#include "czvar/measures.hpp"

namespace czvar {

/// (sum |f_i|^p |w_i|)^{1/p}.
inline double lp_norm(const DiscreteMeasure& mu, std::span<const Complex> f, double p) {
  if (p < 1.0) throw std::domain_error("lp_norm: p < 1");
  double s = 0;
  for (size_t i = 0; i < mu.atoms.size(); ++i)
    s += std::pow(std::abs(f[i]), p) * std::abs(mu.atoms[i].w);
  return std::pow(s, 1.0 / p);
}

inline double lp_norm(const DiscreteMeasure& mu, std::span<const double> f, double p) {
  if (p < 1.0) throw std::domain_error("lp_norm: p < 1");
  double s = 0;
  for (size_t i = 0; i < mu.atoms.size(); ++i)
    s += std::pow(std::abs(f[i]), p) * std::abs(mu.atoms[i].w);
  return std::pow(s, 1.0 / p);
}

/// Level-set profile for the weak-(1,1) experiments: for each lambda the
/// pair (lambda, lambda * mu{|g| > lambda}).
inline std::vector<std::pair<double, double>> weak_l1_profile(
    const DiscreteMeasure& mu, std::span<const double> g,
    std::span<const double> lambdas) {
  std::vector<std::pair<double, double>> out;
  out.reserve(lambdas.size());
  for (double lam : lambdas) {
    double mass = 0;
    for (size_t i = 0; i < mu.atoms.size(); ++i)
      if (std::abs(g[i]) > lam) mass += std::abs(mu.atoms[i].w);
    out.emplace_back(lam, lam * mass);
  }
  return out;
}

// ============================================================================
// BMO over vertical strips D = D~ x R^{d-n}
// ============================================================================

struct Strip {
  Vec base_center;  // in R^n
  double side = 0.0;

  bool contains(const Vec& x) const {
    for (int i = 0; i < base_center.dim; ++i)
      if (std::abs(x[i] - base_center[i]) > side / 2.0) return false;
    return true;
  }
};

/// Dyadic ladder of base cubes with half-overlapping translates covering
/// the working box; a finite rich stand-in for the sup over all strips,
/// so the BMO norm it yields is a certified lower bound of the true one.
struct StripFamily {
  int n = 1;
  std::vector<Strip> strips;

  static StripFamily make(const Vec& box_lo, const Vec& box_hi, int scale_count = 3) {
    StripFamily fam;
    fam.n = box_lo.dim;
    double length = 0;
    for (int i = 0; i < fam.n; ++i) length = std::max(length, box_hi[i] - box_lo[i]);
    for (int s = 0; s < scale_count; ++s) {
      double side = length / std::pow(2.0, s);
      // translate centers by side/2 along every axis
      std::vector<std::vector<double>> axes(fam.n);
      for (int i = 0; i < fam.n; ++i) {
        for (double c = box_lo[i] + side / 2.0; c - side / 2.0 < box_hi[i] - 1e-12;
             c += side / 2.0)
          axes[i].push_back(c);
        if (axes[i].empty()) axes[i].push_back((box_lo[i] + box_hi[i]) / 2.0);
      }
      std::vector<size_t> idx(fam.n, 0);
      while (true) {
        Strip st;
        st.base_center = Vec(fam.n);
        for (int i = 0; i < fam.n; ++i) st.base_center[i] = axes[i][idx[i]];
        st.side = side;
        fam.strips.push_back(st);
        int i = 0;
        for (; i < fam.n; ++i) {
          if (++idx[i] < axes[i].size()) break;
          idx[i] = 0;
        }
        if (i == fam.n) break;
      }
    }
    return fam;
  }
};

namespace detail {

inline double weighted_median(std::vector<std::pair<double, double>>& vals /*value,weight*/) {
  std::sort(vals.begin(), vals.end());
  double total = 0;
  for (auto& vw : vals) total += vw.second;
  double acc = 0;
  for (auto& vw : vals) {
    acc += vw.second;
    if (acc >= total / 2.0) return vw.first;
  }
  return vals.back().first;
}

}  // namespace detail

struct BmoResult {
  double value = 0.0;
  int argmax_strip = -1;
  int skipped_strips = 0;  // strips with zero mass
};

/// sup over strips of the mean absolute deviation about the weighted median
/// (real and imaginary parts separately), the exact minimizer of
/// inf_c mean|g - c| for real data.
inline BmoResult strip_bmo_norm(const DiscreteMeasure& mu, std::span<const Complex> g,
                                const StripFamily& strips) {
  BmoResult res;
  std::vector<std::pair<double, double>> re, im;
  for (size_t s = 0; s < strips.strips.size(); ++s) {
    const Strip& st = strips.strips[s];
    re.clear();
    im.clear();
    double mass = 0;
    for (size_t i = 0; i < mu.atoms.size(); ++i) {
      if (!st.contains(mu.atoms[i].pos)) continue;
      double w = std::abs(mu.atoms[i].w);
      mass += w;
      re.emplace_back(g[i].real(), w);
      im.emplace_back(g[i].imag(), w);
    }
    if (mass <= 0.0) {
      ++res.skipped_strips;
      continue;
    }
    Complex med(detail::weighted_median(re), detail::weighted_median(im));
    double dev = 0;
    for (size_t i = 0; i < mu.atoms.size(); ++i)
      if (st.contains(mu.atoms[i].pos))
        dev += std::abs(g[i] - med) * std::abs(mu.atoms[i].w);
    dev /= mass;
    if (dev > res.value) {
      res.value = dev;
      res.argmax_strip = static_cast<int>(s);
    }
  }
  return res;
}

struct MaximalPair {
  double m = 0.0;        // M g(x)  = sup_{D ni x} mean_D |g|
  double m_sharp = 0.0;  // M# g(x) = sup_{D ni x} mean_D |g - mean_D g|
};

inline MaximalPair strip_maximals(const DiscreteMeasure& mu, std::span<const Complex> g,
                                  const StripFamily& strips, const Vec& x) {
  MaximalPair out;
  bool any = false;
  for (const Strip& st : strips.strips) {
    if (!st.contains(x)) continue;
    double mass = 0;
    Complex mean = 0;
    double mean_abs = 0;
    for (size_t i = 0; i < mu.atoms.size(); ++i) {
      if (!st.contains(mu.atoms[i].pos)) continue;
      double w = std::abs(mu.atoms[i].w);
      mass += w;
      mean += g[i] * w;
      mean_abs += std::abs(g[i]) * w;
    }
    if (mass <= 0.0) continue;
    any = true;
    mean /= mass;
    mean_abs /= mass;
    double dev = 0;
    for (size_t i = 0; i < mu.atoms.size(); ++i)
      if (st.contains(mu.atoms[i].pos))
        dev += std::abs(g[i] - mean) * std::abs(mu.atoms[i].w);
    dev /= mass;
    out.m = std::max(out.m, mean_abs);
    out.m_sharp = std::max(out.m_sharp, dev);
  }
  if (!any) throw std::domain_error("strip_maximals: no strip with mass contains x");
  return out;
}

}  // namespace czvar
