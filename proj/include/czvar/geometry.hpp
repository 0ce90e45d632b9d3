#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "czvar/vec.hpp"

namespace czvar {

// ============================================================================
// Lipschitz graphs x = (y, A(y)), y in R^n, A : R^n -> R^{d-n}
// ============================================================================

enum class GraphProfile { Flat, Affine, Sawtooth, BumpSum, CircleArc, Sampled };

struct Bump {
  Vec center;     // in R^n
  double height;  // signed
  double width;   // gaussian width
};

/// Rotation + translation of R^d. Rotation stored row-major, must be
/// orthogonal (not checked here; config loading verifies).
struct RigidMotion {
  std::vector<double> rotation;  // d*d row-major; empty means identity
  Vec translation;               // dim d; dim 0 means none

  Vec apply(const Vec& x) const {
    Vec out = x;
    if (!rotation.empty()) {
      const int d = x.dim;
      for (int i = 0; i < d; ++i) {
        double s = 0;
        for (int j = 0; j < d; ++j) s += rotation[i * d + j] * x[j];
        out[i] = s;
      }
    }
    if (translation.dim == x.dim) out += translation;
    return out;
  }
};

/// Parametric description of an n-dimensional Lipschitz graph in R^d.
/// `slope` is the declared Lipschitz constant of the profile; profiles
/// flagged `sharpness` may legitimately exceed slope 1.
struct GraphSpec {
  int n = 1;
  int d = 2;
  GraphProfile profile = GraphProfile::Flat;

  // affine: vertical = M y + q, M is (d-n) x n row-major
  std::vector<double> affine_matrix;
  std::vector<double> affine_offset;

  double saw_amplitude = 0.0;  // triangle wave in y_1, Lip = 4*amp/period
  double saw_period = 1.0;

  std::vector<Bump> bumps;  // gaussian bumps, first vertical coordinate

  double arc_radius = 1.0;  // circle-arc sharpness profile (n=1, d=2)

  std::vector<std::array<double, 2>> table;  // sampled (y, value), sorted

  double slope = 0.0;
  bool sharpness = false;
  std::optional<RigidMotion> motion;

  Vec domain_lo{-1.0};
  Vec domain_hi{1.0};

  double domain_diameter() const {
    double s = 0;
    for (int i = 0; i < n; ++i) {
      double e = domain_hi[i] - domain_lo[i];
      s += e * e;
    }
    return std::sqrt(s);
  }
};

namespace detail {

// Triangle wave, period 1, amplitude 1, rising from 0 at t = 0.
inline double triangle_wave(double t, double* deriv, bool* kink) {
  double p = t - std::floor(t);
  const double tol = 1e-12;
  if (kink && (p < tol || std::abs(p - 0.25) < tol || std::abs(p - 0.75) < tol ||
               p > 1.0 - tol))
    *kink = true;
  if (p < 0.25) {
    if (deriv) *deriv = 4.0;
    return 4.0 * p;
  }
  if (p < 0.75) {
    if (deriv) *deriv = -4.0;
    return 2.0 - 4.0 * p;
  }
  if (deriv) *deriv = 4.0;
  return 4.0 * p - 4.0;
}

// Circle-arc sharpness profile (n=1, d=2): a radial ramp from the origin up
// to the circle |x| = r, an exact arc of that circle over y in
// [0.8r, 0.9r] (slope 1.33..2.07), and a slope-0.75 descent back to 0.
inline double circle_arc_value(double y, double r, double* deriv, bool* kink) {
  const double y1 = 0.8 * r, y2 = 0.9 * r;
  const double v2 = std::sqrt(r * r - y2 * y2);  // = sqrt(0.19) r
  const double tol = 1e-12 * r;
  if (kink && (std::abs(y) < tol || std::abs(y - y1) < tol ||
               std::abs(y - y2) < tol || std::abs(y - (y2 + v2 / 0.75)) < tol))
    *kink = true;
  if (y <= 0.0) {
    if (deriv) *deriv = 0.0;
    return 0.0;
  }
  if (y <= y1) {
    if (deriv) *deriv = 0.75;
    return 0.75 * y;
  }
  if (y <= y2) {
    double root = std::sqrt(r * r - y * y);
    if (deriv) *deriv = -y / root;
    return root;
  }
  double v = v2 - 0.75 * (y - y2);
  if (v <= 0.0) {
    if (deriv) *deriv = 0.0;
    return 0.0;
  }
  if (deriv) *deriv = -0.75;
  return v;
}

}  // namespace detail

/// Profile value A(y) in R^{d-n}. Jacobian entries (row-major, (d-n) x n)
/// are written to `jac` when non-null; kinks evaluate one-sided and set
/// `kink` when provided.
inline Vec profile_value(const GraphSpec& g, const Vec& y, double* jac = nullptr,
                         bool* kink = nullptr) {
  const int m = g.d - g.n;
  Vec v(m);
  if (jac) std::fill(jac, jac + m * g.n, 0.0);
  switch (g.profile) {
    case GraphProfile::Flat:
      break;
    case GraphProfile::Affine: {
      for (int i = 0; i < m; ++i) {
        double s = g.affine_offset.empty() ? 0.0 : g.affine_offset[i];
        for (int j = 0; j < g.n; ++j) {
          s += g.affine_matrix[i * g.n + j] * y[j];
          if (jac) jac[i * g.n + j] = g.affine_matrix[i * g.n + j];
        }
        v[i] = s;
      }
      break;
    }
    case GraphProfile::Sawtooth: {
      double dw = 0;
      double w = detail::triangle_wave(y[0] / g.saw_period, &dw, kink);
      v[0] = g.saw_amplitude * w;
      if (jac) jac[0] = g.saw_amplitude * dw / g.saw_period;
      break;
    }
    case GraphProfile::BumpSum: {
      for (const Bump& b : g.bumps) {
        double q = 0;
        for (int j = 0; j < g.n; ++j) {
          double t = y[j] - b.center[j];
          q += t * t;
        }
        double e = b.height * std::exp(-q / (b.width * b.width));
        v[0] += e;
        if (jac)
          for (int j = 0; j < g.n; ++j)
            jac[j] += e * (-2.0 * (y[j] - b.center[j]) / (b.width * b.width));
      }
      break;
    }
    case GraphProfile::CircleArc: {
      double dv = 0;
      v[0] = detail::circle_arc_value(y[0], g.arc_radius, &dv, kink);
      if (jac) jac[0] = dv;
      break;
    }
    case GraphProfile::Sampled: {
      if (g.table.size() < 2) throw std::invalid_argument("sampled profile needs >= 2 knots");
      double t = y[0];
      if (t < g.table.front()[0] || t > g.table.back()[0])
        throw std::domain_error("sampled profile: y outside table range");
      auto it = std::upper_bound(g.table.begin(), g.table.end(), t,
                                 [](double a, const std::array<double, 2>& k) {
                                   return a < k[0];
                                 });
      size_t hi = std::min<size_t>(g.table.size() - 1,
                                   static_cast<size_t>(it - g.table.begin()));
      if (hi == 0) hi = 1;
      size_t lo = hi - 1;
      double dy = g.table[hi][0] - g.table[lo][0];
      double sl = (g.table[hi][1] - g.table[lo][1]) / dy;
      v[0] = g.table[lo][1] + sl * (t - g.table[lo][0]);
      if (jac) jac[0] = sl;
      if (kink) {
        const double tol = 1e-12 * (g.table.back()[0] - g.table.front()[0]);
        for (const auto& k : g.table)
          if (std::abs(t - k[0]) < tol) *kink = true;
      }
      break;
    }
  }
  return v;
}

/// (y, A(y)) with the rigid motion applied.
inline Vec eval_graph(const GraphSpec& g, const Vec& y) {
  Vec x(g.d);
  for (int i = 0; i < g.n; ++i) x[i] = y[i];
  Vec v = profile_value(g, y);
  for (int i = 0; i < g.d - g.n; ++i) x[g.n + i] = v[i];
  if (g.motion) x = g.motion->apply(x);
  return x;
}

/// Central-difference Jacobian of the profile, row-major (d-n) x n.
/// Step defaults to 1e-5 * domain diameter.
inline std::vector<double> numeric_jacobian(const GraphSpec& g, const Vec& y,
                                            double step = 0.0) {
  if (step <= 0.0) step = 1e-5 * g.domain_diameter();
  const int m = g.d - g.n;
  std::vector<double> jac(m * g.n);
  for (int j = 0; j < g.n; ++j) {
    Vec yp = y, ym = y;
    yp[j] += step;
    ym[j] -= step;
    Vec vp = profile_value(g, yp);
    Vec vm = profile_value(g, ym);
    for (int i = 0; i < m; ++i) jac[i * g.n + j] = (vp[i] - vm[i]) / (2.0 * step);
  }
  return jac;
}

/// Surface-measure density sqrt(det(I_n + J^T J)); always >= 1.
inline double area_weight(const GraphSpec& g, const Vec& y, bool* kink = nullptr) {
  const int m = g.d - g.n;
  std::array<double, kMaxDim * kMaxDim> jac{};
  profile_value(g, y, jac.data(), kink);
  // M = I + J^T J, n x n symmetric positive definite
  std::array<double, kMaxDim * kMaxDim> M{};
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b) {
      double s = (a == b) ? 1.0 : 0.0;
      for (int i = 0; i < m; ++i) s += jac[i * g.n + a] * jac[i * g.n + b];
      M[a * g.n + b] = s;
    }
  // det via Cholesky
  double det = 1.0;
  for (int k = 0; k < g.n; ++k) {
    double piv = M[k * g.n + k];
    for (int r = 0; r < k; ++r) {
      double l = M[k * g.n + r];
      piv -= l * l;
    }
    piv = std::max(piv, 0.0);
    double l = std::sqrt(piv);
    det *= piv;
    M[k * g.n + k] = l;
    for (int r = k + 1; r < g.n; ++r) {
      double s = M[r * g.n + k];
      for (int c = 0; c < k; ++c) s -= M[r * g.n + c] * M[k * g.n + c];
      M[r * g.n + k] = (l > 0) ? s / l : 0.0;
    }
  }
  return std::sqrt(det);
}

struct LipschitzReport {
  double max_quotient = 0.0;
  bool within_declared = true;
};

/// Randomized difference-quotient check of |A(y1)-A(y2)| <= slope*|y1-y2|.
/// Sharpness profiles report honestly but are not failed.
inline LipschitzReport check_lipschitz(const GraphSpec& g, int sample_count,
                                       uint64_t seed) {
  Rng rng(seed);
  LipschitzReport rep;
  for (int s = 0; s < sample_count; ++s) {
    Vec y1(g.n), y2(g.n);
    for (int i = 0; i < g.n; ++i) {
      std::uniform_real_distribution<double> u(g.domain_lo[i], g.domain_hi[i]);
      y1[i] = u(rng);
      y2[i] = u(rng);
    }
    double dy = dist(y1, y2);
    if (dy < 1e-12) continue;
    double dv = dist(profile_value(g, y1), profile_value(g, y2));
    rep.max_quotient = std::max(rep.max_quotient, dv / dy);
  }
  rep.within_declared = g.sharpness || rep.max_quotient <= g.slope * (1.0 + 1e-9);
  return rep;
}

inline void validate_graph(const GraphSpec& g) {
  if (g.n < 1 || g.n >= g.d || g.d > kMaxDim)
    throw std::invalid_argument("graph: need 1 <= n < d <= kMaxDim");
  if ((g.profile == GraphProfile::CircleArc || g.profile == GraphProfile::Sampled) &&
      (g.n != 1 || g.d - g.n != 1))
    throw std::invalid_argument("profile requires n = 1, d = 2");
  if (g.profile == GraphProfile::Affine &&
      g.affine_matrix.size() != static_cast<size_t>((g.d - g.n) * g.n))
    throw std::invalid_argument("affine matrix has wrong shape");
  for (int i = 0; i < g.n; ++i)
    if (!(g.domain_lo[i] < g.domain_hi[i]))
      throw std::invalid_argument("graph: empty working domain");
}

// Factory helpers for the built-in profiles.

inline GraphSpec flat_graph(int n, int d, Vec lo, Vec hi) {
  GraphSpec g;
  g.n = n;
  g.d = d;
  g.profile = GraphProfile::Flat;
  g.slope = 0.0;
  g.domain_lo = lo;
  g.domain_hi = hi;
  validate_graph(g);
  return g;
}

inline GraphSpec sawtooth_graph(int n, int d, double amplitude, double period,
                                Vec lo, Vec hi) {
  GraphSpec g;
  g.n = n;
  g.d = d;
  g.profile = GraphProfile::Sawtooth;
  g.saw_amplitude = amplitude;
  g.saw_period = period;
  g.slope = 4.0 * amplitude / period;
  g.domain_lo = lo;
  g.domain_hi = hi;
  validate_graph(g);
  return g;
}

inline GraphSpec circle_arc_graph(double radius) {
  GraphSpec g;
  g.n = 1;
  g.d = 2;
  g.profile = GraphProfile::CircleArc;
  g.arc_radius = radius;
  g.slope = 0.9 / std::sqrt(0.19);  // max arc slope, ~2.065
  g.sharpness = true;
  g.domain_lo = Vec{-0.05 * radius};
  g.domain_hi = Vec{1.45 * radius};
  validate_graph(g);
  return g;
}

// ============================================================================
// Horizontal/vertical splitting and the annulus-flattening map
// ============================================================================

/// x = x_H + x_V with x_H carrying the first n coordinates and x_V the rest.
struct HVSplit {
  Vec h;  // last d-n coordinates zero
  Vec v;  // first n coordinates zero
};

inline HVSplit split_hv(const Vec& x, int n) {
  HVSplit s{Vec(x.dim), Vec(x.dim)};
  for (int i = 0; i < x.dim; ++i)
    (i < n ? s.h[i] : s.v[i]) = x[i];
  return s;
}

enum class UpsilonDir { Forward, Inverse };

/// Radial-horizontal rescaling: forward (|x|/|x_H|) x_H + x_V maps the cone
/// |x_V| <= s|x_H| onto |x_V| <= s(1+s^2)^{-1/2}|x_H|; inverse uses
/// sqrt(1 - |x_V|^2/|x_H|^2) and requires |x_V| < |x_H|.
inline Vec upsilon_map(const Vec& x, int n, UpsilonDir dir) {
  HVSplit s = split_hv(x, n);
  double hn = s.h.norm();
  if (hn == 0.0) throw std::domain_error("upsilon: x_H = 0");
  double factor;
  if (dir == UpsilonDir::Forward) {
    factor = x.norm() / hn;
  } else {
    double vn = s.v.norm();
    if (vn >= hn) throw std::domain_error("upsilon inverse: |x_V| >= |x_H|");
    factor = std::sqrt(1.0 - (vn / hn) * (vn / hn));
  }
  return s.h * factor + s.v;
}

/// Phi(x, y) = | (|x|/|x_H|) x_H - (|y|/|y_H|) y_H |, the horizontal part of
/// the Upsilon images' difference. Symmetric; requires nonzero horizontals.
inline double phi_metric(const Vec& x, const Vec& y, int n) {
  HVSplit sx = split_hv(x, n), sy = split_hv(y, n);
  double hx = sx.h.norm(), hy = sy.h.norm();
  if (hx == 0.0 || hy == 0.0) throw std::domain_error("phi: zero horizontal part");
  Vec diff = sx.h * (x.norm() / hx) - sy.h * (y.norm() / hy);
  return diff.norm();
}

struct ConeRatioResult {
  double max_ratio = 0.0;
  double bound = 0.0;   // max(3, 3/a, s/sqrt(delta(2-delta)))
  double a = 0.0;       // (1-s^2)/(4(1+s^2))
  double delta = 0.0;
  long accepted = 0;
  long skipped_degenerate = 0;
};

/// Samples pairs satisfying the cone hypotheses |x_V| <= s|x_H|,
/// |y_V| <= s|y_H|, |x_V - y_V| <= s|x_H - y_H| and compares the worst
/// |x_V - y_V| / Phi(x, y) against the bound derived from the cone lemma.
inline ConeRatioResult cone_inequality_ratio(double s, long sample_count,
                                             uint64_t seed, int n = 1, int d = 2) {
  if (!(s > 0.0 && s < 1.0)) throw std::domain_error("cone ratio: need 0 < s < 1");
  ConeRatioResult res;
  res.a = (1.0 - s * s) / (4.0 * (1.0 + s * s));
  // delta chosen so that (3/2) delta(2-delta) is half the cap
  // (1/4)(1-s^2)/(1+s^2) allowed by the proof; then delta < (1-s^2)/2 too.
  double cap = (1.0 - s * s) / (12.0 * (1.0 + s * s));
  res.delta = 1.0 - std::sqrt(1.0 - cap);
  res.bound = std::max({3.0, 3.0 / res.a, s / std::sqrt(res.delta * (2.0 - res.delta))});

  Rng rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const int m = d - n;
  auto sample_cone_point = [&]() {
    Vec hn = random_unit_vector(rng, n) * random_log_uniform(rng, 0.1, 10.0);
    Vec x(d);
    for (int i = 0; i < n; ++i) x[i] = hn[i];
    double rad = s * hn.norm();
    // bias half the vertical samples onto the cone boundary, where the
    // extremal ratios live
    Vec vball = (u01(rng) < 0.5) ? random_unit_vector(rng, m) * rad
                                 : random_in_ball(rng, m, rad);
    for (int i = 0; i < m; ++i) x[n + i] = vball[i];
    return x;
  };
  auto pair_valid = [&](const Vec& x, const Vec& y) {
    HVSplit sx = split_hv(x, n), sy = split_hv(y, n);
    if (sx.h.norm() == 0.0 || sy.h.norm() == 0.0) return false;
    return sx.v.norm() <= s * sx.h.norm() && sy.v.norm() <= s * sy.h.norm() &&
           (sx.v - sy.v).norm() <= s * (sx.h - sy.h).norm();
  };
  auto ratio_of = [&](const Vec& x, const Vec& y) -> double {
    double phi = phi_metric(x, y, n);
    if (phi <= 1e-14 * (x.norm() + y.norm())) return -1.0;  // degenerate
    return (split_hv(x, n).v - split_hv(y, n).v).norm() / phi;
  };

  Vec best_x, best_y;
  long done = 0;
  while (done < sample_count) {
    Vec x = sample_cone_point();
    Vec y = sample_cone_point();
    if (!pair_valid(x, y)) continue;
    ++done;
    double ratio = ratio_of(x, y);
    if (ratio < 0) {
      ++res.skipped_degenerate;
      continue;
    }
    ++res.accepted;
    if (ratio > res.max_ratio) {
      res.max_ratio = ratio;
      best_x = x;
      best_y = y;
    }
  }

  // Local refinement of the best pair: the ratio is invariant under joint
  // scaling, so the supremum sits on a compact configuration set and a
  // shrinking random polish followed by a deterministic compass search
  // converges to the top of the sampled basin, making the reported maximum
  // reproducible across seeds. Every accepted proposal is itself a valid
  // sampled pair.
  if (res.accepted > 0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int rounds = 20;
    const long per_round = std::max<long>(200, sample_count / 200);
    for (int r = 0; r < rounds; ++r) {
      double sigma = 0.3 * std::pow(1e-4 / 0.3, double(r) / (rounds - 1));
      for (long t = 0; t < per_round; ++t) {
        Vec x = best_x, y = best_y;
        double sx = sigma * x.norm(), sy = sigma * y.norm();
        for (int i = 0; i < d; ++i) {
          x[i] += sx * gauss(rng);
          y[i] += sy * gauss(rng);
        }
        if (!pair_valid(x, y)) continue;
        double ratio = ratio_of(x, y);
        if (ratio > res.max_ratio) {
          res.max_ratio = ratio;
          best_x = x;
          best_y = y;
        }
      }
    }
    double scale = best_x.norm() + best_y.norm();
    for (double step = 0.1 * scale; step > 1e-13 * scale; step *= 0.5) {
      bool improved = true;
      while (improved) {
        improved = false;
        for (int which = 0; which < 2; ++which)
          for (int i = 0; i < d; ++i)
            for (double sgn : {1.0, -1.0}) {
              Vec x = best_x, y = best_y;
              (which == 0 ? x : y)[i] += sgn * step;
              if (!pair_valid(x, y)) continue;
              double ratio = ratio_of(x, y);
              if (ratio > res.max_ratio) {
                res.max_ratio = ratio;
                best_x = x;
                best_y = y;
                improved = true;
              }
            }
      }
    }
  }
  return res;
}

}  // namespace czvar
