#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>

namespace czvar {

inline constexpr int kMaxDim = 8;

/// Point in R^d for small ambient dimension, fixed capacity to keep
/// atom-heavy loops allocation-free. dim is the active length.
struct Vec {
  std::array<double, kMaxDim> c{};
  int dim = 0;

  Vec() = default;
  explicit Vec(int d) : dim(d) {
    if (d < 0 || d > kMaxDim) throw std::invalid_argument("Vec: bad dimension");
  }
  Vec(std::initializer_list<double> xs) : dim(static_cast<int>(xs.size())) {
    if (dim > kMaxDim) throw std::invalid_argument("Vec: bad dimension");
    int i = 0;
    for (double x : xs) c[i++] = x;
  }

  static Vec zero(int d) { return Vec(d); }

  double operator[](int i) const { return c[static_cast<size_t>(i)]; }
  double& operator[](int i) { return c[static_cast<size_t>(i)]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < dim; ++i) c[i] += o.c[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < dim; ++i) c[i] -= o.c[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < dim; ++i) c[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator*(Vec a, double s) { return a *= s; }

  friend bool operator==(const Vec& a, const Vec& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
      if (a.c[i] != b.c[i]) return false;
    return true;
  }

  double dot(const Vec& o) const {
    double s = 0;
    for (int i = 0; i < dim; ++i) s += c[i] * o.c[i];
    return s;
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
};

inline double dist(const Vec& a, const Vec& b) { return (a - b).norm(); }

/// Chebyshev distance; cube membership tests reduce to it.
inline double dist_inf(const Vec& a, const Vec& b) {
  double m = 0;
  for (int i = 0; i < a.dim; ++i) m = std::max(m, std::abs(a.c[i] - b.c[i]));
  return m;
}

using Rng = std::mt19937_64;

inline Vec random_unit_vector(Rng& rng, int d) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec u(d);
  double n = 0;
  do {
    for (int i = 0; i < d; ++i) u[i] = gauss(rng);
    n = u.norm();
  } while (n < 1e-12);
  return u * (1.0 / n);
}

/// Uniform sample from the closed ball of given radius.
inline Vec random_in_ball(Rng& rng, int d, double radius) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec u = random_unit_vector(rng, d);
  double r = radius * std::pow(unif(rng), 1.0 / d);
  return u * r;
}

inline double random_log_uniform(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> unif(std::log(lo), std::log(hi));
  return std::exp(unif(rng));
}

}  // namespace czvar
