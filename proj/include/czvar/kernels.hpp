#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "czvar/vec.hpp"

namespace czvar {

using Complex = std::complex<double>;

/// Odd Calderon-Zygmund kernel with homogeneity index n:
/// |K(x)| <= C/|x|^n and first/second derivatives <= C/|x|^{n+1}, |x|^{n+2}.
struct KernelSpec {
  int n = 1;  // homogeneity index
  int d = 2;  // ambient dimension
  std::function<Complex(const Vec&)> eval;
  std::function<Complex(const Vec&, int)> grad;  // analytic d/dx_i, optional
  double growth_constant = 1.0;                  // declared C_K
  std::string name;
};

inline Complex eval_kernel(const KernelSpec& k, const Vec& x) {
  if (x.norm2() == 0.0) throw std::domain_error("kernel: x = 0");
  return k.eval(x);
}

/// Cauchy kernel 1/z on R^2 (z = x_1 + i x_2), homogeneity 1.
inline KernelSpec make_cauchy() {
  KernelSpec k;
  k.n = 1;
  k.d = 2;
  k.name = "cauchy";
  k.eval = [](const Vec& x) { return 1.0 / Complex(x[0], x[1]); };
  k.grad = [](const Vec& x, int i) {
    Complex z(x[0], x[1]);
    Complex dz = (i == 0) ? Complex(1, 0) : Complex(0, 1);
    return -dz / (z * z);
  };
  return k;
}

/// Scalar component x_c / |x|^{n+1} of the n-dimensional Riesz transform.
inline KernelSpec make_riesz(int n, int d, int component) {
  if (component < 0 || component >= d)
    throw std::invalid_argument("riesz: component out of range");
  KernelSpec k;
  k.n = n;
  k.d = d;
  k.name = "riesz:" + std::to_string(n) + ":" + std::to_string(component + 1);
  k.eval = [n, component](const Vec& x) {
    return Complex(x[component] * std::pow(x.norm(), -(n + 1)), 0.0);
  };
  k.grad = [n, component](const Vec& x, int i) {
    double r = x.norm();
    double v = (i == component) ? std::pow(r, -(n + 1)) : 0.0;
    v -= (n + 1) * x[component] * x[i] * std::pow(r, -(n + 3));
    return Complex(v, 0.0);
  };
  return k;
}

/// Parses `cauchy` or `riesz:<n>:<component>` (component is 1-based).
inline KernelSpec parse_kernel(const std::string& name, int d) {
  if (name == "cauchy") {
    if (d != 2) throw std::invalid_argument("cauchy kernel requires d = 2");
    return make_cauchy();
  }
  if (name.rfind("riesz:", 0) == 0) {
    auto p1 = name.find(':');
    auto p2 = name.find(':', p1 + 1);
    if (p2 == std::string::npos) throw std::invalid_argument("bad riesz spec: " + name);
    int n = std::stoi(name.substr(p1 + 1, p2 - p1 - 1));
    int comp = std::stoi(name.substr(p2 + 1));
    return make_riesz(n, d, comp - 1);
  }
  throw std::invalid_argument("unknown kernel: " + name);
}

namespace detail {

// Log-uniform radii over |x| in [1e-3, 1e3] with the 2d axis directions
// prepended; homogeneity makes scale coverage the only requirement.
inline std::vector<Vec> kernel_sample_points(int d, long count, uint64_t seed) {
  std::vector<Vec> pts;
  pts.reserve(count + 2 * d);
  for (int i = 0; i < d; ++i) {
    Vec e(d);
    e[i] = 1.0;
    pts.push_back(e);
    e[i] = -1.0;
    pts.push_back(e);
  }
  Rng rng(seed);
  for (long s = 0; s < count; ++s)
    pts.push_back(random_unit_vector(rng, d) * random_log_uniform(rng, 1e-3, 1e3));
  return pts;
}

inline Complex fd_grad(const KernelSpec& k, const Vec& x, int i) {
  double h = 1e-5 * x.norm();
  Vec xp = x, xm = x;
  xp[i] += h;
  xm[i] -= h;
  return (k.eval(xp) - k.eval(xm)) / (2.0 * h);
}

inline Complex fd_hess(const KernelSpec& k, const Vec& x, int i, int j) {
  double h = 1e-5 * x.norm();
  if (i == j) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    return (k.eval(xp) - 2.0 * k.eval(x) + k.eval(xm)) / (h * h);
  }
  Vec xpp = x, xpm = x, xmp = x, xmm = x;
  xpp[i] += h; xpp[j] += h;
  xpm[i] += h; xpm[j] -= h;
  xmp[i] -= h; xmp[j] += h;
  xmm[i] -= h; xmm[j] -= h;
  return (k.eval(xpp) - k.eval(xpm) - k.eval(xmp) + k.eval(xmm)) / (4.0 * h * h);
}

}  // namespace detail

/// max |K(-x) + K(x)| over samples; exactly 0 for the built-ins.
inline double check_odd(const KernelSpec& k, long sample_count, uint64_t seed) {
  double worst = 0.0;
  for (const Vec& x : detail::kernel_sample_points(k.d, sample_count, seed))
    worst = std::max(worst, std::abs(k.eval(x * -1.0) + k.eval(x)));
  return worst;
}

struct KernelBounds {
  double c0 = 0.0;  // sup |K(x)| |x|^n
  double c1 = 0.0;  // sup_i |d_i K(x)| |x|^{n+1}
  double c2 = 0.0;  // sup_{i,j} |d_i d_j K(x)| |x|^{n+2}
  bool finite = true;
  Vec offending;  // first non-finite sample, if any
};

/// Measures the growth constants on log-uniform samples. Derivatives use
/// central differences at relative step 1e-5 unless the kernel carries an
/// analytic gradient.
inline KernelBounds check_bounds(const KernelSpec& k, long sample_count,
                                 uint64_t seed) {
  KernelBounds b;
  auto note = [&](double v, double* slot, const Vec& x) {
    if (!std::isfinite(v)) {
      if (b.finite) b.offending = x;
      b.finite = false;
      return;
    }
    *slot = std::max(*slot, v);
  };
  for (const Vec& x : detail::kernel_sample_points(k.d, sample_count, seed)) {
    double r = x.norm();
    note(std::abs(k.eval(x)) * std::pow(r, k.n), &b.c0, x);
    for (int i = 0; i < k.d; ++i) {
      Complex g = k.grad ? k.grad(x, i) : detail::fd_grad(k, x, i);
      note(std::abs(g) * std::pow(r, k.n + 1), &b.c1, x);
      for (int j = i; j < k.d; ++j)
        note(std::abs(detail::fd_hess(k, x, i, j)) * std::pow(r, k.n + 2), &b.c2, x);
    }
  }
  return b;
}

}  // namespace czvar
