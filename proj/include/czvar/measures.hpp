#pragma once

#include <complex>
#include <optional>
#include <variant>
#include <vector>

#include "czvar/csv.hpp"
#include "czvar/geometry.hpp"
#include "czvar/vec.hpp"

namespace czvar {

/// Closed axis-parallel cube.
struct Cube {
  Vec center;
  double side = 0.0;

  bool contains(const Vec& p) const { return dist_inf(p, center) <= side / 2.0; }
  Cube scaled(double a) const { return Cube{center, a * side}; }
};

struct Ball {
  Vec center;
  double radius = 0.0;
};

/// Closed annulus a <= |x - z| <= b.
struct Annulus {
  Vec center;
  double inner = 0.0;
  double outer = 0.0;
};

using Region = std::variant<Ball, Annulus, Cube>;

struct Atom {
  Vec pos;
  std::complex<double> w;
};

enum class MeasureTag { GraphQuadrature, Singular, Mixed };

/// Finite complex Radon measure as weighted atoms. Graph quadratures carry
/// the spec and resolution they were built from.
struct DiscreteMeasure {
  std::vector<Atom> atoms;
  MeasureTag tag = MeasureTag::Singular;
  std::optional<GraphSpec> graph;
  double resolution = 0.0;

  double total_variation() const {
    double s = 0;
    for (const Atom& a : atoms) s += std::abs(a.w);
    return s;
  }

  void validate() const {
    for (const Atom& a : atoms) {
      if (a.w == std::complex<double>(0.0, 0.0))
        throw std::invalid_argument("measure: zero-weight atom");
      if (!std::isfinite(a.w.real()) || !std::isfinite(a.w.imag()))
        throw std::invalid_argument("measure: non-finite weight");
    }
  }
};

/// Midpoint-rule quadrature of the surface measure H^n restricted to the
/// graph over `box`: one atom per cell at the graph image of the cell
/// midpoint, weighted by area_weight * cell volume.
inline DiscreteMeasure graph_measure(const GraphSpec& g, const Vec& box_lo,
                                     const Vec& box_hi, double h) {
  if (h <= 0) throw std::invalid_argument("graph_measure: h <= 0");
  std::array<long, kMaxDim> cells{};
  std::array<double, kMaxDim> step{};
  long total = 1;
  for (int i = 0; i < g.n; ++i) {
    double len = box_hi[i] - box_lo[i];
    if (len <= 0) throw std::invalid_argument("graph_measure: empty box");
    if (h > len) throw std::domain_error("graph_measure: degenerate resolution (h > box side)");
    cells[i] = std::max<long>(1, std::lround(len / h));
    step[i] = len / cells[i];
    total *= cells[i];
  }
  DiscreteMeasure m;
  m.tag = MeasureTag::GraphQuadrature;
  m.graph = g;
  m.resolution = h;
  m.atoms.reserve(total);
  std::array<long, kMaxDim> idx{};
  for (long c = 0; c < total; ++c) {
    Vec y(g.n);
    double vol = 1.0;
    for (int i = 0; i < g.n; ++i) {
      y[i] = box_lo[i] + (idx[i] + 0.5) * step[i];
      vol *= step[i];
    }
    m.atoms.push_back({eval_graph(g, y), area_weight(g, y) * vol});
    for (int i = 0; i < g.n; ++i) {
      if (++idx[i] < cells[i]) break;
      idx[i] = 0;
    }
  }
  return m;
}

/// Largest distance from an atom of a graph quadrature to the graph it
/// claims to sample; used by the on-graph invariant check.
inline double graph_residual(const DiscreteMeasure& m) {
  if (!m.graph) return 0.0;
  const GraphSpec& g = *m.graph;
  double worst = 0.0;
  for (const Atom& a : m.atoms) {
    Vec pos = a.pos;
    // undo the rigid motion, then compare against the profile
    if (g.motion) {
      Vec t = pos;
      if (g.motion->translation.dim == t.dim) t -= g.motion->translation;
      Vec r(t.dim);
      if (!g.motion->rotation.empty()) {
        for (int i = 0; i < t.dim; ++i) {
          double s = 0;
          for (int j = 0; j < t.dim; ++j) s += g.motion->rotation[j * t.dim + i] * t[j];
          r[i] = s;
        }
        pos = r;
      } else {
        pos = t;
      }
    }
    Vec y(g.n);
    for (int i = 0; i < g.n; ++i) y[i] = pos[i];
    Vec v = profile_value(g, y);
    double res = 0;
    for (int i = 0; i < g.d - g.n; ++i) {
      double e = pos[g.n + i] - v[i];
      res += e * e;
    }
    worst = std::max(worst, std::sqrt(res));
  }
  return worst;
}

/// Total variation mass of the atoms inside a closed region.
inline double region_mass(const DiscreteMeasure& m, const Region& region) {
  if (const Annulus* an = std::get_if<Annulus>(&region)) {
    if (!(an->inner > 0.0) || an->inner > an->outer)
      throw std::domain_error("annulus: need 0 < a <= b");
  }
  double s = 0;
  for (const Atom& a : m.atoms) {
    bool in = std::visit(
        [&](const auto& r) -> bool {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Ball>)
            return dist(a.pos, r.center) <= r.radius;
          else if constexpr (std::is_same_v<T, Annulus>) {
            double dd = dist(a.pos, r.center);
            return r.inner <= dd && dd <= r.outer;
          } else
            return r.contains(a.pos);
        },
        region);
    if (in) s += std::abs(a.w);
  }
  return s;
}

/// Q is (a,b)-doubling if |nu|(aQ) <= b |nu|(Q). Vacuously true on cubes
/// carrying no mass. Callers supply a > 1, b > a^n.
inline bool is_doubling(const DiscreteMeasure& m, const Cube& q, double a, double b) {
  return region_mass(m, q.scaled(a)) <= b * region_mass(m, q);
}

/// Scans the dyadic ladder {l_max 2^-k} down to l_min for the largest scale
/// whose cube at x is (a,b)-doubling. The lemma behind this needs b > a^d;
/// a violated hypothesis is flagged but the search still runs.
inline std::optional<Cube> find_doubling_cube(const DiscreteMeasure& m, const Vec& x,
                                              double a, double b, double l_max,
                                              double l_min,
                                              bool* hypothesis_warning = nullptr) {
  if (hypothesis_warning)
    *hypothesis_warning = !(b > std::pow(a, x.dim));
  for (double side = l_max; side >= l_min * (1.0 - 1e-12); side /= 2.0) {
    Cube q{x, side};
    if (is_doubling(m, q, a, b)) return q;
  }
  return std::nullopt;
}

// One atom per line: x_1,...,x_d,re(w),im(w).

inline void write_measure_csv(const std::string& path, const DiscreteMeasure& m, int d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  for (const Atom& a : m.atoms) {
    for (int i = 0; i < d; ++i) out << g17(a.pos[i]) << ",";
    out << g17(a.w.real()) << "," << g17(a.w.imag()) << "\n";
  }
}

inline DiscreteMeasure read_measure_csv(const std::string& path, int d) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  DiscreteMeasure m;
  m.tag = MeasureTag::Singular;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != static_cast<size_t>(d + 2))
      throw std::runtime_error("measure csv: wrong column count");
    Atom a;
    a.pos = Vec(d);
    for (int i = 0; i < d; ++i) a.pos[i] = std::stod(cells[i]);
    a.w = {std::stod(cells[d]), std::stod(cells[d + 1])};
    m.atoms.push_back(a);
  }
  m.validate();
  return m;
}

}  // namespace czvar
