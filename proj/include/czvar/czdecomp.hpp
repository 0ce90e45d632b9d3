#pragma once

#include <map>
#include <string>
#include <vector>

#include "czvar/measures.hpp"

namespace czvar {

/// Output of the level-lambda decomposition: selected cubes Q_j (sides
/// nondecreasing), the constants and supports of b_j = c_j chi_{A_j}, the
/// per-atom good density g off Omega = U Q_j, and bookkeeping needed to
/// re-verify every inequality of the construction.
struct CZResult {
  double lambda = 0.0;
  double side_floor = 0.0;              // 4h search floor
  std::vector<Cube> cubes;              // Q_j, side nondecreasing
  std::vector<Complex> c;               // c_j
  std::vector<std::vector<int>> support;  // A_j as mu-atom indices
  std::vector<Complex> wnu;             // int w_j dnu
  std::vector<char> mu_in_omega;        // per mu atom
  std::vector<char> nu_in_omega;        // per nu atom
  std::vector<int> nu_overlap;          // per nu atom, #{j : p in Q_j}
  std::vector<Complex> g;               // per mu atom; 0 inside Omega
  std::vector<int> nu_match;            // per nu atom: mu index or -1
  double measured_c2 = 0.0;             // max_k (sum_priors int|b| / (lambda mu(R_k)))
  double max_overlap = 0.0;             // max_x sum_j chi_{Q_j}(x) over atoms

  Cube r_cube(size_t j) const { return cubes[j].scaled(6.0); }

  bool in_omega(const Vec& p) const {
    for (const Cube& q : cubes)
      if (q.contains(p)) return true;
    return false;
  }
  bool in_omega_hat(const Vec& p) const {
    for (const Cube& q : cubes)
      if (q.scaled(2.0).contains(p)) return true;
    return false;
  }
};

namespace detail {

struct PosKey {
  std::array<double, kMaxDim> c{};
  int dim = 0;
  bool operator<(const PosKey& o) const {
    if (dim != o.dim) return dim < o.dim;
    for (int i = 0; i < dim; ++i)
      if (c[i] != o.c[i]) return c[i] < o.c[i];
    return false;
  }
};

inline PosKey pos_key(const Vec& v) {
  PosKey k;
  k.dim = v.dim;
  for (int i = 0; i < v.dim; ++i) k.c[i] = v[i];
  return k;
}

// Supremum S over real side lengths in [floor, inf) where
// |nu|(Q(x,l)) > thr * mu(2Q(x,l)) holds, exploiting that both masses are
// step functions of the side with breakpoints at atom Chebyshev distances.
// Returns a side in (S/2, S] still satisfying the inequality, so that every
// cube with side > 2l -- dyadic or not -- fails it.
inline std::optional<double> candidate_side(const Vec& x, const DiscreteMeasure& mu,
                                            const DiscreteMeasure& nu, double thr,
                                            double floor,
                                            std::vector<std::pair<double, double>>& events) {
  events.clear();
  for (const Atom& a : nu.atoms) events.emplace_back(2.0 * dist_inf(x, a.pos), std::abs(a.w));
  for (const Atom& a : mu.atoms) events.emplace_back(dist_inf(x, a.pos), -std::abs(a.w));
  std::sort(events.begin(), events.end());

  double nu_mass = 0, mu2_mass = 0;
  double best_lo = -1, best_hi = -1;  // last interval with the inequality
  size_t i = 0;
  while (i < events.size()) {
    double key = events[i].first;
    while (i < events.size() && events[i].first == key) {
      if (events[i].second >= 0)
        nu_mass += events[i].second;
      else
        mu2_mass -= events[i].second;
      ++i;
    }
    double next = (i < events.size()) ? events[i].first
                                      : std::numeric_limits<double>::infinity();
    // inequality constant on [key, next)
    if (nu_mass > thr * mu2_mass && next > floor) {
      best_lo = std::max(key, floor);
      best_hi = next;
    }
  }
  if (best_lo < 0) return std::nullopt;
  // best_hi is finite: once everything is inside, the lambda hypothesis
  // makes the inequality fail.
  double S = best_hi;
  double side = (best_lo > S / 2.0) ? best_lo : 0.75 * S;
  return side;
}

}  // namespace detail

/// Constructive Calderon-Zygmund decomposition at level lambda.
///
/// (i)  For every atom of supp mu U supp nu, find the largest cube scale at
///      which |nu|(Q) > 2^{-d-1} lambda mu(2Q) holds, placed so that all
///      cubes more than twice as large fail it.
/// (ii) Greedy almost-disjoint selection by decreasing side: keep a cube iff
///      its center is not covered yet. Coverage of all candidate centers and
///      the measured overlap replace the Besicovitch covering theorem.
/// (iii) g = dnu/dmu on atoms off Omega.
/// (iv) In nondecreasing R_j order, b_j = c_j chi_{A_j} where A_j drops the
///      atoms already loaded past twice the running constant C_2, and c_j
///      matches int b_j dmu = int w_j dnu.
inline CZResult cz_decompose(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             double lambda) {
  const int d = mu.atoms.empty() ? 0 : mu.atoms.front().pos.dim;
  if (mu.tag != MeasureTag::GraphQuadrature || mu.resolution <= 0)
    throw std::invalid_argument("cz_decompose: mu must be a graph quadrature");
  double mu_tv = mu.total_variation(), nu_tv = nu.total_variation();
  if (!(lambda > std::pow(2.0, d + 1) * nu_tv / mu_tv))
    throw std::domain_error("cz_decompose: lambda <= 2^{d+1} ||nu|| / ||mu||");

  CZResult res;
  res.lambda = lambda;
  res.side_floor = 4.0 * mu.resolution;
  const double thr = std::pow(2.0, -d - 1) * lambda;

  // exact-position matching of nu atoms to mu atoms
  std::map<detail::PosKey, int> mu_index;
  for (size_t i = 0; i < mu.atoms.size(); ++i)
    mu_index[detail::pos_key(mu.atoms[i].pos)] = static_cast<int>(i);
  res.nu_match.assign(nu.atoms.size(), -1);
  for (size_t i = 0; i < nu.atoms.size(); ++i) {
    auto it = mu_index.find(detail::pos_key(nu.atoms[i].pos));
    if (it != mu_index.end()) res.nu_match[i] = it->second;
  }

  // (i) candidate cubes centered at atoms
  struct Candidate {
    Vec center;
    double side;
  };
  std::vector<Candidate> cands;
  std::vector<std::pair<double, double>> events;
  auto scan_center = [&](const Vec& x) {
    auto side = detail::candidate_side(x, mu, nu, thr, res.side_floor, events);
    if (side) cands.push_back({x, *side});
  };
  for (const Atom& a : mu.atoms) scan_center(a.pos);
  for (size_t i = 0; i < nu.atoms.size(); ++i)
    if (res.nu_match[i] < 0) scan_center(nu.atoms[i].pos);

  // (ii) greedy selection by decreasing side
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.side != b.side) return a.side > b.side;
    return detail::pos_key(a.center) < detail::pos_key(b.center);
  });
  std::vector<Cube> selected;
  for (const Candidate& cand : cands) {
    bool covered = false;
    for (const Cube& q : selected)
      if (q.contains(cand.center)) {
        covered = true;
        break;
      }
    if (!covered) selected.push_back({cand.center, cand.side});
  }
  // nondecreasing sides for the b_j construction
  std::sort(selected.begin(), selected.end(), [](const Cube& a, const Cube& b) {
    if (a.side != b.side) return a.side < b.side;
    return detail::pos_key(a.center) < detail::pos_key(b.center);
  });
  res.cubes = std::move(selected);

  // membership masks and overlap counts
  res.mu_in_omega.assign(mu.atoms.size(), 0);
  res.nu_in_omega.assign(nu.atoms.size(), 0);
  res.nu_overlap.assign(nu.atoms.size(), 0);
  for (size_t i = 0; i < mu.atoms.size(); ++i) {
    int cnt = 0;
    for (const Cube& q : res.cubes)
      if (q.contains(mu.atoms[i].pos)) ++cnt;
    res.mu_in_omega[i] = cnt > 0;
    res.max_overlap = std::max(res.max_overlap, double(cnt));
  }
  for (size_t i = 0; i < nu.atoms.size(); ++i) {
    int cnt = 0;
    for (const Cube& q : res.cubes)
      if (q.contains(nu.atoms[i].pos)) ++cnt;
    res.nu_overlap[i] = cnt;
    res.nu_in_omega[i] = cnt > 0;
    res.max_overlap = std::max(res.max_overlap, double(cnt));
    if (res.nu_match[i] < 0 && cnt == 0 && std::abs(nu.atoms[i].w) > 0)
      throw std::runtime_error(
          "cz_decompose: singular nu atom escaped Omega; nu = g mu off Omega "
          "cannot hold at this resolution/lambda");
  }

  // (iii) good density off Omega
  res.g.assign(mu.atoms.size(), Complex(0, 0));
  for (size_t i = 0; i < nu.atoms.size(); ++i) {
    int mi = res.nu_match[i];
    if (mi >= 0 && !res.mu_in_omega[mi])
      res.g[mi] += nu.atoms[i].w / mu.atoms[mi].w;
  }

  // int w_j dnu per cube
  const size_t J = res.cubes.size();
  res.wnu.assign(J, Complex(0, 0));
  for (size_t i = 0; i < nu.atoms.size(); ++i) {
    if (res.nu_overlap[i] == 0) continue;
    for (size_t j = 0; j < J; ++j)
      if (res.cubes[j].contains(nu.atoms[i].pos))
        res.wnu[j] += nu.atoms[i].w / double(res.nu_overlap[i]);
  }

  // (iv) b_j in nondecreasing R_j order
  res.c.assign(J, Complex(0, 0));
  res.support.assign(J, {});
  std::vector<double> sum_abs_b(mu.atoms.size(), 0.0);
  std::vector<double> int_abs_b(J, 0.0);
  auto r_intersects = [&](size_t a, size_t b) {
    const Cube ra = res.cubes[a].scaled(6.0), rb = res.cubes[b].scaled(6.0);
    return dist_inf(ra.center, rb.center) <= (ra.side + rb.side) / 2.0;
  };
  for (size_t k = 0; k < J; ++k) {
    const Cube rk = res.cubes[k].scaled(6.0);
    double mu_rk = 0;
    for (const Atom& a : mu.atoms)
      if (rk.contains(a.pos)) mu_rk += std::abs(a.w);
    if (mu_rk <= 0)
      throw std::runtime_error("cz_decompose: mu(R_k) = 0, construction failed");
    double prior_load = 0;
    for (size_t j = 0; j < k; ++j)
      if (r_intersects(j, k)) prior_load += int_abs_b[j];
    double c2k = prior_load / (lambda * mu_rk);
    res.measured_c2 = std::max(res.measured_c2, c2k);
    double mu_ak = 0;
    for (size_t i = 0; i < mu.atoms.size(); ++i) {
      if (!rk.contains(mu.atoms[i].pos)) continue;
      if (sum_abs_b[i] <= 2.0 * c2k * lambda) {
        res.support[k].push_back(static_cast<int>(i));
        mu_ak += std::abs(mu.atoms[i].w);
      }
    }
    if (mu_ak < mu_rk / 2.0 * (1.0 - 1e-12))
      throw std::runtime_error("cz_decompose: mu(A_k) < mu(R_k)/2, construction failed");
    res.c[k] = res.wnu[k] / mu_ak;
    int_abs_b[k] = std::abs(res.c[k]) * mu_ak;
    for (int i : res.support[k]) sum_abs_b[i] += std::abs(res.c[k]);
  }
  return res;
}

// ============================================================================
// Verification
// ============================================================================

struct CZCheck {
  std::string name;
  bool pass = true;
  double measured = 0.0;
  double threshold = 0.0;
};

struct CZReport {
  std::vector<CZCheck> checks;
  bool all_pass = true;

  void add(std::string name, bool pass, double measured, double threshold) {
    checks.push_back({std::move(name), pass, measured, threshold});
    all_pass = all_pass && pass;
  }
};

/// Re-evaluates every inequality of the decomposition by direct summation
/// and reports the measured constants. Thresholds for (5) and (6) are the
/// certificates the construction itself guarantees.
inline CZReport verify_cz(const CZResult& r, const DiscreteMeasure& mu,
                          const DiscreteMeasure& nu) {
  const int d = mu.atoms.empty() ? 0 : mu.atoms.front().pos.dim;
  const double thr = std::pow(2.0, -d - 1) * r.lambda;
  CZReport rep;
  const size_t J = r.cubes.size();

  auto nu_mass = [&](const Cube& q) {
    double s = 0;
    for (const Atom& a : nu.atoms)
      if (q.contains(a.pos)) s += std::abs(a.w);
    return s;
  };
  auto mu_mass = [&](const Cube& q) {
    double s = 0;
    for (const Atom& a : mu.atoms)
      if (q.contains(a.pos)) s += std::abs(a.w);
    return s;
  };

  {  // (1) strict lower density on every selected cube
    bool pass = true;
    double worst = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < J; ++j) {
      double num = nu_mass(r.cubes[j]);
      double den = thr * mu_mass(r.cubes[j].scaled(2.0));
      if (!(num > den)) pass = false;
      if (den > 0) worst = std::min(worst, num / den);
    }
    if (J == 0) worst = 0.0;
    rep.add("(1) |nu|(Q_j) > 2^{-d-1} lambda mu(2Q_j)", pass,
            std::isfinite(worst) ? worst : 0.0, 1.0);
  }
  {  // (2) failure of the density condition at eta > 2
    bool pass = true;
    double worst = 0.0;
    for (size_t j = 0; j < J; ++j)
      for (double eta : {2.5, 3.0, 4.0, 8.0}) {
        double num = nu_mass(r.cubes[j].scaled(eta));
        double den = thr * mu_mass(r.cubes[j].scaled(2.0 * eta));
        if (den > 0)
          worst = std::max(worst, num / den);
        else if (num > 0)
          pass = false;
      }
    pass = pass && worst <= 1.0 + 1e-12;
    rep.add("(2) |nu|(etaQ_j) <= 2^{-d-1} lambda mu(2etaQ_j), eta in {2.5,3,4,8}",
            pass, worst, 1.0);
  }
  {  // (3) nu = g mu off Omega with |g| <= lambda
    double worst = 0.0;
    for (size_t i = 0; i < mu.atoms.size(); ++i)
      if (!r.mu_in_omega[i]) worst = std::max(worst, std::abs(r.g[i]));
    rep.add("(3) |g| <= lambda off Omega", worst <= r.lambda * (1.0 + 1e-12),
            worst / r.lambda, 1.0);
  }
  {  // (4) int b_j dmu = int w_j dnu, by direct summation
    double worst = 0.0;
    for (size_t j = 0; j < J; ++j) {
      Complex ib = 0;
      for (int i : r.support[j]) ib += r.c[j] * mu.atoms[i].w;
      double rel = std::abs(ib - r.wnu[j]) / std::max(std::abs(r.wnu[j]), 1e-30);
      worst = std::max(worst, rel);
    }
    rep.add("(4) int b_j dmu = int w_j dnu (rel)", worst <= 1e-10, worst, 1e-10);
  }
  {  // (5) sup-norm control; the half-mass property certifies C <= 2
    double worst = 0.0;
    for (size_t j = 0; j < J; ++j) {
      double num = std::abs(r.c[j]) * mu_mass(r.r_cube(j));
      double den = nu_mass(r.cubes[j]);
      if (den > 0) worst = std::max(worst, num / den);
      else if (num > 0) worst = std::numeric_limits<double>::infinity();
    }
    rep.add("(5) ||b_j||_inf mu(R_j) <= C |nu|(Q_j)",
            worst <= 2.0 * (1.0 + 1e-9), worst, 2.0);
  }
  {  // (6) pointwise bound, certified by C0 <= 2 C2 + 2^{-d}
    std::vector<double> load(mu.atoms.size(), 0.0);
    for (size_t j = 0; j < J; ++j)
      for (int i : r.support[j]) load[i] += std::abs(r.c[j]);
    double worst = 0.0;
    for (double v : load) worst = std::max(worst, v);
    double c0 = worst / r.lambda;
    double cert = 2.0 * r.measured_c2 + std::pow(2.0, -d) + 1e-9;
    rep.add("(6) sum_j |b_j| <= C0 lambda", c0 <= cert, c0, cert);
  }
  {  // half-mass property used by the construction
    bool pass = true;
    double worst = 1.0;
    for (size_t j = 0; j < J; ++j) {
      double mu_a = 0;
      for (int i : r.support[j]) mu_a += std::abs(mu.atoms[i].w);
      double mu_r = mu_mass(r.r_cube(j));
      if (mu_r > 0) {
        double frac = mu_a / mu_r;
        worst = std::min(worst, frac);
        if (frac < 0.5 * (1.0 - 1e-12)) pass = false;
      }
    }
    rep.add("mu(A_j) >= mu(R_j)/2", pass, worst, 0.5);
  }
  {  // measured overlap of the selected cubes (reported, finite)
    rep.add("overlap sum_j chi_{Q_j} (measured)", std::isfinite(r.max_overlap),
            r.max_overlap, r.max_overlap);
  }
  return rep;
}

// ============================================================================
// Good/bad splitting nu = g mu + sum_j (w_j nu - b_j mu)
// ============================================================================

struct GoodBadSplit {
  DiscreteMeasure good;
  std::vector<DiscreteMeasure> bad;  // nu_b^j, each with total mass zero
};

inline GoodBadSplit good_bad_split(const DiscreteMeasure& nu, const CZResult& r,
                                   const DiscreteMeasure& mu) {
  GoodBadSplit out;
  using AtomMap = std::map<detail::PosKey, std::pair<Vec, Complex>>;
  auto add = [](AtomMap& m, const Vec& p, Complex w) {
    auto [it, fresh] = m.try_emplace(detail::pos_key(p), std::make_pair(p, Complex(0, 0)));
    it->second.second += w;
  };
  auto to_measure = [](const AtomMap& m) {
    DiscreteMeasure out;
    out.tag = MeasureTag::Mixed;
    for (const auto& [k, pw] : m)
      if (pw.second != Complex(0, 0)) out.atoms.push_back({pw.first, pw.second});
    return out;
  };

  AtomMap good;
  for (size_t i = 0; i < nu.atoms.size(); ++i)
    if (!r.nu_in_omega[i]) add(good, nu.atoms[i].pos, nu.atoms[i].w);
  for (size_t j = 0; j < r.cubes.size(); ++j)
    for (int i : r.support[j]) add(good, mu.atoms[i].pos, r.c[j] * mu.atoms[i].w);
  out.good = to_measure(good);

  for (size_t j = 0; j < r.cubes.size(); ++j) {
    AtomMap bad;
    for (size_t i = 0; i < nu.atoms.size(); ++i)
      if (r.cubes[j].contains(nu.atoms[i].pos))
        add(bad, nu.atoms[i].pos, nu.atoms[i].w / double(r.nu_overlap[i]));
    for (int i : r.support[j]) add(bad, mu.atoms[i].pos, -r.c[j] * mu.atoms[i].w);
    out.bad.push_back(to_measure(bad));
  }
  return out;
}

// ============================================================================
// Exports
// ============================================================================

inline void write_cz_cubes_csv(const std::string& path, const CZResult& r, int d) {
  std::vector<std::string> header;
  for (int i = 1; i <= d; ++i) header.push_back("center_" + std::to_string(i));
  header.push_back("side");
  CsvWriter w(path, header);
  for (const Cube& q : r.cubes) {
    std::vector<std::string> cells;
    for (int i = 0; i < d; ++i) cells.push_back(g17(q.center[i]));
    cells.push_back(g17(q.side));
    w.row(cells);
  }
}

inline void write_cz_b_table_csv(const std::string& path, const CZResult& r) {
  CsvWriter w(path, {"j", "c_re", "c_im", "atom_indices"});
  for (size_t j = 0; j < r.cubes.size(); ++j) {
    std::string idx;
    for (size_t t = 0; t < r.support[j].size(); ++t)
      idx += (t ? ";" : "") + std::to_string(r.support[j][t]);
    w.row({std::to_string(j), g17(r.c[j].real()), g17(r.c[j].imag()), idx});
  }
}

inline void write_cz_report_txt(const std::string& path, const CZReport& rep) {
  std::ofstream out(path);
  for (const CZCheck& c : rep.checks)
    out << c.name << " measured=" << g17(c.measured) << " threshold="
        << g17(c.threshold) << " " << (c.pass ? "PASS" : "FAIL") << "\n";
  out << (rep.all_pass ? "ALL PASS" : "SOME FAIL") << "\n";
}

}  // namespace czvar
