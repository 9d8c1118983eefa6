#pragma once

#include "bldg/hecke.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>
#include <vector>

namespace bldg {

// ---------------------------------------------------------------------------
// Isotropic finite-range walks on good vertices.
// ---------------------------------------------------------------------------

struct IsotropicWalk {
  std::vector<std::pair<RVec, Rational>> generators;  // dominant classes, weights sum to 1
  bool lazy = false;            // operator was replaced by (1 + A)/2
  bool eps_class = false;       // walk lives on the eps-good lattice (BC)

  std::vector<std::pair<RVec, double>> generators_d() const {
    std::vector<std::pair<RVec, double>> g;
    for (const auto& kv : generators) g.emplace_back(kv.first, to_double(kv.second));
    return g;
  }
};

struct WalkDiagnostics {
  bool irreducible = false;
  long long period = 0;
  std::string note;  // e.g. the lazy Green rescaling identity
};

namespace detail {

// window reachability + period of the apartment-folded step graph
inline WalkDiagnostics walk_window_check(const RootDatum& rd, const IsotropicWalk& w,
                                         long long window = 4) {
  WalkDiagnostics diag;
  auto C = cartan_matrix(rd);
  std::vector<std::vector<long long>> steps;
  for (const auto& g : w.generators)
    for (const auto& pt : weyl_orbit(rd, g.first)) steps.push_back(t_coords_int(rd, pt));
  // BFS over dominant classes inside the window box
  std::map<std::vector<long long>, long long> dist;
  std::vector<std::vector<long long>> frontier{std::vector<long long>(rd.rank, 0)};
  dist[frontier[0]] = 0;
  long long period_gcd = 0;
  for (std::size_t h = 0; h < frontier.size(); ++h) {
    auto cur = frontier[h];
    for (const auto& s : steps) {
      std::vector<long long> nxt(cur);
      for (int i = 0; i < rd.rank; ++i) nxt[i] += s[i];
      fold_dominant_t(nxt, C);
      bool inside = true;
      for (int i = 0; i < rd.rank; ++i)
        if (nxt[i] > window) inside = false;
      if (!inside) continue;
      auto it = dist.find(nxt);
      if (it == dist.end()) {
        dist[nxt] = dist[cur] + 1;
        frontier.push_back(nxt);
      } else {
        const long long cycle = dist[cur] + 1 - it->second;
        if (cycle != 0) period_gcd = std::gcd(period_gcd, std::llabs(cycle));
      }
    }
  }
  // irreducible on the window: every dominant class in the box is reached
  long long expected = 1;
  for (int i = 0; i < rd.rank; ++i) expected *= (window + 1);
  diag.irreducible = (static_cast<long long>(dist.size()) == expected);
  diag.period = period_gcd == 0 ? 1 : period_gcd;
  return diag;
}

}  // namespace detail

inline IsotropicWalk make_walk(const RootDatum& rd, std::vector<std::pair<RVec, Rational>> weights,
                               bool lazify = false, WalkDiagnostics* diag_out = nullptr) {
  if (weights.empty()) throw std::invalid_argument("make_walk: empty generator set");
  Rational total = 0;
  for (auto& [lam, c] : weights) {
    if (c <= 0) throw std::invalid_argument("make_walk: weights must be positive");
    if (!rd.in_fundamental_chamber(lam))
      throw std::invalid_argument("make_walk: generators must be dominant");
    total += c;
  }
  if (total != 1) throw std::invalid_argument("make_walk: weights must sum to 1");
  IsotropicWalk w;
  w.generators = std::move(weights);
  if (lazify) {
    // p~ = (delta + p)/2; record the Green rescaling for callers
    std::vector<std::pair<RVec, Rational>> g;
    g.emplace_back(zero_vec(rd.dim), Rational(1, 2));
    bool zero_present = false;
    for (auto& [lam, c] : w.generators) {
      if (is_zero(lam)) {
        g[0].second += c / 2;
        zero_present = true;
      } else {
        g.emplace_back(lam, c / 2);
      }
    }
    (void)zero_present;
    w.generators = std::move(g);
    w.lazy = true;
  }
  auto diag = detail::walk_window_check(rd, w);
  diag.note = w.lazy ? "lazy transform applied; G_zeta = (zeta/(zeta+1)) G~_{(zeta+1)/2}" : "";
  if (!diag.irreducible)
    throw std::invalid_argument("make_walk: reducible on the reachability window");
  if (diag_out) *diag_out = diag;
  return w;
}

// spectral radius rho = sum c_k P_{lambda_k}(0)
inline ValueWithError spectral_radius(const SphericalContext& ctx, const IsotropicWalk& w) {
  ValueWithError out;
  for (const auto& [lam, c] : w.generators) {
    auto p = macdonald_zero(ctx, lam);
    out.value += to_double(c) * p.value;
    out.error += to_double(c) * p.error;
  }
  return out;
}

// ---------------------------------------------------------------------------
// kappa(z) = rho^{-1} h_z(A) = sum_{v} c_v e^{(z,v)} with positive coefficients.
// ---------------------------------------------------------------------------

struct KappaExpansion {
  std::vector<RVec> points;       // exact lattice points (full Weyl orbits)
  std::vector<double> coeff;      // positive coefficients
  std::vector<std::vector<double>> points_d;
  int dim = 0;

  double eval(const std::vector<double>& s) const {
    double acc = 0;
    for (std::size_t i = 0; i < points_d.size(); ++i) {
      double p = 0;
      for (int d = 0; d < dim; ++d) p += points_d[i][d] * s[d];
      acc += coeff[i] * std::exp(p);
    }
    return acc;
  }
  std::vector<double> grad(const std::vector<double>& s) const {
    std::vector<double> gr(dim, 0.0);
    for (std::size_t i = 0; i < points_d.size(); ++i) {
      double p = 0;
      for (int d = 0; d < dim; ++d) p += points_d[i][d] * s[d];
      const double w = coeff[i] * std::exp(p);
      for (int d = 0; d < dim; ++d) gr[d] += w * points_d[i][d];
    }
    return gr;
  }
};

inline KappaExpansion kappa_expansion(ExpansionCache& cache, const IsotropicWalk& walk,
                                      double rho) {
  const RootDatum& rd = *cache.context().rd;
  KappaExpansion ke;
  ke.dim = rd.dim;
  std::map<std::string, std::pair<RVec, double>> acc;
  for (const auto& [lam, c] : walk.generators) {
    const auto& e = cache.get(lam);
    for (std::size_t j = 0; j < e.support.size(); ++j)
      for (const auto& pt : e.orbits[j]) {
        auto [it, fresh] = acc.emplace(vec_str(pt), std::make_pair(pt, 0.0));
        it->second.second += to_double(c) * e.coeff[j] / rho;
      }
  }
  for (auto& kv : acc) {
    double c = kv.second.second;
    if (std::abs(c) < 1e-12) continue;  // numerically absent exponent
    if (c < 0) {
      if (c < -1e-10)
        throw std::runtime_error("kappa expansion: negative coefficient " + std::to_string(c));
      continue;
    }
    ke.points.push_back(kv.second.first);
    ke.coeff.push_back(c);
    std::vector<double> pd(rd.dim);
    for (int d = 0; d < rd.dim; ++d) pd[d] = to_double(kv.second.first[d]);
    ke.points_d.push_back(std::move(pd));
  }
  // normalization kappa(0) = 1
  double at0 = 0;
  for (double c : ke.coeff) at0 += c;
  if (std::abs(at0 - 1.0) > 1e-9)
    throw std::runtime_error("kappa expansion: kappa(0) = " + std::to_string(at0));
  return ke;
}

// ---------------------------------------------------------------------------
// The boundary point s_u: the unique point of {kappa = zeta/rho} where the
// gradient points along u.
// ---------------------------------------------------------------------------

struct SUResult {
  std::vector<double> s;      // ambient coordinates
  double multiplier = 0;      // |grad kappa(s_u)|
  double residual = 0;
};

namespace detail {

// orthonormal basis of span(Phi) as ambient double vectors
inline std::vector<std::vector<double>> span_basis(const RootDatum& rd) {
  std::vector<std::vector<double>> B;
  for (int i = 0; i < rd.rank; ++i) {
    std::vector<double> v(rd.dim);
    for (int d = 0; d < rd.dim; ++d) v[d] = to_double(rd.coweight[i][d]);
    for (const auto& b : B) {
      double pr = 0;
      for (int d = 0; d < rd.dim; ++d) pr += v[d] * b[d];
      for (int d = 0; d < rd.dim; ++d) v[d] -= pr * b[d];
    }
    double nn = 0;
    for (double x : v) nn += x * x;
    nn = std::sqrt(nn);
    if (nn < 1e-14) throw std::logic_error("span basis degenerate");
    for (double& x : v) x /= nn;
    B.push_back(std::move(v));
  }
  return B;
}

}  // namespace detail

inline SUResult solve_s_u(const RootDatum& rd, const KappaExpansion& ke, double zeta_over_rho,
                          const std::vector<double>& u_unit, double tol = 1e-13,
                          int max_iter = 200) {
  if (!(zeta_over_rho > 1.0)) throw std::invalid_argument("solve_s_u: requires zeta > rho");
  const int r = rd.rank, D = rd.dim;
  auto B = detail::span_basis(rd);
  auto to_ambient = [&](const Eigen::VectorXd& y) {
    std::vector<double> s(D, 0.0);
    for (int i = 0; i < r; ++i)
      for (int d = 0; d < D; ++d) s[d] += y(i) * B[i][d];
    return s;
  };
  Eigen::VectorXd ub(r);
  for (int i = 0; i < r; ++i) {
    double pr = 0;
    for (int d = 0; d < D; ++d) pr += u_unit[d] * B[i][d];
    ub(i) = pr;
  }

  // unknowns: y (span coordinates of s) and t > 0
  Eigen::VectorXd y = 0.5 * ub;
  double t = 1.0;
  double last_res = 1e300;
  for (int it = 0; it < max_iter; ++it) {
    auto s = to_ambient(y);
    // F = [B^T(grad kappa - t u); kappa - target]
    Eigen::VectorXd F(r + 1);
    Eigen::MatrixXd Jm(r + 1, r + 1);
    std::vector<double> gr(D, 0.0);
    std::vector<std::vector<double>> H(D, std::vector<double>(D, 0.0));
    double kv = 0;
    for (std::size_t p = 0; p < ke.points_d.size(); ++p) {
      double pr = 0;
      for (int d = 0; d < D; ++d) pr += ke.points_d[p][d] * s[d];
      const double w = ke.coeff[p] * std::exp(pr);
      kv += w;
      for (int d = 0; d < D; ++d) gr[d] += w * ke.points_d[p][d];
      for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) H[a][b] += w * ke.points_d[p][a] * ke.points_d[p][b];
    }
    for (int i = 0; i < r; ++i) {
      double pr = 0;
      for (int d = 0; d < D; ++d) pr += B[i][d] * (gr[d] - t * u_unit[d]);
      F(i) = pr;
    }
    F(r) = kv - zeta_over_rho;
    const double res = F.cwiseAbs().maxCoeff();
    if (res < tol) {
      SUResult out;
      out.s = s;
      out.multiplier = t;
      out.residual = res;
      return out;
    }
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) {
        double acc = 0;
        for (int a = 0; a < D; ++a)
          for (int b = 0; b < D; ++b) acc += B[i][a] * H[a][b] * B[j][b];
        Jm(i, j) = acc;
      }
      Jm(i, r) = -ub(i);
    }
    for (int j = 0; j < r; ++j) {
      double acc = 0;
      for (int d = 0; d < D; ++d) acc += gr[d] * B[j][d];
      Jm(r, j) = acc;
    }
    Jm(r, r) = 0;
    Eigen::VectorXd step = Jm.fullPivLu().solve(F);
    double damp = 1.0;
    if (res > last_res) damp = 0.5;  // crude trust control
    for (int i = 0; i < r; ++i) y(i) -= damp * step(i);
    t -= damp * step(r);
    if (t <= 0) t = 1e-6;
    last_res = res;
  }
  throw std::runtime_error("solve_s_u: Newton failed to converge");
}

// Independent convex route via the Legendre functional phi(delta) =
// min_x { (x,delta) - log kappa(x) }: find t' with kappa(x_{t' u}) = zeta/rho.
inline SUResult solve_s_u_variational(const RootDatum& rd, const KappaExpansion& ke,
                                      double zeta_over_rho, const std::vector<double>& u_unit) {
  const int r = rd.rank, D = rd.dim;
  auto B = detail::span_basis(rd);
  // inner problem: given delta, minimize (x,delta) - log kappa(x); the minimizer
  // satisfies grad log kappa(x) = delta. Solve by Newton in span coordinates.
  auto inner = [&](double tprime) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(r);
    for (int it = 0; it < 300; ++it) {
      std::vector<double> s(D, 0.0);
      for (int i = 0; i < r; ++i)
        for (int d = 0; d < D; ++d) s[d] += y(i) * B[i][d];
      double kv = 0;
      std::vector<double> gr(D, 0.0);
      std::vector<std::vector<double>> H(D, std::vector<double>(D, 0.0));
      for (std::size_t p = 0; p < ke.points_d.size(); ++p) {
        double pr = 0;
        for (int d = 0; d < D; ++d) pr += ke.points_d[p][d] * s[d];
        const double w = ke.coeff[p] * std::exp(pr);
        kv += w;
        for (int d = 0; d < D; ++d) gr[d] += w * ke.points_d[p][d];
        for (int a = 0; a < D; ++a)
          for (int b = 0; b < D; ++b) H[a][b] += w * ke.points_d[p][a] * ke.points_d[p][b];
      }
      Eigen::VectorXd F(r);
      Eigen::MatrixXd Jm(r, r);
      for (int i = 0; i < r; ++i) {
        double pr = 0;
        for (int d = 0; d < D; ++d) pr += B[i][d] * (gr[d] / kv - tprime * u_unit[d]);
        F(i) = pr;
      }
      // d/dy of grad log kappa = (H kv - gr gr^T)/kv^2 projected
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
          double acc = 0;
          for (int a = 0; a < D; ++a)
            for (int b = 0; b < D; ++b)
              acc += B[i][a] * (H[a][b] / kv - gr[a] * gr[b] / (kv * kv)) * B[j][b];
          Jm(i, j) = acc;
        }
      if (F.cwiseAbs().maxCoeff() < 1e-14) break;
      y -= Jm.fullPivLu().solve(F);
    }
    std::vector<double> s(D, 0.0);
    for (int i = 0; i < r; ++i)
      for (int d = 0; d < D; ++d) s[d] += y(i) * B[i][d];
    return s;
  };
  // outer: kappa(x_{t'}) is increasing in t'; bisect
  double lo = 0.0, hi = 0.125;
  while (ke.eval(inner(hi)) < zeta_over_rho) {
    hi *= 2;
    if (hi > 1e6) throw std::runtime_error("variational solve: bracket failed");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (ke.eval(inner(mid)) < zeta_over_rho)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15 * (1 + hi)) break;
  }
  SUResult out;
  out.s = inner(0.5 * (lo + hi));
  auto gr = ke.grad(out.s);
  double nn = 0;
  for (int d = 0; d < D; ++d) nn += gr[d] * gr[d];
  out.multiplier = std::sqrt(nn);
  double res = std::abs(ke.eval(out.s) - zeta_over_rho);
  out.residual = res;
  return out;
}

// ---------------------------------------------------------------------------
// Green functions: one radial evolution run per walk, reused for every zeta.
// ---------------------------------------------------------------------------

struct GreenInfo {
  double value = 0;
  double tail = 0;           // added tail estimate
  double tail_residual = 0;  // fit residual (zeta = rho only)
  int terms = 0;
  bool reachable = true;
};

class GreenTable {
 public:
  GreenTable(ExpansionCache& cache, const IsotropicWalk& walk, double rho,
             std::vector<RVec> targets, int steps)
      : rho_(rho), targets_(std::move(targets)) {
    const RootDatum& rd = *cache.context().rd;
    const ParameterSystem& ps = *cache.context().ps;
    ProfileTable table(cache, walk.generators_d());
    RadialEvolution ev(table, rho, 1e-45, chi_half_tilt(rd, ps));
    for (const auto& tgt : targets_) {
      ev.track(t_coords_int(rd, tgt));
      n_values_.push_back(to_double(n_lambda(rd, ps, tgt)));
    }
    ev.run(steps);
    for (std::size_t k = 0; k < targets_.size(); ++k) series_.push_back(ev.series(k));
  }

  int find(const RVec& v) const {
    for (std::size_t i = 0; i < targets_.size(); ++i)
      if (targets_[i] == v) return static_cast<int>(i);
    return -1;
  }

  // G_zeta(class k) = (1/N) sum_n (rho/zeta)^n b_n
  GreenInfo green(double zeta, int k, double tol = 1e-9) const {
    if (!(zeta >= rho_ * (1 - 1e-12)))
      throw std::invalid_argument("green: zeta below the spectral radius");
    const auto& b = series_[k];
    GreenInfo info;
    const double q = rho_ / zeta;
    double sum = 0, w = 1;
    std::vector<double> terms(b.size());
    for (std::size_t n = 0; n < b.size(); ++n) {
      terms[n] = w * b[n];
      sum += terms[n];
      w *= q;
    }
    info.terms = static_cast<int>(b.size());
    if (sum <= 0) {
      info.reachable = false;
      info.value = 0;
      return info;
    }
    // tail handling on the nonzero subsequence
    std::vector<std::pair<double, double>> logpts;  // (log n, log term)
    const std::size_t N = b.size() - 1;
    for (std::size_t n = std::max<std::size_t>(500, N / 2); n <= N; ++n)
      if (terms[n] > 0) logpts.emplace_back(std::log(double(n)), std::log(terms[n]));
    double tail = 0, fit_res = 0;
    if (zeta > rho_ * (1 + 1e-9)) {
      // geometric remainder bound; certifies the truncation, never added
      double last = 0;
      for (std::size_t n = N; n + 20 > N && n > 0; --n) last = std::max(last, b[n]);
      const double bound = last * std::pow(q, double(N + 1)) / (1 - q);
      info.tail_residual = bound / std::max(sum, 1e-300);
      tail = 0;
    } else if (logpts.size() >= 8) {
      // fit log term = log C - beta log n - A/n on the last decade; the 1/n
      // regressor absorbs the pre-asymptotic drift of the local limit profile
      Eigen::MatrixXd X(logpts.size(), 3);
      Eigen::VectorXd Y(logpts.size());
      for (std::size_t i = 0; i < logpts.size(); ++i) {
        const double logn = logpts[i].first;
        X(i, 0) = 1.0;
        X(i, 1) = -logn;
        X(i, 2) = -std::exp(-logn);
        Y(i) = logpts[i].second;
      }
      Eigen::Vector3d cfit = (X.transpose() * X).ldlt().solve(X.transpose() * Y);
      const double logc = cfit(0), beta = cfit(1), A = cfit(2);
      for (std::size_t i = 0; i < logpts.size(); ++i)
        fit_res = std::max(fit_res, std::abs((X.row(i) * cfit)(0, 0) - Y(i)));
      if (beta < 1.2) throw std::runtime_error("green: tail fit unstable at zeta = rho");
      // stride of the nonzero subsequence (walk period effect)
      std::size_t stride = 0, last_nz = 0;
      for (std::size_t n = std::max<std::size_t>(500, N / 2); n <= N; ++n)
        if (terms[n] > 0) {
          if (last_nz > 0) stride = std::gcd(stride, n - last_nz);
          last_nz = n;
        }
      if (stride == 0) stride = 1;
      // explicit summation of the fitted model along the stride, then integral
      double acc = 0;
      const std::size_t far = 400 * N;
      for (std::size_t n = last_nz + stride; n <= far; n += stride)
        acc += std::exp(logc - beta * std::log(double(n)) - A / double(n));
      acc += std::exp(logc) * std::pow(double(far), 1.0 - beta) / (beta - 1.0) /
             static_cast<double>(stride);
      tail = acc;
      info.tail_residual = fit_res;
    }
    info.tail = tail / n_values_[k];
    info.value = sum / n_values_[k] + info.tail;
    (void)tol;
    return info;
  }

  double rho() const { return rho_; }

 private:
  double rho_;
  std::vector<RVec> targets_;
  std::vector<double> n_values_;
  std::vector<std::vector<double>> series_;
};

// ---------------------------------------------------------------------------
// Closed-form limit kernels (bottom of spectrum and above).
// ---------------------------------------------------------------------------

// canonical primitive representative of a rational direction
inline RVec canonical_direction(const RVec& v) {
  Int l = 1, g = 0;
  for (const auto& x : v)
    if (x != 0) l = boost::multiprecision::lcm(l, den(x));
  RVec w = v;
  for (auto& x : w) x *= Rational(l);
  for (const auto& x : w)
    if (x != 0) g = boost::multiprecision::gcd(g, boost::multiprecision::abs(num(x)));
  if (g != 0)
    for (auto& x : w) x /= Rational(g);
  return w;
}

// tau-class product: prod_{alpha in Phi^+ \ Phi_J} tau_alpha^{(1/2) <h, alpha>},
// computed from exact per-class exponent sums so that equal inputs give equal
// doubles regardless of root ordering.
inline double tau_half_product(const RootDatum& rd, const ParameterSystem& ps,
                               const std::vector<int>& J, const RVec& h) {
  std::map<std::string, std::pair<Rational, Rational>> classes;  // tau -> (tau, sum)
  for (std::size_t i = 0; i < rd.pos.size(); ++i) {
    bool inside = true;
    for (int k = 0; k < rd.rank; ++k)
      if (rd.pos[i].coeff[k] != 0 && std::find(J.begin(), J.end(), k) == J.end()) inside = false;
    if (inside) continue;  // alpha in Phi_J is excluded
    auto [it, fresh] =
        classes.emplace(ps.tau[i].str(), std::make_pair(ps.tau[i], Rational(0)));
    it->second.second += dot(h, rd.pos[i].v);
  }
  double acc = 1.0;
  for (const auto& kv : classes)
    acc *= std::pow(to_double(kv.second.first), 0.5 * to_double(kv.second.second));
  return acc;
}

struct LimitKernelParts {
  RVec facade_x;  // stabilized P_J(sigma(x, y_n))
  RVec facade_o;  // stabilized P_J(sigma(o, y_n))
  double phi_ratio = 1;
  double tau_factor = 1;
  double angular_factor = 1;
  double value = 1;
};

// Theorem-4-type closed form at the bottom of the spectrum.
inline LimitKernelParts limit_kernel_bottom(const SphericalContext& ctx, const RVec& x,
                                            const CoreSpec& spec, long long horizon = 40) {
  const RootDatum& rd = *ctx.rd;
  const ParameterSystem& ps = *ctx.ps;
  validate_core_spec(rd, spec);
  const RVec o = zero_vec(rd.dim);
  // stabilize the P_J components of sigma(x, y_n) and sigma(o, y_n)
  auto stabilized = [&](const RVec& base) {
    RVec prev;
    bool have = false;
    for (long long n = 2; n <= horizon; ++n) {
      RVec yn = core_generate(rd, spec, n);
      RVec pj = proj_J(rd, spec.J, sigma(rd, base, yn)).p;
      if (have && pj == prev) return pj;
      prev = pj;
      have = true;
    }
    throw std::runtime_error("limit kernel: P_J component failed to stabilize");
  };
  LimitKernelParts parts;
  parts.facade_x = stabilized(x);
  parts.facade_o = stabilized(o);
  if (spec.J.empty()) {
    parts.phi_ratio = 1.0;
  } else {
    auto fx = ground_state_J(ctx, parts.facade_x, spec.J);
    auto fo = ground_state_J(ctx, parts.facade_o, spec.J);
    parts.phi_ratio = fx.value / fo.value;
  }
  RVec h = horocycle(rd, o, x, spec.direction);
  parts.tau_factor = tau_half_product(rd, ps, spec.J, h);
  parts.value = parts.phi_ratio * parts.tau_factor;
  return parts;
}

// Theorem-10-type closed form above the bottom: the extra factor e^{(s_u, h)}.
inline LimitKernelParts limit_kernel_above(const SphericalContext& ctx, const RVec& x,
                                           const AngularSpec& spec, const KappaExpansion& ke,
                                           double zeta_over_rho, long long horizon = 40) {
  const RootDatum& rd = *ctx.rd;
  validate_angular_spec(rd, spec);
  LimitKernelParts parts = limit_kernel_bottom(ctx, x, spec.core, horizon);
  // canonical unit direction from the exact data
  RVec ud = canonical_direction(spec.u_dir);
  std::vector<double> u(rd.dim);
  double nn = 0;
  for (int d = 0; d < rd.dim; ++d) {
    u[d] = to_double(ud[d]);
    nn += u[d] * u[d];
  }
  nn = std::sqrt(nn);
  for (auto& c : u) c /= nn;
  auto su = solve_s_u(rd, ke, zeta_over_rho, u);
  // pair with Q_J(h) so that W_J-equivalent data give identical doubles
  RVec h = horocycle(rd, zero_vec(rd.dim), x, spec.core.direction);
  RVec qh = proj_J(rd, spec.core.J, h).q;
  double pairing = 0;
  for (int d = 0; d < rd.dim; ++d) pairing += su.s[d] * to_double(qh[d]);
  parts.angular_factor = std::exp(pairing);
  parts.value *= parts.angular_factor;
  return parts;
}

// Aitken-accelerated limit of a real sequence (used on Martin kernel ratios).
inline double aitken_limit(const std::vector<double>& v) {
  if (v.size() < 3) return v.empty() ? 0.0 : v.back();
  std::vector<double> cur = v;
  while (cur.size() >= 3) {
    std::vector<double> nxt;
    for (std::size_t i = 0; i + 2 < cur.size(); ++i) {
      const double denom = cur[i + 2] - 2 * cur[i + 1] + cur[i];
      if (std::abs(denom) < 1e-300)
        nxt.push_back(cur[i + 2]);
      else
        nxt.push_back(cur[i + 2] - (cur[i + 2] - cur[i + 1]) * (cur[i + 2] - cur[i + 1]) / denom);
    }
    if (nxt.size() < 3) return nxt.back();
    cur = std::move(nxt);
  }
  return cur.back();
}

}  // namespace bldg
