#pragma once

#include "bldg/apartment.hpp"
#include "bldg/root_datum.hpp"
#include "bldg/weyl.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <complex>
#include <map>
#include <stdexcept>
#include <vector>

namespace bldg {

using BigFloat = boost::multiprecision::cpp_bin_float_50;

struct ValueWithError {
  double value = 0;
  double error = 0;
};

// Thrown when the c-function is evaluated too close to one of its poles.
struct SingularPoint : std::domain_error {
  RVec coroot;
  explicit SingularPoint(RVec cr)
      : std::domain_error("c-function singular along coroot " + vec_str(cr)), coroot(std::move(cr)) {}
};

namespace detail {

template <class S>
S exp_of(const S& x) {
  using std::exp;
  return exp(x);
}

template <class S>
double abs_of(const S& x) {
  using std::abs;
  return static_cast<double>(abs(x));
}

inline double abs_of(const std::complex<double>& x) { return std::abs(x); }

}  // namespace detail

// Per-root constants entering the c-function product.
struct CRootData {
  RVec coroot;          // alpha-check
  double tau_a;         // tau_alpha
  double tau_2a;        // tau_{2 alpha} (1 when 2 alpha is not a root)
  double sqrt_tau_a;    // numeric square roots kept as doubles
  int pos_index;
};

// Evaluation context: enumerated Weyl group, per-root c-function data, and the
// extrapolation policy for all z -> 0 limits.
class SphericalContext {
 public:
  const RootDatum* rd;
  const ParameterSystem* ps;
  std::vector<WeylElt> W;      // full Weyl group
  Rational W_qinv;             // W(q^{-1})
  std::vector<CRootData> croots;  // over indivisible positive roots
  RVec theta0;                 // strongly dominant limit direction
  double base_step = 1e-2;
  int nodes = 6;               // Richardson nodes (halving steps)
  double singular_tol = 1e-9;

  SphericalContext(const RootDatum& datum, const ParameterSystem& params)
      : rd(&datum), ps(&params) {
    W = parabolic_elements(datum, full_index_set(datum));
    W_qinv = poincare_sum(W, params, PoincareMode::Inverse);
    for (int idx : datum.pos_indiv) {
      const PosRoot& p = datum.pos[idx];
      CRootData c;
      c.coroot = datum.coroot(p.v);
      c.tau_a = to_double(params.tau[idx]);
      int dbl = p.has_double ? datum.find_pos_root(scale(Rational(2), p.v)) : -1;
      c.tau_2a = dbl >= 0 ? to_double(params.tau[dbl]) : 1.0;
      c.sqrt_tau_a = std::sqrt(c.tau_a);
      c.pos_index = idx;
      croots.push_back(std::move(c));
    }
    theta0 = zero_vec(datum.dim);
    for (int i = 0; i < datum.rank; ++i) {
      // rho-check direction plus a fixed perturbation against degeneracies
      Rational coeff = Rational(1) + Rational(i + 1, 97 + 11 * i);
      theta0 = add(theta0, scale(coeff, datum.coweight[i]));
    }
  }

  // indices into croots for the subsystem Phi_J (empty J -> empty product)
  std::vector<int> croot_subset(const std::vector<int>& J) const {
    std::vector<int> out;
    for (std::size_t k = 0; k < croots.size(); ++k) {
      const auto& coeff = rd->pos[croots[k].pos_index].coeff;
      bool inside = true;
      for (int i = 0; i < rd->rank; ++i)
        if (coeff[i] != 0 && std::find(J.begin(), J.end(), i) == J.end()) inside = false;
      if (inside) out.push_back(static_cast<int>(k));
    }
    return out;
  }
};

// c-function over a subset of the indivisible roots; z given by its pairings
// with each coroot in the subset order.
template <class S>
S c_product(const SphericalContext& ctx, const std::vector<int>& subset,
            const std::vector<S>& coroot_pairings, bool* singular = nullptr) {
  S acc = S(1);
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const CRootData& c = ctx.croots[subset[k]];
    const S half = coroot_pairings[k] * S(-0.5);
    const S e_half = detail::exp_of(half);
    const S e_full = e_half * e_half;
    const S denom = S(1) - e_full;
    if (detail::abs_of(denom) < ctx.singular_tol) {
      if (singular) {
        *singular = true;
        return S(0);
      }
      throw SingularPoint(c.coroot);
    }
    const S numer =
        (S(1) - S(1.0 / (c.tau_2a * c.sqrt_tau_a)) * e_half) * (S(1) + S(1.0 / c.sqrt_tau_a) * e_half);
    acc *= numer / denom;
  }
  return acc;
}

// Evaluate c(z) for complex z (full system or Phi_J when J given).
inline std::complex<double> c_func(const SphericalContext& ctx, const std::vector<std::complex<double>>& z,
                                   const std::vector<int>* J = nullptr) {
  std::vector<int> subset = J ? ctx.croot_subset(*J) : ctx.croot_subset(full_index_set(*ctx.rd));
  std::vector<std::complex<double>> pair(subset.size());
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const RVec& cr = ctx.croots[subset[k]].coroot;
    std::complex<double> s = 0;
    for (int d = 0; d < ctx.rd->dim; ++d) s += to_double(cr[d]) * z[d];
    pair[k] = s;
  }
  return c_product(ctx, subset, pair);
}

// Macdonald polynomial P_lambda(z) by the symmetrized c-function formula.
inline std::complex<double> macdonald(const SphericalContext& ctx, const RVec& lambda,
                                      const std::vector<std::complex<double>>& z) {
  const RootDatum& rd = *ctx.rd;
  const auto full = ctx.croot_subset(full_index_set(rd));
  const double chi_half = std::exp2(-0.5 * chi_log2(rd, *ctx.ps, lambda));
  std::complex<double> sum = 0;
  std::vector<std::complex<double>> pair(full.size());
  for (const auto& w : ctx.W) {
    // (w z, v) = (z, w^{-1} v); compute w^{-1} images exactly
    // w.mat is orthogonal with exact entries; transpose acts as inverse
    std::complex<double> ez = 0;
    for (int dcol = 0; dcol < rd.dim; ++dcol) {
      // (z, w^{-1} lambda) built from the matrix transpose action
      std::complex<double> comp = 0;
      for (int drow = 0; drow < rd.dim; ++drow) comp += to_double(w.mat(drow, dcol)) * z[drow];
      ez += comp * to_double(lambda[dcol]);
    }
    for (std::size_t k = 0; k < full.size(); ++k) {
      const RVec& cr = ctx.croots[full[k]].coroot;
      std::complex<double> s = 0;
      for (int dcol = 0; dcol < rd.dim; ++dcol) {
        std::complex<double> comp = 0;
        for (int drow = 0; drow < rd.dim; ++drow) comp += to_double(w.mat(drow, dcol)) * z[drow];
        s += comp * to_double(cr[dcol]);
      }
      pair[k] = s;
    }
    sum += std::exp(ez) * c_product(ctx, full, pair);
  }
  return chi_half / to_double(ctx.W_qinv) * sum;
}

namespace detail {

inline BigFloat bigfloat_of(const Rational& x) {
  return BigFloat(num(x).str()) / BigFloat(den(x).str());
}

// Richardson extrapolation of F(t) to t = 0 with halving nodes. F is analytic
// at 0; the table eliminates t, t^2, ... successively. On exit row[i] holds the
// diagonal entry T[i][i], so the last two report value and error estimate.
template <class F>
ValueWithError richardson_limit(F&& f, double h, int nodes) {
  std::vector<BigFloat> row(nodes);
  for (int i = 0; i < nodes; ++i) row[i] = f(BigFloat(h) / boost::multiprecision::pow(BigFloat(2), i));
  for (int j = 1; j < nodes; ++j) {
    const BigFloat factor = boost::multiprecision::pow(BigFloat(2), j) - 1;
    for (int i = nodes - 1; i >= j; --i) row[i] = row[i] + (row[i] - row[i - 1]) / factor;
  }
  ValueWithError out;
  out.value = static_cast<double>(row[nodes - 1]);
  out.error = static_cast<double>(boost::multiprecision::abs(row[nodes - 1] - row[nodes - 2]));
  return out;
}

}  // namespace detail

// calP(mu, J): the theta -> 0 limit of the W_J-averaged, c_J-weighted
// exponential sum.
inline ValueWithError calP(const SphericalContext& ctx, const RVec& mu, const std::vector<int>& J,
                           std::vector<WeylElt> const* WJ_cache = nullptr) {
  const RootDatum& rd = *ctx.rd;
  std::vector<WeylElt> WJ_local;
  const std::vector<WeylElt>* WJ = WJ_cache;
  if (!WJ) {
    WJ_local = parabolic_elements(rd, J);
    WJ = &WJ_local;
  }
  const auto subset = ctx.croot_subset(J);

  // exact pairing data per W_J-element: (w t theta0, mu) = t (theta0, w^{-1} mu)
  std::vector<BigFloat> mu_pair;
  std::vector<std::vector<BigFloat>> cr_pair;
  for (const auto& w : *WJ) {
    // w^{-1} = transpose for orthogonal exact matrices: compute w^{-1} mu exactly
    RMat wt(rd.dim);
    for (int a = 0; a < rd.dim; ++a)
      for (int b = 0; b < rd.dim; ++b) wt(a, b) = w.mat(b, a);
    RVec wmu = wt.apply(mu);
    mu_pair.push_back(detail::bigfloat_of(dot(ctx.theta0, wmu)));
    std::vector<BigFloat> cp;
    for (int k : subset)
      cp.push_back(detail::bigfloat_of(dot(ctx.theta0, wt.apply(ctx.croots[k].coroot))));
    cr_pair.push_back(std::move(cp));
  }

  // sqrt(tau) in high precision for the c-product
  std::vector<BigFloat> tau_a, tau_2a, sqrt_tau;
  for (int k : subset) {
    tau_a.push_back(BigFloat(ctx.croots[k].tau_a));
    tau_2a.push_back(BigFloat(ctx.croots[k].tau_2a));
    sqrt_tau.push_back(boost::multiprecision::sqrt(BigFloat(ctx.croots[k].tau_a)));
  }

  double scale_guard = 1.0;
  for (const auto& mp : mu_pair) scale_guard = std::max(scale_guard, std::abs(static_cast<double>(mp)));
  const double h = std::min(ctx.base_step, 1.0 / scale_guard);

  auto F = [&](const BigFloat& t) -> BigFloat {
    BigFloat sum = 0;
    for (std::size_t wi = 0; wi < WJ->size(); ++wi) {
      BigFloat term = boost::multiprecision::exp(t * mu_pair[wi]);
      for (std::size_t k = 0; k < subset.size(); ++k) {
        const BigFloat half = t * cr_pair[wi][k] * BigFloat(-0.5);
        const BigFloat ehalf = boost::multiprecision::exp(half);
        const BigFloat efull = ehalf * ehalf;
        const BigFloat denom = BigFloat(1) - efull;
        const BigFloat numer =
            (BigFloat(1) - ehalf / (tau_2a[k] * sqrt_tau[k])) * (BigFloat(1) + ehalf / sqrt_tau[k]);
        term *= numer / denom;
      }
      sum += term;
    }
    return sum / BigFloat(static_cast<unsigned>(WJ->size()));
  };
  ValueWithError out = detail::richardson_limit(F, h, ctx.nodes);
  if (!(std::isfinite(out.value)))
    throw std::runtime_error("calP: extrapolation diverged");
  return out;
}

inline ValueWithError calP_full(const SphericalContext& ctx, const RVec& mu) {
  return calP(ctx, mu, full_index_set(*ctx.rd));
}

// P_lambda(0) via Eq-41-type normalization (J = I_0), or the J-ground-state
// normalization for proper J.
inline ValueWithError macdonald_zero(const SphericalContext& ctx, const RVec& lambda) {
  const RootDatum& rd = *ctx.rd;
  for (int i = 0; i < rd.rank; ++i)
    if (rd.pair_simple(lambda, i) < 0)
      throw std::invalid_argument("macdonald_zero: non-dominant argument");
  auto p = calP_full(ctx, lambda);
  const double norm = static_cast<double>(ctx.W.size()) / to_double(ctx.W_qinv);
  const double chi_half = std::exp2(-0.5 * chi_log2(rd, *ctx.ps, lambda));
  return {norm * chi_half * p.value, norm * chi_half * p.error};
}

// J-ground-state spherical function
inline ValueWithError ground_state_J(const SphericalContext& ctx, const RVec& lambda,
                                     const std::vector<int>& J) {
  const RootDatum& rd = *ctx.rd;
  if (static_cast<int>(J.size()) >= rd.rank)
    throw std::invalid_argument("ground_state_J: J must be proper");
  auto WJ = parabolic_elements(rd, J);
  Rational WJ_qinv = poincare_sum(WJ, *ctx.ps, PoincareMode::Inverse);
  const auto subset = ctx.croot_subset(J);
  // chi_J over Phi_J^+ (all positive roots of the subsystem, divisible included)
  double chiJ_log2 = 0;
  for (std::size_t i = 0; i < rd.pos.size(); ++i) {
    bool inside = true;
    for (int k = 0; k < rd.rank; ++k)
      if (rd.pos[i].coeff[k] != 0 && std::find(J.begin(), J.end(), k) == J.end()) inside = false;
    if (inside) chiJ_log2 += to_double(dot(lambda, rd.pos[i].v)) * log2_value(ctx.ps->tau[i]);
  }
  auto p = calP(ctx, lambda, J, &WJ);
  const double norm = static_cast<double>(WJ.size()) / to_double(WJ_qinv);
  const double chi_half = std::exp2(-0.5 * chiJ_log2);
  return {norm * chi_half * p.value, norm * chi_half * p.error};
}

// Proposition-1 ratio diagnostic along a core-like sequence of dominant
// coweights: r_n = calP(g_n) / (prod_{a in Phi^{++} \ Phi_J} <g_n, a-check> * calP_J(g_n)).
inline std::vector<ValueWithError> prop1_ratio(const SphericalContext& ctx,
                                               const std::vector<RVec>& gamma,
                                               const std::vector<int>& J) {
  const RootDatum& rd = *ctx.rd;
  if (gamma.size() < 2) throw std::invalid_argument("prop1_ratio: need a sequence");
  // hypothesis check: bounded on Phi_J^+, strictly divergent off it
  const auto subsetJ = ctx.croot_subset(J);
  std::vector<int> off;
  for (std::size_t k = 0; k < ctx.croots.size(); ++k)
    if (std::find(subsetJ.begin(), subsetJ.end(), static_cast<int>(k)) == subsetJ.end())
      off.push_back(static_cast<int>(k));
  for (int k : off) {
    Rational first = dot(gamma.front(), rd.pos[ctx.croots[k].pos_index].v);
    Rational last = dot(gamma.back(), rd.pos[ctx.croots[k].pos_index].v);
    if (!(last > first))
      throw std::invalid_argument("prop1_ratio: sequence must diverge off Phi_J");
  }
  for (int k : subsetJ) {
    Rational first = dot(gamma.front(), rd.pos[ctx.croots[k].pos_index].v);
    Rational last = dot(gamma.back(), rd.pos[ctx.croots[k].pos_index].v);
    if (first != last)
      throw std::invalid_argument("prop1_ratio: sequence must stay bounded on Phi_J");
  }
  auto WJ = parabolic_elements(rd, J);
  std::vector<ValueWithError> out;
  for (const auto& g : gamma) {
    auto pf = calP_full(ctx, g);
    auto pj = calP(ctx, g, J, &WJ);
    double denom = pj.value;
    for (int k : off) denom *= to_double(dot(g, ctx.croots[k].coroot));
    ValueWithError v;
    v.value = pf.value / denom;
    v.error = (pf.error + pj.error) / std::max(1e-300, std::abs(denom));
    out.push_back(v);
  }
  return out;
}

// Macdonald at singular z by the perturb-and-extrapolate fallback along theta0.
inline ValueWithError macdonald_limit(const SphericalContext& ctx, const RVec& lambda,
                                      const std::vector<std::complex<double>>& z) {
  auto F = [&](const BigFloat& t) -> BigFloat {
    std::vector<std::complex<double>> zt(z);
    const double td = static_cast<double>(t);
    for (int d = 0; d < ctx.rd->dim; ++d) zt[d] += td * to_double(ctx.theta0[d]);
    return BigFloat(macdonald(ctx, lambda, zt).real());
  };
  // double-precision inner evaluation limits the useful depth here; shallow table
  return detail::richardson_limit(F, 1e-2, 4);
}

}  // namespace bldg
