#pragma once

#include "bldg/spherical.hpp"

#include <boost/multiprecision/eigen.hpp>

#include <Eigen/Dense>

#include <map>
#include <random>
#include <vector>

namespace bldg {

// Orbit-sum expansion of a Macdonald polynomial:
//   P_lambda(z) = sum_mu kappa_mu m_mu(z),  m_mu(z) = sum_{nu in W.mu} e^{(z,nu)},
// with mu running over the dominant saturation set of lambda. Coefficients are
// solved in 50-digit arithmetic; the double copies feed the numeric layer.
struct OrbitSumExpansion {
  RVec lambda;
  std::vector<RVec> support;               // dominant exponents
  std::vector<std::vector<RVec>> orbits;   // W-orbit points per support class
  std::vector<BigFloat> coeff_hp;          // kappa per class
  std::vector<double> coeff;               // double copies
  double residual = 0;
};

// Dominant lattice points mu with lambda - mu in the rational cone spanned by
// the positive coroots (the support of the expansion is contained in this set).
inline std::vector<RVec> saturation_set(const RootDatum& rd, const RVec& lambda) {
  const Rational bound = norm2(lambda);
  std::vector<long long> box(rd.rank);
  for (int i = 0; i < rd.rank; ++i) {
    long long b = 0;
    while (Rational(b + 1) * Rational(b + 1) * norm2(rd.coweight[i]) <= bound) ++b;
    box[i] = b;
  }
  // cone membership: lambda - mu = sum c_i alpha_i-check with c_i >= 0
  std::vector<RVec> rows(rd.rank, RVec(rd.rank));
  for (int a = 0; a < rd.rank; ++a)
    for (int b = 0; b < rd.rank; ++b) rows[a][b] = dot(rd.simple[a], rd.coroot_simple[b]);
  std::vector<RVec> out;
  std::vector<long long> t(rd.rank, 0);
  for (;;) {
    RVec mu = zero_vec(rd.dim);
    for (int i = 0; i < rd.rank; ++i) mu = add(mu, scale(Rational(t[i]), rd.coweight[i]));
    if (norm2(mu) <= bound) {
      RVec rhs(rd.rank);
      RVec diff = sub(lambda, mu);
      for (int a = 0; a < rd.rank; ++a) rhs[a] = dot(rd.simple[a], diff);
      bool ok = true;
      try {
        RVec c = solve_exact(rows, rhs);
        for (const auto& ci : c)
          if (ci < 0) ok = false;
      } catch (const std::domain_error&) {
        ok = false;
      }
      if (ok) out.push_back(mu);
    }
    int k = 0;
    while (k < rd.rank) {
      if (++t[k] <= box[k]) break;
      t[k] = 0;
      ++k;
    }
    if (k == rd.rank) break;
  }
  // order by descending height so the leading class comes first
  std::sort(out.begin(), out.end(), [&](const RVec& a, const RVec& b) {
    Rational ha = 0, hb = 0;
    for (const auto& p : rd.pos) {
      ha += dot(a, p.v);
      hb += dot(b, p.v);
    }
    if (ha != hb) return ha > hb;
    return vec_str(a) < vec_str(b);
  });
  return out;
}

namespace detail {

inline std::vector<double> sample_generic_z(const RootDatum& rd, std::mt19937_64& rng,
                                            double scl) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::vector<double> z(rd.dim);
    for (int d = 0; d < rd.dim; ++d) z[d] = scl * U(rng);
    bool ok = true;
    for (int idx : rd.pos_indiv) {
      RVec cr = rd.coroot(rd.pos[idx].v);
      double s = 0;
      for (int d = 0; d < rd.dim; ++d) s += to_double(cr[d]) * z[d];
      if (std::abs(s) < 0.05 * scl) ok = false;
    }
    if (ok) return z;
  }
  throw std::runtime_error("could not sample a generic point");
}

}  // namespace bldg::detail

// High-precision mirror of the spherical evaluation data.
class HPSpherical {
 public:
  explicit HPSpherical(const SphericalContext& ctx) : ctx_(&ctx) {
    const RootDatum& rd = *ctx.rd;
    for (const auto& c : ctx.croots) {
      std::vector<BigFloat> cr(rd.dim);
      for (int d = 0; d < rd.dim; ++d) cr[d] = detail::bigfloat_of(c.coroot[d]);
      coroots_.push_back(std::move(cr));
      tau_a_.push_back(detail::bigfloat_of(Rational(ctx.ps->tau[c.pos_index])));
      // tau_2a: reconstruct from the double is unsafe; recompute exactly
      const PosRoot& p = rd.pos[c.pos_index];
      int dbl = p.has_double ? rd.find_pos_root(scale(Rational(2), p.v)) : -1;
      tau_2a_.push_back(dbl >= 0 ? detail::bigfloat_of(ctx.ps->tau[dbl]) : BigFloat(1));
      sqrt_tau_.push_back(boost::multiprecision::sqrt(tau_a_.back()));
    }
    for (const auto& w : ctx.W) {
      std::vector<BigFloat> m(rd.dim * rd.dim);
      for (int a = 0; a < rd.dim; ++a)
        for (int b = 0; b < rd.dim; ++b) m[a * rd.dim + b] = detail::bigfloat_of(w.mat(a, b));
      wmats_.push_back(std::move(m));
    }
    wq_inv_ = detail::bigfloat_of(ctx.W_qinv);
  }

  // P_lambda(z) at a real point, 50-digit arithmetic
  BigFloat macdonald_real(const RVec& lambda, const std::vector<BigFloat>& z) const {
    const RootDatum& rd = *ctx_->rd;
    std::vector<BigFloat> lam(rd.dim);
    for (int d = 0; d < rd.dim; ++d) lam[d] = detail::bigfloat_of(lambda[d]);
    const BigFloat chi_half =
        boost::multiprecision::exp(BigFloat(-0.5 * chi_log2(rd, *ctx_->ps, lambda)) *
                                   boost::multiprecision::log(BigFloat(2)));
    BigFloat sum = 0;
    std::vector<BigFloat> wz(rd.dim);
    for (const auto& m : wmats_) {
      for (int b = 0; b < rd.dim; ++b) {
        BigFloat s = 0;
        for (int a = 0; a < rd.dim; ++a) s += m[a * rd.dim + b] * z[a];
        wz[b] = s;  // (w^T z)_b
      }
      BigFloat ez = 0;
      for (int d = 0; d < rd.dim; ++d) ez += wz[d] * lam[d];
      BigFloat term = boost::multiprecision::exp(ez);
      for (std::size_t k = 0; k < coroots_.size(); ++k) {
        BigFloat pr = 0;
        for (int d = 0; d < rd.dim; ++d) pr += coroots_[k][d] * wz[d];
        const BigFloat ehalf = boost::multiprecision::exp(pr * BigFloat(-0.5));
        const BigFloat efull = ehalf * ehalf;
        const BigFloat denom = BigFloat(1) - efull;
        if (boost::multiprecision::abs(denom) < BigFloat(1e-30))
          throw SingularPoint(ctx_->croots[k].coroot);
        term *= (BigFloat(1) - ehalf / (tau_2a_[k] * sqrt_tau_[k])) *
                (BigFloat(1) + ehalf / sqrt_tau_[k]) / denom;
      }
      sum += term;
    }
    return chi_half / wq_inv_ * sum;
  }

 private:
  const SphericalContext* ctx_;
  std::vector<std::vector<BigFloat>> coroots_;
  std::vector<BigFloat> tau_a_, tau_2a_, sqrt_tau_;
  std::vector<std::vector<BigFloat>> wmats_;
  BigFloat wq_inv_;
};

class ExpansionCache {
 public:
  ExpansionCache(const SphericalContext& ctx, std::uint64_t seed = 0x5eed1234u)
      : ctx_(&ctx), hp_(ctx), seed_(seed) {}

  const OrbitSumExpansion& get(const RVec& lambda) {
    const std::string key = vec_str(lambda);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    OrbitSumExpansion e = expand(lambda);
    return cache_.emplace(key, std::move(e)).first->second;
  }

  const SphericalContext& context() const { return *ctx_; }
  const HPSpherical& hp() const { return hp_; }

 private:
  using HPMatrix = Eigen::Matrix<BigFloat, Eigen::Dynamic, Eigen::Dynamic>;
  using HPVector = Eigen::Matrix<BigFloat, Eigen::Dynamic, 1>;

  OrbitSumExpansion expand(const RVec& lambda) const {
    const RootDatum& rd = *ctx_->rd;
    OrbitSumExpansion e;
    e.lambda = lambda;
    if (is_zero(lambda)) {
      e.support = {lambda};
      e.orbits = {{lambda}};
      e.coeff_hp = {BigFloat(1)};
      e.coeff = {1.0};
      return e;
    }
    e.support = saturation_set(rd, lambda);
    for (const auto& mu : e.support) e.orbits.push_back(weyl_orbit(rd, mu));

    std::mt19937_64 rng(seed_ ^ hash_rvec(lambda));
    double tmax = 1;
    for (int i = 0; i < rd.rank; ++i)
      tmax = std::max(tmax, std::abs(to_double(rd.pair_simple(lambda, i))));
    const double scl = 0.9 / (1.0 + std::sqrt(tmax));

    const int m = static_cast<int>(e.support.size());
    const int K = 2 * m + 6;
    HPMatrix M(K, m);
    HPVector rhs(K);
    for (int k = 0; k < K; ++k) {
      auto zd = detail::sample_generic_z(rd, rng, scl);
      std::vector<BigFloat> z(zd.begin(), zd.end());
      rhs(k) = hp_.macdonald_real(lambda, z);
      for (int j = 0; j < m; ++j) {
        BigFloat s = 0;
        for (const auto& nu : e.orbits[j]) {
          BigFloat p = 0;
          for (int d = 0; d < rd.dim; ++d) p += detail::bigfloat_of(nu[d]) * z[d];
          s += boost::multiprecision::exp(p);
        }
        M(k, j) = s;
      }
      BigFloat rowmax = boost::multiprecision::abs(rhs(k));
      for (int j = 0; j < m; ++j) {
        BigFloat a = boost::multiprecision::abs(M(k, j));
        if (a > rowmax) rowmax = a;
      }
      if (rowmax > 0) {
        for (int j = 0; j < m; ++j) M(k, j) /= rowmax;
        rhs(k) /= rowmax;
      }
    }
    HPVector x = M.colPivHouseholderQr().solve(rhs);
    HPVector resid = M * x - rhs;
    BigFloat res = 0;
    for (int k = 0; k < K; ++k) {
      BigFloat a = boost::multiprecision::abs(resid(k));
      if (a > res) res = a;
    }
    e.residual = static_cast<double>(res);
    if (e.residual > 1e-9)
      throw std::runtime_error("orbit expansion ill-conditioned, residual " +
                               std::to_string(e.residual));
    e.coeff_hp.resize(m);
    e.coeff.resize(m);
    for (int j = 0; j < m; ++j) {
      e.coeff_hp[j] = x(j);
      e.coeff[j] = static_cast<double>(x(j));
    }
    return e;
  }

  const SphericalContext* ctx_;
  HPSpherical hp_;
  std::uint64_t seed_;
  mutable std::map<std::string, OrbitSumExpansion> cache_;
};

// Re-evaluate an expansion at a fresh point (validation helper).
inline double evaluate_expansion(const OrbitSumExpansion& e, const std::vector<double>& z) {
  double acc = 0;
  for (std::size_t j = 0; j < e.support.size(); ++j) {
    double s = 0;
    for (const auto& nu : e.orbits[j]) {
      double p = 0;
      for (std::size_t d = 0; d < z.size(); ++d) p += to_double(nu[d]) * z[d];
      s += std::exp(p);
    }
    acc += e.coeff[j] * s;
  }
  return acc;
}

}  // namespace bldg
