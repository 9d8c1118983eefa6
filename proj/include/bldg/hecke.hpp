#pragma once

#include "bldg/orbit_expansion.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

namespace bldg {

// ---------------------------------------------------------------------------
// Structure constants of the spherical averaging algebra:
//   A_lambda A_mu = sum_nu c_{lambda mu}^nu A_nu.
// Computed by exact orbit-sum convolution of the two expansions followed by a
// triangular change of basis in the dominance (height) order.
// ---------------------------------------------------------------------------

struct StructureConstants {
  std::vector<RVec> classes;
  std::vector<double> value;
  double sum() const {
    double s = 0;
    for (double v : value) s += v;
    return s;
  }
};

namespace detail {

inline Rational height_of(const RootDatum& rd, const RVec& v) {
  Rational h = 0;
  for (const auto& p : rd.pos) h += dot(v, p.v);
  return h;
}

}  // namespace detail

inline StructureConstants structure_constants(ExpansionCache& cache, const RVec& lambda,
                                              const RVec& mu, double snap_tol = 1e-12,
                                              double negative_tol = 1e-9) {
  const RootDatum& rd = *cache.context().rd;
  const OrbitSumExpansion& ea = cache.get(lambda);
  const OrbitSumExpansion& eb = cache.get(mu);

  // per-point coefficients of the product at dominant exponents
  std::map<std::string, std::pair<RVec, BigFloat>> g;
  for (std::size_t ja = 0; ja < ea.support.size(); ++ja)
    for (const auto& va : ea.orbits[ja])
      for (std::size_t jb = 0; jb < eb.support.size(); ++jb)
        for (const auto& vb : eb.orbits[jb]) {
          RVec s = add(va, vb);
          if (!rd.in_fundamental_chamber(s)) continue;
          const BigFloat c = ea.coeff_hp[ja] * eb.coeff_hp[jb];
          auto [it, fresh] = g.emplace(vec_str(s), std::make_pair(s, BigFloat(0)));
          it->second.second += c;
        }

  std::vector<std::pair<RVec, BigFloat>> items;
  for (auto& kv : g) items.push_back(kv.second);
  std::sort(items.begin(), items.end(), [&](const auto& a, const auto& b) {
    Rational ha = detail::height_of(rd, a.first), hb = detail::height_of(rd, b.first);
    if (ha != hb) return ha > hb;
    return vec_str(a.first) < vec_str(b.first);
  });

  std::map<std::string, BigFloat> residual;
  for (const auto& it : items) residual[vec_str(it.first)] = it.second;

  StructureConstants out;
  for (const auto& it : items) {
    const RVec& cls = it.first;
    BigFloat gval = residual[vec_str(cls)];
    const OrbitSumExpansion& ec = cache.get(cls);
    if (!(ec.support.size() >= 1) || !(ec.support[0] == cls))
      throw std::logic_error("structure constants: saturation order broken");
    const BigFloat c = gval / ec.coeff_hp[0];
    for (std::size_t j = 0; j < ec.support.size(); ++j)
      residual[vec_str(ec.support[j])] -= c * ec.coeff_hp[j];
    double cv = static_cast<double>(c);
    if (std::abs(cv) < snap_tol) cv = 0;
    if (cv < 0) {
      if (cv < -negative_tol)
        throw std::runtime_error("structure constants: negative coefficient " +
                                 std::to_string(cv));
      cv = 0;
    }
    if (cv != 0) {
      out.classes.push_back(cls);
      out.value.push_back(cv);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Wall-profile transfer table: near-wall structure constants of a generator
// are computed once per wall-proximity profile and reused across the chamber.
// ---------------------------------------------------------------------------

struct TCoords {
  std::vector<long long> t;
  bool operator==(const TCoords& o) const { return t == o.t; }
};

inline std::vector<long long> t_coords_int(const RootDatum& rd, const RVec& v) {
  std::vector<long long> t(rd.rank);
  for (int i = 0; i < rd.rank; ++i) t[i] = to_ll(rd.pair_simple(v, i));
  return t;
}

// integer Cartan pairings a(k,i) = (alpha_k, alpha_i-check)
inline std::vector<std::vector<long long>> cartan_matrix(const RootDatum& rd) {
  std::vector<std::vector<long long>> C(rd.rank, std::vector<long long>(rd.rank));
  for (int k = 0; k < rd.rank; ++k)
    for (int i = 0; i < rd.rank; ++i) C[k][i] = to_ll(dot(rd.simple[k], rd.coroot_simple[i]));
  return C;
}

inline void fold_dominant_t(std::vector<long long>& t,
                            const std::vector<std::vector<long long>>& C) {
  for (;;) {
    int neg = -1;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] < 0) {
        neg = static_cast<int>(i);
        break;
      }
    if (neg < 0) return;
    const long long ti = t[neg];
    for (std::size_t k = 0; k < t.size(); ++k) t[k] -= ti * C[k][neg];
  }
}

struct GeneratorTable {
  RVec lambda;
  double weight = 0;
  std::vector<std::vector<long long>> orbit_t;  // t-coords of the orbit points
  // per profile: (orbit point index, share); flat profile indexing
  std::vector<std::vector<std::pair<int, double>>> shares;
};

class ProfileTable {
 public:
  ProfileTable(ExpansionCache& cache, const std::vector<std::pair<RVec, double>>& generators)
      : rd_(cache.context().rd), C_(cartan_matrix(*rd_)) {
    // per-coordinate caps: one beyond the generator reach
    caps_.assign(rd_->rank, 1);
    for (const auto& g : generators)
      for (const auto& pt : weyl_orbit(*rd_, g.first)) {
        auto t = t_coords_int(*rd_, pt);
        for (int i = 0; i < rd_->rank; ++i)
          caps_[i] = std::max(caps_[i], std::llabs(t[i]) + 1);
      }
    stride_.assign(rd_->rank, 1);
    long long total = 1;
    for (int i = 0; i < rd_->rank; ++i) {
      stride_[i] = total;
      total *= caps_[i] + 1;
    }
    profile_count_ = total;

    for (const auto& g : generators) {
      GeneratorTable gt;
      gt.lambda = g.first;
      gt.weight = g.second;
      auto orbit = weyl_orbit(*rd_, g.first);
      for (const auto& pt : orbit) gt.orbit_t.push_back(t_coords_int(*rd_, pt));
      gt.shares.resize(profile_count_);
      for (long long pidx = 0; pidx < profile_count_; ++pidx) {
        std::vector<long long> p(rd_->rank);
        long long rem = pidx;
        for (int i = rd_->rank - 1; i >= 0; --i) {
          p[i] = rem / stride_[i];
          rem %= stride_[i];
        }
        RVec nu0 = zero_vec(rd_->dim);
        for (int i = 0; i < rd_->rank; ++i)
          nu0 = add(nu0, scale(Rational(p[i]), rd_->coweight[i]));
        auto sc = structure_constants(cache, g.first, nu0);
        // fold each orbit point from nu0 and match against the output classes
        std::vector<std::vector<long long>> targets(gt.orbit_t.size());
        for (std::size_t v = 0; v < gt.orbit_t.size(); ++v) {
          std::vector<long long> t(p);
          for (int i = 0; i < rd_->rank; ++i) t[i] += gt.orbit_t[v][i];
          fold_dominant_t(t, C_);
          targets[v] = t;
        }
        std::vector<std::pair<int, double>> sh;
        double total_c = 0;
        for (std::size_t cidx = 0; cidx < sc.classes.size(); ++cidx) {
          auto tc = t_coords_int(*rd_, sc.classes[cidx]);
          int first = -1;
          for (std::size_t v = 0; v < targets.size(); ++v)
            if (targets[v] == tc) {
              first = static_cast<int>(v);
              break;
            }
          if (first < 0)
            throw std::logic_error("profile table: output class not reachable from the orbit");
          sh.emplace_back(first, sc.value[cidx]);
          total_c += sc.value[cidx];
        }
        if (std::abs(total_c - 1.0) > 1e-8)
          throw std::runtime_error("profile table: constants not stochastic");
        for (auto& s : sh) s.second /= total_c;  // exact stochasticity
        gt.shares[pidx] = std::move(sh);
      }
      gens_.push_back(std::move(gt));
    }
  }

  long long profile_index(const std::vector<long long>& t) const {
    long long idx = 0;
    for (int i = 0; i < rd_->rank; ++i) idx += std::min(t[i], caps_[i]) * stride_[i];
    return idx;
  }

  const std::vector<GeneratorTable>& generators() const { return gens_; }
  const std::vector<std::vector<long long>>& cartan() const { return C_; }
  const RootDatum& datum() const { return *rd_; }

 private:
  const RootDatum* rd_;
  std::vector<std::vector<long long>> C_;
  std::vector<long long> caps_;
  std::vector<long long> stride_;
  long long profile_count_ = 0;
  std::vector<GeneratorTable> gens_;
};

// ---------------------------------------------------------------------------
// Radial evolution: per-sphere masses a_n over dominant classes, iterated with
// the profile table. Masses are carried rescaled, a_n = rescale^n * b_n, so the
// series stays in double range at and above the spectral radius.
// ---------------------------------------------------------------------------

class RadialEvolution {
 public:
  // tilt: per-coordinate log2 weights; cells are dropped when their tilted
  // magnitude b * 2^{-(t, tilt)} falls below drop_tol times the tilted maximum.
  // With the chi^{1/2} tilt the tilted profile stays bounded uniformly in n.
  RadialEvolution(const ProfileTable& table, double rescale = 1.0, double drop_tol = 1e-45,
                  std::vector<double> tilt = {})
      : table_(&table), rescale_(rescale), drop_(drop_tol), tilt_(std::move(tilt)) {
    const int rank = table.datum().rank;
    if (rank > 3) throw std::invalid_argument("radial evolution supports rank <= 3");
    tilt_.resize(rank, 0.0);
    state_[pack({0, 0, 0})] = 1.0;
    step_count_ = 0;
  }

  void track(const std::vector<long long>& t) {
    tracked_keys_.push_back(pack(pad(t)));
    series_.emplace_back();
    series_.back().push_back(state_value(tracked_keys_.back()));
  }

  void step() {
    std::unordered_map<std::uint64_t, double> next;
    next.reserve(state_.size() * 2);
    const int rank = table_->datum().rank;
    double maxv = 0;
    for (const auto& kv : state_)
      maxv = std::max(maxv, std::abs(kv.second) * tilt_factor(kv.first, rank));
    const double floor_v = maxv * drop_;
    for (const auto& kv : state_) {
      if (std::abs(kv.second) * tilt_factor(kv.first, rank) < floor_v) continue;
      auto t = unpack(kv.first, rank);
      const long long pidx = table_->profile_index(t);
      const double mass = kv.second / rescale_;
      for (const auto& g : table_->generators()) {
        const double gm = mass * g.weight;
        for (const auto& [vidx, share] : g.shares[pidx]) {
          std::vector<long long> tt(t);
          for (int i = 0; i < rank; ++i) tt[i] += g.orbit_t[vidx][i];
          fold_dominant_t(tt, table_->cartan());
          next[pack(pad(tt))] += gm * share;
        }
      }
    }
    state_ = std::move(next);
    ++step_count_;
    for (std::size_t k = 0; k < tracked_keys_.size(); ++k)
      series_[k].push_back(state_value(tracked_keys_[k]));
  }

  void run(int steps) {
    for (int i = 0; i < steps; ++i) step();
  }

  // b_n series of a tracked class (a_n = rescale^n b_n)
  const std::vector<double>& series(std::size_t k) const { return series_[k]; }
  double rescale() const { return rescale_; }
  int steps_done() const { return step_count_; }

  double total_mass_rescaled() const {
    double s = 0;
    for (const auto& kv : state_) s += kv.second;
    return s;
  }
  std::size_t support_size() const { return state_.size(); }

 private:
  std::vector<long long> pad(std::vector<long long> t) const {
    t.resize(3, 0);
    return t;
  }
  static std::uint64_t pack(const std::vector<long long>& t) {
    return static_cast<std::uint64_t>(t[0]) | (static_cast<std::uint64_t>(t[1]) << 21) |
           (static_cast<std::uint64_t>(t[2]) << 42);
  }
  static std::vector<long long> unpack(std::uint64_t key, int rank) {
    std::vector<long long> t(rank, 0);
    if (rank > 0) t[0] = static_cast<long long>(key & ((1ULL << 21) - 1));
    if (rank > 1) t[1] = static_cast<long long>((key >> 21) & ((1ULL << 21) - 1));
    if (rank > 2) t[2] = static_cast<long long>((key >> 42) & ((1ULL << 21) - 1));
    return t;
  }
  double state_value(std::uint64_t key) const {
    auto it = state_.find(key);
    return it == state_.end() ? 0.0 : it->second;
  }
  double tilt_factor(std::uint64_t key, int rank) const {
    auto t = unpack(key, rank);
    double e = 0;
    for (int i = 0; i < rank; ++i) e -= tilt_[i] * static_cast<double>(t[i]);
    return std::exp2(e);
  }

  const ProfileTable* table_;
  double rescale_;
  double drop_;
  std::vector<double> tilt_;
  std::unordered_map<std::uint64_t, double> state_;
  std::vector<std::uint64_t> tracked_keys_;
  std::vector<std::vector<double>> series_;
  int step_count_ = 0;
};

// ---------------------------------------------------------------------------
// Exact rank-1 evolution (trees): the nearest-neighbour generator on A_1 or
// BC_1 with exact rational one-step constants; the oracle for the numeric path.
// ---------------------------------------------------------------------------

struct TreeConstants {
  Rational up, stay, down;  // valid for distance d >= 1; from 0 all mass goes up
};

inline TreeConstants tree_constants(const RootDatum& rd, const ParameterSystem& ps) {
  if (rd.rank != 1) throw std::invalid_argument("tree constants: rank-1 only");
  TreeConstants tc;
  if (rd.type == TypeLabel::BC) {
    const Rational q0(ps.q[0]), q1(ps.q[1]);
    tc.up = q1 / (q1 + 1);
    tc.stay = (q0 - 1) / ((1 + q1) * q0);
    tc.down = Rational(1) / ((1 + q1) * q0);
  } else {
    const Rational q(ps.q[1]);
    tc.up = q / (q + 1);
    tc.stay = 0;
    tc.down = Rational(1) / (q + 1);
  }
  return tc;
}

// per-coordinate chi^{1/2} tilt weights: (1/2) log2 chi(lambda_i)
inline std::vector<double> chi_half_tilt(const RootDatum& rd, const ParameterSystem& ps) {
  std::vector<double> g(rd.rank);
  for (int i = 0; i < rd.rank; ++i) g[i] = 0.5 * chi_log2(rd, ps, rd.coweight[i]);
  return g;
}

class ExactTreeEvolution {
 public:
  // weight_stay on the 0 generator (lazy part), weight_step on A_{lambda_1}
  ExactTreeEvolution(const RootDatum& rd, const ParameterSystem& ps, Rational weight_stay,
                     Rational weight_step)
      : tc_(tree_constants(rd, ps)), w0_(std::move(weight_stay)), w1_(std::move(weight_step)) {
    dist_.assign(1, Rational(1));
  }

  void step() {
    std::vector<Rational> next(dist_.size() + 1, Rational(0));
    for (std::size_t d = 0; d < dist_.size(); ++d) {
      const Rational& m = dist_[d];
      if (m == 0) continue;
      if (w0_ != 0) next[d] += m * w0_;
      if (d == 0) {
        next[1] += m * w1_;
      } else {
        next[d + 1] += m * w1_ * tc_.up;
        next[d] += m * w1_ * tc_.stay;
        next[d - 1] += m * w1_ * tc_.down;
      }
    }
    dist_ = std::move(next);
  }

  const std::vector<Rational>& masses() const { return dist_; }
  Rational total() const {
    Rational s = 0;
    for (const auto& m : dist_) s += m;
    return s;
  }

 private:
  TreeConstants tc_;
  Rational w0_, w1_;
  std::vector<Rational> dist_;
};

}  // namespace bldg
