#pragma once

#include "bldg/rational.hpp"
#include "bldg/vec.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace bldg {

enum class TypeLabel { A, B, C, D, E6, E7, E8, F4, G2, BC };

inline std::string type_name(TypeLabel t, int rank) {
  switch (t) {
    case TypeLabel::A: return "A" + std::to_string(rank);
    case TypeLabel::B: return "B" + std::to_string(rank);
    case TypeLabel::C: return "C" + std::to_string(rank);
    case TypeLabel::D: return "D" + std::to_string(rank);
    case TypeLabel::E6: return "E6";
    case TypeLabel::E7: return "E7";
    case TypeLabel::E8: return "E8";
    case TypeLabel::F4: return "F4";
    case TypeLabel::G2: return "G2";
    case TypeLabel::BC: return "BC" + std::to_string(rank);
  }
  return "?";
}

inline TypeLabel parse_type(const std::string& s) {
  if (s == "A") return TypeLabel::A;
  if (s == "B") return TypeLabel::B;
  if (s == "C") return TypeLabel::C;
  if (s == "D") return TypeLabel::D;
  if (s == "E6") return TypeLabel::E6;
  if (s == "E7") return TypeLabel::E7;
  if (s == "E8") return TypeLabel::E8;
  if (s == "F4") return TypeLabel::F4;
  if (s == "G2") return TypeLabel::G2;
  if (s == "BC") return TypeLabel::BC;
  throw std::invalid_argument("unknown type label: " + s);
}

struct PosRoot {
  RVec v;                      // ambient coordinates
  std::vector<long long> coeff;  // expansion in simple roots (nonnegative integers)
  Rational nrm2;               // (v, v)
  bool indivisible = true;     // v/2 is not a root
  bool has_double = false;     // 2v is a root
  bool has_half = false;       // v/2 is a root
  int orbit = -1;              // W-orbit id
  long long height = 0;
};

// A finite irreducible root system in its standard rational realization,
// together with everything the combinatorial layer derives from it.
struct RootDatum {
  TypeLabel type = TypeLabel::A;
  int rank = 0;
  int dim = 0;  // ambient dimension (rank or rank+1)

  std::vector<RVec> simple;      // alpha_i, 0-based storage for i = 1..r
  std::vector<PosRoot> pos;      // all positive roots
  std::vector<int> pos_indiv;    // indices into pos of indivisible positive roots
  RVec highest;                  // highest root alpha_0
  std::vector<long long> m;      // coefficients of alpha_0 in the simple basis
  std::vector<RVec> coweight;    // lambda_i with (lambda_i, alpha_j) = delta_ij
  std::vector<RVec> coroot_simple;  // alpha_i-check
  std::vector<int> good_types;   // I_g = {0} and {i : m_i = 1}
  int orbit_count = 0;

  bool reduced() const { return type != TypeLabel::BC; }

  Rational pair_root(const RVec& x, int pos_idx) const { return dot(x, pos[pos_idx].v); }
  Rational pair_simple(const RVec& x, int i) const { return dot(x, simple[i]); }

  RVec coroot(const RVec& alpha) const { return scale(Rational(2) / norm2(alpha), alpha); }

  // reflection through the linear wall of alpha
  RVec reflect(const RVec& x, const RVec& alpha) const {
    return sub(x, scale(dot(x, alpha) * Rational(2) / norm2(alpha), alpha));
  }
  // affine reflection across {(x, alpha) = k}
  RVec reflect_affine(const RVec& x, const RVec& alpha, const Rational& k) const {
    return sub(x, scale((dot(x, alpha) - k) * Rational(2) / norm2(alpha), alpha));
  }

  // pairing coordinates t_i = (x, alpha_i)
  RVec pairing_coords(const RVec& x) const {
    RVec t(rank);
    for (int i = 0; i < rank; ++i) t[i] = pair_simple(x, i);
    return t;
  }

  RVec from_coweight_coords(const RVec& t) const {
    RVec x = zero_vec(dim);
    for (int i = 0; i < rank; ++i) x = add(x, scale(t[i], coweight[i]));
    return x;
  }

  bool in_fundamental_chamber(const RVec& x) const {
    for (int i = 0; i < rank; ++i)
      if (pair_simple(x, i) < 0) return false;
    return true;
  }

  // lattice membership: x in Z-span of the coweights (ambient point in span)
  bool in_coweight_lattice(const RVec& x) const {
    for (int i = 0; i < rank; ++i)
      if (!is_integer(pair_simple(x, i))) return false;
    return in_span(x);
  }

  bool in_span(const RVec& x) const {
    // x must be a rational combination of simple roots: solve and check residual
    std::vector<RVec> cols(dim, RVec(rank));
    std::vector<RVec> rows;
    // least-squares-free exact check: solve Gram system (alpha_j, x) = sum c_i (alpha_j, alpha_i)
    std::vector<RVec> g(rank, RVec(rank));
    RVec b(rank);
    for (int j = 0; j < rank; ++j) {
      for (int i = 0; i < rank; ++i) g[j][i] = dot(simple[j], simple[i]);
      b[j] = dot(simple[j], x);
    }
    RVec c = solve_exact(g, b);
    RVec y = zero_vec(dim);
    for (int i = 0; i < rank; ++i) y = add(y, scale(c[i], simple[i]));
    return y == x;
  }

  // dominant coweight from nonnegative integer coordinates
  RVec coweight_point(const std::vector<long long>& k) const {
    RVec x = zero_vec(dim);
    for (int i = 0; i < rank; ++i) x = add(x, scale(Rational(k[i]), coweight[i]));
    return x;
  }

  int find_pos_root(const RVec& v) const {
    for (std::size_t i = 0; i < pos.size(); ++i)
      if (pos[i].v == v) return static_cast<int>(i);
    return -1;
  }
};

namespace detail {

inline std::vector<RVec> simple_roots_for(TypeLabel t, int r, int& dim) {
  auto e = [&](int i) {  // 1-based unit vector
    RVec v(dim, Rational(0));
    v[i - 1] = 1;
    return v;
  };
  std::vector<RVec> s;
  switch (t) {
    case TypeLabel::A: {
      dim = r + 1;
      for (int i = 1; i <= r; ++i) s.push_back(sub(e(i), e(i + 1)));
      break;
    }
    case TypeLabel::B: {
      if (r < 2) throw std::invalid_argument("B_r needs r >= 2");
      dim = r;
      for (int i = 1; i < r; ++i) s.push_back(sub(e(i), e(i + 1)));
      s.push_back(e(r));
      break;
    }
    case TypeLabel::C: {
      if (r < 1) throw std::invalid_argument("C_r needs r >= 1");
      dim = r;
      for (int i = 1; i < r; ++i) s.push_back(sub(e(i), e(i + 1)));
      s.push_back(scale(Rational(2), e(r)));
      break;
    }
    case TypeLabel::BC: {
      dim = r;
      for (int i = 1; i < r; ++i) s.push_back(sub(e(i), e(i + 1)));
      s.push_back(e(r));
      break;
    }
    case TypeLabel::D: {
      if (r < 3) throw std::invalid_argument("D_r needs r >= 3");
      dim = r;
      for (int i = 1; i < r; ++i) s.push_back(sub(e(i), e(i + 1)));
      s.push_back(add(e(r - 1), e(r)));
      break;
    }
    case TypeLabel::G2: {
      if (r != 2) throw std::invalid_argument("G2 has rank 2");
      dim = 3;
      s.push_back(sub(e(1), e(2)));
      RVec a2 = zero_vec(3);  // -2 e_1 + e_2 + e_3
      a2[0] = -2;
      a2[1] = 1;
      a2[2] = 1;
      s.push_back(a2);
      break;
    }
    case TypeLabel::F4: {
      if (r != 4) throw std::invalid_argument("F4 has rank 4");
      dim = 4;
      s.push_back(sub(e(2), e(3)));
      s.push_back(sub(e(3), e(4)));
      s.push_back(e(4));
      RVec a4 = zero_vec(4);
      a4[0] = Rational(1, 2);
      a4[1] = Rational(-1, 2);
      a4[2] = Rational(-1, 2);
      a4[3] = Rational(-1, 2);
      s.push_back(a4);
      break;
    }
    case TypeLabel::E6:
    case TypeLabel::E7:
    case TypeLabel::E8: {
      const int rr = (t == TypeLabel::E6) ? 6 : (t == TypeLabel::E7 ? 7 : 8);
      if (r != rr) throw std::invalid_argument("E-series rank mismatch");
      dim = 8;
      RVec a1 = zero_vec(8);
      a1[0] = Rational(1, 2);
      a1[7] = Rational(1, 2);
      for (int k = 1; k <= 6; ++k) a1[k] = Rational(-1, 2);
      s.push_back(a1);
      s.push_back(add(e(1), e(2)));
      for (int k = 2; k <= rr - 1; ++k) s.push_back(sub(e(k), e(k - 1)));
      break;
    }
  }
  return s;
}

}  // namespace detail

// Build the root system for the given label and rank. Positive roots are
// generated by reflection closure and classified in the simple basis.
inline RootDatum build_roots(TypeLabel type, int rank) {
  RootDatum rd;
  rd.type = type;
  rd.rank = rank;
  int dim = 0;
  rd.simple = detail::simple_roots_for(type, rank, dim);
  rd.dim = dim;

  // reflection closure over the simple reflections
  std::set<std::vector<std::string>> seen;
  auto key = [](const RVec& v) {
    std::vector<std::string> k;
    k.reserve(v.size());
    for (const auto& x : v) k.push_back(x.str());
    return k;
  };
  std::vector<RVec> roots(rd.simple.begin(), rd.simple.end());
  for (const auto& a : rd.simple) roots.push_back(neg(a));
  for (const auto& v : roots) seen.insert(key(v));
  for (std::size_t h = 0; h < roots.size(); ++h) {
    for (int i = 0; i < rank; ++i) {
      RVec w = rd.reflect(roots[h], rd.simple[i]);
      if (seen.insert(key(w)).second) roots.push_back(w);
    }
  }
  if (type == TypeLabel::BC) {
    // doubles of the short roots (orbit of e_i) are roots as well
    std::vector<RVec> extra;
    for (const auto& v : roots) {
      RVec d = scale(Rational(2), v);
      bool shortroot = (norm2(v) == 1);
      if (shortroot && seen.insert(key(d)).second) extra.push_back(d);
    }
    for (auto& v : extra) roots.push_back(std::move(v));
  }

  // classify: positive roots are nonnegative integer combinations of simples
  std::vector<RVec> gram(rank, RVec(rank));
  for (int j = 0; j < rank; ++j)
    for (int i = 0; i < rank; ++i) gram[j][i] = dot(rd.simple[j], rd.simple[i]);
  for (const auto& v : roots) {
    RVec b(rank);
    for (int j = 0; j < rank; ++j) b[j] = dot(rd.simple[j], v);
    RVec c = solve_exact(gram, b);
    bool nonneg = true, integral = true;
    long long height = 0;
    std::vector<long long> cc(rank);
    for (int i = 0; i < rank; ++i) {
      if (c[i] < 0) nonneg = false;
      if (!is_integer(c[i])) integral = false;
      if (nonneg && integral) {
        cc[i] = to_ll(c[i]);
        height += cc[i];
      }
    }
    if (!integral) throw std::logic_error("root closure produced non-integral coefficients");
    if (!nonneg) continue;
    PosRoot pr;
    pr.v = v;
    pr.coeff = cc;
    pr.nrm2 = norm2(v);
    pr.height = height;
    rd.pos.push_back(std::move(pr));
  }
  std::sort(rd.pos.begin(), rd.pos.end(), [](const PosRoot& a, const PosRoot& b) {
    if (a.height != b.height) return a.height < b.height;
    return a.coeff < b.coeff;
  });

  // divisibility flags
  for (auto& p : rd.pos) {
    p.has_double = rd.find_pos_root(scale(Rational(2), p.v)) >= 0;
    p.has_half = rd.find_pos_root(scale(Rational(1, 2), p.v)) >= 0;
    p.indivisible = !p.has_half;
  }
  for (std::size_t i = 0; i < rd.pos.size(); ++i)
    if (rd.pos[i].indivisible) rd.pos_indiv.push_back(static_cast<int>(i));

  // highest root: maximal height
  const PosRoot& top = rd.pos.back();
  rd.highest = top.v;
  rd.m = top.coeff;

  // W-orbit classes of roots (via closure under simple reflections)
  {
    std::map<std::vector<std::string>, int> orbit_of;
    int next = 0;
    for (auto& p : rd.pos) {
      auto k0 = key(p.v);
      if (orbit_of.count(k0)) {
        p.orbit = orbit_of[k0];
        continue;
      }
      // closure of {p.v, -p.v}
      std::vector<RVec> frontier{p.v};
      std::set<std::vector<std::string>> members{key(p.v)};
      for (std::size_t h = 0; h < frontier.size(); ++h)
        for (int i = 0; i < rank; ++i) {
          RVec w = rd.reflect(frontier[h], rd.simple[i]);
          if (members.insert(key(w)).second) frontier.push_back(w);
          RVec wn = neg(w);
          if (members.insert(key(wn)).second) frontier.push_back(wn);
        }
      for (const auto& mkey : members) orbit_of[mkey] = next;
      p.orbit = next;
      ++next;
    }
    rd.orbit_count = next;
  }

  // fundamental coweights: dual basis to the simple roots inside the span
  for (int i = 0; i < rank; ++i) {
    RVec b(rank, Rational(0));
    b[i] = 1;
    RVec c = solve_exact(gram, b);
    RVec lam = zero_vec(dim);
    for (int j = 0; j < rank; ++j) lam = add(lam, scale(c[j], rd.simple[j]));
    rd.coweight.push_back(lam);
  }
  for (int i = 0; i < rank; ++i) rd.coroot_simple.push_back(rd.coroot(rd.simple[i]));

  rd.good_types.push_back(0);
  for (int i = 0; i < rank; ++i)
    if (rd.m[i] == 1) rd.good_types.push_back(i + 1);

  return rd;
}

// Thickness parameters q_i indexed by I = {0, ..., r} plus everything derived:
// q_alpha on root orbits, the four-case tau table, and the epsilon twist for BC.
struct ParameterSystem {
  std::vector<long long> q;          // q_0..q_r
  std::vector<Rational> q_orbit;     // q constant on each W-orbit of roots
  std::vector<Rational> tau;         // tau_alpha indexed like RootDatum::pos
  std::vector<long long> q_eps;      // epsilon-twisted q (BC only; else equal to q)

  long long q0() const { return q[0]; }
};

inline ParameterSystem build_parameters(const RootDatum& rd, const std::vector<long long>& qmap) {
  if (static_cast<int>(qmap.size()) != rd.rank + 1)
    throw std::invalid_argument("q map must be defined on {0,...,r}");
  for (auto qi : qmap)
    if (qi < 2) throw std::invalid_argument("thickness requires q_i >= 2");

  ParameterSystem ps;
  ps.q = qmap;

  // affine C_r / BC_r selection rule
  if (rd.type == TypeLabel::C && qmap[0] != qmap[rd.rank])
    throw std::invalid_argument("label C_r requires q_0 = q_r; use BC_r otherwise");
  if (rd.type == TypeLabel::BC && qmap[0] == qmap[rd.rank])
    throw std::invalid_argument("label BC_r requires q_0 != q_r; use C_r otherwise");
  if (rd.type == TypeLabel::A && rd.rank == 1 && qmap[0] != qmap[1])
    throw std::invalid_argument("affine A_1 requires q_0 = q_1 (else the system is BC_1)");

  // assign q to orbits: from simple roots and the highest root; check consistency
  ps.q_orbit.assign(rd.orbit_count, Rational(0));
  auto assign = [&](int orbit, long long val) {
    if (ps.q_orbit[orbit] == 0)
      ps.q_orbit[orbit] = val;
    else if (ps.q_orbit[orbit] != val)
      throw std::invalid_argument("q must be constant on W-orbits of roots");
  };
  for (int i = 0; i < rd.rank; ++i) {
    int idx = rd.find_pos_root(rd.simple[i]);
    assign(rd.pos[idx].orbit, qmap[i + 1]);
  }
  {
    int idx = rd.find_pos_root(rd.highest);
    assign(rd.pos[idx].orbit, qmap[0]);
  }
  for (int o = 0; o < rd.orbit_count; ++o)
    if (ps.q_orbit[o] == 0) throw std::logic_error("root orbit without q assignment");

  const Rational q_a0 = Rational(qmap[0]);
  ps.tau.resize(rd.pos.size());
  for (std::size_t i = 0; i < rd.pos.size(); ++i) {
    const PosRoot& p = rd.pos[i];
    const Rational qa = ps.q_orbit[p.orbit];
    if (!p.has_half && !p.has_double)
      ps.tau[i] = qa;
    else if (p.has_half)
      ps.tau[i] = q_a0;
    else
      ps.tau[i] = qa / q_a0;
  }

  // epsilon twist: the affine diagram flip i -> r - i (C/BC family)
  ps.q_eps = qmap;
  if (rd.type == TypeLabel::BC || rd.type == TypeLabel::C) {
    for (int i = 0; i <= rd.rank; ++i) ps.q_eps[i] = qmap[rd.rank - i];
  }
  return ps;
}

// multiplicative chi: product over positive roots of tau_alpha^{(x, alpha)}.
// Exact when every pairing is an integer, otherwise use chi_log2 below.
inline Rational chi_exact(const RootDatum& rd, const ParameterSystem& ps, const RVec& x) {
  Rational acc = 1;
  for (std::size_t i = 0; i < rd.pos.size(); ++i) {
    Rational p = dot(x, rd.pos[i].v);
    if (!is_integer(p)) throw std::domain_error("chi_exact: non-integral exponent");
    acc *= pow_rat(ps.tau[i], to_ll(p));
  }
  return acc;
}

inline bool chi_is_exact(const RootDatum& rd, const RVec& x) {
  for (std::size_t i = 0; i < rd.pos.size(); ++i)
    if (!is_integer(dot(x, rd.pos[i].v))) return false;
  return true;
}

inline double chi_log2(const RootDatum& rd, const ParameterSystem& ps, const RVec& x) {
  double s = 0;
  for (std::size_t i = 0; i < rd.pos.size(); ++i)
    s += to_double(dot(x, rd.pos[i].v)) * log2_value(ps.tau[i]);
  return s;
}

inline double chi_double(const RootDatum& rd, const ParameterSystem& ps, const RVec& x) {
  return std::exp2(chi_log2(rd, ps, x));
}

// chi restricted to a subset of positive roots (by index list)
inline Rational chi_exact_subset(const RootDatum& rd, const ParameterSystem& ps, const RVec& x,
                                 const std::vector<int>& pos_idx) {
  Rational acc = 1;
  for (int i : pos_idx) {
    Rational p = dot(x, rd.pos[i].v);
    if (!is_integer(p)) throw std::domain_error("chi subset: non-integral exponent");
    acc *= pow_rat(ps.tau[i], to_ll(p));
  }
  return acc;
}

}  // namespace bldg
