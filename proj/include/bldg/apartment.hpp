#pragma once

#include "bldg/root_datum.hpp"
#include "bldg/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace bldg {

// --------------------------------------------------------------------------
// Special vertices of the model apartment.
//
// For reduced systems the special vertices form the coweight lattice P and all
// of them are good. For BC_r there are two classes: P itself (good, type 0)
// and P + lambda_r / 2 (the epsilon-good class, type r).
// --------------------------------------------------------------------------

enum class VertexClass { Good, EpsGood, NotSpecial };

inline VertexClass vertex_class(const RootDatum& rd, const RVec& x) {
  bool integral = true;
  for (int i = 0; i < rd.rank; ++i)
    if (!is_integer(rd.pair_simple(x, i))) integral = false;
  if (integral && rd.in_span(x)) return VertexClass::Good;
  if (rd.type == TypeLabel::BC) {
    RVec shifted = sub(x, scale(Rational(1, 2), rd.coweight[rd.rank - 1]));
    bool ok = true;
    for (int i = 0; i < rd.rank; ++i)
      if (!is_integer(rd.pair_simple(shifted, i))) ok = false;
    if (ok && rd.in_span(shifted)) return VertexClass::EpsGood;
  }
  return VertexClass::NotSpecial;
}

inline bool is_special(const RootDatum& rd, const RVec& x) {
  return vertex_class(rd, x) != VertexClass::NotSpecial;
}

// Vertex type in I = {0..r} for special vertices of reduced systems: the class
// of x in P/Q, matched against 0 and the coweights with m_i = 1.
inline int vertex_type(const RootDatum& rd, const RVec& x) {
  VertexClass vc = vertex_class(rd, x);
  if (vc == VertexClass::NotSpecial) return -1;
  if (rd.type == TypeLabel::BC) return vc == VertexClass::Good ? 0 : rd.rank;
  // solve x = sum c_i alpha_i-check; x - lambda_t in Q for exactly one good t
  auto in_coroot_lattice = [&](const RVec& v) {
    std::vector<RVec> rows(rd.rank, RVec(rd.rank));
    RVec rhs(rd.rank);
    for (int j = 0; j < rd.rank; ++j) {
      for (int i = 0; i < rd.rank; ++i) rows[j][i] = dot(rd.simple[j], rd.coroot_simple[i]);
      rhs[j] = dot(rd.simple[j], v);
    }
    RVec c = solve_exact(rows, rhs);
    for (const auto& ci : c)
      if (!is_integer(ci)) return false;
    return true;
  };
  if (in_coroot_lattice(x)) return 0;
  for (int t : rd.good_types) {
    if (t == 0) continue;
    if (in_coroot_lattice(sub(x, rd.coweight[t - 1]))) return t;
  }
  return -2;  // special vertex of a non-good type (does not occur for reduced)
}

// sigma(x, y): dominant representative of the displacement
inline RVec sigma(const RootDatum& rd, const RVec& x, const RVec& y) {
  if (!is_special(rd, x) || !is_special(rd, y))
    throw std::invalid_argument("sigma: inputs must be special vertices");
  return dominant_rep(rd, sub(y, x)).lambda;
}

inline double sigma_norm(const RootDatum& rd, const RVec& x, const RVec& y) {
  return std::sqrt(to_double(norm2(sub(y, x))));
}

// horocycle function for the boundary chamber of direction w . S_0:
// h(x, y; omega_w) = w^{-1} (y - x)
inline RVec horocycle(const RootDatum& rd, const RVec& x, const RVec& y,
                      const std::vector<int>& w_word) {
  if (!is_special(rd, x) || !is_special(rd, y))
    throw std::invalid_argument("horocycle: inputs must be special vertices");
  return apply_word_inverse(rd, w_word, sub(y, x));
}

// --------------------------------------------------------------------------
// Core and angular specifications (directions realized inside the model
// apartment as w . S_0).
// --------------------------------------------------------------------------

enum class Schedule { Linear, Geometric };

struct CoreSpec {
  std::vector<int> direction;       // reduced word of w
  std::vector<int> J;               // proper subset of simple indices (0-based)
  std::vector<Rational> c;          // pinned pairings, aligned with J
  Schedule schedule = Schedule::Linear;
  bool eps_class = false;           // generate epsilon-good vertices (BC)
};

struct AngularSpec {
  CoreSpec core;
  RVec u_dir;  // rational direction vector; the unit vector is u_dir/|u_dir|
};

inline long long schedule_value(Schedule s, long long n) {
  if (s == Schedule::Linear) return n;
  if (n >= 62) throw std::overflow_error("geometric schedule overflow");
  return 1LL << n;
}

inline void validate_core_spec(const RootDatum& rd, const CoreSpec& spec) {
  if (static_cast<int>(spec.J.size()) >= rd.rank)
    throw std::invalid_argument("core spec: J must be a proper subset of I_0");
  std::set<int> js(spec.J.begin(), spec.J.end());
  if (js.size() != spec.J.size()) throw std::invalid_argument("core spec: duplicate J entries");
  for (int j : spec.J)
    if (j < 0 || j >= rd.rank) throw std::invalid_argument("core spec: J index out of range");
  if (spec.c.size() != spec.J.size()) throw std::invalid_argument("core spec: c misaligned with J");
  for (const auto& cj : spec.c) {
    if (cj < 0) throw std::invalid_argument("core spec: c_j must be nonnegative");
    Rational doubled = cj * 2;
    if (!is_integer(doubled)) throw std::invalid_argument("core spec: c_j must lie in (1/2) N");
    if (!spec.eps_class && !is_integer(cj) && rd.reduced())
      throw std::invalid_argument("core spec: fractional c_j requires the half lattice");
  }
}

inline void validate_angular_spec(const RootDatum& rd, const AngularSpec& spec) {
  validate_core_spec(rd, spec.core);
  if (is_zero(spec.u_dir)) throw std::invalid_argument("angular spec: zero direction");
  std::set<int> js(spec.core.J.begin(), spec.core.J.end());
  for (std::size_t i = 0; i < rd.pos.size(); ++i)
    if (dot(spec.u_dir, rd.pos[i].v) < 0)
      throw std::invalid_argument("angular spec: u must pair nonnegatively with positive roots");
  for (int j : spec.core.J)
    if (dot(spec.u_dir, rd.simple[j]) != 0)
      throw std::invalid_argument("angular spec: u must be orthogonal to alpha_j for j in J");
  for (int i = 0; i < rd.rank; ++i)
    if (!js.count(i) && dot(spec.u_dir, rd.simple[i]) == 0)
      throw std::invalid_argument("angular spec: u must pair positively off J");
}

// n-th point of the generated sequence. The point is built in the fundamental
// sector from its pairing coordinates, then rotated by the direction word.
inline RVec core_generate(const RootDatum& rd, const CoreSpec& spec, long long n,
                          const RVec* u_dir = nullptr) {
  validate_core_spec(rd, spec);
  if (u_dir) validate_angular_spec(rd, AngularSpec{spec, *u_dir});
  const long long g = schedule_value(spec.schedule, n);
  RVec t(rd.rank, Rational(0));
  std::set<int> js(spec.J.begin(), spec.J.end());
  for (std::size_t k = 0; k < spec.J.size(); ++k) t[spec.J[k]] = spec.c[k];
  for (int i = 0; i < rd.rank; ++i) {
    if (js.count(i)) continue;
    if (u_dir) {
      Rational p = dot(*u_dir, rd.simple[i]);
      Rational scaled = p * g;
      t[i] = Rational(floor_int(scaled));
      if (t[i] < 1) t[i] = 1;
    } else {
      t[i] = g;
    }
  }
  RVec xi = rd.from_coweight_coords(t);
  if (spec.eps_class) {
    if (rd.type != TypeLabel::BC)
      throw std::invalid_argument("eps-class sequences exist only for BC");
    xi = add(xi, scale(Rational(1, 2), rd.coweight[rd.rank - 1]));
  }
  return apply_word(rd, spec.direction, xi);
}

// Exact parameter redundancy of the limit kernels: same J, same c, directions
// in the same left W_J-coset, and (above the spectrum) the same direction u.
inline bool spec_equivalent(const RootDatum& rd, const CoreSpec& a, const CoreSpec& b,
                            const RVec* ua = nullptr, const RVec* ub = nullptr) {
  if (a.eps_class != b.eps_class)
    throw std::invalid_argument("spec_equivalent: mixed vertex classes need the eps flag");
  std::vector<std::pair<int, Rational>> ja, jb;
  for (std::size_t k = 0; k < a.J.size(); ++k) ja.emplace_back(a.J[k], a.c[k]);
  for (std::size_t k = 0; k < b.J.size(); ++k) jb.emplace_back(b.J[k], b.c[k]);
  std::sort(ja.begin(), ja.end());
  std::sort(jb.begin(), jb.end());
  if (ja != jb) return false;
  // w_a^{-1} w_b must fix every coweight off J
  std::set<int> js(a.J.begin(), a.J.end());
  for (int i = 0; i < rd.rank; ++i) {
    if (js.count(i)) continue;
    RVec img = apply_word_inverse(rd, a.direction, apply_word(rd, b.direction, rd.coweight[i]));
    if (!(img == rd.coweight[i])) return false;
  }
  if (ua || ub) {
    if (!ua || !ub) return false;
    // compare unit directions exactly: cross-scaling test
    const Rational na = norm2(*ua), nb = norm2(*ub);
    // ua/|ua| == ub/|ub|  <=>  ua * |ub| = ub * |ua|; compare squared data
    // (both are dominant-cone vectors, so sign ambiguity does not arise)
    RVec lhs = scale(Rational(1), *ua), rhs = scale(Rational(1), *ub);
    // check ua and ub are parallel with positive ratio
    Rational ratio = 0;
    bool ok = true;
    for (int d = 0; d < rd.dim; ++d) {
      if ((lhs[d] == 0) != (rhs[d] == 0)) ok = false;
      if (!ok) break;
      if (lhs[d] != 0) {
        Rational rr = lhs[d] / rhs[d];
        if (ratio == 0)
          ratio = rr;
        else if (rr != ratio)
          ok = false;
      }
    }
    if (!ok || ratio <= 0) return false;
  }
  return true;
}

// Busemann pair of Theorem-11 type: the finite horofunction difference at
// horizon n and its closed-form limit <u, h(o, y; omega)>.
struct BusemannValue {
  double finite;
  double limit;
};

inline BusemannValue busemann(const RootDatum& rd, const AngularSpec& spec, const RVec& y,
                              long long n) {
  validate_angular_spec(rd, spec);
  const RVec o = zero_vec(rd.dim);
  RVec xn = core_generate(rd, spec.core, n, &spec.u_dir);
  const double f = sigma_norm(rd, o, xn) - sigma_norm(rd, y, xn);
  RVec h = horocycle(rd, o, y, spec.core.direction);
  const double unorm = std::sqrt(to_double(norm2(spec.u_dir)));
  const double lim = to_double(dot(spec.u_dir, h)) / unorm;
  return {f, lim};
}

// --------------------------------------------------------------------------
// Affine Weyl machinery on the fundamental alcove: point descent, panel types
// and q_w for affine elements. The fundamental alcove is
//   { (x, alpha_i) >= 0 for all i,  (x, alpha_0) <= 1 }.
// --------------------------------------------------------------------------

// Fold x into the closed fundamental alcove, recording the letters used
// (0 names the affine reflection r_0, i in {1..r} the simple r_i).
inline RVec alcove_descent(const RootDatum& rd, RVec x, std::vector<int>* letters = nullptr) {
  const Rational one(1);
  for (std::size_t guard = 0;; ++guard) {
    if (guard > 100000) throw std::runtime_error("alcove descent failed to terminate");
    int pick = -1;
    for (int i = 0; i < rd.rank; ++i)
      if (rd.pair_simple(x, i) < 0) {
        pick = i + 1;
        break;
      }
    if (pick < 0 && dot(x, rd.highest) > one) pick = 0;
    if (pick < 0) return x;
    if (pick == 0) {
      x = rd.reflect_affine(x, rd.highest, one);
      if (letters) letters->push_back(0);
    } else {
      x = rd.reflect(x, rd.simple[pick - 1]);
      if (letters) letters->push_back(pick);
    }
  }
}

// q_w for an affine element presented by its action on a generic alcove point:
// descend w . p0 and multiply the q of each letter crossed.
inline Rational affine_q_w(const RootDatum& rd, const ParameterSystem& ps, const RVec& image_of_p0,
                           bool eps = false) {
  std::vector<int> letters;
  alcove_descent(rd, image_of_p0, &letters);
  Rational acc = 1;
  for (int l : letters) acc *= Rational(eps ? ps.q_eps[l] : ps.q[l]);
  return acc;
}

inline RVec alcove_interior_point(const RootDatum& rd) {
  // strictly inside: small strongly dominant point below the highest wall
  RVec p = zero_vec(rd.dim);
  Rational h = 0;
  for (int i = 0; i < rd.rank; ++i) {
    Rational ci(1, 1 + (i + 1) * (i + 3));  // distinct small positives
    p = add(p, scale(ci, rd.coweight[i]));
  }
  Rational top = dot(p, rd.highest);
  return scale(Rational(1, 2) / top, p);
}

// Panel type carried by the wall {(x, beta) = k} at the location p, where p
// must lie on the wall. A deterministic tangential jitter makes the point
// generic inside its panel before folding into the fundamental alcove.
inline int wall_panel_type_at(const RootDatum& rd, const RVec& beta, const Rational& k,
                              const RVec& p_on_wall) {
  if (dot(p_on_wall, beta) != k) throw std::invalid_argument("panel type: point not on wall");
  // tangent frame: project coweight directions onto the wall
  std::vector<RVec> tangent;
  const Rational b2 = norm2(beta);
  for (int i = 0; i < rd.rank; ++i) {
    RVec t = sub(rd.coweight[i], scale(dot(rd.coweight[i], beta) / b2, beta));
    if (!is_zero(t)) tangent.push_back(t);
  }
  Rational eps(1, 1 << 20);
  for (int attempt = 0; attempt < 48; ++attempt) {
    RVec p = p_on_wall;
    Rational step = eps;
    for (std::size_t i = 0; i < tangent.size(); ++i) {
      p = add(p, scale(step, tangent[i]));
      step = step * Rational(1, 257);  // incommensurate-ish ladder
    }
    RVec folded = alcove_descent(rd, p);
    // count fundamental walls met with exact equality
    std::vector<int> met;
    for (int i = 0; i < rd.rank; ++i)
      if (rd.pair_simple(folded, i) == 0) met.push_back(i + 1);
    if (dot(folded, rd.highest) == 1) met.push_back(0);
    if (met.size() == 1) return met[0];
    if (met.empty()) throw std::logic_error("panel type: jittered point left the wall");
    eps = eps * Rational(1, 1024);
  }
  throw std::runtime_error("panel type: could not isolate a single panel");
}

// Panel type of an abstract wall (beta; k): uses the canonical foot point.
inline int wall_panel_type(const RootDatum& rd, const RVec& beta, const Rational& k) {
  RVec foot = scale(k / norm2(beta), beta);
  return wall_panel_type_at(rd, beta, k, foot);
}

}  // namespace bldg
