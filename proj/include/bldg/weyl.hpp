#pragma once

#include "bldg/root_datum.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace bldg {

// One finite Weyl group element: a reduced word in the simple reflections and
// the ambient matrix it realizes.
struct WeylElt {
  std::vector<int> word;  // letters in {0..r-1} (naming simple reflections 1..r)
  RMat mat;
  int length() const { return static_cast<int>(word.size()); }
};

struct WeylGroup {
  const RootDatum* rd = nullptr;
  std::vector<RMat> gens;           // reflection matrices r_1..r_r
  std::vector<WeylElt> elts;        // enumerated elements, identity first
  std::size_t cap = 100000;
  bool enumerated = false;
  int longest_idx = -1;

  explicit WeylGroup(const RootDatum& datum, std::size_t cap_ = 100000) : rd(&datum), cap(cap_) {
    for (int i = 0; i < rd->rank; ++i) {
      RMat m(rd->dim);
      for (int c = 0; c < rd->dim; ++c) {
        RVec e = zero_vec(rd->dim);
        e[c] = 1;
        RVec img = rd->reflect(e, rd->simple[i]);
        for (int r2 = 0; r2 < rd->dim; ++r2) m(r2, c) = img[r2];
      }
      gens.push_back(std::move(m));
    }
  }

  // generic base point with trivial stabilizer (strongly dominant)
  RVec generic_point() const {
    RVec p = zero_vec(rd->dim);
    for (int i = 0; i < rd->rank; ++i) p = add(p, scale(Rational(i + 1), rd->coweight[i]));
    return p;
  }

  void enumerate() {
    if (enumerated) return;
    std::map<std::vector<std::string>, int> seen;
    auto key = [](const RVec& v) {
      std::vector<std::string> k;
      for (const auto& x : v) k.push_back(x.str());
      return k;
    };
    const RVec p0 = generic_point();
    elts.clear();
    WeylElt id;
    id.mat = RMat::identity(rd->dim);
    elts.push_back(id);
    seen[key(p0)] = 0;
    for (std::size_t h = 0; h < elts.size(); ++h) {
      for (int i = 0; i < rd->rank; ++i) {
        RMat m = gens[i].mul(elts[h].mat);  // r_i * w  (length may go either way)
        RVec img = m.apply(p0);
        auto k = key(img);
        if (seen.count(k)) continue;
        WeylElt e;
        e.word = elts[h].word;
        e.word.insert(e.word.begin(), i);  // left multiplication
        e.mat = std::move(m);
        if (elts.size() >= cap) throw std::length_error("Weyl group larger than enumeration cap");
        seen[k] = static_cast<int>(elts.size());
        elts.push_back(std::move(e));
      }
    }
    // left-BFS produces words of nondecreasing length; the recorded word of each
    // element is reduced because BFS reaches it first at graph distance = length
    std::stable_sort(elts.begin(), elts.end(), [](const WeylElt& a, const WeylElt& b) {
      if (a.word.size() != b.word.size()) return a.word.size() < b.word.size();
      return a.word < b.word;
    });
    longest_idx = static_cast<int>(elts.size()) - 1;
    enumerated = true;
  }

  std::size_t order() {
    enumerate();
    return elts.size();
  }

  const WeylElt& longest() {
    enumerate();
    return elts[longest_idx];
  }

  int find(const RMat& m) {
    enumerate();
    const RVec p0 = generic_point();
    RVec img = m.apply(p0);
    for (std::size_t i = 0; i < elts.size(); ++i)
      if (elts[i].mat.apply(p0) == img) return static_cast<int>(i);
    return -1;
  }

  // q_w from a reduced word; letters name simple reflections (0-based storage)
  static Rational q_word(const std::vector<int>& word, const std::vector<long long>& q) {
    Rational acc = 1;
    for (int i : word) acc *= Rational(q[i + 1]);
    return acc;
  }
  static Rational q_word_eps(const std::vector<int>& word, const ParameterSystem& ps, int rank) {
    Rational acc = 1;
    for (int i : word) acc *= Rational(ps.q_eps[i + 1]);
    return acc;
  }
};

// ---------------------------------------------------------------------------
// Word-based operations that never require full enumeration.
// ---------------------------------------------------------------------------

// Dominant representative: returns lambda dominant and the reduced word of the
// minimal-length w with w . lambda = v. Descent always picks the smallest
// violated simple pairing, which makes the output deterministic.
struct DominantRep {
  RVec lambda;
  std::vector<int> word;  // reduced word of the witness w
};

inline DominantRep dominant_rep(const RootDatum& rd, const RVec& v) {
  DominantRep out;
  RVec x = v;
  std::vector<int> desc;  // letters applied to x, in application order
  for (;;) {
    int j = -1;
    for (int i = 0; i < rd.rank; ++i)
      if (rd.pair_simple(x, i) < 0) {
        j = i;
        break;
      }
    if (j < 0) break;
    x = rd.reflect(x, rd.simple[j]);
    desc.push_back(j);
  }
  out.lambda = std::move(x);
  // lambda = r_{jk} ... r_{j1} . v, so v = r_{j1} ... r_{jk} . lambda
  out.word = std::move(desc);
  return out;
}

inline RVec apply_word(const RootDatum& rd, const std::vector<int>& word, const RVec& v) {
  RVec x = v;
  for (auto it = word.rbegin(); it != word.rend(); ++it) x = rd.reflect(x, rd.simple[*it]);
  return x;
}

inline RVec apply_word_inverse(const RootDatum& rd, const std::vector<int>& word, const RVec& v) {
  RVec x = v;
  for (int i : word) x = rd.reflect(x, rd.simple[i]);
  return x;
}

// W-orbit of a point (no enumeration of W itself)
inline std::vector<RVec> weyl_orbit(const RootDatum& rd, const RVec& v) {
  std::map<std::vector<std::string>, int> seen;
  auto key = [](const RVec& u) {
    std::vector<std::string> k;
    for (const auto& x : u) k.push_back(x.str());
    return k;
  };
  std::vector<RVec> orb{dominant_rep(rd, v).lambda};
  seen[key(orb[0])] = 0;
  for (std::size_t h = 0; h < orb.size(); ++h)
    for (int i = 0; i < rd.rank; ++i) {
      RVec w = rd.reflect(orb[h], rd.simple[i]);
      auto k = key(w);
      if (!seen.count(k)) {
        seen[k] = 1;
        orb.push_back(std::move(w));
      }
    }
  return orb;
}

// Enumerate a standard parabolic W_J by BFS over the listed generators.
// Words stay inside J, hence are reduced words in the full group as well.
inline std::vector<WeylElt> parabolic_elements(const RootDatum& rd, const std::vector<int>& J,
                                               std::size_t cap = 100000) {
  std::map<std::vector<std::string>, int> seen;
  auto key = [](const RVec& v) {
    std::vector<std::string> k;
    for (const auto& x : v) k.push_back(x.str());
    return k;
  };
  // a point generic for the subgroup: strongly dominant works
  RVec p0 = zero_vec(rd.dim);
  for (int i = 0; i < rd.rank; ++i) p0 = add(p0, scale(Rational(i + 1), rd.coweight[i]));
  std::vector<WeylElt> elts;
  WeylElt id;
  id.mat = RMat::identity(rd.dim);
  elts.push_back(id);
  seen[key(p0)] = 0;
  for (std::size_t h = 0; h < elts.size(); ++h)
    for (int j : J) {
      RMat m(rd.dim);
      // m = r_j * elts[h]
      for (int c = 0; c < rd.dim; ++c) {
        RVec col(rd.dim);
        for (int r2 = 0; r2 < rd.dim; ++r2) col[r2] = elts[h].mat(r2, c);
        RVec img = rd.reflect(col, rd.simple[j]);
        for (int r2 = 0; r2 < rd.dim; ++r2) m(r2, c) = img[r2];
      }
      RVec img = m.apply(p0);
      auto k = key(img);
      if (seen.count(k)) continue;
      if (elts.size() >= cap) throw std::length_error("parabolic subgroup exceeds cap");
      WeylElt e;
      e.word = elts[h].word;
      e.word.insert(e.word.begin(), j);
      e.mat = std::move(m);
      seen[k] = 1;
      elts.push_back(std::move(e));
    }
  return elts;
}

// stabilizer W_lambda of a dominant point = parabolic on the vanishing pairings
inline std::vector<int> stabilizer_generators(const RootDatum& rd, const RVec& dominant) {
  std::vector<int> J;
  for (int i = 0; i < rd.rank; ++i)
    if (rd.pair_simple(dominant, i) == 0) J.push_back(i);
  return J;
}

enum class PoincareMode { Inverse, Plain, InverseEps, PlainEps };

inline Rational poincare_sum(const std::vector<WeylElt>& elts, const ParameterSystem& ps,
                             PoincareMode mode) {
  Rational s = 0;
  for (const auto& e : elts) {
    Rational qw = 1;
    for (int i : e.word) {
      long long qi = (mode == PoincareMode::InverseEps || mode == PoincareMode::PlainEps)
                         ? ps.q_eps[i + 1]
                         : ps.q[i + 1];
      qw *= Rational(qi);
    }
    if (mode == PoincareMode::Inverse || mode == PoincareMode::InverseEps)
      s += Rational(1) / qw;
    else
      s += qw;
  }
  return s;
}

// U(q^{-1}) for U = W_J
inline Rational poincare_J(const RootDatum& rd, const ParameterSystem& ps,
                           const std::vector<int>& J, PoincareMode mode = PoincareMode::Inverse) {
  return poincare_sum(parabolic_elements(rd, J), ps, mode);
}

// U(q^{-1}) for U = W_lambda (dominant lambda)
inline Rational poincare_stab(const RootDatum& rd, const ParameterSystem& ps, const RVec& lambda,
                              PoincareMode mode = PoincareMode::Inverse) {
  RVec dom = dominant_rep(rd, lambda).lambda;
  return poincare_sum(parabolic_elements(rd, stabilizer_generators(rd, dom)), ps, mode);
}

inline std::vector<int> full_index_set(const RootDatum& rd) {
  std::vector<int> J(rd.rank);
  std::iota(J.begin(), J.end(), 0);
  return J;
}

// W(q^{-1}) of the whole group
inline Rational poincare_W(const RootDatum& rd, const ParameterSystem& ps,
                           PoincareMode mode = PoincareMode::Inverse) {
  return poincare_J(rd, ps, full_index_set(rd), mode);
}

// N_lambda = (W(q^{-1}) / W_lambda(q^{-1})) chi(lambda); the twisted variant
// replaces q by q_eps in both Poincare sums.
inline Rational n_lambda(const RootDatum& rd, const ParameterSystem& ps, const RVec& lambda,
                         bool twisted = false) {
  for (int i = 0; i < rd.rank; ++i)
    if (rd.pair_simple(lambda, i) < 0) throw std::invalid_argument("n_lambda: non-dominant input");
  const PoincareMode mode = twisted ? PoincareMode::InverseEps : PoincareMode::Inverse;
  Rational w = poincare_W(rd, ps, mode);
  Rational wl = poincare_stab(rd, ps, lambda, mode);
  return w / wl * chi_exact(rd, ps, lambda);
}

// P_J(v) = (1/|W_J|) sum_{w in W_J} (v - w.v), Q_J = id - P_J
struct ProjJ {
  RVec p, q;
};

inline ProjJ proj_J(const RootDatum& rd, const std::vector<int>& J, const RVec& v) {
  if (static_cast<int>(J.size()) >= rd.rank &&
      std::set<int>(J.begin(), J.end()).size() == static_cast<std::size_t>(rd.rank))
    throw std::invalid_argument("proj_J: J must be a proper subset of I_0");
  auto elts = parabolic_elements(rd, J);
  RVec acc = zero_vec(rd.dim);
  for (const auto& e : elts) acc = add(acc, sub(v, e.mat.apply(v)));
  RVec p = scale(Rational(1, static_cast<long long>(elts.size())), acc);
  return {p, sub(v, p)};
}

// The root subsystem Phi_J: roots supported on the simple coordinates J.
// Returned as a full RootDatum-like view plus the index map into the parent.
struct SubSystem {
  RootDatum datum;           // rank |J| system living in the parent's ambient space
  ParameterSystem params;    // tau inherited from the parent, per root
  std::vector<int> J;        // parent simple indices
  std::vector<int> parent_pos;  // for each datum.pos, the parent pos index
};

inline SubSystem sub_system(const RootDatum& rd, const ParameterSystem& ps,
                            const std::vector<int>& J) {
  SubSystem ss;
  ss.J = J;
  RootDatum& d = ss.datum;
  d.type = rd.type;  // label retained for diagnostics; geometry is what matters
  d.rank = static_cast<int>(J.size());
  d.dim = rd.dim;
  for (int j : J) d.simple.push_back(rd.simple[j]);
  // positive roots of the subsystem: parent positive roots supported on J
  for (std::size_t i = 0; i < rd.pos.size(); ++i) {
    const auto& p = rd.pos[i];
    bool ok = true;
    for (int k = 0; k < rd.rank; ++k)
      if (p.coeff[k] != 0 && std::find(J.begin(), J.end(), k) == J.end()) ok = false;
    if (!ok) continue;
    PosRoot q = p;
    q.coeff.clear();
    for (int j : J) q.coeff.push_back(p.coeff[j]);
    q.height = 0;
    for (auto c : q.coeff) q.height += c;
    d.pos.push_back(std::move(q));
    ss.parent_pos.push_back(static_cast<int>(i));
  }
  // order by height like the parent builder does
  {
    std::vector<std::size_t> idx(d.pos.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      if (d.pos[a].height != d.pos[b].height) return d.pos[a].height < d.pos[b].height;
      return d.pos[a].coeff < d.pos[b].coeff;
    });
    std::vector<PosRoot> np;
    std::vector<int> nm;
    for (auto i : idx) {
      np.push_back(d.pos[i]);
      nm.push_back(ss.parent_pos[i]);
    }
    d.pos = std::move(np);
    ss.parent_pos = std::move(nm);
  }
  for (std::size_t i = 0; i < d.pos.size(); ++i) {
    d.pos[i].has_double = d.find_pos_root(scale(Rational(2), d.pos[i].v)) >= 0;
    d.pos[i].has_half = d.find_pos_root(scale(Rational(1, 2), d.pos[i].v)) >= 0;
    d.pos[i].indivisible = !d.pos[i].has_half;
    if (d.pos[i].indivisible) d.pos_indiv.push_back(static_cast<int>(i));
  }
  if (!d.pos.empty()) {
    d.highest = d.pos.back().v;
    d.m = d.pos.back().coeff;
  }
  // coweights of the subsystem: dual basis inside span(Phi_J)
  if (d.rank > 0) {
    std::vector<RVec> gram(d.rank, RVec(d.rank));
    for (int a = 0; a < d.rank; ++a)
      for (int b = 0; b < d.rank; ++b) gram[a][b] = dot(d.simple[a], d.simple[b]);
    for (int i = 0; i < d.rank; ++i) {
      RVec rhs(d.rank, Rational(0));
      rhs[i] = 1;
      RVec c = solve_exact(gram, rhs);
      RVec lam = zero_vec(d.dim);
      for (int j = 0; j < d.rank; ++j) lam = add(lam, scale(c[j], d.simple[j]));
      d.coweight.push_back(lam);
    }
    for (int i = 0; i < d.rank; ++i) d.coroot_simple.push_back(d.coroot(d.simple[i]));
  }
  d.good_types.push_back(0);
  for (int i = 0; i < d.rank; ++i)
    if (!d.m.empty() && d.m[i] == 1) d.good_types.push_back(i + 1);
  // orbits within the subsystem
  {
    d.orbit_count = 0;
    std::map<std::vector<std::string>, int> orbit_of;
    auto key = [](const RVec& u) {
      std::vector<std::string> k;
      for (const auto& x : u) k.push_back(x.str());
      return k;
    };
    for (auto& p : d.pos) {
      auto k0 = key(p.v);
      if (orbit_of.count(k0)) {
        p.orbit = orbit_of[k0];
        continue;
      }
      std::vector<RVec> frontier{p.v};
      std::set<std::vector<std::string>> members{k0};
      for (std::size_t h = 0; h < frontier.size(); ++h)
        for (int i = 0; i < d.rank; ++i) {
          RVec w = d.reflect(frontier[h], d.simple[i]);
          if (members.insert(key(w)).second) frontier.push_back(w);
          RVec wn = neg(w);
          if (members.insert(key(wn)).second) frontier.push_back(wn);
        }
      for (const auto& mk : members) orbit_of[mk] = d.orbit_count;
      p.orbit = d.orbit_count;
      ++d.orbit_count;
    }
  }
  // parameters: inherit tau per root; synthesize a q map for the sub-diagram
  ss.params.tau.resize(d.pos.size());
  ss.params.q_orbit.assign(d.orbit_count, Rational(0));
  for (std::size_t i = 0; i < d.pos.size(); ++i) {
    ss.params.tau[i] = ps.tau[ss.parent_pos[i]];
    ss.params.q_orbit[d.pos[i].orbit] = ps.q_orbit[rd.pos[ss.parent_pos[i]].orbit];
  }
  ss.params.q.assign(d.rank + 1, 2);
  if (!d.pos.empty()) {
    int hidx = d.find_pos_root(d.highest);
    Rational qh = ss.params.q_orbit[d.pos[hidx].orbit];
    ss.params.q[0] = to_ll(qh);
  }
  for (int i = 0; i < d.rank; ++i) {
    int idx = d.find_pos_root(d.simple[i]);
    ss.params.q[i + 1] = to_ll(ss.params.q_orbit[d.pos[idx].orbit]);
  }
  ss.params.q_eps = ss.params.q;
  return ss;
}

}  // namespace bldg
