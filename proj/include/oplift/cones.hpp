#pragma once

// Polyhedral convex cones C = cc(generators) in R^n and their duals.

#include <boost/multiprecision/cpp_int.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "oplift/errors.hpp"
#include "oplift/matrix_kernel.hpp"
#include "oplift/sdp.hpp"

namespace oplift {

inline constexpr int kMaxDualDim = 8;

class PolyhedralCone {
 public:
  PolyhedralCone() = default;

  PolyhedralCone(int n, std::vector<RVec> generators) : n_(n), gens_(std::move(generators)) {
    if (n_ < 1) throw InputError("PolyhedralCone: ambient dimension must be positive");
    for (std::size_t j = 0; j < gens_.size(); ++j) {
      if (gens_[j].size() != n_) throw ShapeError("PolyhedralCone: generator dimension mismatch");
      if (!gens_[j].allFinite()) throw InputError("PolyhedralCone: non-finite generator");
      if (gens_[j].isZero(0.0)) throw InputError("PolyhedralCone: generator " + std::to_string(j) + " is zero");
    }
  }

  static PolyhedralCone orthant(int n) {
    std::vector<RVec> g;
    for (int i = 0; i < n; ++i) g.push_back(RVec::Unit(n, i));
    return {n, std::move(g)};
  }

  int dim() const { return n_; }
  int size() const { return static_cast<int>(gens_.size()); }
  const std::vector<RVec>& generators() const { return gens_; }
  const RVec& generator(int j) const { return gens_.at(j); }

  /// n x m matrix with the generators as columns.
  RMat matrix() const {
    RMat m(n_, size());
    for (int j = 0; j < size(); ++j) m.col(j) = gens_[j];
    return m;
  }

 private:
  int n_ = 0;
  std::vector<RVec> gens_;
};

struct DualDescription {
  std::vector<RVec> facets;  // generators of the dual cone
  bool exact = false;        // computed in rational arithmetic
};

namespace detail {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline int sign_of(const Rational& v, double) { return v.sign(); }

inline int sign_of(double v, double scale) {
  if (std::abs(v) <= 1e-9 * scale) return 0;
  return v > 0 ? 1 : -1;
}

template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
  T s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <class T>
double approx_norm(const std::vector<T>& v) {
  double s = 0;
  for (const auto& x : v) {
    const double d = static_cast<double>(x);
    s += d * d;
  }
  return std::sqrt(s);
}

template <class T>
void rescale(std::vector<T>& v) {
  T big = 0;
  for (const auto& x : v) big = std::max(big, x < 0 ? T(-x) : x);
  if (big != 0)
    for (auto& x : v) x /= big;
}

// Double description: extreme rays of {l : <l, a_k> >= 0 for all k}.
// Returns generators of that cone (extreme rays plus +-lineality vectors).
template <class T>
std::vector<std::vector<T>> double_description(const std::vector<std::vector<T>>& constraints, int n) {
  struct Ray {
    std::vector<T> v;
    std::vector<bool> zero;  // tight processed constraints
  };
  const std::size_t m = constraints.size();
  std::vector<std::vector<T>> lines;
  for (int i = 0; i < n; ++i) {
    std::vector<T> e(n, T(0));
    e[i] = 1;
    lines.push_back(e);
  }
  std::vector<Ray> rays;

  for (std::size_t k = 0; k < m; ++k) {
    const auto& a = constraints[k];
    const double anorm = approx_norm(a);
    // Pick the line with largest |<a, l>|.
    int pivot = -1;
    double best = 0;
    for (std::size_t li = 0; li < lines.size(); ++li) {
      const T al = dot(a, lines[li]);
      if (sign_of(al, anorm * approx_norm(lines[li])) == 0) continue;
      const double mag = std::abs(static_cast<double>(al));
      if (pivot < 0 || mag > best) {
        pivot = static_cast<int>(li);
        best = mag;
      }
    }
    if (pivot >= 0) {
      std::vector<T> l = lines[pivot];
      const T al = dot(a, l);
      std::vector<std::vector<T>> new_lines;
      for (std::size_t li = 0; li < lines.size(); ++li) {
        if (static_cast<int>(li) == pivot) continue;
        std::vector<T> nl = lines[li];
        const T f = dot(a, nl) / al;
        for (int i = 0; i < n; ++i) nl[i] -= f * l[i];
        rescale(nl);
        new_lines.push_back(std::move(nl));
      }
      for (auto& r : rays) {
        const T f = dot(a, r.v) / al;
        for (int i = 0; i < n; ++i) r.v[i] -= f * l[i];
        rescale(r.v);
        r.zero.push_back(true);
      }
      Ray nr;
      nr.v = l;
      if (al < 0)
        for (auto& x : nr.v) x = -x;
      rescale(nr.v);
      nr.zero.assign(k, true);
      nr.zero.push_back(false);
      rays.push_back(std::move(nr));
      lines = std::move(new_lines);
      continue;
    }

    std::vector<int> pos, neg;
    std::vector<T> val(rays.size());
    std::vector<Ray> next;
    for (std::size_t r = 0; r < rays.size(); ++r) {
      val[r] = dot(a, rays[r].v);
      const int sg = sign_of(val[r], anorm * approx_norm(rays[r].v));
      if (sg > 0) {
        pos.push_back(static_cast<int>(r));
      } else if (sg < 0) {
        neg.push_back(static_cast<int>(r));
      } else {
        Ray z = rays[r];
        z.zero.push_back(true);
        next.push_back(std::move(z));
      }
    }
    const int pointed_dim = n - static_cast<int>(lines.size());
    for (int p : pos) {
      for (int q : neg) {
        std::vector<bool> common(k);
        int count = 0;
        for (std::size_t j = 0; j < k; ++j) {
          common[j] = rays[p].zero[j] && rays[q].zero[j];
          count += common[j];
        }
        if (count < pointed_dim - 2) continue;
        bool adjacent = true;
        for (std::size_t r = 0; r < rays.size() && adjacent; ++r) {
          if (static_cast<int>(r) == p || static_cast<int>(r) == q) continue;
          bool covers = true;
          for (std::size_t j = 0; j < k && covers; ++j)
            if (common[j] && !rays[r].zero[j]) covers = false;
          if (covers) adjacent = false;
        }
        if (!adjacent) continue;
        Ray nr;
        nr.v.resize(n);
        for (int i = 0; i < n; ++i) nr.v[i] = val[p] * rays[q].v[i] - val[q] * rays[p].v[i];
        rescale(nr.v);
        nr.zero = common;
        nr.zero.push_back(true);
        next.push_back(std::move(nr));
      }
    }
    for (int p : pos) {
      Ray r = rays[p];
      r.zero.push_back(false);
      next.push_back(std::move(r));
    }
    rays = std::move(next);
  }

  std::vector<std::vector<T>> out;
  for (auto& r : rays) out.push_back(r.v);
  for (auto& l : lines) {
    out.push_back(l);
    std::vector<T> neg(l);
    for (auto& x : neg) x = -x;
    out.push_back(std::move(neg));
  }
  return out;
}

inline bool is_small_dyadic(double x) {
  if (!std::isfinite(x) || std::abs(x) > 1e6) return false;
  const double scaled = std::ldexp(x, 20);
  return scaled == std::floor(scaled);
}

inline RVec primitive_integer(const std::vector<Rational>& v) {
  BigInt l = 1;
  for (const auto& x : v) l = boost::multiprecision::lcm(l, BigInt(denominator(x)));
  std::vector<BigInt> ints;
  BigInt g = 0;
  for (const auto& x : v) {
    BigInt z = BigInt(numerator(x)) * (l / BigInt(denominator(x)));
    ints.push_back(z);
    g = boost::multiprecision::gcd(g, z);
  }
  RVec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = g == 0 ? 0.0 : static_cast<double>(ints[i] / g);
  return out;
}

}  // namespace detail

/// Generators of the dual cone {l : <l, c> >= 0 for all c in C}, by the
/// double-description method. Exact rational arithmetic is used when every
/// generator coordinate is a small dyadic rational.
inline DualDescription dual_generators(const PolyhedralCone& c) {
  const int n = c.dim();
  if (n > kMaxDualDim) throw CapabilityError("dual_generators: ambient dimension above " + std::to_string(kMaxDualDim));
  bool exact = true;
  for (const auto& g : c.generators())
    for (Eigen::Index i = 0; i < g.size(); ++i) exact = exact && detail::is_small_dyadic(g(i));

  DualDescription out;
  out.exact = exact;
  if (exact) {
    std::vector<std::vector<detail::Rational>> cons;
    for (const auto& g : c.generators()) {
      std::vector<detail::Rational> row;
      for (Eigen::Index i = 0; i < g.size(); ++i) row.emplace_back(g(i));
      cons.push_back(std::move(row));
    }
    for (const auto& r : detail::double_description(cons, n)) out.facets.push_back(detail::primitive_integer(r));
  } else {
    std::vector<std::vector<double>> cons;
    for (const auto& g : c.generators()) {
      const RVec u = g.normalized();
      cons.emplace_back(u.data(), u.data() + u.size());
    }
    for (const auto& r : detail::double_description(cons, n)) {
      RVec v = Eigen::Map<const RVec>(r.data(), n);
      out.facets.push_back(v.normalized());
    }
  }
  return out;
}

/// The dual cone as a PolyhedralCone.
inline PolyhedralCone dual_cone(const PolyhedralCone& c) {
  return {c.dim(), dual_generators(c).facets};
}

/// x in C, decided by LP feasibility of sum_j lambda_j c_j = x, lambda >= 0.
inline bool membership(const PolyhedralCone& c, const RVec& x, double tol = kDefaultTol) {
  if (x.size() != c.dim()) throw ShapeError("membership: dimension mismatch");
  if (c.size() == 0) return x.norm() <= tol;
  sdp::Problem p;
  for (int j = 0; j < c.size(); ++j) {
    p.add_block(1);
    p.c[j](0, 0) = c.generator(j).norm();  // min weighted sum keeps the LP bounded
  }
  for (int i = 0; i < c.dim(); ++i) {
    const int r = p.add_constraint(x(i));
    for (int j = 0; j < c.size(); ++j)
      if (c.generator(j)(i) != 0.0) p.a[r][j] = RMat::Constant(1, 1, c.generator(j)(i));
  }
  const sdp::Solution sol = sdp::lp_solve(p);
  if (sol.status == sdp::Status::Optimal || sol.status == sdp::Status::Feasible) {
    RVec lam(c.size());
    for (int j = 0; j < c.size(); ++j) lam(j) = std::max(0.0, sol.x[j](0, 0));
    return (c.matrix() * lam - x).norm() <= tol * (1.0 + x.norm()) * 10 || sol.primal_res <= tol;
  }
  if (sol.status == sdp::Status::Infeasible) return false;
  // Fallback: facet inequalities of the dual description.
  for (const auto& f : dual_generators(c).facets)
    if (f.dot(x) < -tol * (1.0 + x.norm())) return false;
  return true;
}

struct ProperCheck {
  bool pointed = false;
  bool full_dim = false;
  bool proper() const { return pointed && full_dim; }
};

inline ProperCheck is_proper(const PolyhedralCone& c) {
  ProperCheck out;
  if (c.size() == 0) return out;
  Eigen::ColPivHouseholderQR<RMat> qr(c.matrix());
  qr.setThreshold(1e-9);
  out.full_dim = qr.rank() == c.dim();
  // Not pointed iff some convex combination of the normalized generators is zero.
  sdp::Problem p;
  for (int j = 0; j < c.size(); ++j) p.add_block(1);
  for (int i = 0; i < c.dim(); ++i) {
    const int r = p.add_constraint(0.0);
    for (int j = 0; j < c.size(); ++j) {
      const double v = c.generator(j)(i) / c.generator(j).norm();
      if (v != 0.0) p.a[r][j] = RMat::Constant(1, 1, v);
    }
  }
  const int r = p.add_constraint(1.0);
  for (int j = 0; j < c.size(); ++j) p.a[r][j] = RMat::Constant(1, 1, 1.0);
  const sdp::Solution sol = sdp::lp_solve(p);
  out.pointed = sol.status == sdp::Status::Infeasible;
  return out;
}

/// Minimal generating set: drops generators lying in the cone of the others.
inline PolyhedralCone normalize(const PolyhedralCone& c, double tol = kDefaultTol) {
  std::vector<RVec> keep = c.generators();
  for (std::size_t j = keep.size(); j-- > 0;) {
    std::vector<RVec> others;
    for (std::size_t i = 0; i < keep.size(); ++i)
      if (i != j) others.push_back(keep[i]);
    if (others.empty()) break;
    if (membership(PolyhedralCone(c.dim(), others), keep[j], tol)) keep.erase(keep.begin() + static_cast<long>(j));
  }
  return {c.dim(), std::move(keep)};
}

}  // namespace oplift
