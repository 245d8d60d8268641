#pragma once

// Hermitian matrix polynomials, Gram-matrix certification of sums of
// Hermitian squares, and the bridges between such certificates and lifts.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "oplift/cpmaps.hpp"
#include "oplift/errors.hpp"
#include "oplift/lift.hpp"
#include "oplift/lmi.hpp"
#include "oplift/matrix_kernel.hpp"

namespace oplift {

using Exponent = std::vector<int>;

inline int total_degree(const Exponent& e) {
  int d = 0;
  for (int k : e) d += k;
  return d;
}

inline double monomial_value(const Exponent& e, const RVec& x) {
  double v = 1.0;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (int k = 0; k < e[i]; ++k) v *= x(static_cast<Eigen::Index>(i));
  return v;
}

inline std::string monomial_string(const Exponent& e) {
  std::ostringstream os;
  bool first = true;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (e[i] == 0) continue;
    if (!first) os << "*";
    os << "x" << i;
    if (e[i] > 1) os << "^" << e[i];
    first = false;
  }
  return first ? "1" : os.str();
}

/// All exponents in n variables of total degree exactly k, lexicographically descending.
inline std::vector<Exponent> monomials_of_degree(int n, int k) {
  std::vector<Exponent> out;
  Exponent e(static_cast<std::size_t>(n), 0);
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == n - 1) {
      e[i] = left;
      out.push_back(e);
      return;
    }
    for (int v = left; v >= 0; --v) {
      e[i] = v;
      rec(i + 1, left - v);
    }
  };
  if (n == 0) {
    if (k == 0) out.push_back(e);
    return out;
  }
  rec(0, k);
  return out;
}

inline std::vector<Exponent> monomials_up_to(int n, int k) {
  std::vector<Exponent> out;
  for (int d = 0; d <= k; ++d) {
    auto m = monomials_of_degree(n, d);
    out.insert(out.end(), m.begin(), m.end());
  }
  return out;
}

class HermMatrixPoly {
 public:
  HermMatrixPoly(int n_vars, int t) : n_(n_vars), t_(t) {
    if (n_vars < 0 || t < 1) throw InputError("HermMatrixPoly: need n_vars >= 0 and t >= 1");
  }

  static HermMatrixPoly constant(int n_vars, const HermMatrix& c) {
    HermMatrixPoly p(n_vars, c.dim());
    p.add(Exponent(static_cast<std::size_t>(n_vars), 0), c);
    return p;
  }

  /// Adds c * x^e, merging with an existing term.
  HermMatrixPoly& add(const Exponent& e, const HermMatrix& c) {
    if (static_cast<int>(e.size()) != n_) throw ShapeError("HermMatrixPoly: exponent length differs from n_vars");
    for (int k : e)
      if (k < 0) throw InputError("HermMatrixPoly: negative exponent");
    if (c.dim() != t_) throw ShapeError("HermMatrixPoly: coefficient has the wrong size");
    auto it = terms_.find(e);
    if (it == terms_.end()) {
      terms_.emplace(e, c);
    } else {
      it->second += c;
    }
    return *this;
  }

  int n_vars() const { return n_; }
  int size() const { return t_; }
  const std::map<Exponent, HermMatrix>& terms() const { return terms_; }

  HermMatrix coeff(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? HermMatrix::zero(t_) : it->second;
  }

  /// Support: exponents with a nonzero coefficient.
  std::vector<Exponent> support(double tol = 0.0) const {
    std::vector<Exponent> out;
    for (const auto& [e, c] : terms_)
      if (c.norm() > tol) out.push_back(e);
    return out;
  }

  int degree() const {
    int d = -1;
    for (const auto& e : support()) d = std::max(d, total_degree(e));
    return d;
  }

  bool is_homogeneous() const {
    const auto s = support();
    if (s.empty()) return true;
    const int d = total_degree(s[0]);
    for (const auto& e : s)
      if (total_degree(e) != d) return false;
    return true;
  }

  bool is_real() const {
    for (const auto& [e, c] : terms_)
      if (c.mat().imag().norm() != 0.0) return false;
    return true;
  }

  double norm() const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) s += c.norm() * c.norm();
    return std::sqrt(s);
  }

  HermMatrixPoly operator-(const HermMatrixPoly& o) const {
    if (o.n_ != n_ || o.t_ != t_) throw ShapeError("HermMatrixPoly: shape mismatch");
    HermMatrixPoly out = *this;
    for (const auto& [e, c] : o.terms_) out.add(e, -c);
    return out;
  }

 private:
  int n_;
  int t_;
  std::map<Exponent, HermMatrix> terms_;
};

inline HermMatrix eval_poly(const HermMatrixPoly& h, const RVec& x) {
  if (x.size() != h.n_vars()) throw ShapeError("eval_poly: point has the wrong length");
  CMat acc = CMat::Zero(h.size(), h.size());
  for (const auto& [e, c] : h.terms()) acc += monomial_value(e, x) * c.mat();
  return HermMatrix::from_trusted(acc);
}

/// The 3x3 quadratic matrix polynomial in (x, y, z) whose compression is
/// Choi's biquadratic form.
inline HermMatrixPoly choi_example() {
  HermMatrixPoly h(3, 3);
  auto sym = [](int i, int j, double v) {
    CMat m = CMat::Zero(3, 3);
    m(i, j) += v;
    if (i != j) m(j, i) += v;
    return HermMatrix::from_trusted(m);
  };
  const Exponent xx{2, 0, 0}, yy{0, 2, 0}, zz{0, 0, 2}, xy{1, 1, 0}, xz{1, 0, 1}, yz{0, 1, 1};
  h.add(zz, sym(0, 0, 2)).add(xx, sym(0, 0, 1));
  h.add(xy, sym(0, 1, -1)).add(xz, sym(0, 2, -1));
  h.add(xx, sym(1, 1, 2)).add(yy, sym(1, 1, 1));
  h.add(yz, sym(1, 2, -1));
  h.add(zz, sym(2, 2, 1)).add(yy, sym(2, 2, 2));
  return h;
}

/// v* H(x) v as a scalar polynomial in (x, v). Real H uses t auxiliary
/// variables; complex H uses 2t (real and imaginary parts of v).
inline HermMatrixPoly scalar_compress(const HermMatrixPoly& h) {
  const int n = h.n_vars(), t = h.size();
  if (t == 1) return h;
  const bool real = h.is_real();
  const int aux = real ? t : 2 * t;
  HermMatrixPoly out(n + aux, 1);
  for (const auto& [e, c] : h.terms()) {
    const RMat q = real ? RMat(c.mat().real()) : realify(c);
    for (int i = 0; i < aux; ++i) {
      for (int j = 0; j < aux; ++j) {
        if (q(i, j) == 0.0) continue;
        Exponent f(e);
        f.resize(static_cast<std::size_t>(n + aux), 0);
        f[n + i] += 1;
        f[n + j] += 1;
        out.add(f, HermMatrix::identity(1) * q(i, j));
      }
    }
  }
  return out;
}

struct PositivitySample {
  double min_observed = 0.0;
  RVec argmin;
  int samples = 0;
};

/// Smallest eigenvalue of H over random points on the sphere of the given radius.
inline PositivitySample positivity_sample(const HermMatrixPoly& h, int n_samples, double radius = 1.0,
                                          unsigned seed = 0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  PositivitySample out;
  out.min_observed = std::numeric_limits<double>::infinity();
  const int n = h.n_vars();
  for (int k = 0; k < std::max(1, n_samples); ++k) {
    RVec x(n);
    for (int i = 0; i < n; ++i) x(i) = nd(rng);
    if (n > 0 && x.norm() > 0) x *= radius / x.norm();
    const double v = min_eig(eval_poly(h, x));
    if (v < out.min_observed) {
      out.min_observed = v;
      out.argmin = x;
    }
    ++out.samples;
  }
  return out;
}

/// H_u(x) = H(x - u).
inline HermMatrixPoly translate(const HermMatrixPoly& h, const RVec& u) {
  const int n = h.n_vars();
  if (u.size() != n) throw ShapeError("translate: shift has the wrong length");
  HermMatrixPoly out(n, h.size());
  auto binom = [](int a, int b) {
    double r = 1.0;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  for (const auto& [e, c] : h.terms()) {
    // Expand prod_i (x_i - u_i)^{e_i}.
    std::vector<std::pair<Exponent, double>> acc{{Exponent(static_cast<std::size_t>(n), 0), 1.0}};
    for (int i = 0; i < n; ++i) {
      std::vector<std::pair<Exponent, double>> next;
      for (const auto& [f, w] : acc) {
        for (int k = 0; k <= e[i]; ++k) {
          Exponent g = f;
          g[i] = k;
          next.emplace_back(g, w * binom(e[i], k) * std::pow(-u(i), e[i] - k));
        }
      }
      acc = std::move(next);
    }
    for (const auto& [f, w] : acc)
      if (w != 0.0) out.add(f, c * w);
  }
  return out;
}

/// Rectangular complex matrix polynomial, used for certificate factors.
struct MatrixPoly {
  int n_vars = 0;
  int rows = 0;
  int cols = 0;
  std::map<Exponent, CMat> terms;

  CMat eval(const RVec& x) const {
    CMat acc = CMat::Zero(rows, cols);
    for (const auto& [e, c] : terms) acc += monomial_value(e, x) * c;
    return acc;
  }
};

enum class SosStatus { Certified, NotSos, Inconclusive };

inline const char* to_string(SosStatus s) {
  switch (s) {
    case SosStatus::Certified: return "sos";
    case SosStatus::NotSos: return "not_sos";
    default: return "inconclusive";
  }
}

struct SosResult {
  SosStatus status = SosStatus::Inconclusive;
  double lambda = 0.0;  // optimal min-eigenvalue of the Gram matrix
  std::vector<Exponent> basis;
  std::optional<HermMatrix> gram;  // PSD, size basis.size() * t
  std::vector<MatrixPoly> factors;  // H = sum_k P_k^* P_k, each P_k of shape 1 x t
  double reassembly_error = 0.0;
  double gram_min_eig = 0.0;
  // Dual witness: Hermitian values L(x^g) with a PSD moment matrix and
  // sum_g tr(L(x^g) H_g) < 0.
  std::vector<std::pair<Exponent, HermMatrix>> witness;
  double witness_value = 0.0;  // normalized pairing with H
  double witness_min_eig = 0.0;
  bool structural = false;
  std::string offending;
  std::string message;
};

inline std::vector<Exponent> default_sos_basis(const HermMatrixPoly& h) {
  const int deg = h.degree();
  if (deg <= 0) return {Exponent(static_cast<std::size_t>(h.n_vars()), 0)};
  if (h.is_homogeneous() && deg % 2 == 0) return monomials_of_degree(h.n_vars(), deg / 2);
  return monomials_up_to(h.n_vars(), (deg + 1) / 2);
}

namespace detail {

inline Exponent add_exp(const Exponent& a, const Exponent& b) {
  Exponent c(a);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

// E[x^g] for a standard Gaussian vector.
inline double gaussian_moment(const Exponent& g) {
  double v = 1.0;
  for (int k : g) {
    if (k % 2) return 0.0;
    for (int j = k - 1; j > 0; j -= 2) v *= j;
  }
  return v;
}

}  // namespace detail

/// Searches for a PSD Gram matrix G with H = (m(x) (x) I)^* G (m(x) (x) I),
/// maximizing its smallest eigenvalue.
inline SosResult sos_certify(const HermMatrixPoly& h, std::vector<Exponent> basis = {}, double tol = 1e-8) {
  SosResult out;
  const int t = h.size();
  if (basis.empty()) basis = default_sos_basis(h);
  for (const auto& b : basis)
    if (static_cast<int>(b.size()) != h.n_vars()) throw ShapeError("sos_certify: basis exponent has the wrong length");
  out.basis = basis;
  const int nb = static_cast<int>(basis.size());
  const double hscale = 1.0 + h.norm();

  std::map<Exponent, std::vector<std::pair<int, int>>> reach;
  for (int a = 0; a < nb; ++a)
    for (int b = 0; b < nb; ++b) reach[detail::add_exp(basis[a], basis[b])].emplace_back(a, b);
  for (const auto& e : h.support(1e-14 * hscale)) {
    if (!reach.count(e)) {
      out.status = SosStatus::NotSos;
      out.structural = true;
      out.offending = monomial_string(e);
      out.message = "monomial " + out.offending + " is not a product of two basis monomials";
      return out;
    }
  }

  lmi::Program prog;
  prog.add_var(nb * t);
  std::vector<Exponent> order;
  for (const auto& [g, pairs] : reach) {
    order.push_back(g);
    prog.add_equality(
        [pairs = pairs, t](const lmi::Vars& v) {
          CMat acc = CMat::Zero(t, t);
          for (const auto& [a, b] : pairs) acc += v[0].mat().block(a * t, b * t, t, t);
          return HermMatrix::from_trusted((acc + acc.adjoint()) * 0.5);
        },
        h.coeff(g));
  }
  prog.add_psd([](const lmi::Vars& v) { return v[0]; });
  const auto res = lmi::maximize_min_eig(prog);
  out.message = res.message;
  if (!res.equalities_consistent) {
    out.status = SosStatus::NotSos;
    out.structural = true;
    out.message = "coefficient matching system is inconsistent";
    return out;
  }
  if (!res.solved()) return out;
  out.lambda = res.lambda_unbounded ? std::numeric_limits<double>::infinity() : res.lambda;

  if (res.lambda >= -tol) {
    const HermMatrix g = res.values[0];
    Eigen::SelfAdjointEigenSolver<CMat> es(g.mat());
    RVec ev = es.eigenvalues().cwiseMax(0.0);
    const double cut = 1e-9 * std::max(1.0, ev.maxCoeff());
    for (Eigen::Index k = 0; k < ev.size(); ++k)
      if (ev(k) <= cut) ev(k) = 0.0;
    const CMat u = es.eigenvectors();
    const HermMatrix gp = HermMatrix::from_trusted(u * ev.cast<cplx>().asDiagonal() * u.adjoint());
    double err = 0.0;
    for (const auto& [e, pairs] : reach) {
      CMat acc = CMat::Zero(t, t);
      for (const auto& [a, b] : pairs) acc += gp.mat().block(a * t, b * t, t, t);
      err = std::max(err, (acc - h.coeff(e).mat()).norm());
    }
    out.reassembly_error = err;
    out.gram_min_eig = min_eig(gp);
    if (err > 1e-7 * hscale) {
      out.message = "Gram matrix does not reassemble the polynomial after PSD projection";
      return out;
    }
    out.gram = gp;
    for (Eigen::Index k = ev.size() - 1; k >= 0; --k) {
      if (ev(k) == 0.0) continue;
      const CVec w = u.col(k) * std::sqrt(ev(k));
      MatrixPoly f{h.n_vars(), 1, t, {}};
      for (int a = 0; a < nb; ++a) f.terms[basis[a]] = w.segment(a * t, t).adjoint();
      out.factors.push_back(std::move(f));
    }
    out.status = SosStatus::Certified;
    return out;
  }

  // Moment matrix from the equality multipliers, shifted by a Gaussian moment
  // matrix until it is PSD; the pairing with H is then recomputed.
  std::map<Exponent, HermMatrix> mval;
  for (std::size_t q = 0; q < order.size(); ++q) mval.emplace(order[q], res.multipliers[q]);
  CMat mom(nb * t, nb * t), gauss(nb * t, nb * t);
  for (int a = 0; a < nb; ++a) {
    for (int b = 0; b < nb; ++b) {
      const Exponent g = detail::add_exp(basis[a], basis[b]);
      mom.block(a * t, b * t, t, t) = mval.at(g).mat();
      gauss.block(a * t, b * t, t, t) = detail::gaussian_moment(g) * CMat::Identity(t, t);
    }
  }
  const double mu = std::max(0.0, -min_eig(HermMatrix::from_trusted((mom + mom.adjoint()) * 0.5)));
  const double nu = min_eig(HermMatrix::from_trusted(gauss));
  const double shift = nu > 0 ? mu / nu * (1.0 + 1e-9) : 0.0;
  double value = 0.0, norm = 0.0;
  for (auto& [g, m] : mval) {
    m = m + HermMatrix::identity(t) * (shift * detail::gaussian_moment(g));
    value += m.inner(h.coeff(g));
    norm += m.norm() * m.norm();
    out.witness.emplace_back(g, m);
  }
  norm = std::sqrt(norm);
  for (int a = 0; a < nb; ++a)
    for (int b = 0; b < nb; ++b) mom.block(a * t, b * t, t, t) = mval.at(detail::add_exp(basis[a], basis[b])).mat();
  out.witness_min_eig = min_eig(HermMatrix::from_trusted((mom + mom.adjoint()) * 0.5));
  out.witness_value = norm > 0 ? value / norm : 0.0;
  if (nu > 0 && res.lambda <= -1e3 * tol && out.witness_value < -1e3 * tol && out.witness_min_eig >= -1e-12 * norm) {
    out.status = SosStatus::NotSos;
    out.message = "dual moment witness separates the polynomial from the sums of squares";
  } else {
    out.witness.clear();
    out.message = "negative Gram margin without a certified dual witness";
  }
  return out;
}

/// Relative least-squares residual of H in span_{Her_t}(q_1, ..., q_m).
inline double span_residual(const HermMatrixPoly& h, const std::vector<HermMatrixPoly>& qs) {
  std::map<Exponent, int> rows;
  for (const auto& [e, c] : h.terms()) rows.emplace(e, 0);
  for (const auto& q : qs) {
    if (q.size() != 1 || q.n_vars() != h.n_vars()) throw ShapeError("span_residual: q must be scalar in the same variables");
    for (const auto& [e, c] : q.terms()) rows.emplace(e, 0);
  }
  int r = 0;
  for (auto& [e, idx] : rows) idx = r++;
  const int t = h.size();
  RMat qm = RMat::Zero(r, static_cast<Eigen::Index>(qs.size()));
  for (std::size_t i = 0; i < qs.size(); ++i)
    for (const auto& [e, c] : qs[i].terms()) qm(rows.at(e), static_cast<Eigen::Index>(i)) = c(0, 0).real();
  RMat hm = RMat::Zero(r, t * t);
  for (const auto& [e, c] : h.terms()) hm.row(rows.at(e)) = herm_coords(c).transpose();
  if (qs.empty()) return hm.norm() / (1.0 + hm.norm());
  Eigen::CompleteOrthogonalDecomposition<RMat> cod(qm);
  const RMat x = cod.solve(hm);
  return (qm * x - hm).norm() / (1.0 + hm.norm());
}

struct ObstructionReport {
  bool in_span = false;
  double span_residual = 0.0;
  bool homogeneous = false;
  bool translates_in_span = false;
  std::optional<RVec> failing_translate;
  double worst_translate_residual = 0.0;
  SosStatus sos_status = SosStatus::Inconclusive;
  bool not_sos = false;
  bool all_hold = false;
};

/// Checks the hypotheses of the non-SOS obstruction for H against V_t = span(q_i):
/// H in V_t, H homogeneous, translates H(x - u) in V_t, and H not a sum of squares.
inline ObstructionReport obstruction_hypothesis_check(const HermMatrixPoly& h, const std::vector<HermMatrixPoly>& qs,
                                                      const std::vector<RVec>& u_samples, double tol = 1e-9) {
  ObstructionReport out;
  out.span_residual = span_residual(h, qs);
  out.in_span = out.span_residual <= tol;
  out.homogeneous = h.is_homogeneous();
  out.translates_in_span = true;
  for (const auto& u : u_samples) {
    const double res = span_residual(translate(h, u), qs);
    out.worst_translate_residual = std::max(out.worst_translate_residual, res);
    if (res > tol && out.translates_in_span) {
      out.translates_in_span = false;
      out.failing_translate = u;
    }
  }
  out.sos_status = sos_certify(h).status;
  out.not_sos = out.sos_status == SosStatus::NotSos;
  out.all_hold = out.in_span && out.homogeneous && out.translates_in_span && out.not_sos;
  return out;
}

/// Factor values P_k(c_j) (shape d' x t) for each generator c_j, per dual generator.
using SosFactorRule = std::function<std::vector<std::vector<CMat>>(const CPMap&)>;
using BasisFunction = std::function<cplx(const RVec&)>;

/// alpha(c) = f(c)^* f(c) and beta(phi) = sum_{k,r} V_kr^* X V_kr, where the
/// columns of V_kr are the coefficients of row r of P_k in the basis f.
inline Factorization factorization_from_sos(const PolyhedralCone& c, const std::vector<BasisFunction>& f,
                                            const SosFactorRule& rule, double tol = 1e-9) {
  const int d = static_cast<int>(f.size());
  const int m = c.size();
  if (d == 0) throw InputError("factorization_from_sos: empty function basis");
  CMat fm(m, d);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < d; ++i) fm(j, i) = f[i](c.generator(j));
  Factorization out{c, OperatorSystem::psd(d), {}, {}, std::nullopt};
  for (int j = 0; j < m; ++j) {
    const CMat row = fm.row(j);
    out.alpha.push_back(herm_coords(HermMatrix::from_trusted(row.adjoint() * row)));
  }
  out.beta = [fm, d, m, rule, tol](const CPMap& phi) {
    const auto factors = rule(phi);
    const int t = phi.t();
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(fm);
    std::vector<CMat> kraus;
    for (std::size_t k = 0; k < factors.size(); ++k) {
      if (static_cast<int>(factors[k].size()) != m)
        throw IncompleteFactorization("factorization_from_sos: factor " + std::to_string(k) + " misses generator values");
      const int rows = static_cast<int>(factors[k][0].rows());
      for (int r = 0; r < rows; ++r) {
        CMat y(m, t);
        for (int j = 0; j < m; ++j) {
          if (factors[k][j].rows() != rows || factors[k][j].cols() != t)
            throw ShapeError("factorization_from_sos: factor values have inconsistent shapes");
          y.row(j) = factors[k][j].row(r);
        }
        const CMat v = cod.solve(y);
        if ((fm * v - y).norm() > tol * (1.0 + y.norm()))
          throw ConstructionError("factorization_from_sos: entries of factor " + std::to_string(k) +
                                  " are not in the span of the basis functions");
        kraus.push_back(v);
      }
    }
    TargetMap out;
    for (const auto& x : herm_basis(d)) {
      CMat acc = CMat::Zero(t, t);
      for (const auto& v : kraus) acc += v.adjoint() * x.mat() * v;
      out.push_back(HermMatrix::from_trusted((acc + acc.adjoint()) * 0.5));
    }
    return out;
  };
  return out;
}

inline LiftData lift_from_sos(const PolyhedralCone& c, const std::vector<BasisFunction>& f, const SosFactorRule& rule,
                              int t_max = 2, double tol = 1e-8) {
  return lift_from_factorization(c, factorization_from_sos(c, f, rule), t_max, tol);
}

struct SosFromLift {
  std::vector<std::vector<CMat>> factors;  // per sample point: P_k(c) = Q V_k, shape d x t
  std::vector<double> deviations;          // ||phi(c) - sum_k P_k^* P_k||_F
  double max_dev = 0.0;
  bool ok = false;
};

/// Pointwise sums of squares phi(c) = sum_k (Q V_k)^* (Q V_k) from a proper
/// lift, with Q the square root of gamma at the selected fiber point.
inline SosFromLift sos_from_lift(const LiftData& l, const CPMap& phi, const std::vector<RVec>& points,
                                 double tol = 1e-7) {
  const auto pencil = detail::as_pencil(*l.target);
  if (!pencil) throw CapabilityError("sos_from_lift: target must be a free spectrahedron");
  const auto g = detail::compose_pencil(*pencil, l.gamma.m);
  std::vector<HermMatrix> vals;
  for (int k = 0; k < l.zdim(); ++k) vals.push_back(phi(RVec(l.pi.m.col(k))));
  const auto ext = cp_extend(g, vals);
  if (ext.status != ExtendStatus::Extended || !ext.map)
    throw ConstructionError("sos_from_lift: no completely positive extension (properness violation)");
  const auto kraus = choi_kraus(*ext.map);
  const auto sys = l.system();
  const int d = g[0].dim();
  SosFromLift out;
  for (const auto& c : points) {
    RVec z = RVec::Zero(l.zdim());
    if (c.norm() > 0) {
      const auto r = membership(*sys, MatrixElement::from_vector(c));
      if (r.verdict != Verdict::Member || !r.fiber) throw ConstructionError("sos_from_lift: point is not in the cone");
      z = r.fiber->vector();
    }
    CMat gam = CMat::Zero(d, d);
    for (int k = 0; k < l.zdim(); ++k) gam += z(k) * g[k].mat();
    const HermMatrix gz = HermMatrix::from_trusted(gam);
    const HermMatrix q = psd_sqrt(gz, 1e-6 * (1.0 + gz.norm()));
    std::vector<CMat> pk;
    CMat acc = CMat::Zero(phi.t(), phi.t());
    for (const auto& v : kraus.ops) {
      pk.push_back(q.mat() * v);
      acc += pk.back().adjoint() * pk.back();
    }
    const double dev = (phi(c).mat() - acc).norm();
    out.deviations.push_back(dev);
    out.max_dev = std::max(out.max_dev, dev);
    out.factors.push_back(std::move(pk));
  }
  out.ok = out.max_dev <= tol;
  return out;
}

}  // namespace oplift
