#pragma once

// JSON encodings of the toolkit's objects. Every top-level document carries
// a "schema_version" field.

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

#include "oplift/cones.hpp"
#include "oplift/cpmaps.hpp"
#include "oplift/errors.hpp"
#include "oplift/lift.hpp"
#include "oplift/opsys.hpp"
#include "oplift/slack.hpp"
#include "oplift/sos.hpp"

namespace oplift::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline void check_version(const json& j) {
  if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion)
    throw InputError("unsupported schema_version " + j.at("schema_version").dump());
}

inline const json& need(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

// Real and complex matrices.

inline json to_json(const RVec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline RVec vec_from(const json& j) {
  if (!j.is_array()) throw InputError("expected an array of numbers");
  RVec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

inline json to_json(const RMat& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(RVec(m.row(i).transpose())));
  return a;
}

inline RMat mat_from(const json& j, Eigen::Index cols_if_empty = 0) {
  if (!j.is_array()) throw InputError("expected a matrix (array of rows)");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : cols_if_empty;
  RMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const RVec r = vec_from(j[static_cast<std::size_t>(i)]);
    if (r.size() != cols) throw InputError("matrix rows have different lengths");
    m.row(i) = r.transpose();
  }
  return m;
}

inline json to_json(const CMat& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"re", to_json(RMat(m.real()))}, {"im", to_json(RMat(m.imag()))}};
}

inline CMat cmat_from(const json& j) {
  const RMat re = mat_from(need(j, "re"));
  RMat im = RMat::Zero(re.rows(), re.cols());
  if (j.contains("im")) im = mat_from(j.at("im"));
  if (im.rows() != re.rows() || im.cols() != re.cols()) throw InputError("re and im parts differ in shape");
  CMat m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return m;
}

inline json to_json(const HermMatrix& h) {
  return {{"dim", h.dim()}, {"re", to_json(RMat(h.mat().real()))}, {"im", to_json(RMat(h.mat().imag()))}};
}

inline HermMatrix herm_from(const json& j) {
  if (j.is_number()) return HermMatrix::identity(1) * j.get<double>();
  const int d = need(j, "dim").get<int>();
  const RMat re = mat_from(need(j, "re"), d);
  RMat im = RMat::Zero(d, d);
  if (j.contains("im")) im = mat_from(j.at("im"), d);
  if (re.rows() != d || re.cols() != d || im.rows() != d || im.cols() != d)
    throw ShapeError("Hermitian matrix entries do not match \"dim\"");
  CMat m(d, d);
  m.real() = re;
  m.imag() = im;
  return HermMatrix(m);
}

inline json to_json(const std::vector<HermMatrix>& v) {
  json a = json::array();
  for (const auto& h : v) a.push_back(to_json(h));
  return a;
}

inline std::vector<HermMatrix> herm_list_from(const json& j) {
  if (!j.is_array()) throw InputError("expected an array of Hermitian matrices");
  std::vector<HermMatrix> out;
  for (const auto& e : j) out.push_back(herm_from(e));
  return out;
}

// Cones, elements, systems.

inline json to_json(const PolyhedralCone& c) {
  json g = json::array();
  for (const auto& v : c.generators()) g.push_back(to_json(v));
  return {{"n", c.dim()}, {"generators", g}};
}

inline PolyhedralCone cone_from(const json& j) {
  std::vector<RVec> gens;
  for (const auto& g : need(j, "generators")) gens.push_back(vec_from(g));
  return PolyhedralCone(need(j, "n").get<int>(), std::move(gens));
}

inline json to_json(const MatrixElement& a) {
  return {{"n", a.ambient()}, {"s", a.level()}, {"coeffs", to_json(a.coeffs())}};
}

/// {"vector": [...]} for level 1, or {"coeffs": [HermMatrix, ...]}.
inline MatrixElement element_from(const json& j) {
  if (j.is_array()) return MatrixElement::from_vector(vec_from(j));
  if (j.contains("vector")) return MatrixElement::from_vector(vec_from(j.at("vector")));
  return MatrixElement(herm_list_from(need(j, "coeffs")));
}

inline SystemPtr system_from(const json& j) {
  const std::string kind = need(j, "kind").get<std::string>();
  if (kind == "minimal") return OperatorSystem::minimal(cone_from(need(j, "cone")));
  if (kind == "psd") return OperatorSystem::psd(need(j, "d").get<int>());
  if (kind == "free_spectrahedron") return OperatorSystem::free_spectrahedron(herm_list_from(need(j, "pencil")));
  if (kind == "inverse_image")
    return OperatorSystem::inverse_image(LinearMap(mat_from(need(j, "psi"))), system_from(need(j, "target")));
  if (kind == "lifted")
    return OperatorSystem::lifted(LinearMap(mat_from(need(j, "pi"))), LinearMap(mat_from(need(j, "gamma"))),
                                  system_from(need(j, "target")));
  throw InputError("unknown system kind \"" + kind + "\"");
}

inline json to_json(const OperatorSystem& s) {
  return std::visit(
      [](const auto& v) -> json {
        using V = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<V, MinimalSystem>) {
          return {{"kind", "minimal"}, {"cone", to_json(v.cone)}};
        } else if constexpr (std::is_same_v<V, FreeSpectrahedron>) {
          return {{"kind", "free_spectrahedron"}, {"pencil", to_json(v.a)}};
        } else if constexpr (std::is_same_v<V, InverseImageSystem>) {
          return {{"kind", "inverse_image"}, {"psi", to_json(v.psi.m)}, {"target", to_json(*v.target)}};
        } else {
          return {{"kind", "lifted"}, {"pi", to_json(v.pi.m)}, {"gamma", to_json(v.gamma.m)}, {"target", to_json(*v.target)}};
        }
      },
      s.variant());
}

inline json to_json(const CPMap& phi) {
  switch (phi.kind()) {
    case SourceKind::Cone:
      return {{"source", "cone"}, {"cone", to_json(*phi.cone())}, {"values", to_json(phi.values())}};
    case SourceKind::MatrixAlgebra:
      return {{"source", "matrix_algebra"}, {"d", phi.d()}, {"values", to_json(phi.values())}};
    default:
      return {{"source", "subspace"}, {"span", to_json(phi.span())}, {"values", to_json(phi.values())}};
  }
}

inline CPMap cpmap_from(const json& j, const PolyhedralCone* default_cone = nullptr) {
  const std::string src = j.value("source", "cone");
  auto vals = herm_list_from(need(j, "values"));
  if (src == "cone") {
    if (j.contains("cone")) return CPMap::on_cone(cone_from(j.at("cone")), std::move(vals), 1e-7);
    if (!default_cone) throw InputError("cone map without a \"cone\" field");
    return CPMap::on_cone(*default_cone, std::move(vals), 1e-7);
  }
  if (src == "matrix_algebra") return CPMap::on_matrix_algebra(need(j, "d").get<int>(), std::move(vals));
  if (src == "subspace") return CPMap::on_subspace(herm_list_from(need(j, "span")), std::move(vals), 1e-7);
  throw InputError("unknown map source \"" + src + "\"");
}

// Factorizations.

struct FactorizationDoc {
  Factorization f;
  std::vector<CPMap> duals;  // from the file; empty when beta is a named rule
  std::string beta_rule;     // "table", "simplex" or "polyhedral"
};

/// Beta looked up by matching phi's generator values against a table.
inline BetaRule table_beta(std::vector<CPMap> duals, std::vector<TargetMap> values) {
  return [duals = std::move(duals), values = std::move(values)](const CPMap& phi) -> TargetMap {
    for (std::size_t q = 0; q < duals.size(); ++q) {
      const auto& a = duals[q].values();
      const auto& b = phi.values();
      if (a.size() != b.size() || duals[q].t() != phi.t()) continue;
      double dev = 0.0, scale = 1.0;
      for (std::size_t j = 0; j < a.size(); ++j) {
        dev = std::max(dev, (a[j] - b[j]).norm());
        scale = std::max(scale, a[j].norm());
      }
      if (dev <= 1e-9 * scale) return values[q];
    }
    return {};
  };
}

inline FactorizationDoc factorization_from_json(const json& j) {
  check_version(j);
  FactorizationDoc doc;
  const PolyhedralCone c = cone_from(need(j, "source"));
  doc.beta_rule = j.value("beta_rule", "table");
  if (doc.beta_rule == "simplex") {
    if (c.size() != c.dim()) throw InputError("simplex beta rule needs a simplicial cone");
    doc.f = simplex_factorization(c.dim());
    doc.f.source = c;
  } else if (doc.beta_rule == "polyhedral") {
    doc.f = polyhedral_factorization(c);
  } else if (doc.beta_rule == "table") {
    doc.f.source = c;
    doc.f.target = system_from(need(j, "target"));
    std::vector<TargetMap> beta;
    for (const auto& d : need(j, "duals")) doc.duals.push_back(cpmap_from(d, &c));
    for (const auto& b : need(j, "beta")) beta.push_back(herm_list_from(b));
    if (beta.size() != doc.duals.size()) throw IncompleteFactorization("beta table and dual list differ in length");
    doc.f.beta = table_beta(doc.duals, std::move(beta));
  } else {
    throw InputError("unknown beta_rule \"" + doc.beta_rule + "\"");
  }
  if (j.contains("target") && doc.beta_rule != "table") doc.f.target = system_from(j.at("target"));
  if (j.contains("alpha")) {
    doc.f.alpha.clear();
    for (const auto& a : j.at("alpha")) doc.f.alpha.push_back(vec_from(a));
  }
  if (j.contains("linear_alpha")) doc.f.linear_alpha = LinearMap(mat_from(j.at("linear_alpha")));
  else if (doc.beta_rule == "polyhedral" || j.contains("alpha")) doc.f.linear_alpha.reset();
  return doc;
}

/// Writes alpha, psi and the beta table on the given dual generators.
inline json factorization_to_json(const Factorization& f, const std::vector<CPMap>& duals) {
  json alpha = json::array(), ds = json::array(), beta = json::array();
  for (const auto& a : f.alpha) alpha.push_back(to_json(a));
  for (const auto& phi : duals) {
    ds.push_back({{"values", to_json(phi.values())}});
    beta.push_back(to_json(f.beta(phi)));
  }
  json j = {{"schema_version", kSchemaVersion}, {"source", to_json(f.source)}, {"target", to_json(*f.target)},
            {"alpha", alpha}, {"beta_rule", "table"}, {"duals", ds}, {"beta", beta}};
  if (f.linear_alpha) j["linear_alpha"] = to_json(f.linear_alpha->m);
  return j;
}

// Lifts.

inline json lift_to_json(const LiftData& l, const PolyhedralCone& c) {
  json z = json::array();
  for (int k = 0; k < l.zdim(); ++k) z.push_back(to_json(RVec(l.z_basis.col(k))));
  json dims = json::array();
  for (int d : l.dim_by_level) dims.push_back(d);
  return {{"schema_version", kSchemaVersion}, {"cone", to_json(c)}, {"Z_basis", z}, {"pi", to_json(l.pi.m)},
          {"gamma", to_json(l.gamma.m)}, {"target", to_json(*l.target)}, {"stable_level", l.stable_level},
          {"dim_by_level", dims}};
}

inline std::pair<LiftData, PolyhedralCone> lift_from_json(const json& j) {
  check_version(j);
  LiftData l;
  const PolyhedralCone c = cone_from(need(j, "cone"));
  l.pi = LinearMap(mat_from(need(j, "pi")));
  l.gamma = LinearMap(mat_from(need(j, "gamma")));
  l.target = system_from(need(j, "target"));
  if (l.pi.domain() != l.gamma.domain()) throw ShapeError("pi and gamma have different domains");
  if (l.gamma.codomain() != l.target->ambient()) throw ShapeError("gamma codomain differs from the target");
  if (l.pi.codomain() != c.dim()) throw ShapeError("pi codomain differs from the cone");
  l.z_basis = RMat(l.pi.codomain() + l.gamma.codomain(), l.pi.domain());
  l.z_basis << l.pi.m, l.gamma.m;
  return {l, c};
}

// Polynomials and certificates.

inline json to_json(const Exponent& e) { return json(e); }

inline HermMatrixPoly poly_from(const json& j) {
  check_version(j);
  HermMatrixPoly h(need(j, "n").get<int>(), need(j, "t").get<int>());
  for (const auto& term : need(j, "terms")) h.add(need(term, "exp").get<Exponent>(), herm_from(need(term, "coeff")));
  return h;
}

inline json to_json(const HermMatrixPoly& h) {
  json terms = json::array();
  for (const auto& [e, c] : h.terms()) terms.push_back({{"exp", e}, {"coeff", to_json(c)}});
  return {{"schema_version", kSchemaVersion}, {"n", h.n_vars()}, {"t", h.size()}, {"terms", terms}};
}

inline json to_json(const SosResult& r) {
  json basis = json::array();
  for (const auto& b : r.basis) basis.push_back(b);
  json j = {{"status", to_string(r.status)}, {"lambda", r.lambda}, {"basis", basis}, {"message", r.message}};
  if (r.status == SosStatus::Certified) {
    j["gram"] = to_json(*r.gram);
    j["reassembly_error"] = r.reassembly_error;
    json factors = json::array();
    for (const auto& f : r.factors) {
      json terms = json::array();
      for (const auto& [e, c] : f.terms) terms.push_back({{"exp", e}, {"coeff", to_json(c)}});
      factors.push_back({{"rows", f.rows}, {"cols", f.cols}, {"terms", terms}});
    }
    j["factors"] = factors;
  }
  if (r.status == SosStatus::NotSos) {
    j["structural"] = r.structural;
    if (r.structural) j["offending_monomial"] = r.offending;
    json w = json::array();
    for (const auto& [e, m] : r.witness) w.push_back({{"exp", e}, {"coeff", to_json(m)}});
    j["witness"] = w;
    j["witness_value"] = r.witness_value;
    j["witness_min_eig"] = r.witness_min_eig;
  }
  return j;
}

}  // namespace oplift::io
