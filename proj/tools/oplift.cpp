// oplift command-line interface: JSON in, JSON report on stdout, summary on stderr.
//
// Exit codes: 0 verified, 2 negative verdict, 3 inconclusive, 64 usage, 65 data error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "oplift/json_io.hpp"
#include "oplift/lift.hpp"
#include "oplift/slack.hpp"
#include "oplift/sos.hpp"

namespace {

using namespace oplift;
using io::json;

constexpr int kOk = 0, kNegative = 2, kInconclusive = 3, kUsage = 64, kData = 65;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
  std::string text;
  if (path == "-") {
    text.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open " + path);
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError("malformed JSON in " + path + ": " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path);
  out << j.dump(2) << "\n";
}

json report(const std::string& command, const std::string& status) {
  return {{"schema_version", io::kSchemaVersion}, {"command", command}, {"status", status}};
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int emit(const json& r, int code, const std::string& summary) {
  std::cout << r.dump(2) << std::endl;
  std::cerr << summary << std::endl;
  return code;
}

double default_tol(std::optional<double> flag, double fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("OPLIFT_TOL")) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0)) throw UsageError("OPLIFT_TOL must be a positive number");
    return v;
  }
  return fallback;
}

HermMatrix random_psd(int t, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  CMat g(t, t);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) g(i, j) = cplx(nd(rng), nd(rng));
  return HermMatrix::from_trusted(g * g.adjoint());
}

PolyhedralCone square_cone() {
  return PolyhedralCone(3, {RVec::Unit(3, 0) + RVec::Unit(3, 2), RVec::Unit(3, 1) + RVec::Unit(3, 2),
                            -RVec::Unit(3, 0) + RVec::Unit(3, 2), -RVec::Unit(3, 1) + RVec::Unit(3, 2)});
}

MatrixElement random_member(const PolyhedralCone& c, int s, std::mt19937& rng) {
  MatrixElement a = MatrixElement::zero(c.dim(), s);
  for (const auto& g : c.generators()) a = a + MatrixElement::tensor(g, random_psd(s, rng));
  return a;
}

json report_json(const FactorizationReport& rep) {
  json w = json::array();
  for (const auto& s : rep.warnings) w.push_back(s);
  return {{"pass", rep.pass},
          {"max_dev", rep.max_dev},
          {"worst_pair", {rep.worst_pair.first, rep.worst_pair.second}},
          {"pairs", rep.pairs},
          {"alpha_in_target", rep.alpha_in_target},
          {"beta_cp", rep.beta_cp},
          {"warnings", w}};
}

// Commands.

int cmd_membership(const std::string& sys_path, const std::string& elem_path, std::optional<int> level,
                   std::optional<double> tol_flag) {
  const double tol = default_tol(tol_flag, kDefaultTol);
  const json sj = read_json(sys_path), ej = read_json(elem_path);
  io::check_version(sj);
  io::check_version(ej);
  const auto sys = io::system_from(sj.contains("system") ? sj.at("system") : sj);
  const auto a = io::element_from(ej.contains("element") ? ej.at("element") : ej);
  if (level && *level != a.level()) throw InputError("element level differs from --level");
  const auto r = membership(*sys, a, tol);
  const char* status = r.verdict == Verdict::Member ? "member" : r.verdict == Verdict::NotMember ? "not_member" : "inconclusive";
  json out = report("membership", status);
  out["metrics"] = {{"margin", r.margin}, {"level", a.level()}, {"ambient", a.ambient()}};
  if (!r.witness.empty()) {
    out["witness"] = io::to_json(r.witness);
    out["metrics"]["witness_pairing"] = witness_pairing(r.witness, a);
  }
  if (r.fiber) out["fiber"] = io::to_json(*r.fiber);
  if (!r.message.empty()) out["message"] = r.message;
  const int code = r.verdict == Verdict::Member ? kOk : r.verdict == Verdict::NotMember ? kNegative : kInconclusive;
  return emit(out, code, std::string("membership: ") + status + " (margin " + num(r.margin) + ")");
}

int cmd_verify(const std::string& path, int tmax, std::optional<double> tol_flag) {
  const double tol = default_tol(tol_flag, 1e-9);
  const auto doc = io::factorization_from_json(read_json(path));
  const auto duals = doc.duals.empty() ? dual_generator_set(doc.f.source, tmax) : doc.duals;
  const auto rep = verify_factorization(doc.f, duals, tol);
  Linearity lin = verify_linear(doc.f, tol);
  if (lin == Linearity::NotApplicable) lin = fit_linear_alpha(doc.f, tol).first;
  json out = report("verify-factorization", rep.pass ? "pass" : "fail");
  out["metrics"] = report_json(rep);
  out["metrics"]["linearity"] = to_string(lin);
  return emit(out, rep.pass ? kOk : kNegative,
              std::string("verify-factorization: ") + (rep.pass ? "pass" : "fail") + ", max deviation " +
                  num(rep.max_dev) + ", alpha " + to_string(lin));
}

int cmd_build_lift(const std::string& path, int tmax, std::optional<double> tol_flag, const std::string& out_path) {
  const double tol = default_tol(tol_flag, 1e-8);
  const auto doc = io::factorization_from_json(read_json(path));
  const auto l = lift_from_factorization(doc.f.source, doc.f, tmax, tol);
  const json lj = io::lift_to_json(l, doc.f.source);
  json out = report("build-lift", "pass");
  out["metrics"] = {{"z_dim", l.zdim()}, {"dim_by_level", l.dim_by_level}, {"stable_level", l.stable_level},
                    {"gamma_rank", detail::rank_of(l.gamma.m)}};
  if (out_path.empty()) {
    out["lift"] = lj;
  } else {
    write_json(out_path, lj);
    out["artifacts"] = {out_path};
  }
  return emit(out, kOk, "build-lift: dim Z = " + std::to_string(l.zdim()));
}

int cmd_extract(const std::string& path, int tmax, std::optional<double> tol_flag, const std::string& out_path) {
  const double tol = default_tol(tol_flag, 1e-7);
  const auto [l, c] = io::lift_from_json(read_json(path));
  const auto f = factorization_from_lift(l, c);
  const auto duals = dual_generator_set(c, tmax);
  const auto rep = verify_factorization(f, duals, tol);
  const json fj = io::factorization_to_json(f, duals);
  json out = report("extract-factorization", rep.pass ? "pass" : "fail");
  out["metrics"] = report_json(rep);
  if (out_path.empty()) {
    out["factorization"] = fj;
  } else {
    write_json(out_path, fj);
    out["artifacts"] = {out_path};
  }
  return emit(out, rep.pass ? kOk : kNegative,
              std::string("extract-factorization: ") + (rep.pass ? "pass" : "fail") + ", max deviation " +
                  num(rep.max_dev));
}

int cmd_sos(const std::string& path, std::optional<int> basis_degree, std::optional<double> tol_flag, int samples,
            unsigned seed) {
  const double tol = default_tol(tol_flag, 1e-8);
  const auto h = io::poly_from(read_json(path));
  std::vector<Exponent> basis;
  if (basis_degree) {
    if (*basis_degree < 0) throw InputError("--basis-degree must be nonnegative");
    basis = h.is_homogeneous() ? monomials_of_degree(h.n_vars(), *basis_degree) : monomials_up_to(h.n_vars(), *basis_degree);
  }
  const auto r = sos_certify(h, basis, tol);
  json out = report("sos-certify", to_string(r.status));
  out["result"] = io::to_json(r);
  if (samples > 0) {
    const auto ps = positivity_sample(h, samples, 1.0, seed);
    out["metrics"] = {{"sample_min_eig", ps.min_observed}, {"samples", ps.samples}};
  }
  const int code = r.status == SosStatus::Certified ? kOk : r.status == SosStatus::NotSos ? kNegative : kInconclusive;
  return emit(out, code, std::string("sos-certify: ") + to_string(r.status) + " (lambda " + num(r.lambda) + ")");
}

// Demos.

int demo_simplex(int n, int t, unsigned seed) {
  if (n < 1 || t < 1 || t > kMaxLevel) throw InputError("demo simplex: need n >= 1 and 1 <= t <= 6");
  std::mt19937 rng(seed);
  const auto f = simplex_factorization(n);
  double kraus_dev = 0.0;
  std::vector<CPMap> duals = dual_generator_set(f.source, t);
  for (int k = 0; k < 20; ++k) {
    std::vector<HermMatrix> p;
    for (int i = 0; i < n; ++i) p.push_back(random_psd(t, rng));
    const auto phi = CPMap::on_cone(f.source, p);
    const auto b = f.beta(phi);
    for (int i = 0; i < n; ++i)
      kraus_dev = std::max(kraus_dev, (target_slack(f.alpha[i], b) - p[i]).norm() / (1.0 + p[i].norm()));
    duals.push_back(phi);
  }
  const auto rep = verify_factorization(f, duals);
  const auto lin = verify_linear(f);
  const bool pass = kraus_dev <= 1e-9 && rep.pass && lin == Linearity::Linear;
  json out = report("demo simplex", pass ? "pass" : "fail");
  out["metrics"] = {{"n", n}, {"t", t}, {"kraus_dev", kraus_dev}, {"max_dev", rep.max_dev}, {"pairs", rep.pairs},
                    {"linearity", to_string(lin)}};
  return emit(out, pass ? kOk : kNegative,
              std::string("demo simplex: ") + (pass ? "pass" : "fail") + ", max deviation " +
                  num(std::max(kraus_dev, rep.max_dev)));
}

int demo_polyhedral(unsigned seed) {
  std::mt19937 rng(seed);
  const auto c = square_cone();
  const auto f = polyhedral_factorization(c);
  auto duals = dual_generator_set(c, 2);
  for (int k = 0; k < 10; ++k) duals.push_back(random_positive_map(c, 1 + k % 2, rng));
  const auto rep = verify_factorization(f, duals);
  const auto lin = fit_linear_alpha(f).first;
  const auto l = lift_from_factorization(c, f, 2);
  const auto lifted = l.system();
  const auto minimal = OperatorSystem::minimal(c);
  int agree = 0, total = 0;
  for (int s = 1; s <= 2; ++s) {
    for (int k = 0; k < 10; ++k) {
      const auto a = random_member(c, s, rng);
      agree += membership(*lifted, a).verdict == Verdict::Member;
      ++total;
      // Push past the facet x + z >= 0 along the first coordinate.
      const auto b = a - MatrixElement::tensor(RVec::Unit(3, 0), a.coeff(0) + a.coeff(2) + HermMatrix::identity(s));
      agree += membership(*lifted, b).verdict == Verdict::NotMember && membership(*minimal, b).verdict == Verdict::NotMember;
      ++total;
    }
  }
  const bool pass = rep.pass && lin == Linearity::NotLinear && agree == total;
  json out = report("demo polyhedral", pass ? "pass" : "fail");
  out["metrics"] = {{"m", c.size()},        {"max_dev", rep.max_dev}, {"linearity", to_string(lin)},
                    {"z_dim", l.zdim()},    {"agree", agree},         {"samples", total}};
  return emit(out, pass ? kOk : kNegative,
              std::string("demo polyhedral: ") + (pass ? "pass" : "fail") + ", lift membership agreement " +
                  std::to_string(agree) + "/" + std::to_string(total));
}

int demo_choi(unsigned seed) {
  const auto h = choi_example();
  const auto r = sos_certify(h);
  const auto ps = positivity_sample(h, 10000, 1.0, seed);
  const bool pass = r.status == SosStatus::NotSos && ps.min_observed >= -1e-10;
  json out = report("demo choi", pass ? "pass" : "fail");
  out["metrics"] = {{"sos_status", to_string(r.status)}, {"lambda", r.lambda}, {"witness_value", r.witness_value},
                    {"sample_min_eig", ps.min_observed}, {"samples", ps.samples}};
  return emit(out, pass ? kOk : kNegative,
              std::string("demo choi: ") + to_string(r.status) + ", margin " + num(r.lambda) +
                  ", sampled min eigenvalue " + num(ps.min_observed));
}

int demo_roundtrip(const std::string& cone) {
  PolyhedralCone c = PolyhedralCone::orthant(2);
  Factorization f = simplex_factorization(2);
  if (cone == "square") {
    c = square_cone();
    f = polyhedral_factorization(c);
  } else if (cone != "simplex") {
    throw UsageError("demo roundtrip: --cone must be simplex or square");
  }
  const auto l = lift_from_factorization(c, f, 2);
  const bool injective = detail::rank_of(l.gamma.m) == l.zdim();
  const auto g = factorization_from_lift(l, c);
  const auto rep = verify_factorization(g, dual_generator_set(c, 2), 1e-7);
  const bool pass = injective && rep.pass;
  json out = report("demo roundtrip", pass ? "pass" : "fail");
  out["metrics"] = {{"cone", cone}, {"z_dim", l.zdim()}, {"gamma_injective", injective}, {"max_dev", rep.max_dev}};
  return emit(out, pass ? kOk : kNegative,
              std::string("demo roundtrip: ") + (pass ? "pass" : "fail") + ", max deviation " + num(rep.max_dev));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operator-system lifts, factorizations and sum-of-squares certificates"};
  app.require_subcommand(1);
  unsigned seed = 0;
  std::optional<double> tol;
  app.add_option("--seed", seed, "Seed for all sampling")->capture_default_str();

  std::string sys_path, elem_path, in_path = "-", out_path, demo_name, cone = "simplex";
  std::optional<int> level, basis_degree;
  int tmax = 2, n = 3, t = 2, samples = 0;

  auto* mem = app.add_subcommand("membership", "Membership of an element in an operator system");
  mem->add_option("system", sys_path, "System JSON")->required();
  mem->add_option("element", elem_path, "Element JSON")->required();
  mem->add_option("--level", level, "Expected matrix level");
  mem->add_option("--tol", tol, "Tolerance");

  auto* ver = app.add_subcommand("verify-factorization", "Check a factorization on dual generators");
  ver->add_option("file", in_path, "Factorization JSON")->required();
  ver->add_option("--tmax", tmax, "Largest dual generator level")->check(CLI::Range(1, kMaxLevel));
  ver->add_option("--tol", tol, "Tolerance");

  auto* bl = app.add_subcommand("build-lift", "Lift of the minimal system from a factorization");
  bl->add_option("file", in_path, "Factorization JSON")->required();
  bl->add_option("--tmax", tmax, "Largest dual generator level")->check(CLI::Range(1, kMaxLevel));
  bl->add_option("--tol", tol, "Tolerance");
  bl->add_option("--out", out_path, "Write the lift JSON here");

  auto* ex = app.add_subcommand("extract-factorization", "Factorization from a proper lift");
  ex->add_option("file", in_path, "Lift JSON")->required();
  ex->add_option("--tmax", tmax, "Largest dual generator level")->check(CLI::Range(1, kMaxLevel));
  ex->add_option("--tol", tol, "Tolerance");
  ex->add_option("--out", out_path, "Write the factorization JSON here");

  auto* sc = app.add_subcommand("sos-certify", "Sum-of-Hermitian-squares certificate for a matrix polynomial");
  sc->add_option("file", in_path, "Polynomial JSON, or - for standard input");
  sc->add_option("--basis-degree", basis_degree, "Degree of the monomial basis");
  sc->add_option("--tol", tol, "Tolerance");
  sc->add_option("--samples", samples, "Also sample the minimum eigenvalue on the unit sphere");

  auto* demo = app.add_subcommand("demo", "Self-contained example runs");
  demo->add_option("name", demo_name, "simplex, polyhedral, choi or roundtrip")
      ->required()
      ->check(CLI::IsMember({"simplex", "polyhedral", "choi", "roundtrip"}));
  demo->add_option("--n", n, "Dimension for the simplex demo");
  demo->add_option("--t", t, "Level for the simplex demo");
  demo->add_option("--cone", cone, "simplex or square for the roundtrip demo");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    json out = report(argc > 1 ? argv[1] : "", "error");
    out["error"] = e.what();
    std::cout << out.dump(2) << std::endl;
    app.exit(e);
    return kUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (*mem) return cmd_membership(sys_path, elem_path, level, tol);
    if (*ver) return cmd_verify(in_path, tmax, tol);
    if (*bl) return cmd_build_lift(in_path, tmax, tol, out_path);
    if (*ex) return cmd_extract(in_path, tmax, tol, out_path);
    if (*sc) return cmd_sos(in_path, basis_degree, tol, samples, seed);
    if (demo_name == "simplex") return demo_simplex(n, t, seed);
    if (demo_name == "polyhedral") return demo_polyhedral(seed);
    if (demo_name == "choi") return demo_choi(seed);
    return demo_roundtrip(cone);
  } catch (const UsageError& e) {
    json out = report(command, "error");
    out["error"] = e.what();
    return emit(out, kUsage, std::string("usage error: ") + e.what());
  } catch (const std::exception& e) {
    json out = report(command, "error");
    out["error"] = e.what();
    return emit(out, kData, std::string("data error: ") + e.what());
  }
}
