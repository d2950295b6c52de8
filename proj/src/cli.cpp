#include "pahomeo/cli.hpp"

#include "pahomeo/block.hpp"
#include "pahomeo/densify.hpp"
#include "pahomeo/render.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

namespace pahomeo {

namespace {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Rational rational_flag(const char* name, const std::string& text) {
  try {
    return parse_rational(text);
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("--") + name + ": " + e.what());
  }
}

Json load_json(const std::string& path) {
  try {
    return read_json_file(path);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

PwaMap load_g(const std::string& spec) {
  if (spec == "identity") {
    return identity_map(Mesh{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2, 3}}, ConvexPolygon::unit_square()});
  }
  const Json j = load_json(spec);
  return pwa_from_json(j.contains("phi") ? j.at("phi") : j);
}

enum class FileKind { Block, Densify, Map };

FileKind kind_of(const Json& j) {
  if (j.is_object() && j.contains("phi")) return FileKind::Block;
  if (j.is_object() && j.contains("f") && j.contains("spec")) return FileKind::Densify;
  if (j.is_object() && j.contains("vertices")) return FileKind::Map;
  throw InputError("unrecognised JSON file (expected a block, densify or map file)");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

struct Table {
  std::ostream& out;

  void value(const std::string& name, const Rational& v) {
    out << "  " << std::left << std::setw(28) << name << std::setw(27) << to_string(v) << ' ' << to_decimal(v) << '\n';
  }
  void check(const std::string& name, bool ok, const char* note = nullptr) {
    out << "  " << std::left << std::setw(56) << name << (ok ? "holds" : "FAILS");
    if (note) out << "  (" << note << ')';
    out << '\n';
  }
};

void print_block_report(std::ostream& out, const BlockSpec& spec, std::size_t cells, const BlockReport& r) {
  const Mat2& A = spec.A;
  out << "block  A = [[" << to_string(A.a) << ", " << to_string(A.b) << "], [" << to_string(A.c) << ", "
      << to_string(A.d) << "]]  k = " << spec.k << "  n = " << spec.n() << "  cells = " << cells << '\n';
  Table t{out};
  t.value("E(phi)", r.energy_phi);
  t.value("E(psi)", r.energy_psi);
  t.value("bound (1+2/k) E(psi)", r.energy_bound);
  t.check("E(phi) <= (1+2/k) E(psi)", r.bound_holds);
  t.value("E(phi; R') ", r.eq1_lhs);
  t.value("closed form on R'", r.eq1_rhs);
  t.check("E(phi; R') equals its closed form", r.eq1_holds);
  t.value("E(phi; R'')", r.eq2_lhs);
  t.value("closed form on R''", r.eq2_rhs);
  t.check("E(phi; R'') equals its closed form", r.eq2_holds);
  t.value("E(phi; R' u R'')", r.eq3_phi);
  t.value("E(psi; R' u R'')", r.eq3_psi);
  t.check("E(phi; R' u R'') = E(psi; R' u R'') = (1-2/n)|A|_1", r.eq3_holds);
  t.value("max |grad|_1/|A|_1 on T2", r.eq4_max_ratio);
  t.check("T2 cells: |grad|_1 <= k |A|_1", r.eq4_holds);
  t.value("max |grad|_1/|A|_1 on T3", r.eq5_max_ratio);
  t.check("T3 cells: |grad|_1 <= 2 |A|_1", r.eq5_holds);
  t.value("area_F", r.area_F);
  t.value("image_area_F", r.image_area_F);
  t.check("area_F = (1-2/n)/k, image = (1-2/n)(1-1/k) det A", r.measures_hold);
  t.check("image_area_F >= (1-1/(2n))(1-1/k) det A", r.printed_eqF_constant_holds, "informational");
  t.value("E(phi; F)", r.energy_on_F);
  t.value("(1/2 - 1/k)|A|_1", r.concentration_threshold);
  t.check("E(phi; F) > (1/2 - 1/k)|A|_1", r.concentration_holds, "informational");
  t.check("cell gradients as prescribed", r.gradients_match);
  t.check("orientation-preserving homeomorphism", r.homeomorphism_ok);
  t.check("boundary values equal A", r.boundary_matches_psi);
  out << (r.all_identities_hold() ? "all block identities hold\n" : "SOME BLOCK IDENTITY FAILS\n");
}

bool certificate_ok(const Certificate& c) {
  return c.in_A_n && c.variation_within && c.forward_within && c.inverse_within && c.variation_term_within &&
         c.d_certified;
}

void print_certificate(std::ostream& out, const Certificate& c, bool with_metric) {
  Table t{out};
  t.value("|F|", c.area_F);
  t.value("|f(F)|", c.image_area_F);
  t.value("1/n", Rational(1, c.n));
  t.check("|F| < 1/n and |f(F)| > 1 - 1/n  (f in A_n)", c.in_A_n);
  if (!with_metric) return;
  t.value("Var(g)", c.var_g);
  t.value("Var(f)", c.var_f);
  t.check("|Var(f) - Var(g)| <= Var(g)/m", c.variation_within);
  t.value("sup |f - g|^2", c.sup_forward_sq);
  t.check("sup |f - g| < eps/4", c.forward_within);
  t.value("sup |f^-1 - g^-1|^2", c.sup_inverse_sq);
  t.check("sup |f^-1 - g^-1| < eps/4", c.inverse_within);
  t.value("|1/(M-Var f) - 1/(M-Var g)|", c.variation_term);
  t.check("variation term < eps/2", c.variation_term_within);
  t.value("d(g, f) <=", c.d_bound);
  t.value("eps", c.epsilon);
  t.check("d(g, f) < eps", c.d_certified);
}

int cmd_block(const std::string& a, const std::string& b, const std::string& c, const std::string& d, int k,
              const std::string& prefix, std::ostream& out) {
  BlockSpec spec{{rational_flag("a", a), rational_flag("b", b), rational_flag("c", c), rational_flag("d", d)}, k};
  if (det(spec.A) <= 0) throw InputError("det(A) must be positive");
  if (k < 2) throw InputError("--k must be at least 2");
  if (k > 12) throw InputError("--k above 12 is too large for an explicit block mesh");
  const BlockResult r = build_block(spec);
  const std::string path = prefix + ".block.json";
  write_json_file(path, block_json(r));
  print_block_report(out, spec, r.phi.mesh.cells.size(), r.report);
  out << "wrote " << path << '\n';
  return r.report.all_identities_hold() ? kExitOk : kExitCheck;
}

int cmd_densify(const std::string& g_spec, int n, const std::string& eps, const std::string& M,
                const std::string& prefix, std::ostream& out) {
  if (n < 2) throw InputError("--n must be at least 2 (A_1 is vacuous)");
  DensifySpec spec{load_g(g_spec), n, rational_flag("eps", eps), rational_flag("M", M)};
  if (spec.epsilon <= 0) throw InputError("--eps must be positive");
  if (spec.M <= 2) throw InputError("--M must exceed 2");
  const DensifyResult r = densify(spec);
  const std::string path = prefix + ".densify.json";
  write_json_file(path, densify_json(r));
  out << "densify  n = " << n << "  eps = " << to_string(spec.epsilon) << "  M = " << to_string(spec.M)
      << "  m = " << r.m << "  refinement rounds = " << r.rounds << '\n';
  out << "  base triangles = " << r.f.base().mesh.cells.size() << "  packed squares = " << r.f.square_count()
      << "  block templates = ";
  std::vector<const BlockTemplate*> seen;
  for (const Patch& p : r.f.patches()) {
    if (std::find(seen.begin(), seen.end(), p.block.get()) == seen.end()) seen.push_back(p.block.get());
  }
  out << seen.size() << '\n';
  print_certificate(out, r.certificate, true);
  out << "wrote " << path << '\n';
  return certificate_ok(r.certificate) ? kExitOk : kExitCheck;
}

int cmd_certify(const std::string& in, int n, std::ostream& out) {
  if (n < 1) throw InputError("--n must be positive");
  const Json j = load_json(in);
  Certificate c;
  switch (kind_of(j)) {
    case FileKind::Block: {
      const BlockResult r = block_from_json(j);
      c = certify_An(r.phi, r.F, n);
      out << "witness: " << witness_triangles(r.phi, r.F).size() << " disjoint open triangles\n";
      break;
    }
    case FileKind::Densify: {
      const DensifyResult r = densify_from_json(j);
      c = r.certificate;
      c.n = n;
      c.in_A_n = c.area_F < Rational(1, n) && c.image_area_F > Rational(1) - Rational(1, n);
      out << "witness: R' cells of " << r.f.square_count() << " placed blocks\n";
      break;
    }
    case FileKind::Map:
      throw InputError("certify needs a witness set: pass a block or densify file");
  }
  print_certificate(out, c, false);
  return c.in_A_n ? kExitOk : kExitCheck;
}

int cmd_render(const std::string& in, const std::string& mode_name, bool highlight, const std::string& scale,
               std::string path, std::ostream& out) {
  RenderMode mode;
  try {
    mode = parse_render_mode(mode_name);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  RenderStyle style;
  style.scale = rational_flag("scale", scale);
  if (style.scale <= 0) throw InputError("--scale must be positive");
  const Json j = load_json(in);
  std::optional<PwaMap> f;
  std::optional<CellSet> marked;
  switch (kind_of(j)) {
    case FileKind::Block: {
      f = pwa_from_json(j.at("phi"));
      std::vector<CellIndex> idx;
      if (!j.contains("F") || !j.at("F").is_array()) throw InputError("malformed JSON: F must be an array");
      for (const Json& v : j.at("F")) {
        if (!v.is_number_unsigned()) throw InputError("malformed JSON: F index");
        idx.push_back(v.get<CellIndex>());
      }
      marked.emplace(f->mesh, std::move(idx));
      break;
    }
    case FileKind::Densify: {
      const Json& jf = j.at("f");
      if (!jf.is_object() || !jf.contains("base")) throw InputError("malformed JSON: missing base map");
      f = pwa_from_json(jf.at("base"));
      std::vector<CellIndex> idx;
      for (const Json& p : jf.value("patches", Json::array())) {
        if (!p.contains("cell") || !p.at("cell").is_number_unsigned()) throw InputError("malformed JSON: patch cell");
        idx.push_back(p.at("cell").get<CellIndex>());
      }
      marked.emplace(f->mesh, std::move(idx));
      break;
    }
    case FileKind::Map:
      f = pwa_from_json(j);
      break;
  }
  if (path.empty()) path = in + ".svg";
  const std::string svg = render_svg(*f, highlight && marked ? &*marked : nullptr, mode, style);
  write_text(path, svg);
  out << "rendered " << f->mesh.cells.size() << " cells (" << mode_name << ") to " << path << '\n';
  return kExitOk;
}

int cmd_demo(int depth, const std::string& g_spec, const std::string& M, const std::string& eps, std::ostream& out) {
  if (depth < 0 || depth > 8) throw InputError("--depth must be between 0 and 8");
  const PwaMap g = load_g(g_spec);
  const Rational m_bound = rational_flag("M", M);
  const Rational e = rational_flag("eps", eps);
  if (m_bound <= 2) throw InputError("--M must exceed 2");
  if (e <= 0) throw InputError("--eps must be positive");
  const std::vector<NestedRow> rows = nested_demo(g, m_bound, depth, e);
  out << "  k  n=2^k    m  |F_k|                           |f_k(F_k)|\n";
  bool all = true;
  int k = 1;
  for (const NestedRow& r : rows) {
    out << "  " << std::left << std::setw(3) << k << std::setw(7) << r.n << std::setw(5) << r.m << std::setw(32)
        << (to_decimal(r.area) + " < " + to_string(Rational(1, r.n))) << to_decimal(r.image_area) << " > "
        << to_string(Rational(1) - Rational(1, r.n)) << "  " << (r.holds ? "holds" : "FAILS") << '\n';
    out << "       exact: " << to_string(r.area) << "  " << to_string(r.image_area) << '\n';
    all = all && r.holds;
    ++k;
  }
  out << rows.size() << " rows, " << (all ? "all bounds hold" : "SOME BOUND FAILS") << '\n';
  return all ? kExitOk : kExitCheck;
}

int cmd_verify(const std::string& in, std::ostream& out) {
  const Json j = load_json(in);
  switch (kind_of(j)) {
    case FileKind::Block: {
      const BlockResult r = block_from_json(j);
      print_block_report(out, r.spec, r.phi.mesh.cells.size(), r.report);
      verify_block(r);
      if (j.contains("report") && !(j.at("report") == report_json(r.report))) {
        throw CheckFailed("recomputed report differs from the stored one");
      }
      out << "stored report reproduced exactly\n";
      return kExitOk;
    }
    case FileKind::Densify: {
      const DensifyResult r = densify_from_json(j);
      print_certificate(out, r.certificate, true);
      const ValidationReport v = r.f.validate();
      for (const std::string& s : v.failures) out << "  " << s << '\n';
      if (!v.ok()) throw CheckFailed("patched map failed validation");
      if (j.contains("certificate") && !(j.at("certificate") == certificate_json(r.certificate))) {
        throw CheckFailed("recomputed certificate differs from the stored one");
      }
      out << "stored certificate reproduced exactly\n";
      return certificate_ok(r.certificate) ? kExitOk : kExitCheck;
    }
    case FileKind::Map: {
      const PwaMap f = pwa_from_json(j);
      const ValidationReport v = validate_homeomorphism(f);
      for (const std::string& s : v.failures) out << "  " << s << '\n';
      out << "cells = " << f.mesh.cells.size() << "  energy = " << to_string(energy(f)) << "  ("
          << to_decimal(energy(f)) << ")\n";
      out << (v.ok() ? "valid homeomorphism\n" : "NOT a valid homeomorphism\n");
      return v.ok() ? kExitOk : kExitCheck;
    }
  }
  return kExitInput;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact piecewise-affine homeomorphisms of the unit square", "pahomeo"};
  app.require_subcommand(1);

  std::string a, b, c, d, prefix = "block";
  int k = 0;
  CLI::App* block = app.add_subcommand("block", "build and check the building block for A and k");
  block->add_option("--a", a, "matrix entry a (p/q)")->required();
  block->add_option("--b", b, "matrix entry b (p/q)")->required();
  block->add_option("--c", c, "matrix entry c (p/q)")->required();
  block->add_option("--d", d, "matrix entry d (p/q)")->required();
  block->add_option("--k", k, "block parameter, n = k^2")->required();
  block->add_option("--out", prefix, "output prefix");

  std::string g_spec = "identity", eps = "1/4", M = "4", dens_prefix = "densify";
  int n = 0;
  CLI::App* dens = app.add_subcommand("densify", "run the density pipeline from g");
  dens->add_option("--g", g_spec, "map JSON path or 'identity'");
  dens->add_option("--n", n, "target A_n")->required();
  dens->add_option("--eps", eps, "distance budget (p/q)");
  dens->add_option("--M", M, "variation bound of the space (p/q)");
  dens->add_option("--out", dens_prefix, "output prefix");

  std::string cert_in;
  int cert_n = 0;
  CLI::App* cert = app.add_subcommand("certify", "check A_n membership of a stored block or densify result");
  cert->add_option("--in", cert_in, "JSON file")->required();
  cert->add_option("--n", cert_n, "n of A_n")->required();

  std::string render_in, mode = "domain", scale = "480", svg_out;
  bool highlight = false;
  CLI::App* render = app.add_subcommand("render", "draw a stored map as SVG");
  render->add_option("--in", render_in, "JSON file")->required();
  render->add_option("--mode", mode, "domain, image or side-by-side");
  render->add_flag("--highlight", highlight, "fill the witness cells");
  render->add_option("--scale", scale, "pixels per unit (p/q)");
  render->add_option("--out", svg_out, "SVG path (default <in>.svg)");

  int depth = 0;
  std::string demo_g = "identity", demo_M = "4", demo_eps = "1/2";
  CLI::App* demo = app.add_subcommand("demo", "densify at n = 2, 4, ..., 2^depth");
  demo->add_option("--depth", depth, "number of rows (at most 8)")->required();
  demo->add_option("--g", demo_g, "map JSON path or 'identity'");
  demo->add_option("--M", demo_M, "variation bound (p/q)");
  demo->add_option("--eps", demo_eps, "distance budget (p/q)");

  std::string verify_in;
  CLI::App* verify = app.add_subcommand("verify", "re-run every exact check on a stored JSON file");
  verify->add_option("--in", verify_in, "JSON file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*block) return cmd_block(a, b, c, d, k, prefix, out);
    if (*dens) return cmd_densify(g_spec, n, eps, M, dens_prefix, out);
    if (*cert) return cmd_certify(cert_in, cert_n, out);
    if (*render) return cmd_render(render_in, mode, highlight, scale, svg_out, out);
    if (*demo) return cmd_demo(depth, demo_g, demo_M, demo_eps, out);
    if (*verify) return cmd_verify(verify_in, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const CheckFailed& e) {
    err << "check failed: " << e.what() << '\n';
    return kExitCheck;
  } catch (const BlockCheckError& e) {
    err << "check failed: " << e.what() << '\n';
    return kExitCheck;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal failure: " << e.what() << '\n';
    return kExitCheck;
  }
  return kExitInput;
}

}  // namespace pahomeo
