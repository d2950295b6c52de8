#include "pahomeo/block.hpp"

#include <algorithm>

namespace pahomeo {

namespace {

constexpr std::size_t kCellsPerStrip = 10;

Rational power_inverse(int k, int e) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), static_cast<unsigned long>(k), static_cast<unsigned long>(e));
  return Rational(1) / Rational(p);
}

Rational strip_count_rational(const BlockSpec& spec) {
  return Rational(spec.n()) * Rational(spec.n());
}

struct TiledValues {
  Tiling tiling;
  std::vector<Point2> values;  // empty unless a matrix was given
};

// Strips 0..strips-1 of the tiling. With A given, also the vertex values of
// the block: A*v everywhere except the two lifted points (1/n, y0 + 1/k^5)
// and (1 - 1/n, y0 + 1/k^5), which go to A*v + (k-2)/k^5 (b, d).
TiledValues tile(int k, std::int64_t strips, const Mat2* A) {
  if (k < 2) throw std::invalid_argument("block parameter k must be at least 2");
  const std::int64_t n = static_cast<std::int64_t>(k) * k;
  const Rational h = Rational(1) / (Rational(n) * Rational(n));
  const Rational delta = power_inverse(k, 5);
  const Rational w = Rational(1) / Rational(n);
  const Rational one_minus_w = Rational(1) - w;

  VertexPool pool;
  std::vector<Point2> values;
  Point2 lift{0, 0};
  if (A) lift = Rational((k - 2)) * delta * Point2{A->b, A->d};

  auto add = [&](Point2 p, bool lifted) {
    const std::size_t before = pool.points().size();
    const VertexIndex idx = pool.add(p);
    if (A && pool.points().size() != before) {
      Point2 v = *A * p;
      if (lifted) v = v + lift;
      values.push_back(std::move(v));
    }
    return idx;
  };

  TiledValues out{{k, Mesh{{}, {}, ConvexPolygon::rectangle(0, 0, 1, Rational(strips) * h)}, {}, {}}, {}};
  Tiling& t = out.tiling;
  t.mesh.cells.reserve(static_cast<std::size_t>(strips) * kCellsPerStrip);
  for (std::int64_t i = 0; i < strips; ++i) {
    const Rational y0 = Rational(i) * h;
    const Rational yd = y0 + delta;
    const Rational yh = y0 + h;
    const VertexIndex l00 = add({0, y0}, false);
    const VertexIndex l10 = add({w, y0}, false);
    const VertexIndex r10 = add({one_minus_w, y0}, false);
    const VertexIndex r00 = add({1, y0}, false);
    const VertexIndex l0d = add({0, yd}, false);
    const VertexIndex l1d = add({w, yd}, true);
    const VertexIndex r1d = add({one_minus_w, yd}, true);
    const VertexIndex r0d = add({1, yd}, false);
    const VertexIndex l0h = add({0, yh}, false);
    const VertexIndex l1h = add({w, yh}, false);
    const VertexIndex r1h = add({one_minus_w, yh}, false);
    const VertexIndex r0h = add({1, yh}, false);

    t.mesh.cells.push_back({l10, r10, r1d, l1d});
    t.mesh.cells.push_back({l1d, r1d, r1h, l1h});
    t.mesh.cells.push_back({l00, l10, l0d});
    t.mesh.cells.push_back({l0d, l10, l1d});
    t.mesh.cells.push_back({l0d, l1d, l1h});
    t.mesh.cells.push_back({l0d, l1h, l0h});
    // Mirror images under x -> 1 - x, listed in reverse to stay counterclockwise.
    t.mesh.cells.push_back({r0d, r10, r00});
    t.mesh.cells.push_back({r1d, r10, r0d});
    t.mesh.cells.push_back({r1h, r1d, r0d});
    t.mesh.cells.push_back({r0h, r1h, r0d});
    for (CellRole role : {CellRole::RPrime, CellRole::RSecond, CellRole::T1, CellRole::T2, CellRole::T3,
                          CellRole::T4, CellRole::T1Mirror, CellRole::T2Mirror, CellRole::T3Mirror,
                          CellRole::T4Mirror}) {
      t.roles.push_back(role);
      t.strips.push_back(static_cast<std::uint32_t>(i));
    }
  }
  t.mesh.vertices = pool.release();
  out.values = std::move(values);
  return out;
}

struct BlockMap {
  PwaMap phi;
  std::vector<CellRole> roles;
  std::vector<CellIndex> witness;
};

BlockMap build_block_map(const BlockSpec& spec, std::int64_t strips) {
  require_valid(spec);
  TiledValues tv = tile(spec.k, strips, &spec.A);
  BlockMap out{from_vertex_values(std::move(tv.tiling.mesh), tv.values), std::move(tv.tiling.roles), {}};

  // On R' the map is A' itself, carried to strip i by the strip translation.
  const Mat2 a_prime = prescribed_gradient(spec, CellRole::RPrime);
  const Rational h = Rational(1) / strip_count_rational(spec);
  for (std::size_t c = 0; c < out.roles.size(); ++c) {
    if (out.roles[c] != CellRole::RPrime) continue;
    const Rational shift = Rational(static_cast<long>(tv.tiling.strips[c])) * h;
    const AffineMap2 formula{a_prime, shift * Point2{spec.A.b, spec.A.d} - a_prime * Point2{0, shift}};
    if (!(formula == out.phi.maps[c])) {
      throw BlockCheckError("R' map disagrees with the boundary-determined vertex values");
    }
    out.witness.push_back(static_cast<CellIndex>(c));
  }
  return out;
}

bool boundary_matches(const PwaMap& f, const Mat2& A) {
  for (std::size_t c = 0; c < f.mesh.cells.size(); ++c) {
    for (VertexIndex v : f.mesh.cells[c]) {
      const Point2& p = f.mesh.vertices[v];
      bool on_boundary = false;
      const ConvexPolygon& dom = f.mesh.domain;
      for (std::size_t e = 0; e < dom.size() && !on_boundary; ++e) {
        on_boundary = cross(dom[e], dom[(e + 1) % dom.size()], p) == 0;
      }
      if (on_boundary && !(affine_apply(f.maps[c], p) == A * p)) return false;
    }
  }
  return true;
}

Json bool_json(bool b) { return b; }

// Sums over phi's cells count `copies` times; phi is either the whole block
// (copies = 1) or strip R_0 (copies = n^2), in which case F is strip 0's R'.
BlockReport fill_report(const BlockSpec& spec, const PwaMap& phi, const std::vector<CellRole>& roles,
                        const CellSet& F, const Rational& copies, bool homeomorphism_ok,
                        bool boundary_ok) {
  require_valid(spec);
  const Mat2& A = spec.A;
  const Rational k = spec.k;
  const Rational n = Rational(spec.n());
  const Rational norm_a = mat_norm_l1(A);
  const Rational det_a = det(A);
  const Rational thin = Rational(1) - Rational(2) / n;  // 1 - 2/n

  BlockReport r;
  r.energy_phi = copies * energy(phi);
  r.energy_psi = norm_a * copies * polygon_area(phi.mesh.domain);
  r.energy_bound = (Rational(1) + Rational(2) / k) * r.energy_psi;
  r.bound_holds = r.energy_phi <= r.energy_bound;

  r.eq1_lhs = 0;
  r.eq2_lhs = 0;
  r.eq3_psi = 0;
  r.eq4_max_ratio = 0;
  r.eq5_max_ratio = 0;
  r.gradients_match = true;
  for (std::size_t c = 0; c < roles.size(); ++c) {
    const Mat2& grad = phi.maps[c].linear;
    const Rational area = phi.mesh.cell_area(static_cast<CellIndex>(c));
    const Rational norm = mat_norm_l1(grad);
    switch (roles[c]) {
      case CellRole::RPrime:
        r.eq1_lhs += area * norm;
        r.eq3_psi += area * norm_a;
        break;
      case CellRole::RSecond:
        r.eq2_lhs += area * norm;
        r.eq3_psi += area * norm_a;
        break;
      default:
        break;
    }
    if (is_t2_type(roles[c])) r.eq4_max_ratio = std::max(r.eq4_max_ratio, Rational(norm / norm_a));
    if (is_t3_type(roles[c])) r.eq5_max_ratio = std::max(r.eq5_max_ratio, Rational(norm / norm_a));
    if (!(grad == prescribed_gradient(spec, roles[c]))) r.gradients_match = false;
  }
  r.eq1_lhs *= copies;
  r.eq2_lhs *= copies;
  r.eq3_psi *= copies;
  const Rational inv_k = Rational(1) / k;
  const Rational rest = Rational(1) - inv_k;
  r.eq1_rhs = thin * mat_norm_l1({inv_k * A.a, rest * A.b, inv_k * A.c, rest * A.d});
  r.eq2_rhs = thin * mat_norm_l1({rest * A.a, inv_k * A.b, rest * A.c, inv_k * A.d});
  r.eq1_holds = r.eq1_lhs == r.eq1_rhs;
  r.eq2_holds = r.eq2_lhs == r.eq2_rhs;
  r.eq3_phi = r.eq1_lhs + r.eq2_lhs;
  r.eq3_holds = r.eq3_phi == r.eq3_psi && r.eq3_psi == thin * norm_a;
  r.eq4_holds = r.eq4_max_ratio <= k;
  r.eq5_holds = r.eq5_max_ratio <= 2;

  r.area_F = copies * area_of(phi.mesh, F);
  r.image_area_F = copies * image_area_of(phi, F);
  r.measures_hold = r.area_F == thin / k && r.image_area_F == thin * rest * det_a && r.area_F < inv_k;
  r.printed_eqF_constant_holds =
      r.image_area_F >= (Rational(1) - Rational(1) / (2 * n)) * rest * det_a;

  r.energy_on_F = copies * energy_on(phi, F);
  r.concentration_threshold = (Rational(1, 2) - inv_k) * norm_a;
  r.concentration_holds = r.energy_on_F > r.concentration_threshold;

  r.homeomorphism_ok = homeomorphism_ok;
  r.boundary_matches_psi = boundary_ok;
  return r;
}

}  // namespace

void require_valid(const BlockSpec& spec) {
  if (det(spec.A) <= 0) throw std::domain_error("det(A) must be positive");
  if (spec.k < 2) throw std::invalid_argument("block parameter k must be at least 2");
}

const char* role_name(CellRole role) {
  switch (role) {
    case CellRole::RPrime: return "R'";
    case CellRole::RSecond: return "R''";
    case CellRole::T1: return "T1";
    case CellRole::T2: return "T2";
    case CellRole::T3: return "T3";
    case CellRole::T4: return "T4";
    case CellRole::T1Mirror: return "T1*";
    case CellRole::T2Mirror: return "T2*";
    case CellRole::T3Mirror: return "T3*";
    case CellRole::T4Mirror: return "T4*";
  }
  return "?";
}

Tiling build_tiling(int k) {
  if (k < 2) throw std::invalid_argument("block parameter k must be at least 2");
  const std::int64_t n = static_cast<std::int64_t>(k) * k;
  return tile(k, n * n, nullptr).tiling;
}

Tiling build_strip_tiling(int k) { return tile(k, 1, nullptr).tiling; }

Mat2 prescribed_gradient(const BlockSpec& spec, CellRole role) {
  const Mat2& A = spec.A;
  const Rational km1 = spec.k - 1;
  // (1/n - 2/n^{3/2}) with n = k^2
  const Rational t = power_inverse(spec.k, 2) - 2 * power_inverse(spec.k, 3);
  switch (role) {
    case CellRole::RPrime: return {A.a, km1 * A.b, A.c, km1 * A.d};
    case CellRole::RSecond: return {A.a, A.b / km1, A.c, A.d / km1};
    case CellRole::T2: return {A.a + t * A.b, km1 * A.b, A.c + t * A.d, km1 * A.d};
    case CellRole::T3: return {A.a + t * A.b, A.b / km1, A.c + t * A.d, A.d / km1};
    case CellRole::T2Mirror: return {A.a - t * A.b, km1 * A.b, A.c - t * A.d, km1 * A.d};
    case CellRole::T3Mirror: return {A.a - t * A.b, A.b / km1, A.c - t * A.d, A.d / km1};
    case CellRole::T1:
    case CellRole::T4:
    case CellRole::T1Mirror:
    case CellRole::T4Mirror: return A;
  }
  return A;
}

bool BlockReport::all_identities_hold() const {
  return bound_holds && eq1_holds && eq2_holds && eq3_holds && eq4_holds && eq5_holds &&
         measures_hold && gradients_match && homeomorphism_ok && boundary_matches_psi;
}

BlockReport compute_block_report(const BlockSpec& spec, const PwaMap& phi,
                                 const std::vector<CellRole>& roles, const CellSet& F) {
  require_valid(spec);
  return fill_report(spec, phi, roles, F, 1, validate_homeomorphism(phi).ok(), boundary_matches(phi, spec.A));
}

BlockResult build_block(const BlockSpec& spec) {
  BlockMap bm = build_block_map(spec, spec.n() * spec.n());
  CellSet F(bm.phi.mesh, std::move(bm.witness));
  BlockReport report = compute_block_report(spec, bm.phi, bm.roles, F);
  return {spec, std::move(bm.phi), std::move(F), std::move(bm.roles), std::move(report)};
}

BlockReport verify_block(const BlockResult& result) {
  BlockReport r = compute_block_report(result.spec, result.phi, result.roles, result.F);
  const std::pair<bool, const char*> checks[] = {
      {r.homeomorphism_ok, "phi is not an orientation-preserving homeomorphism"},
      {r.boundary_matches_psi, "boundary trace differs from A"},
      {r.gradients_match, "cell gradients differ from the prescribed matrices"},
      {r.eq1_holds, "energy on R' copies differs from its closed form (eq1)"},
      {r.eq2_holds, "energy on R'' copies differs from its closed form (eq2)"},
      {r.eq3_holds, "energy on R' and R'' differs from that of A (eq3)"},
      {r.eq4_holds, "T2 gradient bound |grad|_1 <= k|A|_1 fails (eq4)"},
      {r.eq5_holds, "T3 gradient bound |grad|_1 <= 2|A|_1 fails (eq5)"},
      {r.bound_holds, "total energy exceeds (1 + 2/k) E(A)"},
      {r.measures_hold, "witness measures differ from (1-2/n)/k and (1-2/n)(1-1/k)det A"},
  };
  for (const auto& [ok, what] : checks) {
    if (!ok) throw BlockCheckError(what);
  }
  return r;
}

Json report_json(const BlockReport& r) {
  Json j = Json::object();
  j["energy_phi"] = rational_json(r.energy_phi);
  j["energy_psi"] = rational_json(r.energy_psi);
  j["energy_bound"] = rational_json(r.energy_bound);
  j["bound_holds"] = bool_json(r.bound_holds);
  j["eq1_lhs"] = rational_json(r.eq1_lhs);
  j["eq1_rhs"] = rational_json(r.eq1_rhs);
  j["eq1_holds"] = bool_json(r.eq1_holds);
  j["eq2_lhs"] = rational_json(r.eq2_lhs);
  j["eq2_rhs"] = rational_json(r.eq2_rhs);
  j["eq2_holds"] = bool_json(r.eq2_holds);
  j["eq3_phi"] = rational_json(r.eq3_phi);
  j["eq3_psi"] = rational_json(r.eq3_psi);
  j["eq3_holds"] = bool_json(r.eq3_holds);
  j["eq4_max_ratio"] = rational_json(r.eq4_max_ratio);
  j["eq4_holds"] = bool_json(r.eq4_holds);
  j["eq5_max_ratio"] = rational_json(r.eq5_max_ratio);
  j["eq5_holds"] = bool_json(r.eq5_holds);
  j["area_F"] = rational_json(r.area_F);
  j["image_area_F"] = rational_json(r.image_area_F);
  j["measures_hold"] = bool_json(r.measures_hold);
  j["printed_eqF_constant_holds"] = bool_json(r.printed_eqF_constant_holds);
  j["energy_on_F"] = rational_json(r.energy_on_F);
  j["concentration_threshold"] = rational_json(r.concentration_threshold);
  j["concentration_holds"] = bool_json(r.concentration_holds);
  j["gradients_match"] = bool_json(r.gradients_match);
  j["homeomorphism_ok"] = bool_json(r.homeomorphism_ok);
  j["boundary_matches_psi"] = bool_json(r.boundary_matches_psi);
  return j;
}

Json block_json(const BlockResult& result) {
  Json j = Json::object();
  Json spec = mat_json(result.spec.A);
  spec["k"] = result.spec.k;
  j["spec"] = std::move(spec);
  j["phi"] = to_json(result.phi);
  j["F"] = result.F.indices();
  j["report"] = report_json(result.report);
  return j;
}

BlockResult block_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("spec") || !j.contains("phi") || !j.contains("F")) {
    throw std::invalid_argument("malformed JSON: not a block file");
  }
  const Json& js = j.at("spec");
  if (!js.contains("k") || !js.at("k").is_number_integer()) {
    throw std::invalid_argument("malformed JSON: block spec needs an integer k");
  }
  BlockSpec spec{mat_from_json(js), js.at("k").get<int>()};
  require_valid(spec);
  if (spec.k > 16) throw std::invalid_argument("block parameter too large to rebuild the tiling");
  PwaMap phi = pwa_from_json(j.at("phi"));
  Tiling tiling = build_tiling(spec.k);
  if (!(tiling.mesh.vertices == phi.mesh.vertices) || tiling.mesh.cells != phi.mesh.cells ||
      !(tiling.mesh.domain == phi.mesh.domain)) {
    throw std::invalid_argument("stored mesh is not the block tiling for k = " + std::to_string(spec.k));
  }
  const Json& jf = j.at("F");
  if (!jf.is_array()) throw std::invalid_argument("malformed JSON: F must be an array");
  std::vector<CellIndex> idx;
  for (const Json& v : jf) {
    if (!v.is_number_unsigned()) throw std::invalid_argument("malformed JSON: F index");
    idx.push_back(v.get<CellIndex>());
  }
  CellSet F(phi.mesh, std::move(idx));
  BlockReport report = compute_block_report(spec, phi, tiling.roles, F);
  return {spec, std::move(phi), std::move(F), std::move(tiling.roles), std::move(report)};
}

BlockTemplate::BlockTemplate(BlockSpec spec)
    : spec_(std::move(spec)),
      strip_(single_cell_map(ConvexPolygon::unit_square(), {})),
      strip_inverse_(strip_) {
  BlockMap bm = build_block_map(spec_, 1);
  strip_ = std::move(bm.phi);
  roles_ = std::move(bm.roles);
  height_ = Rational(1) / strip_count_rational(spec_);
  const AffineMap2 psi{spec_.A, {0, 0}};
  psi_inverse_ = affine_invert(psi);

  validation_ = validate_homeomorphism(strip_);
  if (!boundary_matches(strip_, spec_.A)) {
    validation_.boundary_ok = false;
    validation_.failures.push_back("boundary: strip values differ from A on the strip boundary");
  }
  if (!validation_.ok()) throw BlockCheckError("block strip is not a homeomorphism onto A(R_0)");

  strip_inverse_ = inverse(strip_);
  const PwaMap psi_strip = single_cell_map(strip_.mesh.domain, psi);
  const PwaMap psi_strip_inverse = single_cell_map(strip_inverse_.mesh.domain, psi_inverse_);
  // phi - A is periodic in the strips, so one strip carries the whole sup.
  deviation_sq_ = sup_distance(strip_, psi_strip).squared;
  inverse_deviation_sq_ = sup_distance(strip_inverse_, psi_strip_inverse).squared;
}

Rational BlockTemplate::energy() const { return strip_count_rational(spec_) * pahomeo::energy(strip_); }

Rational BlockTemplate::witness_area() const {
  Rational a = 0;
  for (std::size_t c = 0; c < roles_.size(); ++c) {
    if (roles_[c] == CellRole::RPrime) a += strip_.mesh.cell_area(static_cast<CellIndex>(c));
  }
  return strip_count_rational(spec_) * a;
}

Rational BlockTemplate::witness_image_area() const {
  Rational a = 0;
  for (std::size_t c = 0; c < roles_.size(); ++c) {
    if (roles_[c] == CellRole::RPrime) {
      a += strip_.mesh.cell_area(static_cast<CellIndex>(c)) * det(strip_.maps[c].linear);
    }
  }
  return strip_count_rational(spec_) * a;
}

Rational BlockTemplate::witness_energy() const {
  Rational a = 0;
  for (std::size_t c = 0; c < roles_.size(); ++c) {
    if (roles_[c] == CellRole::RPrime) {
      a += strip_.mesh.cell_area(static_cast<CellIndex>(c)) * mat_norm_l1(strip_.maps[c].linear);
    }
  }
  return strip_count_rational(spec_) * a;
}

std::int64_t BlockTemplate::strip_of(const Rational& y) const {
  const mpz_class i = floor_to_integer(y / height_);
  if (i < 0) return 0;
  const std::int64_t last = strip_count() - 1;
  if (i > last) return last;
  return i.get_si();
}

Point2 BlockTemplate::evaluate(const Point2& u) const {
  const std::int64_t i = strip_of(u.y);
  const Rational shift = Rational(i) * height_;
  const Point2 local = pahomeo::evaluate(strip_, {u.x, u.y - shift});
  return local + shift * Point2{spec_.A.b, spec_.A.d};
}

Point2 BlockTemplate::evaluate_inverse(const Point2& w) const {
  const Point2 p = affine_apply(psi_inverse_, w);
  const std::int64_t i = strip_of(p.y);
  const Rational shift = Rational(i) * height_;
  const Point2 local = pahomeo::evaluate(strip_inverse_, w - shift * Point2{spec_.A.b, spec_.A.d});
  return local + Point2{0, shift};
}

ValidationReport BlockTemplate::validate() const { return validation_; }

BlockReport BlockTemplate::report() const {
  std::vector<CellIndex> witness;
  for (std::size_t c = 0; c < roles_.size(); ++c) {
    if (roles_[c] == CellRole::RPrime) witness.push_back(static_cast<CellIndex>(c));
  }
  // The strip check covers the seams too: neighbouring strips meet along
  // y = i/n^2, where both sides equal A.
  return fill_report(spec_, strip_, roles_, CellSet(strip_.mesh, std::move(witness)),
                     strip_count_rational(spec_), validation_.ok(), validation_.ok());
}

ConcentrationResult check_concentration(const BlockSpec& spec) {
  require_valid(spec);
  const Mat2& A = spec.A;
  ConcentrationResult r;
  r.switched = abs(A.b) + abs(A.d) < abs(A.a) + abs(A.c);
  // phi is the strip translated n^2 times, so one strip carries the sum.
  const Rational copies = strip_count_rational(spec);
  if (!r.switched) {
    BlockMap bm = build_block_map(spec, 1);
    r.energy_on_F = copies * energy_on(bm.phi, CellSet(bm.phi.mesh, bm.witness));
  } else {
    // S(x, y) = (y, x): build for S A S and conjugate back, S o phi' o S.
    const AffineMap2 swap{{0, 1, 1, 0}, {0, 0}};
    const BlockSpec swapped{{A.d, A.c, A.b, A.a}, spec.k};
    BlockMap bm = build_block_map(swapped, 1);
    const PwaMap phi = conjugate(bm.phi, swap, swap);
    r.energy_on_F = copies * energy_on(phi, CellSet(phi.mesh, bm.witness));
  }
  r.threshold = (Rational(1, 2) - Rational(1, spec.k)) * mat_norm_l1(A);
  r.holds = r.energy_on_F > r.threshold;
  r.deficit = r.holds ? Rational(0) : Rational(r.threshold - r.energy_on_F);
  return r;
}

AffineMap2 PlacedBlock::pre() const {
  const Rational inv = Rational(1) / square.side;
  return {{inv, 0, 0, inv}, {-inv * square.origin.x, -inv * square.origin.y}};
}

AffineMap2 PlacedBlock::post() const {
  return {{square.side, 0, 0, square.side}, image_origin};
}

Point2 PlacedBlock::evaluate(const Point2& p) const {
  return image_origin + square.side * block->evaluate(affine_apply(pre(), p));
}

Point2 PlacedBlock::evaluate_inverse(const Point2& w) const {
  const Rational inv = Rational(1) / square.side;
  return square.origin + square.side * block->evaluate_inverse(inv * (w - image_origin));
}

std::pair<PwaMap, CellSet> PropphinResult::materialize() const {
  const BlockSpec& spec = placed.block->spec();
  BlockMap bm = build_block_map(spec, spec.n() * spec.n());
  PwaMap f = conjugate(bm.phi, placed.pre(), placed.post());
  CellSet F(f.mesh, std::move(bm.witness));
  return {std::move(f), std::move(F)};
}

PropphinResult place_block(std::shared_ptr<const BlockTemplate> block, const AffineMap2& phi,
                           const AxisSquare& square, int n) {
  if (!(block->spec().A == phi.linear)) {
    throw std::invalid_argument("block was built for a different linear map");
  }
  if (square.side <= 0) throw std::invalid_argument("square side must be positive");
  PropphinResult r;
  r.placed = {std::move(block), square, affine_apply(phi, square.origin)};
  r.phi = phi;
  r.n = n;
  r.k = r.placed.block->spec().k;
  const BlockTemplate& t = *r.placed.block;
  const Rational s2 = square.side * square.side;

  r.var_phi = s2 * mat_norm_l1(phi.linear);
  r.var_block = s2 * t.energy();
  r.item1 = abs(r.var_block - r.var_phi) <= r.var_phi / n;

  // The strip boundary equals A (checked when the template was built), and
  // the placement turns A into phi; spot-check the placed corners and the
  // side vertices of the first and last strips.
  bool boundary = t.validate().ok();
  const ConvexPolygon poly = square.polygon();
  std::vector<Point2> probes(poly.vertices().begin(), poly.vertices().end());
  const Rational h = t.strip_height();
  const Rational delta = Rational(1) / (Rational(t.spec().n()) * Rational(t.spec().n()) * Rational(t.spec().k));
  for (const Rational& y : std::vector<Rational>{delta, h, 1 - h, 1 - h + delta}) {
    for (const Rational& x : std::vector<Rational>{0, 1}) {
      probes.push_back(square.origin + square.side * Point2{x, y});
    }
  }
  const Rational w = Rational(1) / Rational(t.spec().n());
  for (const Rational& x : std::vector<Rational>{w, 1 - w}) {
    for (const Rational& y : std::vector<Rational>{0, 1}) {
      probes.push_back(square.origin + square.side * Point2{x, y});
    }
  }
  for (const Point2& p : probes) {
    boundary = boundary && r.placed.evaluate(p) == affine_apply(phi, p);
  }
  r.item2 = boundary;

  r.area_ratio = s2 * t.witness_area() / s2;
  r.image_ratio = s2 * t.witness_image_area() / (s2 * det(phi.linear));
  r.item3 = r.area_ratio < Rational(1, n) && r.image_ratio > Rational(1) - Rational(1, n);
  return r;
}

PropphinResult propphin(const AffineMap2& phi, const AxisSquare& square, int n) {
  if (det(phi.linear) <= 0) throw std::domain_error("det(A) must be positive");
  if (n < 1) throw std::invalid_argument("n must be positive");
  const int cap = 4 * n + 16;
  for (int k = 2; k <= cap; ++k) {
    auto block = std::make_shared<const BlockTemplate>(BlockSpec{phi.linear, k});
    PropphinResult r = place_block(std::move(block), phi, square, n);
    if (r.ok()) return r;
  }
  throw std::runtime_error("parameter search failed");
}

}  // namespace pahomeo
