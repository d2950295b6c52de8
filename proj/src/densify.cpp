#include "pahomeo/densify.hpp"

#include <algorithm>
#include <stdexcept>

namespace pahomeo {

namespace {

std::int64_t to_int64(const mpz_class& z) {
  if (!z.fits_slong_p()) throw std::overflow_error("grid index out of range");
  return z.get_si();
}

Rational dyadic(int q) {
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(q));
  return Rational(1) / Rational(p);
}

ConvexPolygon triangle_of(const Mesh& mesh, CellIndex c) { return mesh.cell_polygon(c); }

struct LevelCount {
  std::int64_t count = 0;
  std::vector<SquareRun> runs;
};

LevelCount count_level(const ConvexPolygon& t, const Rational& side, bool keep_runs) {
  Rational y_min = t[0].y;
  Rational y_max = t[0].y;
  for (const Point2& p : t.vertices()) {
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  }
  const std::int64_t row0 = to_int64(floor_to_integer(y_min / side));
  const std::int64_t row1 = to_int64(ceil_to_integer(y_max / side));
  LevelCount out;
  for (std::int64_t row = row0; row < row1; ++row) {
    const auto cols = packed_columns(t, side, row);
    if (!cols) continue;
    out.count += cols->second - cols->first + 1;
    if (keep_runs) out.runs.push_back({row, cols->first, cols->second});
  }
  return out;
}

std::optional<AxisSquare> first_square(const ConvexPolygon& t, const Rational& side) {
  Rational y_min = t[0].y;
  Rational y_max = t[0].y;
  for (const Point2& p : t.vertices()) {
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  }
  const std::int64_t row1 = to_int64(ceil_to_integer(y_max / side));
  for (std::int64_t row = to_int64(floor_to_integer(y_min / side)); row < row1; ++row) {
    if (const auto cols = packed_columns(t, side, row)) {
      return AxisSquare{{Rational(cols->first) * side, Rational(row) * side}, side};
    }
  }
  return std::nullopt;
}

bool cells_small(const PwaMap& g, const Rational& limit) {
  for (std::size_t c = 0; c < g.mesh.cells.size(); ++c) {
    std::vector<Point2> pts = g.mesh.cell_points(static_cast<CellIndex>(c));
    if (squared_diameter(pts) >= limit) return false;
    for (Point2& p : pts) p = affine_apply(g.maps[c], p);
    if (squared_diameter(pts) >= limit) return false;
  }
  return true;
}

std::string mat_key(const Mat2& m) {
  return to_string(m.a) + ' ' + to_string(m.b) + ' ' + to_string(m.c) + ' ' + to_string(m.d);
}

void require_unit_identity(const PwaMap& g) {
  if (!(g.mesh.domain == ConvexPolygon::unit_square())) {
    throw std::invalid_argument("g must be defined on the unit square");
  }
  const ValidationReport r = validate_homeomorphism(g);
  if (!r.ok()) {
    throw std::invalid_argument("g is not a homeomorphism: " +
                                (r.failures.empty() ? std::string("?") : r.failures.front()));
  }
  if (!is_identity_on_boundary(g)) throw std::invalid_argument("g is not the identity on the boundary");
}

}  // namespace

PwaMap triangulate_affine_mesh(const PwaMap& g) {
  PwaMap out{Mesh{g.mesh.vertices, {}, g.mesh.domain}, {}};
  for (std::size_t c = 0; c < g.mesh.cells.size(); ++c) {
    const auto& cell = g.mesh.cells[c];
    const std::vector<Point2> pts = g.mesh.cell_points(static_cast<CellIndex>(c));
    const std::size_t corners = strip_collinear(pts).size();
    if (cell.size() == 3) {
      out.mesh.cells.push_back(cell);
      out.maps.push_back(g.maps[c]);
    } else if (corners == cell.size()) {
      for (std::size_t i = 1; i + 1 < cell.size(); ++i) {
        out.mesh.cells.push_back({cell[0], cell[i], cell[i + 1]});
        out.maps.push_back(g.maps[c]);
      }
    } else {
      // Extra vertices on the edges: a fan from an edge vertex would create
      // flat triangles, so fan from the centroid of the corners.
      Point2 centre{0, 0};
      const std::vector<Point2> cs = strip_collinear(pts);
      for (const Point2& p : cs) centre = centre + p;
      centre = Rational(1, static_cast<long>(cs.size())) * centre;
      const auto ci = static_cast<VertexIndex>(out.mesh.vertices.size());
      out.mesh.vertices.push_back(centre);
      for (std::size_t i = 0; i < cell.size(); ++i) {
        out.mesh.cells.push_back({ci, cell[i], cell[(i + 1) % cell.size()]});
        out.maps.push_back(g.maps[c]);
      }
    }
  }
  return out;
}

int refinement_rounds(const PwaMap& g, const Rational& epsilon) {
  if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  const Rational limit = (epsilon / 8) * (epsilon / 8);
  // Each round quarters both squared diameters.
  Rational worst = 0;
  for (std::size_t c = 0; c < g.mesh.cells.size(); ++c) {
    if (g.mesh.cells[c].size() != 3) throw std::invalid_argument("refinement needs a triangulation");
    std::vector<Point2> pts = g.mesh.cell_points(static_cast<CellIndex>(c));
    worst = std::max(worst, squared_diameter(pts));
    for (Point2& p : pts) p = affine_apply(g.maps[c], p);
    worst = std::max(worst, squared_diameter(pts));
  }
  int rounds = 0;
  while (worst >= limit) {
    worst /= 4;
    ++rounds;
  }
  return rounds;
}

PwaMap refine_for_diameter(const PwaMap& g, const Rational& epsilon) {
  const int rounds = refinement_rounds(g, epsilon);
  PwaMap out = g;
  for (int r = 0; r < rounds; ++r) out = red_refine(out);
  if (!cells_small(out, (epsilon / 8) * (epsilon / 8))) {
    throw std::logic_error("refinement did not reach the diameter bound");
  }
  return out;
}

int choose_m(const PwaMap& g, const Rational& f_var_target, const Rational& epsilon,
             const Rational& M, int n) {
  const Rational var = energy(g);
  if (var >= M) throw std::domain_error("outside space X");
  const Rational half_eps = epsilon / 2;
  const Rational target = Rational(1) / (M - f_var_target);
  for (int m = 2 * n + 1; m < 1000000; ++m) {
    bool ok = true;
    for (int sign : {-1, 1}) {
      const Rational C = Rational(1) + Rational(sign, m);
      const Rational cv = C * var;
      if (cv >= M || abs(target - Rational(1) / (M - cv)) >= half_eps) ok = false;
    }
    if (ok) return m;
  }
  throw std::domain_error("variation too close to M");
}

std::vector<AxisSquare> SquarePacking::squares() const {
  std::vector<AxisSquare> out;
  for (const SquareRun& r : runs) {
    for (std::int64_t i = r.first; i <= r.last; ++i) {
      out.push_back({{Rational(i) * side, Rational(r.row) * side}, side});
    }
  }
  return out;
}

std::optional<std::pair<std::int64_t, std::int64_t>> packed_columns(const ConvexPolygon& t,
                                                                     const Rational& side,
                                                                     std::int64_t row) {
  const Rational ys[2] = {Rational(row) * side, Rational(row + 1) * side};
  std::optional<Rational> lo;  // left side of the square >= lo
  std::optional<Rational> hi;  // right side <= hi
  for (std::size_t e = 0; e < t.size(); ++e) {
    const Point2& a = t[e];
    const Point2& b = t[(e + 1) % t.size()];
    const Rational dx = b.x - a.x;
    const Rational dy = b.y - a.y;
    for (const Rational& y : ys) {
      if (dy == 0) {
        if (dx * (y - a.y) < 0) return std::nullopt;
        continue;
      }
      // The edge's supporting line meets height y at x*; left of the edge is inside.
      Rational xs = a.x + dx * (y - a.y) / dy;
      if (dy < 0) {
        if (!lo || xs > *lo) lo = std::move(xs);
      } else {
        if (!hi || xs < *hi) hi = std::move(xs);
      }
    }
  }
  if (!lo || !hi) return std::nullopt;
  const std::int64_t first = to_int64(ceil_to_integer(*lo / side));
  const std::int64_t last = to_int64(floor_to_integer(*hi / side)) - 1;
  if (first > last) return std::nullopt;
  return std::make_pair(first, last);
}

SquarePacking pack_squares(const ConvexPolygon& triangle, int m, bool keep_runs) {
  if (m < 2) throw std::invalid_argument("m must be at least 2");
  const Rational target = (Rational(1) - Rational(1, m)) * polygon_area(triangle);
  for (int q = 0; q < 62; ++q) {
    const Rational side = dyadic(q);
    LevelCount lc = count_level(triangle, side, keep_runs);
    if (Rational(lc.count) * side * side >= target) {
      return {q, side, lc.count, std::move(lc.runs)};
    }
  }
  throw std::logic_error("square packing did not converge");
}

PatchedMap::PatchedMap(PwaMap base, std::vector<Patch> patches)
    : base_(std::make_shared<const PwaMap>(std::move(base))), patches_(std::move(patches)) {
  base_inverse_ = std::make_shared<const PwaMap>(inverse(*base_));
  patch_index_.assign(base_->mesh.cells.size(), -1);
  for (std::size_t i = 0; i < patches_.size(); ++i) {
    const Patch& p = patches_[i];
    if (p.cell >= patch_index_.size() || patch_index_[p.cell] != -1 || !p.block) {
      throw std::invalid_argument("patch list does not match the base mesh");
    }
    patch_index_[p.cell] = static_cast<std::int32_t>(i);
  }
  locate_ = std::make_shared<const PointLocator>(base_->mesh);
  locate_inverse_ = std::make_shared<const PointLocator>(base_inverse_->mesh);
}

std::int64_t PatchedMap::square_count() const {
  std::int64_t total = 0;
  for (const Patch& p : patches_) total += p.packing.count;
  return total;
}

const Patch* PatchedMap::patch_of(CellIndex cell) const {
  const std::int32_t i = patch_index_[cell];
  return i < 0 ? nullptr : &patches_[static_cast<std::size_t>(i)];
}

std::optional<AxisSquare> PatchedMap::square_at(const Patch& patch, const Point2& p) const {
  const Rational& s = patch.packing.side;
  const std::int64_t row = to_int64(floor_to_integer(p.y / s));
  const std::int64_t col = to_int64(floor_to_integer(p.x / s));
  const auto cols = packed_columns(triangle_of(base_->mesh, patch.cell), s, row);
  if (!cols || col < cols->first || col > cols->second) return std::nullopt;
  return AxisSquare{{Rational(col) * s, Rational(row) * s}, s};
}

PlacedBlock PatchedMap::placed(const Patch& patch, const AxisSquare& square) const {
  return {patch.block, square, affine_apply(base_->maps[patch.cell], square.origin)};
}

Point2 PatchedMap::evaluate(const Point2& p) const {
  const auto c = locate_->locate(p);
  if (!c) throw std::out_of_range("point outside the domain");
  if (const Patch* patch = patch_of(*c)) {
    if (const auto sq = square_at(*patch, p)) return placed(*patch, *sq).evaluate(p);
  }
  return affine_apply(base_->maps[*c], p);
}

Point2 PatchedMap::evaluate_inverse(const Point2& w) const {
  const auto c = locate_inverse_->locate(w);
  if (!c) throw std::out_of_range("point outside the image domain");
  const Point2 p = affine_apply(base_inverse_->maps[*c], w);
  if (const Patch* patch = patch_of(*c)) {
    if (const auto sq = square_at(*patch, p)) return placed(*patch, *sq).evaluate_inverse(w);
  }
  return p;
}

Rational PatchedMap::energy_outside() const {
  Rational total = pahomeo::energy(*base_);
  for (const Patch& p : patches_) {
    total -= p.packing.covered_area() * mat_norm_l1(base_->maps[p.cell].linear);
  }
  return total;
}

Rational PatchedMap::energy_blocks() const {
  Rational total = 0;
  for (const Patch& p : patches_) total += p.packing.covered_area() * p.block->energy();
  return total;
}

Rational PatchedMap::witness_area() const {
  Rational total = 0;
  for (const Patch& p : patches_) total += p.packing.covered_area() * p.block->witness_area();
  return total;
}

Rational PatchedMap::witness_image_area() const {
  Rational total = 0;
  for (const Patch& p : patches_) total += p.packing.covered_area() * p.block->witness_image_area();
  return total;
}

Rational PatchedMap::sup_forward_sq() const {
  // On a square f - g = s (block - L)((p - o)/s); elsewhere f = g.
  Rational best = 0;
  for (const Patch& p : patches_) {
    best = std::max(best, Rational(p.packing.side * p.packing.side * p.block->deviation_sq()));
  }
  return best;
}

Rational PatchedMap::sup_inverse_sq() const {
  Rational best = 0;
  for (const Patch& p : patches_) {
    best = std::max(best, Rational(p.packing.side * p.packing.side * p.block->inverse_deviation_sq()));
  }
  return best;
}

ValidationReport PatchedMap::validate() const {
  ValidationReport r = validate_homeomorphism(*base_);
  if (!is_identity_on_boundary(*base_)) {
    r.boundary_ok = false;
    r.failures.push_back("boundary: base map is not the identity on the boundary");
  }
  for (const Patch& p : patches_) {
    const std::string where = "patch on cell " + std::to_string(p.cell) + ": ";
    if (base_->mesh.cells[p.cell].size() != 3) {
      r.structure_ok = false;
      r.failures.push_back(where + "base cell is not a triangle");
      continue;
    }
    const ValidationReport b = p.block->validate();
    if (!b.ok()) {
      r.structure_ok = false;
      r.failures.push_back(where + "block strip invalid");
    }
    const AffineMap2& g = base_->maps[p.cell];
    if (!(p.block->spec().A == g.linear)) {
      r.structure_ok = false;
      r.failures.push_back(where + "block built for another linear map");
    }
    const ConvexPolygon t = triangle_of(base_->mesh, p.cell);
    if (p.packing.side != dyadic(p.packing.q) || count_level(t, p.packing.side, false).count != p.packing.count) {
      r.structure_ok = false;
      r.failures.push_back(where + "square count differs from the grid level");
      continue;
    }
    const auto sq = first_square(t, p.packing.side);
    if (!sq) continue;
    const ConvexPolygon sq_poly = sq->polygon();
    for (const Point2& corner : sq_poly.vertices()) {
      if (!t.contains(corner)) {
        r.structure_ok = false;
        r.failures.push_back(where + "square leaves its triangle");
      }
    }
    if (!place_block(p.block, g, *sq, 2).item2) {
      r.boundary_ok = false;
      r.failures.push_back(where + "block differs from g on the square boundary");
    }
  }
  return r;
}

std::pair<PwaMap, CellSet> PatchedMap::materialize() const {
  VertexPool pool;
  Mesh mesh{{}, {}, base_->mesh.domain};
  std::vector<AffineMap2> maps;
  std::vector<CellIndex> witness;

  auto add_cell = [&](const std::vector<Point2>& pts, const AffineMap2& map) {
    std::vector<VertexIndex> cell;
    cell.reserve(pts.size());
    for (const Point2& p : pts) cell.push_back(pool.add(p));
    mesh.cells.push_back(std::move(cell));
    maps.push_back(map);
  };

  std::map<const BlockTemplate*, BlockResult> expanded;
  for (std::size_t c = 0; c < base_->mesh.cells.size(); ++c) {
    const auto ci = static_cast<CellIndex>(c);
    const Patch* patch = patch_of(ci);
    const AffineMap2& g = base_->maps[c];
    if (!patch) {
      add_cell(base_->mesh.cell_points(ci), g);
      continue;
    }
    auto it = expanded.find(patch->block.get());
    if (it == expanded.end()) it = expanded.emplace(patch->block.get(), patch->block->materialize()).first;
    const BlockResult& block = it->second;

    const ConvexPolygon t = triangle_of(base_->mesh, ci);
    const std::vector<Point2> tp = base_->mesh.cell_points(ci);
    const Rational& s = patch->packing.side;
    Rational x0 = t[0].x, x1 = t[0].x, y0 = t[0].y, y1 = t[0].y;
    for (const Point2& p : t.vertices()) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    const std::int64_t c0 = to_int64(floor_to_integer(x0 / s));
    const std::int64_t c1 = to_int64(ceil_to_integer(x1 / s));
    const std::int64_t r0 = to_int64(floor_to_integer(y0 / s));
    const std::int64_t r1 = to_int64(ceil_to_integer(y1 / s));
    for (std::int64_t row = r0; row < r1; ++row) {
      const auto cols = packed_columns(t, s, row);
      for (std::int64_t col = c0; col < c1; ++col) {
        const AxisSquare sq{{Rational(col) * s, Rational(row) * s}, s};
        if (cols && col >= cols->first && col <= cols->second) {
          const PlacedBlock pb = placed(*patch, sq);
          const PwaMap local = conjugate(block.phi, pb.pre(), pb.post());
          const auto offset = static_cast<CellIndex>(mesh.cells.size());
          for (std::size_t j = 0; j < local.mesh.cells.size(); ++j) {
            add_cell(local.mesh.cell_points(static_cast<CellIndex>(j)), local.maps[j]);
          }
          for (CellIndex w : block.F.indices()) witness.push_back(offset + w);
          continue;
        }
        const std::vector<Point2> piece = strip_collinear(clip_loop(tp, sq.polygon()));
        if (piece.size() >= 3 && loop_area(piece) > 0) add_cell(piece, g);
      }
    }
  }
  mesh.vertices = pool.release();
  PwaMap f{make_conforming(std::move(mesh)), std::move(maps)};
  CellSet F(f.mesh, std::move(witness));
  return {std::move(f), std::move(F)};
}

PatchedMap build_patched_map(PwaMap base, int m) {
  std::map<std::string, std::shared_ptr<const BlockTemplate>> blocks;
  std::vector<Patch> patches;
  for (std::size_t c = 0; c < base.mesh.cells.size(); ++c) {
    const auto ci = static_cast<CellIndex>(c);
    if (base.mesh.cells[c].size() != 3) throw std::invalid_argument("base mesh must be a triangulation");
    const ConvexPolygon t = triangle_of(base.mesh, ci);
    SquarePacking packing = pack_squares(t, m, false);
    const AxisSquare sq = *first_square(t, packing.side);
    const AffineMap2& g = base.maps[c];
    // The items are invariant under moving and scaling the square, so one
    // search per linear part suffices; each placement is still checked.
    auto& block = blocks[mat_key(g.linear)];
    if (!block) block = propphin(g, sq, m).placed.block;
    if (!place_block(block, g, sq, m).ok()) {
      throw std::logic_error("pipeline postcondition violated: block items fail on cell " + std::to_string(c));
    }
    patches.push_back({ci, std::move(packing), block});
  }
  return PatchedMap(std::move(base), std::move(patches));
}

Certificate certify_An(const PwaMap& f, const CellSet& E, int n) {
  if (n < 1) throw std::invalid_argument("n must be positive");
  Certificate c;
  c.n = n;
  c.area_F = area_of(f.mesh, E);
  c.image_area_F = image_area_of(f, E);
  c.var_f = energy(f);
  c.in_A_n = c.area_F < Rational(1, n) && c.image_area_F > Rational(1) - Rational(1, n);
  return c;
}

std::vector<ConvexPolygon> witness_triangles(const PwaMap& f, const CellSet& E) {
  return split_to_triangles(f.mesh, E);
}

Certificate certify_patched(const PatchedMap& f, const PwaMap& g, const DensifySpec& spec, int m) {
  Certificate c;
  c.n = spec.n;
  c.epsilon = spec.epsilon;
  c.area_F = f.witness_area();
  c.image_area_F = f.witness_image_area();
  c.var_f = f.energy();
  c.var_g = energy(g);
  c.sup_forward_sq = f.sup_forward_sq();
  c.sup_inverse_sq = f.sup_inverse_sq();
  c.in_A_n = c.area_F < Rational(1, spec.n) && c.image_area_F > Rational(1) - Rational(1, spec.n);
  c.variation_within = abs(c.var_f - c.var_g) <= c.var_g / m;
  const Rational quarter = spec.epsilon / 4;
  c.forward_within = c.sup_forward_sq < quarter * quarter;
  c.inverse_within = c.sup_inverse_sq < quarter * quarter;
  if (c.var_f < spec.M && c.var_g < spec.M) {
    const MetricReport d = make_metric_report(c.sup_forward_sq, c.sup_inverse_sq, c.var_g, c.var_f, spec.M);
    c.variation_term = d.variation_term;
    c.d_bound = d.d_value;
    c.variation_term_within = c.variation_term < spec.epsilon / 2;
    c.d_certified = c.d_bound < spec.epsilon;
  }
  return c;
}

namespace {

bool certificate_passes(const Certificate& c) {
  return c.in_A_n && c.variation_within && c.forward_within && c.inverse_within &&
         c.variation_term_within && c.d_certified;
}

void require_valid_spec(const DensifySpec& spec) {
  if (spec.n < 2) throw std::invalid_argument("n must be at least 2");
  if (spec.epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
  if (spec.M <= 2) throw std::invalid_argument("M must exceed 2");
  require_unit_identity(spec.g);
  if (energy(spec.g) >= spec.M) throw std::domain_error("outside space X: Var(g) >= M");
}

}  // namespace

DensifyResult densify(const DensifySpec& spec) {
  require_valid_spec(spec);
  const PwaMap tri = triangulate_affine_mesh(spec.g);
  const int rounds = refinement_rounds(tri, spec.epsilon);
  const Rational var_g = energy(spec.g);
  const int m = choose_m(spec.g, var_g, spec.epsilon, spec.M, spec.n);
  PatchedMap f = build_patched_map(refine_for_diameter(tri, spec.epsilon), m);
  Certificate cert = certify_patched(f, spec.g, spec, m);
  if (!certificate_passes(cert) || !f.validate().ok()) {
    throw std::logic_error("pipeline postcondition violated");
  }
  return {spec, m, rounds, std::move(f), std::move(cert)};
}

std::vector<NestedRow> nested_demo(const PwaMap& g, const Rational& M, int depth, const Rational& epsilon) {
  if (depth < 0 || depth > 8) throw std::invalid_argument("depth must be between 0 and 8");
  std::vector<NestedRow> rows;
  for (int k = 1; k <= depth; ++k) {
    const int n = 1 << k;
    const DensifyResult r = densify({g, n, epsilon, M});
    const Rational bound(1, n);
    rows.push_back({n, r.m, r.certificate.area_F, r.certificate.image_area_F,
                    r.certificate.area_F < bound && r.certificate.image_area_F > 1 - bound});
  }
  return rows;
}

PwaMap star_homeomorphism(const Point2& center_image) {
  const Rational h(1, 2);
  Mesh mesh{{{0, 0}, {h, 0}, {1, 0}, {1, h}, {1, 1}, {h, 1}, {0, 1}, {0, h}, {h, h}},
            {},
            ConvexPolygon::unit_square()};
  for (VertexIndex i = 0; i < 8; ++i) mesh.cells.push_back({8, i, (i + 1) % 8});
  std::vector<Point2> values = mesh.vertices;
  values[8] = center_image;
  return from_vertex_values(std::move(mesh), values);
}

PwaMap identity_two_triangles() {
  return identity_map(Mesh{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{0, 1, 2}, {0, 2, 3}}, ConvexPolygon::unit_square()});
}

Json certificate_json(const Certificate& c) {
  Json j = Json::object();
  j["n"] = c.n;
  j["area_F"] = rational_json(c.area_F);
  j["image_area_F"] = rational_json(c.image_area_F);
  j["var_f"] = rational_json(c.var_f);
  j["var_g"] = rational_json(c.var_g);
  j["sup_forward_sq"] = rational_json(c.sup_forward_sq);
  j["sup_inverse_sq"] = rational_json(c.sup_inverse_sq);
  j["variation_term"] = rational_json(c.variation_term);
  j["in_A_n"] = c.in_A_n;
  j["d_bound"] = rational_json(c.d_bound);
  j["epsilon"] = rational_json(c.epsilon);
  j["variation_within"] = c.variation_within;
  j["forward_within"] = c.forward_within;
  j["inverse_within"] = c.inverse_within;
  j["variation_term_within"] = c.variation_term_within;
  j["d_certified"] = c.d_certified;
  return j;
}

Json densify_json(const DensifyResult& r) {
  std::vector<const BlockTemplate*> order;
  Json blocks = Json::array();
  Json patches = Json::array();
  for (const Patch& p : r.f.patches()) {
    auto it = std::find(order.begin(), order.end(), p.block.get());
    if (it == order.end()) {
      order.push_back(p.block.get());
      Json jb = mat_json(p.block->spec().A);
      jb["k"] = p.block->spec().k;
      blocks.push_back(std::move(jb));
      it = order.end() - 1;
    }
    Json jp = Json::object();
    jp["cell"] = p.cell;
    jp["q"] = p.packing.q;
    jp["count"] = p.packing.count;
    jp["block"] = it - order.begin();
    patches.push_back(std::move(jp));
  }
  Json j = Json::object();
  Json spec = Json::object();
  spec["n"] = r.spec.n;
  spec["epsilon"] = rational_json(r.spec.epsilon);
  spec["M"] = rational_json(r.spec.M);
  spec["g"] = to_json(r.spec.g);
  j["spec"] = std::move(spec);
  j["m"] = r.m;
  j["rounds"] = r.rounds;
  Json f = Json::object();
  f["base"] = to_json(r.f.base());
  f["blocks"] = std::move(blocks);
  f["patches"] = std::move(patches);
  j["f"] = std::move(f);
  Json F = Json::object();
  F["description"] = "witness cells (R' copies) of every block placed on a packed square";
  F["squares"] = r.f.square_count();
  j["F"] = std::move(F);
  j["certificate"] = certificate_json(r.certificate);
  return j;
}

DensifyResult densify_from_json(const Json& j) {
  auto need = [](const Json& o, const char* key) -> const Json& {
    if (!o.is_object() || !o.contains(key)) {
      throw std::invalid_argument(std::string("malformed JSON: missing \"") + key + "\"");
    }
    return o.at(key);
  };
  auto integer = [&](const Json& o, const char* key) {
    const Json& v = need(o, key);
    if (!v.is_number_integer()) throw std::invalid_argument(std::string("malformed JSON: ") + key + " must be an integer");
    return v.get<std::int64_t>();
  };
  const Json& js = need(j, "spec");
  DensifySpec spec{pwa_from_json(need(js, "g")), static_cast<int>(integer(js, "n")),
                   rational_from_json(need(js, "epsilon")), rational_from_json(need(js, "M"))};
  require_valid_spec(spec);
  const int m = static_cast<int>(integer(j, "m"));
  if (m <= 2 * spec.n) throw std::invalid_argument("malformed JSON: m must exceed 2n");
  const Json& jf = need(j, "f");
  PwaMap base = pwa_from_json(need(jf, "base"));
  std::vector<std::shared_ptr<const BlockTemplate>> blocks;
  const Json& jb = need(jf, "blocks");
  if (!jb.is_array()) throw std::invalid_argument("malformed JSON: blocks must be an array");
  for (const Json& b : jb) {
    blocks.push_back(std::make_shared<const BlockTemplate>(BlockSpec{mat_from_json(b), static_cast<int>(integer(b, "k"))}));
  }
  std::vector<Patch> patches;
  const Json& jp = need(jf, "patches");
  if (!jp.is_array()) throw std::invalid_argument("malformed JSON: patches must be an array");
  for (const Json& p : jp) {
    const std::int64_t cell = integer(p, "cell");
    const std::int64_t q = integer(p, "q");
    const std::int64_t b = integer(p, "block");
    if (cell < 0 || static_cast<std::size_t>(cell) >= base.mesh.cells.size() || q < 0 || q >= 62 || b < 0 ||
        static_cast<std::size_t>(b) >= blocks.size() || base.mesh.cells[static_cast<std::size_t>(cell)].size() != 3) {
      throw std::invalid_argument("malformed JSON: patch out of range");
    }
    const ConvexPolygon t = triangle_of(base.mesh, static_cast<CellIndex>(cell));
    SquarePacking packing{static_cast<int>(q), dyadic(static_cast<int>(q)), 0, {}};
    packing.count = count_level(t, packing.side, false).count;
    if (packing.count != integer(p, "count")) throw std::invalid_argument("malformed JSON: square count mismatch");
    patches.push_back({static_cast<CellIndex>(cell), std::move(packing), blocks[static_cast<std::size_t>(b)]});
  }
  PatchedMap f(std::move(base), std::move(patches));
  Certificate cert = certify_patched(f, spec.g, spec, m);
  const int rounds = j.contains("rounds") && j.at("rounds").is_number_integer() ? j.at("rounds").get<int>() : 0;
  return {std::move(spec), m, rounds, std::move(f), std::move(cert)};
}

}  // namespace pahomeo
