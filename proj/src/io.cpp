#include "pahomeo/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pahomeo {

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw std::invalid_argument("malformed JSON: " + what);
}

const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) malformed(std::string("missing \"") + key + "\"");
  return j.at(key);
}

}  // namespace

Json rational_json(const Rational& q) { return to_string(q); }

Rational rational_from_json(const Json& j) {
  if (!j.is_string()) malformed("rational must be a \"p/q\" string");
  return parse_rational(j.get<std::string>());
}

Json point_json(const Point2& p) { return Json::array({rational_json(p.x), rational_json(p.y)}); }

Point2 point_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) malformed("point must be a two-element array");
  return {rational_from_json(j[0]), rational_from_json(j[1])};
}

Json mat_json(const Mat2& m) {
  Json j = Json::object();
  j["a"] = rational_json(m.a);
  j["b"] = rational_json(m.b);
  j["c"] = rational_json(m.c);
  j["d"] = rational_json(m.d);
  return j;
}

Mat2 mat_from_json(const Json& j) {
  return {rational_from_json(field(j, "a")), rational_from_json(field(j, "b")),
          rational_from_json(field(j, "c")), rational_from_json(field(j, "d"))};
}

Json to_json(const PwaMap& f) {
  Json vertices = Json::array();
  for (const Point2& p : f.mesh.vertices) vertices.push_back(point_json(p));
  Json cells = Json::array();
  for (const auto& cell : f.mesh.cells) cells.push_back(cell);
  Json maps = Json::array();
  for (const AffineMap2& m : f.maps) {
    Json jm = mat_json(m.linear);
    jm["tx"] = rational_json(m.translation.x);
    jm["ty"] = rational_json(m.translation.y);
    maps.push_back(std::move(jm));
  }
  Json domain = Json::array();
  for (const Point2& p : f.mesh.domain.vertices()) domain.push_back(point_json(p));
  Json j = Json::object();
  j["vertices"] = std::move(vertices);
  j["cells"] = std::move(cells);
  j["maps"] = std::move(maps);
  j["domain"] = std::move(domain);
  return j;
}

PwaMap pwa_from_json(const Json& j) {
  const Json& jv = field(j, "vertices");
  const Json& jc = field(j, "cells");
  const Json& jm = field(j, "maps");
  const Json& jd = field(j, "domain");
  if (!jv.is_array() || !jc.is_array() || !jm.is_array() || !jd.is_array()) {
    malformed("vertices, cells, maps and domain must be arrays");
  }
  std::vector<Point2> domain;
  for (const Json& p : jd) domain.push_back(point_from_json(p));
  std::optional<ConvexPolygon> dom;
  try {
    dom.emplace(std::move(domain));
  } catch (const std::invalid_argument& e) {
    malformed(std::string("domain: ") + e.what());
  }
  Mesh mesh{{}, {}, *dom};
  for (const Json& p : jv) mesh.vertices.push_back(point_from_json(p));
  for (const Json& c : jc) {
    if (!c.is_array() || c.size() < 3) malformed("cell must list at least three vertex indices");
    std::vector<VertexIndex> cell;
    for (const Json& v : c) {
      if (!v.is_number_unsigned() || v.get<std::uint64_t>() >= mesh.vertices.size()) {
        malformed("cell vertex index out of range");
      }
      cell.push_back(v.get<VertexIndex>());
    }
    mesh.cells.push_back(std::move(cell));
  }
  if (jm.size() != mesh.cells.size()) malformed("one map per cell required");
  std::vector<AffineMap2> maps;
  for (const Json& m : jm) {
    maps.push_back({mat_from_json(m), {rational_from_json(field(m, "tx")), rational_from_json(field(m, "ty"))}});
  }
  return {std::move(mesh), std::move(maps)};
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(1) << '\n';
}

}  // namespace pahomeo
