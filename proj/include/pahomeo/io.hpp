#pragma once

// JSON persistence. Rationals are always "p/q" strings.

#include "pahomeo/pwa.hpp"

#include "json.hpp"

namespace pahomeo {

using Json = nlohmann::ordered_json;

Json rational_json(const Rational& q);
Rational rational_from_json(const Json& j);
Json point_json(const Point2& p);
Point2 point_from_json(const Json& j);
Json mat_json(const Mat2& m);
Mat2 mat_from_json(const Json& j);

/// {"vertices", "cells", "maps", "domain"}
Json to_json(const PwaMap& f);

/// Throws std::invalid_argument on malformed input (shape, rationals,
/// indices, map count, non-convex domain).
PwaMap pwa_from_json(const Json& j);

/// Reads and parses a file. Throws std::invalid_argument on I/O or parse
/// errors.
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

}  // namespace pahomeo
