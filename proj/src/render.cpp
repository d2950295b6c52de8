#include "pahomeo/render.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace pahomeo {

namespace {

struct Frame {
  Rational x0, y0, x1, y1;
};

Frame frame_of(const std::vector<Point2>& pts) {
  Frame f{pts[0].x, pts[0].y, pts[0].x, pts[0].y};
  for (const Point2& p : pts) {
    f.x0 = std::min(f.x0, p.x);
    f.y0 = std::min(f.y0, p.y);
    f.x1 = std::max(f.x1, p.x);
    f.y1 = std::max(f.y1, p.y);
  }
  return f;
}

// SVG's y axis points down.
std::string pixel(const Point2& p, const Frame& f, const RenderStyle& s) {
  const Rational x = (p.x - f.x0) * s.scale + s.margin;
  const Rational y = (f.y1 - p.y) * s.scale + s.margin;
  return to_decimal(x) + "," + to_decimal(y);
}

void draw_group(std::ostringstream& out, const PwaMap& f, const CellSet* highlight, bool image,
                const Frame& frame, const RenderStyle& s, const Rational& dx) {
  out << "<g class=\"" << (image ? "image" : "domain") << '"';
  if (dx != 0) out << " transform=\"translate(" << to_decimal(dx) << ",0)\"";
  out << ">\n";
  for (std::size_t c = 0; c < f.mesh.cells.size(); ++c) {
    const auto ci = static_cast<CellIndex>(c);
    const bool hot = highlight && highlight->contains(ci);
    const std::string& fill = hot ? s.highlight : s.palette[c % s.palette.size()];
    out << "<polygon points=\"";
    bool first = true;
    for (const Point2& p : f.mesh.cell_points(ci)) {
      if (!first) out << ' ';
      first = false;
      out << pixel(image ? affine_apply(f.maps[c], p) : p, frame, s);
    }
    out << "\" fill=\"" << fill << "\"/>\n";
  }
  out << "</g>\n";
}

}  // namespace

RenderMode parse_render_mode(const std::string& name) {
  if (name == "domain") return RenderMode::Domain;
  if (name == "image") return RenderMode::Image;
  if (name == "side-by-side") return RenderMode::SideBySide;
  throw std::invalid_argument("unknown render mode '" + name + "' (domain, image, side-by-side)");
}

std::string render_svg(const PwaMap& f, const CellSet* highlight, RenderMode mode, const RenderStyle& style) {
  if (style.scale <= 0) throw std::invalid_argument("render scale must be positive");
  if (style.palette.empty()) throw std::invalid_argument("render palette is empty");
  if (highlight && highlight->owner_cells() != f.mesh.cells.size()) {
    throw std::invalid_argument("highlight set belongs to another mesh");
  }
  const Frame dom = frame_of(f.mesh.domain.vertices());
  std::vector<Point2> image_pts;
  if (mode != RenderMode::Domain) {
    for (const Point2& v : f.mesh.domain.vertices()) image_pts.push_back(evaluate(f, v));
  }
  const Frame img = image_pts.empty() ? dom : frame_of(image_pts);

  const Rational gap = style.margin;
  const Rational dom_w = (dom.x1 - dom.x0) * style.scale;
  const Rational img_w = (img.x1 - img.x0) * style.scale;
  const Rational dom_h = (dom.y1 - dom.y0) * style.scale;
  const Rational img_h = (img.y1 - img.y0) * style.scale;
  Rational width, height;
  switch (mode) {
    case RenderMode::Domain:
      width = dom_w;
      height = dom_h;
      break;
    case RenderMode::Image:
      width = img_w;
      height = img_h;
      break;
    case RenderMode::SideBySide:
      width = dom_w + gap + img_w;
      height = std::max(dom_h, img_h);
      break;
  }
  width += 2 * style.margin;
  height += 2 * style.margin;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << to_decimal(width) << "\" height=\""
      << to_decimal(height) << "\" viewBox=\"0 0 " << to_decimal(width) << ' ' << to_decimal(height) << "\">\n";
  out << "<g stroke=\"" << style.stroke << "\" stroke-width=\"" << style.stroke_width
      << "\" stroke-linejoin=\"round\">\n";
  switch (mode) {
    case RenderMode::Domain:
      draw_group(out, f, highlight, false, dom, style, 0);
      break;
    case RenderMode::Image:
      draw_group(out, f, highlight, true, img, style, 0);
      break;
    case RenderMode::SideBySide:
      draw_group(out, f, highlight, false, dom, style, 0);
      draw_group(out, f, highlight, true, img, style, dom_w + gap);
      break;
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace pahomeo
