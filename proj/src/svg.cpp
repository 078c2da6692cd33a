#include "pinnstab/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace pinnstab {

namespace {

constexpr const char* kSuccessColor = "#2a9d3f";
constexpr const char* kFailureColor = "#d62828";

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Maps data coordinates onto a panel rectangle (y axis pointing up).
struct Panel {
  double left, top, width, height;
  double x_min, x_max, y_min, y_max;

  double px(double x) const { return left + (x - x_min) / (x_max - x_min) * width; }
  double py(double y) const { return top + height - (y - y_min) / (y_max - y_min) * height; }
};

struct Bounds {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity(), y1 = -std::numeric_limits<double>::infinity();

  void add(double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  }
  void finish() {
    if (!std::isfinite(x0)) x0 = -1, x1 = 1, y0 = -1, y1 = 1;
    const double px = 0.05 * std::max(x1 - x0, 1e-3), py = 0.05 * std::max(y1 - y0, 1e-3);
    x0 -= px, x1 += px, y0 -= py, y1 += py;
  }
};

/// Point of a trajectory in plot coordinates: phase plane for planar
/// systems, (t, x) otherwise.
std::pair<double, double> plot_point(const Trajectory& traj, Eigen::Index i) {
  if (traj.states.rows() >= 2) return {traj.states(0, i), traj.states(1, i)};
  return {traj.times[static_cast<std::size_t>(i)], traj.states(0, i)};
}

void polyline(std::ostringstream& out, const Panel& p, const Trajectory& traj, const char* color, double opacity) {
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" stroke-opacity=\"" << num(opacity)
      << "\" points=\"";
  // Thin long trajectories to at most ~400 vertices.
  const Eigen::Index stride = std::max<Eigen::Index>(1, traj.size() / 400);
  bool first = true;
  for (Eigen::Index i = 0; i < traj.size(); i += stride) {
    auto [x, y] = plot_point(traj, i);
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    if (!first) out << ' ';
    out << num(p.px(x)) << ',' << num(p.py(y));
    first = false;
  }
  out << "\"/>\n";
}

void frame(std::ostringstream& out, const Panel& p, const std::string& title, const std::string& x_label,
           const std::string& y_label) {
  out << "<rect x=\"" << num(p.left) << "\" y=\"" << num(p.top) << "\" width=\"" << num(p.width) << "\" height=\""
      << num(p.height) << "\" fill=\"white\" stroke=\"#333\"/>\n";
  out << "<text x=\"" << num(p.left + p.width / 2) << "\" y=\"" << num(p.top - 8)
      << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  out << "<text x=\"" << num(p.left + p.width / 2) << "\" y=\"" << num(p.top + p.height + 32)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(x_label) << "</text>\n";
  out << "<text x=\"" << num(p.left - 34) << "\" y=\"" << num(p.top + p.height / 2)
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 " << num(p.left - 34) << ' '
      << num(p.top + p.height / 2) << ")\">" << escape(y_label) << "</text>\n";
  out << "<text x=\"" << num(p.left) << "\" y=\"" << num(p.top + p.height + 16) << "\" font-size=\"10\">"
      << num(p.x_min) << "</text>\n";
  out << "<text x=\"" << num(p.left + p.width) << "\" y=\"" << num(p.top + p.height + 16)
      << "\" text-anchor=\"end\" font-size=\"10\">" << num(p.x_max) << "</text>\n";
  out << "<text x=\"" << num(p.left - 4) << "\" y=\"" << num(p.top + p.height) << "\" text-anchor=\"end\" "
      << "font-size=\"10\">" << num(p.y_min) << "</text>\n";
  out << "<text x=\"" << num(p.left - 4) << "\" y=\"" << num(p.top + 10) << "\" text-anchor=\"end\" "
      << "font-size=\"10\">" << num(p.y_max) << "</text>\n";
}

void open_clip(std::ostringstream& out, const Panel& p, const std::string& id) {
  out << "<clipPath id=\"" << id << "\"><rect x=\"" << num(p.left) << "\" y=\"" << num(p.top) << "\" width=\""
      << num(p.width) << "\" height=\"" << num(p.height) << "\"/></clipPath>\n";
  out << "<g clip-path=\"url(#" << id << ")\">\n";
}

}  // namespace

std::string render_records_svg(const std::vector<RunRecord>& records, const std::string& title) {
  Bounds b;
  bool planar = false;
  for (const auto& r : records) {
    if (!r.trajectory) continue;
    planar = r.trajectory->states.rows() >= 2;
    for (Eigen::Index i = 0; i < r.trajectory->size(); ++i) {
      auto [x, y] = plot_point(*r.trajectory, i);
      b.add(x, y);
    }
  }
  b.finish();
  const Panel p{60, 40, 520, 400, b.x0, b.x1, b.y0, b.y1};
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"620\" height=\"500\" viewBox=\"0 0 620 500\">\n";
  frame(out, p, title.empty() ? (records.empty() ? std::string("runs") : records.front().config.system) : title,
        planar ? "x1" : "t", planar ? "x2" : "x");
  open_clip(out, p, "plot");
  for (const auto& r : records)
    if (r.trajectory) polyline(out, p, *r.trajectory, r.success ? kSuccessColor : kFailureColor, 0.9);
  out << "</g>\n</svg>\n";
  return out.str();
}

std::string render_portrait_svg(const PortraitResult& portrait) {
  std::vector<std::string> arms;
  for (const auto& r : portrait.records)
    if (std::find(arms.begin(), arms.end(), r.arm) == arms.end()) arms.push_back(r.arm);
  if (arms.empty()) arms.push_back("none");
  const double panel_w = 420, panel_h = 380, margin = 60;
  const double width = margin + arms.size() * (panel_w + margin);
  const double height = panel_h + 2 * margin;

  const SystemDynamics system = SystemDynamics::from_name(portrait.system);
  const double dx = (portrait.x_max - portrait.x_min), dy = (portrait.y_max - portrait.y_min);
  double f_max = 0.0;
  for (const auto& s : portrait.field) f_max = std::max(f_max, s.f.norm());

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
  for (std::size_t a = 0; a < arms.size(); ++a) {
    const Panel p{margin + a * (panel_w + margin), margin, panel_w, panel_h,
                  portrait.x_min, portrait.x_max, portrait.y_min, portrait.y_max};
    const double rate = portrait.success_rate(arms[a]);
    frame(out, p, portrait.system + " / " + arms[a] + " (success " + num(100.0 * rate) + "%)", "x1", "x2");
    open_clip(out, p, "panel" + std::to_string(a));
    // Arrow length scales with |f| up to 0.8 lattice cells.
    const double cell_x = dx / 24.0, cell_y = dy / 24.0;
    for (const auto& s : portrait.field) {
      const double norm = s.f.norm();
      if (norm == 0.0 || f_max == 0.0) continue;
      const double scale = 0.8 * std::sqrt(norm / f_max) / norm;
      const double ux = s.f(0) * scale * cell_x, uy = s.f(1) * scale * cell_y;
      const double x0 = p.px(s.at(0)), y0 = p.py(s.at(1));
      const double x1 = p.px(s.at(0) + ux), y1 = p.py(s.at(1) + uy);
      const double ang = std::atan2(y1 - y0, x1 - x0);
      out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1) << "\" y2=\"" << num(y1)
          << "\" stroke=\"#aaa\" stroke-width=\"0.8\"/>\n";
      out << "<polygon fill=\"#aaa\" points=\"" << num(x1) << ',' << num(y1) << ' '
          << num(x1 - 4 * std::cos(ang - 0.4)) << ',' << num(y1 - 4 * std::sin(ang - 0.4)) << ' '
          << num(x1 - 4 * std::cos(ang + 0.4)) << ',' << num(y1 - 4 * std::sin(ang + 0.4)) << "\"/>\n";
    }
    for (const auto& r : portrait.records)
      if (r.arm == arms[a] && r.trajectory)
        polyline(out, p, *r.trajectory, r.success ? kSuccessColor : kFailureColor, 0.85);
    for (const auto& fp : system.fixed_points()) {
      const bool stable = fp.classification == Stability::AsymptoticallyStable;
      out << "<circle cx=\"" << num(p.px(fp.location(0))) << "\" cy=\"" << num(p.py(fp.location(1)))
          << "\" r=\"4\" fill=\"" << (stable ? "black" : "white") << "\" stroke=\"black\"/>\n";
    }
    out << "</g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace pinnstab
