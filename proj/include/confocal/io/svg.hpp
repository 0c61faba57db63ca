#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "confocal/errors.hpp"
#include "confocal/geometry.hpp"
#include "confocal/io/report.hpp"

namespace confocal::io {

inline constexpr int kSvgWidth = 800;
inline constexpr int kSvgHeight = 600;
inline constexpr int kEllipseSamples = 512;
inline constexpr int kBranchSamples = 256;

namespace detail {

inline std::string fmt3(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

struct Viewport {
  double xmin, xmax, ymin, ymax, scale, ox, oy;

  std::string x(double v) const { return fmt3(ox + (v - xmin) * scale); }
  std::string y(double v) const { return fmt3(oy - (v - ymin) * scale); }
  std::string pt(const Vector& p) const { return x(p[0]) + " " + y(p[1]); }
};

inline Viewport make_viewport(double xmin, double xmax, double ymin, double ymax) {
  double dx = xmax - xmin, dy = ymax - ymin;
  const double span = std::max({dx, dy, 1e-12});
  dx = std::max(dx, 1e-3 * span);
  dy = std::max(dy, 1e-3 * span);
  xmin -= 0.1 * dx;
  xmax += 0.1 * dx;
  ymin -= 0.1 * dy;
  ymax += 0.1 * dy;
  const double margin = 40;
  const double s = std::min((kSvgWidth - 2 * margin) / (xmax - xmin), (kSvgHeight - 2 * margin) / (ymax - ymin));
  const double ox = (kSvgWidth - s * (xmax - xmin)) / 2;
  const double oy = kSvgHeight - (kSvgHeight - s * (ymax - ymin)) / 2;
  return {xmin, xmax, ymin, ymax, s, ox, oy};
}

// Segment of the line base + t dir inside the viewport box.
inline std::optional<std::pair<Vector, Vector>> clip_line(const Viewport& v, const Vector& base, const Vector& dir) {
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  const double mins[2] = {v.xmin, v.ymin}, maxs[2] = {v.xmax, v.ymax};
  for (int i = 0; i < 2; ++i) {
    if (std::abs(dir[i]) < 1e-15) {
      if (base[i] < mins[i] || base[i] > maxs[i]) return std::nullopt;
      continue;
    }
    double t0 = (mins[i] - base[i]) / dir[i], t1 = (maxs[i] - base[i]) / dir[i];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  if (!(lo < hi)) return std::nullopt;
  return std::make_pair(Vector(base + lo * dir), Vector(base + hi * dir));
}

}  // namespace detail

struct SvgCounts {
  long points = 0;
  long conics = 0;
  long lines = 0;
};

// Scatter, centroid, fitted lines and, when the report carries a Jacobi point, the two conics through it.
inline std::string emit_svg(const Report& report, const WeightedPointSet& ps, SvgCounts* counts = nullptr) {
  if (ps.dim() != 2) throw Error(ErrorCode::NotPlanar, "plots need two coordinates");
  SvgCounts n;
  double xmin = ps.coords().col(0).minCoeff(), xmax = ps.coords().col(0).maxCoeff();
  double ymin = ps.coords().col(1).minCoeff(), ymax = ps.coords().col(1).maxCoeff();
  const Vector c = centroid(ps);
  auto include = [&](const Vector& p) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  };
  if (report.jacobi) include(report.jacobi->point);
  const detail::Viewport vp = detail::make_viewport(xmin, xmax, ymin, ymax);

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(kSvgWidth) +
       "\" height=\"" + std::to_string(kSvgHeight) + "\" viewBox=\"0 0 " + std::to_string(kSvgWidth) + " " +
       std::to_string(kSvgHeight) + "\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(kSvgWidth) + "\" height=\"" + std::to_string(kSvgHeight) +
       "\" fill=\"white\"/>\n";

  if (report.jacobi && report.pencil && report.jacobi->lambdas.size() == 2) {
    const PencilSummary& p = *report.pencil;
    const Vector& lam = report.jacobi->lambdas;
    auto to_world = [&](double y1, double y2) { return Vector(p.center + p.frame.col(0) * y1 + p.frame.col(1) * y2); };
    const double e1 = p.poles[0] - lam[0], e2 = p.poles[1] - lam[0];
    if (e1 > 0 && e2 > 0) {
      s += "<path class=\"conic ellipse\" fill=\"none\" stroke=\"#1f77b4\" d=\"";
      for (int i = 0; i < kEllipseSamples; ++i) {
        const double t = 2 * std::numbers::pi * i / kEllipseSamples;
        s += (i == 0 ? "M " : " L ") + vp.pt(to_world(std::sqrt(e1) * std::cos(t), std::sqrt(e2) * std::sin(t)));
      }
      s += " Z\"/>\n";
      ++n.conics;
    }
    const double h1 = p.poles[0] - lam[1], h2 = p.poles[1] - lam[1];
    if (h1 > 0 && h2 < 0) {
      double reach = 0;
      for (double x : {vp.xmin, vp.xmax})
        for (double y : {vp.ymin, vp.ymax}) reach = std::max(reach, std::hypot(x - p.center[0], y - p.center[1]));
      const double top = std::asinh(reach / std::sqrt(-h2));
      s += "<path class=\"conic hyperbola\" fill=\"none\" stroke=\"#d62728\" d=\"";
      for (double side : {1.0, -1.0}) {
        for (int i = 0; i < kBranchSamples; ++i) {
          const double u = -top + 2 * top * i / (kBranchSamples - 1);
          const Vector w = to_world(side * std::sqrt(h1) * std::cosh(u), std::sqrt(-h2) * std::sinh(u));
          s += (side > 0 && i == 0 ? "M " : (i == 0 ? " M " : " L ")) + vp.pt(w);
        }
      }
      s += "\"/>\n";
      ++n.conics;
    }
  }

  for (const FitEntry& f : report.fits) {
    if (f.basis.cols() != 1 || f.basis.rows() != 2) continue;
    const auto seg = detail::clip_line(vp, f.base_point, f.basis.col(0));
    if (!seg) continue;
    s += "<line class=\"fit " + f.role + " " + f.kind + "\" stroke=\"" + (f.role == "best" ? "#2ca02c" : "#9467bd") +
         "\" x1=\"" + vp.x(seg->first[0]) + "\" y1=\"" + vp.y(seg->first[1]) + "\" x2=\"" + vp.x(seg->second[0]) +
         "\" y2=\"" + vp.y(seg->second[1]) + "\"/>\n";
    ++n.lines;
  }

  for (Eigen::Index j = 0; j < ps.size(); ++j) {
    s += "<circle class=\"point\" cx=\"" + vp.x(ps.coords()(j, 0)) + "\" cy=\"" + vp.y(ps.coords()(j, 1)) +
         "\" r=\"4\" fill=\"black\"/>\n";
    ++n.points;
  }
  const double cx = vp.ox + (c[0] - vp.xmin) * vp.scale, cy = vp.oy - (c[1] - vp.ymin) * vp.scale;
  s += "<path class=\"centroid\" stroke=\"black\" d=\"M " + detail::fmt3(cx - 6) + " " + detail::fmt3(cy) + " L " +
       detail::fmt3(cx + 6) + " " + detail::fmt3(cy) + " M " + detail::fmt3(cx) + " " + detail::fmt3(cy - 6) + " L " +
       detail::fmt3(cx) + " " + detail::fmt3(cy + 6) + "\"/>\n";
  if (report.jacobi)
    s += "<circle class=\"anchor\" cx=\"" + vp.x(report.jacobi->point[0]) + "\" cy=\"" +
         vp.y(report.jacobi->point[1]) + "\" r=\"3\" fill=\"none\" stroke=\"black\"/>\n";
  s += "</svg>\n";
  if (counts) *counts = n;
  return s;
}

}  // namespace confocal::io
