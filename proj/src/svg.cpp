#include "gaminet/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gaminet/errors.hpp"

namespace gaminet {
namespace {

constexpr double kPanelW = 320.0;
constexpr double kPanelH = 260.0;
constexpr double kMarginL = 46.0;
constexpr double kMarginR = 12.0;
constexpr double kMarginT = 30.0;
constexpr double kMarginB = 34.0;

std::string esc(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

struct Range {
  double lo = 0.0, hi = 1.0;
};

Range value_range(const std::vector<double>& values) {
  Range r{values.front(), values.front()};
  for (double v : values) {
    r.lo = std::min(r.lo, v);
    r.hi = std::max(r.hi, v);
  }
  if (r.hi <= r.lo) {
    r.lo -= 0.5;
    r.hi += 0.5;
  }
  return r;
}

// Symmetric blue-white-red map around zero.
std::string diverging_color(double v, double max_abs) {
  double t = max_abs > 0.0 ? std::clamp(v / max_abs, -1.0, 1.0) : 0.0;
  int r, g, b;
  if (t >= 0) {
    r = 255;
    g = static_cast<int>(std::lround(255 * (1.0 - t * 0.75)));
    b = static_cast<int>(std::lround(255 * (1.0 - t)));
  } else {
    r = static_cast<int>(std::lround(255 * (1.0 + t)));
    g = static_cast<int>(std::lround(255 * (1.0 + t * 0.75)));
    b = 255;
  }
  std::ostringstream s;
  s << "rgb(" << r << ',' << g << ',' << b << ')';
  return s.str();
}

void open_svg(std::ostringstream& out, double w, double h) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w)
      << "\" height=\"" << num(h) << "\" viewBox=\"0 0 " << num(w) << ' '
      << num(h) << "\">\n";
}

void panel_frame(std::ostringstream& out, double x0, double y0,
                 const std::string& title) {
  out << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0) << "\" width=\""
      << num(kPanelW) << "\" height=\"" << num(kPanelH)
      << "\" fill=\"white\" stroke=\"#cccccc\"/>\n";
  out << "<text x=\"" << num(x0 + kPanelW / 2) << "\" y=\"" << num(y0 + 18)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << esc(title) << "</text>\n";
}

std::string panel_title(const ShapeGrid& grid) {
  std::ostringstream t;
  t << grid.label << " (IR " << num(grid.ir * 100.0) << "%)";
  return t.str();
}

void line_plot_body(std::ostringstream& out, const ShapeGrid& grid, double x0,
                    double y0) {
  const Range ry = value_range(grid.values);
  const double plot_w = kPanelW - kMarginL - kMarginR;
  const double plot_h = kPanelH - kMarginT - kMarginB;
  const Range rx{grid.x_values.front(), grid.x_values.back()};
  auto sx = [&](double x) {
    return x0 + kMarginL + (x - rx.lo) / (rx.hi - rx.lo) * plot_w;
  };
  auto sy = [&](double v) {
    return y0 + kMarginT + (ry.hi - v) / (ry.hi - ry.lo) * plot_h;
  };
  out << "<line x1=\"" << num(sx(rx.lo)) << "\" y1=\"" << num(y0 + kMarginT + plot_h)
      << "\" x2=\"" << num(sx(rx.hi)) << "\" y2=\"" << num(y0 + kMarginT + plot_h)
      << "\" stroke=\"#444444\"/>\n";
  out << "<line x1=\"" << num(sx(rx.lo)) << "\" y1=\"" << num(y0 + kMarginT)
      << "\" x2=\"" << num(sx(rx.lo)) << "\" y2=\"" << num(y0 + kMarginT + plot_h)
      << "\" stroke=\"#444444\"/>\n";
  out << "<text x=\"" << num(sx(rx.lo)) << "\" y=\"" << num(y0 + kPanelH - 12)
      << "\" font-family=\"sans-serif\" font-size=\"10\">" << num(rx.lo)
      << "</text>\n";
  out << "<text x=\"" << num(sx(rx.hi)) << "\" y=\"" << num(y0 + kPanelH - 12)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
      << num(rx.hi) << "</text>\n";
  out << "<text x=\"" << num(x0 + 6) << "\" y=\"" << num(sy(ry.hi) + 4)
      << "\" font-family=\"sans-serif\" font-size=\"10\">" << num(ry.hi)
      << "</text>\n";
  out << "<text x=\"" << num(x0 + 6) << "\" y=\"" << num(sy(ry.lo) + 4)
      << "\" font-family=\"sans-serif\" font-size=\"10\">" << num(ry.lo)
      << "</text>\n";
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    if (i) out << ' ';
    out << num(sx(grid.x_values[i])) << ',' << num(sy(grid.values[i]));
  }
  out << "\"/>\n";
}

void bar_chart_body(std::ostringstream& out, const std::vector<std::string>& labels,
                    const std::vector<double>& values, double x0, double y0) {
  Range ry = value_range(values);
  ry.lo = std::min(ry.lo, 0.0);
  ry.hi = std::max(ry.hi, 0.0);
  const double plot_w = kPanelW - kMarginL - kMarginR;
  const double plot_h = kPanelH - kMarginT - kMarginB;
  auto sy = [&](double v) {
    return y0 + kMarginT + (ry.hi - v) / (ry.hi - ry.lo) * plot_h;
  };
  const double band = plot_w / static_cast<double>(values.size());
  const double bar_w = band * 0.7;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double cx = x0 + kMarginL + band * (static_cast<double>(i) + 0.5);
    const double top = sy(std::max(values[i], 0.0));
    const double bottom = sy(std::min(values[i], 0.0));
    out << "<rect x=\"" << num(cx - bar_w / 2) << "\" y=\"" << num(top)
        << "\" width=\"" << num(bar_w) << "\" height=\""
        << num(std::max(bottom - top, 0.5)) << "\" fill=\"#1f77b4\"/>\n";
    out << "<text x=\"" << num(cx) << "\" y=\"" << num(y0 + kPanelH - 12)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">"
        << esc(labels[i]) << "</text>\n";
  }
  out << "<line x1=\"" << num(x0 + kMarginL) << "\" y1=\"" << num(sy(0.0))
      << "\" x2=\"" << num(x0 + kMarginL + plot_w) << "\" y2=\"" << num(sy(0.0))
      << "\" stroke=\"#444444\"/>\n";
  out << "<text x=\"" << num(x0 + 6) << "\" y=\"" << num(sy(ry.hi) + 4)
      << "\" font-family=\"sans-serif\" font-size=\"10\">" << num(ry.hi)
      << "</text>\n";
  out << "<text x=\"" << num(x0 + 6) << "\" y=\"" << num(sy(ry.lo) + 4)
      << "\" font-family=\"sans-serif\" font-size=\"10\">" << num(ry.lo)
      << "</text>\n";
}

void heatmap_body(std::ostringstream& out, const ShapeGrid& grid, double x0,
                  double y0) {
  const int nx = grid.nx(), ny = grid.ny();
  double max_abs = 0.0;
  for (double v : grid.values) max_abs = std::max(max_abs, std::abs(v));
  const double plot_w = kPanelW - kMarginL - kMarginR;
  const double plot_h = kPanelH - kMarginT - kMarginB;
  const double cw = plot_w / nx;
  const double ch = plot_h / ny;
  for (int a = 0; a < nx; ++a) {
    for (int b = 0; b < ny; ++b) {
      const double v = grid.values[static_cast<std::size_t>(a) * ny + b];
      // y axis grows upward: row b=0 sits at the bottom.
      out << "<rect x=\"" << num(x0 + kMarginL + a * cw) << "\" y=\""
          << num(y0 + kMarginT + plot_h - (b + 1) * ch) << "\" width=\""
          << num(cw + 0.25) << "\" height=\"" << num(ch + 0.25) << "\" fill=\""
          << diverging_color(v, max_abs) << "\"/>\n";
    }
  }
  auto axis_text = [&](double x, double y, const std::string& s,
                       const char* anchor) {
    out << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\""
        << anchor << "\" font-family=\"sans-serif\" font-size=\"10\">" << esc(s)
        << "</text>\n";
  };
  const std::string x_lo = grid.kind_x == FeatureKind::kNumerical
                               ? num(grid.x_values.front())
                               : grid.x_labels.front();
  const std::string x_hi = grid.kind_x == FeatureKind::kNumerical
                               ? num(grid.x_values.back())
                               : grid.x_labels.back();
  const std::string y_lo = grid.kind_y == FeatureKind::kNumerical
                               ? num(grid.y_values.front())
                               : grid.y_labels.front();
  const std::string y_hi = grid.kind_y == FeatureKind::kNumerical
                               ? num(grid.y_values.back())
                               : grid.y_labels.back();
  axis_text(x0 + kMarginL, y0 + kPanelH - 12, x_lo, "start");
  axis_text(x0 + kMarginL + plot_w, y0 + kPanelH - 12, x_hi, "end");
  axis_text(x0 + kMarginL - 4, y0 + kMarginT + plot_h, y_lo, "end");
  axis_text(x0 + kMarginL - 4, y0 + kMarginT + 8, y_hi, "end");
}

void shape_grid_body(std::ostringstream& out, const ShapeGrid& grid, double x0,
                     double y0) {
  panel_frame(out, x0, y0, panel_title(grid));
  if (grid.is_interaction) {
    heatmap_body(out, grid, x0, y0);
  } else if (grid.kind_x == FeatureKind::kNumerical) {
    line_plot_body(out, grid, x0, y0);
  } else {
    bar_chart_body(out, grid.x_labels, grid.values, x0, y0);
  }
}

}  // namespace

std::string svg_shape_grid(const ShapeGrid& grid) {
  if (grid.values.empty()) throw ValidationError("cannot render an empty grid");
  std::ostringstream out;
  open_svg(out, kPanelW, kPanelH);
  shape_grid_body(out, grid, 0.0, 0.0);
  out << "</svg>\n";
  return out.str();
}

std::string svg_importance(const ImportanceTable& table) {
  if (table.rows.empty())
    throw ValidationError("cannot render an empty importance table");
  std::ostringstream out;
  open_svg(out, kPanelW, kPanelH);
  panel_frame(out, 0.0, 0.0, "Importance ratios");
  std::vector<std::string> labels;
  std::vector<double> values;
  for (const auto& r : table.rows) {
    labels.push_back(r.label);
    values.push_back(r.ir);
  }
  bar_chart_body(out, labels, values, 0.0, 0.0);
  out << "</svg>\n";
  return out.str();
}

std::string svg_local_explanation(const LocalExplanation& e) {
  std::ostringstream out;
  open_svg(out, kPanelW, kPanelH);
  std::ostringstream title;
  title << "Local explanation (eta " << num(e.eta) << ")";
  panel_frame(out, 0.0, 0.0, title.str());
  std::vector<std::string> labels{"intercept"};
  std::vector<double> values{e.intercept};
  for (std::size_t i = 0; i < e.labels.size(); ++i) {
    labels.push_back(e.labels[i]);
    values.push_back(e.contributions[i]);
  }
  bar_chart_body(out, labels, values, 0.0, 0.0);
  out << "</svg>\n";
  return out.str();
}

std::string svg_panel(const std::vector<ShapeGrid>& grids) {
  if (grids.empty()) throw ValidationError("cannot render an empty panel");
  const int cols = std::min<int>(4, static_cast<int>(grids.size()));
  const int rows = (static_cast<int>(grids.size()) + cols - 1) / cols;
  std::ostringstream out;
  open_svg(out, cols * kPanelW, rows * kPanelH);
  for (std::size_t i = 0; i < grids.size(); ++i) {
    const double x0 = static_cast<double>(i % cols) * kPanelW;
    const double y0 = static_cast<double>(i / cols) * kPanelH;
    shape_grid_body(out, grids[i], x0, y0);
  }
  out << "</svg>\n";
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path);
  out << content;
  if (!out) throw ValidationError("write failed: " + path);
}

}  // namespace gaminet
