#include "har/plots.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace har {

namespace {

constexpr double kWidth = 720.0, kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 50.0, kBottom = 60.0;

std::string esc(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(std::abs(v) >= 100 ? 0 : 2);
  os << v;
  return os.str();
}

struct Canvas {
  std::ostringstream body;

  void text(double x, double y, const std::string& s, int size, const char* anchor,
            const char* fill = "#333") {
    body << "<text x='" << x << "' y='" << y << "' font-size='" << size
         << "' text-anchor='" << anchor << "' fill='" << fill
         << "' font-family='sans-serif'>" << esc(s) << "</text>\n";
  }
  void line(double x1, double y1, double x2, double y2, const char* stroke,
            double width = 1.0) {
    body << "<line x1='" << x1 << "' y1='" << y1 << "' x2='" << x2 << "' y2='" << y2
         << "' stroke='" << stroke << "' stroke-width='" << width << "'/>\n";
  }
  void rect(double x, double y, double w, double h, const char* fill) {
    body << "<rect x='" << x << "' y='" << y << "' width='" << w << "' height='" << h
         << "' fill='" << fill << "'/>\n";
  }
  void circle(double x, double y, double r, const char* fill) {
    body << "<circle cx='" << x << "' cy='" << y << "' r='" << r << "' fill='" << fill
         << "'/>\n";
  }

  void save(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("plots: cannot write " + path.string());
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='"
        << kHeight << "' viewBox='0 0 " << kWidth << " " << kHeight << "'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << body.str() << "</svg>\n";
  }
};

/// y-axis with ~5 ticks over [lo, hi]; returns the value→pixel map.
struct YScale {
  double lo, hi;
  double map(double v) const {
    return kHeight - kBottom - (v - lo) / (hi - lo) * (kHeight - kTop - kBottom);
  }
};

YScale draw_y_axis(Canvas& c, double lo, double hi, const std::string& label) {
  if (hi <= lo) hi = lo + 1.0;
  const double pad = 0.08 * (hi - lo);
  YScale scale{lo - pad, hi + pad};
  c.line(kLeft, kTop, kLeft, kHeight - kBottom, "#333");
  for (int i = 0; i <= 5; ++i) {
    const double v = scale.lo + (scale.hi - scale.lo) * i / 5.0;
    const double y = scale.map(v);
    c.line(kLeft - 4, y, kLeft, y, "#333");
    c.line(kLeft, y, kWidth - kRight, y, "#eee");
    c.text(kLeft - 8, y + 4, fmt(v), 11, "end");
  }
  c.text(16, kTop - 14, label, 12, "start");
  return scale;
}

}  // namespace

void write_bar_chart_svg(const std::filesystem::path& path, const std::string& title,
                         const std::vector<BarItem>& items, const std::string& y_label) {
  if (items.empty()) throw std::invalid_argument("write_bar_chart_svg: no bars");
  Canvas c;
  c.text(kWidth / 2, 24, title, 15, "middle", "#111");

  double lo = 0.0, hi = 0.0;
  for (const auto& it : items) {
    lo = std::min(lo, it.value);
    hi = std::max(hi, it.value);
  }
  const YScale scale = draw_y_axis(c, lo, hi, y_label);
  const double y0 = scale.map(0.0);
  c.line(kLeft, y0, kWidth - kRight, y0, "#888");

  const double span = kWidth - kLeft - kRight;
  const double slot = span / items.size();
  const double bar_w = std::max(4.0, slot * 0.6);
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double cx = kLeft + slot * (i + 0.5);
    const double yv = scale.map(items[i].value);
    const bool pos = items[i].value >= 0.0;
    c.rect(cx - bar_w / 2, pos ? yv : y0, bar_w, std::abs(y0 - yv),
           pos ? "#3b6fb5" : "#c0504d");
    c.text(cx, kHeight - kBottom + 16, items[i].label, 11, "middle");
    c.text(cx, (pos ? yv : scale.map(items[i].value)) - 5, fmt(items[i].value), 10,
           "middle", "#555");
  }
  c.save(path);
}

void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::vector<Series>& series, const std::string& x_label,
                          const std::string& y_label) {
  if (series.empty()) throw std::invalid_argument("write_line_chart_svg: no series");
  double xlo = 0, xhi = 0, ylo = 0, yhi = 0;
  bool first = true;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty()) {
      throw std::invalid_argument("write_line_chart_svg: malformed series");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xlo = xhi = s.x[i];
        ylo = yhi = s.y[i];
        first = false;
      }
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  }
  if (xhi <= xlo) xhi = xlo + 1.0;

  Canvas c;
  c.text(kWidth / 2, 24, title, 15, "middle", "#111");
  const YScale yscale = draw_y_axis(c, ylo, yhi, y_label);
  c.line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom, "#333");
  const auto xmap = [&](double v) {
    return kLeft + (v - xlo) / (xhi - xlo) * (kWidth - kLeft - kRight);
  };
  for (int i = 0; i <= 5; ++i) {
    const double v = xlo + (xhi - xlo) * i / 5.0;
    c.text(xmap(v), kHeight - kBottom + 16, fmt(v), 11, "middle");
  }
  c.text(kWidth - kRight, kHeight - 14, x_label, 12, "end");

  const char* colors[] = {"#3b6fb5", "#c0504d", "#6aa84f", "#9467bd", "#e69138"};
  for (std::size_t si = 0; si < series.size(); ++si) {
    const char* color = colors[si % 5];
    std::ostringstream pts;
    for (std::size_t i = 0; i < series[si].x.size(); ++i) {
      pts << xmap(series[si].x[i]) << "," << yscale.map(series[si].y[i]) << " ";
      c.circle(xmap(series[si].x[i]), yscale.map(series[si].y[i]), 3.0, color);
    }
    c.body << "<polyline points='" << pts.str() << "' fill='none' stroke='" << color
           << "' stroke-width='1.5'/>\n";
    c.text(kLeft + 10 + 130.0 * static_cast<double>(si), kTop - 14, series[si].name, 12,
           "start", color);
  }
  c.save(path);
}

}  // namespace har
