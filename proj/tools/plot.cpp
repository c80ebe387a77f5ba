#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cutpinn::plot {

namespace {

constexpr double kW = 720, kH = 480;
constexpr double kMargin = 60;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    throw std::runtime_error("column not found: " + name);
  }
};

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  Table t;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    if (first) {
      t.header = fields;
      first = false;
    } else {
      t.rows.push_back(fields);
    }
  }
  if (t.header.empty()) throw std::runtime_error("empty CSV: " + path);
  return t;
}

double parse_num(const std::string& s) {
  try {
    return std::stod(s);
  } catch (...) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;
  double to_unit(double v) const {
    double a = lo, b = hi, x = v;
    if (log) {
      a = std::log10(a);
      b = std::log10(b);
      x = std::log10(x);
    }
    return b > a ? (x - a) / (b - a) : 0.5;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

void svg_header(std::ofstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
      << "\" height=\"" << kH << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty()) {
    out << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title
        << "</text>\n";
  }
}

void render_line(const PlotOptions& opt) {
  const Table t = read_csv(opt.input);
  const int xc = t.col(opt.x_col);
  const int yc = t.col(opt.y_col);
  const int sc = opt.series_col.empty() ? -1 : t.col(opt.series_col);

  std::map<std::string, std::vector<std::pair<double, double>>> series;
  Axis ax{std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity(), opt.log_x};
  Axis ay = ax;
  ay.log = opt.log_y;
  for (const auto& row : t.rows) {
    const double x = parse_num(row[xc]);
    const double y = parse_num(row[yc]);
    if (!std::isfinite(x) || !std::isfinite(y)) continue;
    if ((ax.log && x <= 0) || (ay.log && y <= 0)) continue;
    series[sc >= 0 ? row[sc] : opt.y_col].emplace_back(x, y);
    ax.lo = std::min(ax.lo, x);
    ax.hi = std::max(ax.hi, x);
    ay.lo = std::min(ay.lo, y);
    ay.hi = std::max(ay.hi, y);
  }
  if (series.empty()) throw std::runtime_error("no plottable rows");

  std::ofstream out(opt.output);
  if (!out) throw std::runtime_error("cannot open: " + opt.output);
  svg_header(out, opt.title.empty() ? opt.input : opt.title);
  const double px0 = kMargin, px1 = kW - kMargin;
  const double py0 = kH - kMargin, py1 = kMargin;
  out << "<rect x=\"" << px0 << "\" y=\"" << py1 << "\" width=\""
      << px1 - px0 << "\" height=\"" << py0 - py1
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  // corner labels
  out << "<text x=\"" << px0 << "\" y=\"" << py0 + 18
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(ax.lo)
      << "</text>\n"
      << "<text x=\"" << px1 << "\" y=\"" << py0 + 18
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">"
      << fmt(ax.hi) << "</text>\n"
      << "<text x=\"" << px0 - 6 << "\" y=\"" << py0
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">"
      << fmt(ay.lo) << "</text>\n"
      << "<text x=\"" << px0 - 6 << "\" y=\"" << py1 + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
         "font-size=\"11\">"
      << fmt(ay.hi) << "</text>\n";

  int idx = 0;
  for (auto& [name, pts] : series) {
    std::sort(pts.begin(), pts.end());
    const char* color = kPalette[idx % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) {
      out << px0 + ax.to_unit(x) * (px1 - px0) << ","
          << py0 - ay.to_unit(y) * (py0 - py1) << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << px1 - 150 << "\" y=\"" << py1 + 16 + 14 * idx
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color
        << "\">" << name << "</text>\n";
    ++idx;
  }
  out << "</svg>\n";
}

void heat_color(double u, int& r, int& g, int& b) {
  // simple blue -> white -> red ramp on [0,1]
  u = std::clamp(u, 0.0, 1.0);
  if (u < 0.5) {
    const double s = u * 2.0;
    r = static_cast<int>(255 * s);
    g = static_cast<int>(255 * s);
    b = 255;
  } else {
    const double s = (u - 0.5) * 2.0;
    r = 255;
    g = static_cast<int>(255 * (1.0 - s));
    b = static_cast<int>(255 * (1.0 - s));
  }
}

void render_heat(const PlotOptions& opt) {
  const Table t = read_csv(opt.input);
  const int xc = t.col(opt.x_col);
  const int yc = t.col(opt.y_col);
  const int vc = t.col(opt.value_col.empty() ? "err_c2" : opt.value_col);

  std::vector<double> xs, ys;
  struct Cell { double x, y, v; };
  std::vector<Cell> cells;
  double vlo = std::numeric_limits<double>::infinity(), vhi = -vlo;
  for (const auto& row : t.rows) {
    const Cell c{parse_num(row[xc]), parse_num(row[yc]), parse_num(row[vc])};
    if (!std::isfinite(c.v)) continue;
    cells.push_back(c);
    xs.push_back(c.x);
    ys.push_back(c.y);
    vlo = std::min(vlo, c.v);
    vhi = std::max(vhi, c.v);
  }
  if (cells.empty()) throw std::runtime_error("no plottable rows");
  auto uniq = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(xs);
  uniq(ys);
  const double cw = (kW - 2 * kMargin) / xs.size();
  const double ch = (kH - 2 * kMargin) / ys.size();
  const double x0 = xs.front(), x1 = xs.back();
  const double y0 = ys.front(), y1 = ys.back();

  std::ofstream out(opt.output);
  if (!out) throw std::runtime_error("cannot open: " + opt.output);
  svg_header(out, opt.title.empty() ? opt.input : opt.title);
  for (const Cell& c : cells) {
    const double u = vhi > vlo ? (c.v - vlo) / (vhi - vlo) : 0.0;
    int r, g, b;
    heat_color(u, r, g, b);
    const double px =
        kMargin + (x1 > x0 ? (c.x - x0) / (x1 - x0) : 0.5) * (kW - 2 * kMargin);
    const double py = kH - kMargin -
                      (y1 > y0 ? (c.y - y0) / (y1 - y0) : 0.5) *
                          (kH - 2 * kMargin);
    out << "<rect x=\"" << px - cw / 2 << "\" y=\"" << py - ch / 2
        << "\" width=\"" << cw + 0.5 << "\" height=\"" << ch + 0.5
        << "\" fill=\"rgb(" << r << "," << g << "," << b << ")\"/>\n";
  }
  out << "<text x=\"" << kMargin << "\" y=\"" << kH - 12
      << "\" font-family=\"sans-serif\" font-size=\"12\">range [" << fmt(vlo)
      << ", " << fmt(vhi) << "]</text>\n";
  out << "</svg>\n";
}

}  // namespace

void render(const PlotOptions& opt) {
  if (opt.kind == "line") {
    render_line(opt);
  } else if (opt.kind == "heat") {
    render_heat(opt);
  } else {
    throw std::runtime_error("unknown plot kind: " + opt.kind);
  }
}

}  // namespace cutpinn::plot
