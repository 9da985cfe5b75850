#include "popsize/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace popsize {

namespace fs = std::filesystem;

void ExperimentReport::check(std::string check_name, bool ok, std::string detail, bool advisory) {
  checks.push_back({std::move(check_name), ok, advisory, std::move(detail)});
}

bool ExperimentReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.advisory || c.passed; });
}

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

// Ticks at 1, 2 or 5 times a power of ten.
std::vector<double> nice_ticks(double lo, double hi) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double f : {1.0, 2.0, 5.0, 10.0}) {
    if (f * mag >= raw) {
      step = f * mag;
      break;
    }
  }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return t;
}

void write_file(const fs::path& path, const std::string& text, std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
  written.push_back(path.string());
}

std::string table_csv(const Table& t, char sep, const std::string& comment) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << comment;
  for (std::size_t k = 0; k < t.columns.size(); ++k) os << (k ? std::string(1, sep) : "") << t.columns[k];
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? std::string(1, sep) : "") << row[k];
    os << "\n";
  }
  return os.str();
}

}  // namespace

void write_svg(std::ostream& os, const Plot& plot) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  auto tx = [&](double x) { return plot.log_x ? std::log10(x) : x; };
  for (const Series& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (plot.log_x && !(s.x[i] > 0))) continue;
      xmin = std::min(xmin, tx(s.x[i]));
      xmax = std::max(xmax, tx(s.x[i]));
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) {
    ymin -= 0.5 * (std::abs(ymin) + 1e-3);
    ymax += 0.5 * (std::abs(ymax) + 1e-3);
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (tx(x) - xmin) / (xmax - xmin) * pw; };
  auto pxr = [&](double t) { return kLeft + (t - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };

  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(plot.title)
     << "</text>\n";
  os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  std::vector<double> xt;
  if (plot.log_x) {
    for (double d = std::ceil(xmin - 1e-9); d <= xmax + 1e-9; d += 1.0) xt.push_back(d);
  } else {
    xt = nice_ticks(xmin, xmax);
  }
  for (double t : xt) {
    const double X = pxr(t);
    os << "<line x1=\"" << X << "\" y1=\"" << kTop + ph << "\" x2=\"" << X << "\" y2=\"" << kTop + ph + 5
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << X << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
       << (plot.log_x ? "1e" + num(t) : num(t)) << "</text>\n";
  }
  for (double t : nice_ticks(ymin, ymax)) {
    const double Y = py(t);
    os << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << Y << "\" x2=\"" << kLeft << "\" y2=\"" << Y
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << Y + 4 << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
  }
  os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">"
     << escape(plot.xlabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << kTop + ph / 2 << ")\">" << escape(plot.ylabel) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const Series& s = plot.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.y[i]) || (plot.log_x && !(s.x[i] > 0))) continue;
      os << px(s.x[i]) << "," << py(s.y[i]) << " ";
    }
    os << "\"/>\n";
    if (!s.label.empty()) {
      const double ly = kTop + 14 + 14 * double(k);
      os << "<line x1=\"" << kLeft + pw - 140 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kLeft + pw - 120 << "\" y2=\""
         << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      os << "<text x=\"" << kLeft + pw - 115 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
    }
  }
  os << "</svg>\n";
}

void write_field_svg(std::ostream& os, const Field& u, const std::string& title) {
  const Grid& g = u.grid;
  if (g.dimension() == 1) {
    Plot p{"", title, "x", "value", false, {{"", {}, {}}}};
    for (int i = 0; i < g.cells(0); ++i) {
      p.series[0].x.push_back(g.center(0, i));
      p.series[0].y.push_back(u[i]);
    }
    write_svg(os, p);
    return;
  }
  const double lo = u.values.minCoeff();
  const double hi = u.values.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  const double scale = std::min((kWidth - 40) / g.extent(0), (kHeight - 60) / g.extent(1));
  const double cw = g.spacing(0) * scale, ch = g.spacing(1) * scale;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << " (min " << num(lo) << ", max " << num(hi) << ")</text>\n";
  for (int j = 0; j < g.cells(1); ++j) {
    for (int i = 0; i < g.cells(0); ++i) {
      const int level = int(std::lround(255.0 * (u[g.index(i, j)] - lo) / span));
      const double x = 20 + i * cw;
      const double y = 40 + (g.cells(1) - 1 - j) * ch;  // y axis points up
      os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << cw + 0.2 << "\" height=\"" << ch + 0.2
         << "\" fill=\"rgb(" << level << "," << level / 2 << "," << 255 - level << ")\"/>\n";
    }
  }
  os << "</svg>\n";
}

std::vector<std::string> emit_report(const std::vector<ExperimentReport>& results, const std::string& outdir) {
  std::vector<std::string> written;
  const fs::path root(outdir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw Error("cannot create " + root.string() + ": " + ec.message());

  std::ostringstream summary, verdicts;
  summary << "experiments: " << results.size() << "\n";
  verdicts << "experiment,check,passed,advisory,detail\n";
  for (const ExperimentReport& r : results) {
    summary << "\n[" << r.name << "] " << (r.passed() ? "PASS" : "FAIL") << "\n";
    for (const std::string& n : r.notes) summary << "  " << n << "\n";
    for (const CheckResult& c : r.checks) {
      summary << "  " << (c.passed ? "pass" : "FAIL") << (c.advisory ? " (advisory)" : "") << "  " << c.name << ": "
              << c.detail << "\n";
      std::string detail = c.detail;
      std::replace(detail.begin(), detail.end(), ',', ';');
      verdicts << r.name << "," << c.name << "," << (c.passed ? 1 : 0) << "," << (c.advisory ? 1 : 0) << ","
               << detail << "\n";
    }

    const fs::path dir = root / r.name;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
    for (const Table& t : r.tables) {
      write_file(dir / (t.name + ".csv"), table_csv(t, ',', ""), written);
      write_file(dir / (t.name + ".dat"), table_csv(t, ' ', "# "), written);
    }
    for (const auto& [name, field] : r.fields) {
      std::ostringstream csv, svg;
      write_field_csv(csv, field);
      write_field_svg(svg, field, name);
      write_file(dir / (name + ".csv"), csv.str(), written);
      write_file(dir / (name + ".svg"), svg.str(), written);
    }
    for (const Plot& p : r.plots) {
      std::ostringstream svg;
      write_svg(svg, p);
      write_file(dir / (p.name + ".svg"), svg.str(), written);
    }
  }
  write_file(root / "summary.txt", summary.str(), written);
  write_file(root / "verdicts.csv", verdicts.str(), written);
  return written;
}

}  // namespace popsize
