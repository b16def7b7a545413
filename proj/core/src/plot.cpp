#include "alnet/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "alnet/errors.hpp"

namespace alnet {

std::vector<double> CsvTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw ConfigError(fmt::format("csv: no column '{}'", name));
  const auto idx = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[idx]);
  return out;
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> parts;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  return parts;
}

std::string xml_escape(const std::string& s) {
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

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
constexpr double kFloorExponent = -16.0;

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: missing header");
  t.columns = split_commas(line);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto parts = split_commas(line);
    if (parts.size() != t.columns.size()) {
      throw ConfigError(fmt::format("csv line {}: expected {} fields, got {}", line_no,
                                    t.columns.size(), parts.size()));
    }
    std::vector<double> row;
    row.reserve(parts.size());
    for (const auto& p : parts) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(p, &used));
        if (used != p.size()) throw std::invalid_argument(p);
      } catch (const std::exception&) {
        // stod rejects "nan" spellings on some platforms; accept them explicitly.
        if (p == "nan" || p == "-nan") {
          row.push_back(std::numeric_limits<double>::quiet_NaN());
        } else {
          throw ConfigError(fmt::format("csv line {}: bad number '{}'", line_no, p));
        }
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  return read_csv(in);
}

void write_semilog_svg(const PlotSpec& spec, std::ostream& out) {
  const double width = 720, height = 480;
  const double left = 80, right = 180, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;

  double x_max = 0.0;
  double y_lo = std::numeric_limits<double>::infinity();
  double y_hi = -std::numeric_limits<double>::infinity();
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (std::isfinite(s.x[i])) x_max = std::max(x_max, s.x[i]);
      if (std::isfinite(s.y[i]) && s.y[i] > 0.0) {
        y_lo = std::min(y_lo, std::log10(s.y[i]));
        y_hi = std::max(y_hi, std::log10(s.y[i]));
      }
    }
  }
  if (x_max <= 0.0) x_max = 1.0;
  if (!std::isfinite(y_lo)) {
    y_lo = kFloorExponent;
    y_hi = 0.0;
  }
  double e_lo = std::max(kFloorExponent, std::floor(y_lo));
  double e_hi = std::max(e_lo + 1.0, std::ceil(y_hi));

  auto px = [&](double x) { return left + pw * x / x_max; };
  auto py = [&](double y) {
    const double e = (std::isfinite(y) && y > 0.0) ? std::clamp(std::log10(y), e_lo, e_hi) : e_lo;
    return top + ph * (e_hi - e) / (e_hi - e_lo);
  };

  fmt::print(out,
             "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" "
             "viewBox=\"0 0 {:.0f} {:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n",
             width, height, width, height);
  fmt::print(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
  fmt::print(out, "<text x=\"{:.1f}\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
             left + pw / 2, xml_escape(spec.title));

  const int decades = static_cast<int>(e_hi - e_lo);
  const int label_step = std::max(1, decades / 8);
  for (int e = static_cast<int>(e_lo); e <= static_cast<int>(e_hi); ++e) {
    const double y = top + ph * (e_hi - e) / (e_hi - e_lo);
    fmt::print(out,
               "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#dddddd\"/>\n",
               left, y, left + pw, y);
    if ((e - static_cast<int>(e_lo)) % label_step == 0) {
      fmt::print(out, "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">1e{}</text>\n",
                 left - 6, y + 4, e);
    }
  }
  for (int t = 0; t <= 5; ++t) {
    const double xv = x_max * t / 5.0;
    const double x = px(xv);
    fmt::print(out,
               "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#dddddd\"/>\n",
               x, top, x, top + ph);
    fmt::print(out, "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", x,
               top + ph + 18, xv);
  }
  fmt::print(out,
             "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
             "stroke=\"black\"/>\n",
             left, top, pw, ph);
  fmt::print(out, "<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n",
             left + pw / 2, height - 16, xml_escape(spec.x_label));
  fmt::print(out,
             "<text x=\"20\" y=\"{:.1f}\" text-anchor=\"middle\" "
             "transform=\"rotate(-90 20 {:.1f})\">{}</text>\n",
             top + ph / 2, top + ph / 2, xml_escape(spec.y_label));

  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const auto& ser = spec.series[s];
    const char* color = kPalette[s % std::size(kPalette)];
    std::string pts;
    for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
      if (!std::isfinite(ser.x[i])) continue;
      pts += fmt::format("{:.2f},{:.2f} ", px(ser.x[i]), py(ser.y[i]));
    }
    if (!pts.empty()) pts.pop_back();
    fmt::print(out, "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
               color, pts);
    const double ly = top + 14 + 18 * static_cast<double>(s);
    fmt::print(out,
               "<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"{}\" "
               "stroke-width=\"2\"/>\n",
               left + pw + 10, ly, left + pw + 30, ly, color);
    fmt::print(out, "<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", left + pw + 36, ly + 4,
               xml_escape(ser.label));
  }
  fmt::print(out, "</svg>\n");
}

void write_manifest(const std::filesystem::path& dir, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(dir / "manifest.txt");
  if (!out) throw ConfigError(fmt::format("cannot write {}", (dir / "manifest.txt").string()));
  out << "# alnet manifest v1\n";
  for (const auto& e : entries) out << "trace " << e.name << ' ' << e.csv << '\n';
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.txt");
  if (!in) throw ConfigError(fmt::format("cannot open {}", (dir / "manifest.txt").string()));
  std::vector<ManifestEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string kind;
    ManifestEntry e;
    if (!(ls >> kind >> e.name >> e.csv) || kind != "trace") {
      throw ConfigError(fmt::format("manifest: malformed line '{}'", line));
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_plots(const std::filesystem::path& dir) {
  const auto entries = read_manifest(dir);
  PlotSpec by_tx{"Relative cost error", "total transmissions", "relative cost error", {}};
  PlotSpec by_grad{"Relative cost error", "cumulative gradient evaluations", "relative cost error",
                   {}};
  for (const auto& e : entries) {
    const CsvTable t = read_csv_file(dir / e.csv);
    const auto err = t.column("rel_cost_error");
    by_tx.series.push_back({e.name, t.column("transmissions_total"), err});
    by_grad.series.push_back({e.name, t.column("grad_evals_total"), err});
  }
  for (const auto& [spec, file] :
       {std::pair{&by_tx, kTransmissionsPlot}, std::pair{&by_grad, kGradEvalsPlot}}) {
    std::ofstream out(dir / file);
    if (!out) throw ConfigError(fmt::format("cannot write {}", (dir / file).string()));
    write_semilog_svg(*spec, out);
  }
}

}  // namespace alnet
