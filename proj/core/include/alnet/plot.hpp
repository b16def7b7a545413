#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace alnet {

/// Numeric CSV with a header line.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Throws ConfigError if the column is missing.
  std::vector<double> column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Linear x axis, base-10 log y axis. Non-positive y values are clamped to
/// the bottom of the axis.
void write_semilog_svg(const PlotSpec& spec, std::ostream& out);

/// manifest.txt lines: `trace <name> <csv file>`.
struct ManifestEntry {
  std::string name;
  std::string csv;
};
void write_manifest(const std::filesystem::path& dir, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& dir);

inline constexpr const char* kTransmissionsPlot = "error_vs_transmissions.svg";
inline constexpr const char* kGradEvalsPlot = "error_vs_grad_evals.svg";

/// Redraws both plots in `dir` from manifest.txt and the CSVs it lists.
void write_plots(const std::filesystem::path& dir);

}  // namespace alnet
