#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace curvox {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotRange {
  double x_min = 0.0, x_max = 1.0;
  double y_min = 0.0, y_max = 1.0;
};

// Tight bounds over every point of every series (before padding); rejects
// empty input.
PlotRange compute_plot_range(const std::vector<PlotSeries>& series);

void write_line_plot_svg(const std::filesystem::path& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotSeries>& series);

// Aggregates the per-run CSVs under runs_dir (as written by the ablation
// harness) into summary.csv, ttest.csv, curves.csv and SVG plots under
// out_dir. Pure function of the stored files: re-running reproduces the
// report byte-identically.
void emit_report(const std::filesystem::path& runs_dir, const std::filesystem::path& out_dir);

}  // namespace curvox
