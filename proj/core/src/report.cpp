#include "curvox/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "curvox/stats.hpp"
#include "curvox/util.hpp"

namespace curvox {

PlotRange compute_plot_range(const std::vector<PlotSeries>& series) {
  if (series.empty()) {
    throw std::invalid_argument("plot: no series");
  }
  PlotRange r;
  bool first = true;
  for (const auto& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size()) {
      throw std::invalid_argument("plot: empty or ragged series '" + s.label + "'");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        r.x_min = r.x_max = s.x[i];
        r.y_min = r.y_max = s.y[i];
        first = false;
      } else {
        r.x_min = std::min(r.x_min, s.x[i]);
        r.x_max = std::max(r.x_max, s.x[i]);
        r.y_min = std::min(r.y_min, s.y[i]);
        r.y_max = std::max(r.y_max, s.y[i]);
      }
    }
  }
  return r;
}

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

void pad_range(double* lo, double* hi) {
  if (*hi == *lo) {
    const double pad = std::max(1e-9, std::fabs(*lo) * 0.05 + 1e-9);
    *lo -= pad;
    *hi += pad;
  } else {
    const double pad = 0.05 * (*hi - *lo);
    *lo -= pad;
    *hi += pad;
  }
}

}  // namespace

void write_line_plot_svg(const std::filesystem::path& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotSeries>& series) {
  PlotRange r = compute_plot_range(series);
  pad_range(&r.x_min, &r.x_max);
  pad_range(&r.y_min, &r.y_max);

  const double px0 = 70, px1 = 540, py0 = 40, py1 = 430;  // plot area
  auto sx = [&](double x) { return px0 + (x - r.x_min) / (r.x_max - r.x_min) * (px1 - px0); };
  auto sy = [&](double y) { return py1 - (y - r.y_min) / (r.y_max - r.y_min) * (py1 - py0); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"480\" "
         "viewBox=\"0 0 720 480\">\n";
  svg += "<rect width=\"720\" height=\"480\" fill=\"white\"/>\n";
  svg += "<text x=\"360\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" + title + "</text>\n";
  svg += "<line x1=\"" + svg_num(px0) + "\" y1=\"" + svg_num(py1) + "\" x2=\"" + svg_num(px1) +
         "\" y2=\"" + svg_num(py1) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + svg_num(px0) + "\" y1=\"" + svg_num(py0) + "\" x2=\"" + svg_num(px0) +
         "\" y2=\"" + svg_num(py1) + "\" stroke=\"black\"/>\n";
  // Tick labels at the data extremes.
  svg += "<text x=\"" + svg_num(px0) + "\" y=\"450\" font-family=\"sans-serif\" font-size=\"11\">" +
         svg_num(r.x_min) + "</text>\n";
  svg += "<text x=\"" + svg_num(px1) + "\" y=\"450\" text-anchor=\"end\" "
         "font-family=\"sans-serif\" font-size=\"11\">" + svg_num(r.x_max) + "</text>\n";
  svg += "<text x=\"" + svg_num(px0 - 6) + "\" y=\"" + svg_num(py1) + "\" text-anchor=\"end\" "
         "font-family=\"sans-serif\" font-size=\"11\">" + svg_num(r.y_min) + "</text>\n";
  svg += "<text x=\"" + svg_num(px0 - 6) + "\" y=\"" + svg_num(py0 + 4) + "\" text-anchor=\"end\" "
         "font-family=\"sans-serif\" font-size=\"11\">" + svg_num(r.y_max) + "</text>\n";
  svg += "<text x=\"" + svg_num(0.5 * (px0 + px1)) + "\" y=\"468\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"12\">" + x_label + "</text>\n";
  svg += "<text x=\"16\" y=\"" + svg_num(0.5 * (py0 + py1)) +
         "\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
         svg_num(0.5 * (py0 + py1)) + ")\" text-anchor=\"middle\">" + y_label + "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::string points;
    for (std::size_t i = 0; i < series[s].x.size(); ++i) {
      if (i) points += " ";
      points += svg_num(sx(series[s].x[i])) + "," + svg_num(sy(series[s].y[i]));
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" "
           "points=\"" + points + "\"/>\n";
    const double ly = 50.0 + 16.0 * static_cast<double>(s);
    svg += "<line x1=\"552\" y1=\"" + svg_num(ly - 4) + "\" x2=\"572\" y2=\"" + svg_num(ly - 4) +
           "\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"576\" y=\"" + svg_num(ly) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + series[s].label + "</text>\n";
  }
  svg += "</svg>\n";
  write_text_file(path, svg);
}

// ---- Aggregation ----------------------------------------------------------

namespace {

struct RunFiles {
  std::string cell;
  std::uint64_t seed = 0;
  bool aborted = false;
  std::map<std::string, double> metrics;  // from test_metrics.csv
  std::string abort_reason;
  std::vector<std::string> curve_rows;  // metrics.csv data rows
};

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> lines;
  for (const auto& raw : split(text, '\n')) {
    if (!trim(raw).empty()) lines.push_back(raw);
  }
  return lines;
}

RunFiles read_run(const std::filesystem::path& run_dir, const std::string& cell,
                  std::uint64_t seed) {
  RunFiles run;
  run.cell = cell;
  run.seed = seed;

  const auto lines = csv_lines(read_text_file(run_dir / "test_metrics.csv"));
  if (lines.size() < 2) {
    throw IoError("malformed test_metrics.csv in " + run_dir.string());
  }
  const auto header = split(lines[0], ',');
  const auto fields = split(lines[1], ',');
  for (std::size_t i = 0; i < header.size() && i < fields.size(); ++i) {
    if (header[i] == "aborted") {
      run.aborted = fields[i] == "1";
    } else if (header[i] == "abort_reason") {
      run.abort_reason = fields[i];
    } else if (header[i] != "cell" && header[i] != "seed" && !fields[i].empty()) {
      run.metrics[header[i]] = std::strtod(fields[i].c_str(), nullptr);
    }
  }

  const auto curve_path = run_dir / "metrics.csv";
  if (std::filesystem::exists(curve_path)) {
    auto curve_lines = csv_lines(read_text_file(curve_path));
    for (std::size_t i = 1; i < curve_lines.size(); ++i) {
      run.curve_rows.push_back(curve_lines[i]);
    }
  }
  return run;
}

struct Stats1 {
  int n = 0;
  double mean = 0.0;
  double sd = 0.0;
};

Stats1 mean_sd(const std::vector<double>& v) {
  Stats1 s;
  s.n = static_cast<int>(v.size());
  if (s.n == 0) return s;
  for (double x : v) s.mean += x;
  s.mean /= s.n;
  if (s.n >= 2) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / (s.n - 1));
  }
  return s;
}

const std::vector<std::string> kSummaryMetrics = {
    "recon", "kl", "curvature", "normal", "edge", "total_recon_kl", "total_full"};

}  // namespace

void emit_report(const std::filesystem::path& runs_dir, const std::filesystem::path& out_dir) {
  // Canonical cell order first, any extra cells after, alphabetically.
  const std::vector<std::string> canonical = {"baseline", "curvature-only", "multi-geometric",
                                              "alternative-geometric"};
  std::vector<std::string> cells;
  std::vector<std::string> extra;
  for (const auto& entry : std::filesystem::directory_iterator(runs_dir)) {
    if (!entry.is_directory()) continue;
    const std::string name = entry.path().filename().string();
    if (std::find(canonical.begin(), canonical.end(), name) == canonical.end()) {
      extra.push_back(name);
    }
  }
  for (const auto& name : canonical) {
    if (std::filesystem::is_directory(runs_dir / name)) cells.push_back(name);
  }
  std::sort(extra.begin(), extra.end());
  cells.insert(cells.end(), extra.begin(), extra.end());
  if (cells.empty()) {
    throw ConfigError("no ablation runs found under " + runs_dir.string());
  }

  std::vector<RunFiles> runs;
  for (const auto& cell : cells) {
    std::vector<std::uint64_t> seeds;
    for (const auto& entry : std::filesystem::directory_iterator(runs_dir / cell)) {
      if (!entry.is_directory()) continue;
      const std::string name = entry.path().filename().string();
      if (name.rfind("seed_", 0) == 0) {
        seeds.push_back(std::stoull(name.substr(5)));
      }
    }
    std::sort(seeds.begin(), seeds.end());
    for (std::uint64_t seed : seeds) {
      runs.push_back(read_run(runs_dir / cell / ("seed_" + std::to_string(seed)), cell, seed));
    }
  }
  if (runs.empty()) {
    throw ConfigError("no completed or aborted runs found under " + runs_dir.string());
  }

  std::filesystem::create_directories(out_dir);

  // summary.csv
  {
    std::string csv = "cell,n,aborted,metric,mean,sd\n";
    for (const auto& cell : cells) {
      int aborted = 0;
      std::map<std::string, std::vector<double>> values;
      for (const auto& run : runs) {
        if (run.cell != cell) continue;
        if (run.aborted) {
          ++aborted;
          continue;
        }
        for (const auto& metric : kSummaryMetrics) {
          auto it = run.metrics.find(metric);
          if (it != run.metrics.end()) values[metric].push_back(it->second);
        }
      }
      for (const auto& metric : kSummaryMetrics) {
        const Stats1 s = mean_sd(values[metric]);
        csv += cell + "," + std::to_string(s.n) + "," + std::to_string(aborted) + "," + metric +
               ",";
        csv += s.n > 0 ? format_double(s.mean) : "";
        csv += ",";
        csv += s.n >= 2 ? format_double(s.sd) : "";
        csv += "\n";
      }
    }
    write_text_file(out_dir / "summary.csv", csv);
  }

  // ttest.csv: curvature-only vs baseline on test recon, paired by seed.
  {
    std::string csv = "comparison,metric,n,t,df,p,exact_separation\n";
    std::map<std::uint64_t, double> a_by_seed, b_by_seed;
    for (const auto& run : runs) {
      if (run.aborted) continue;
      auto it = run.metrics.find("recon");
      if (it == run.metrics.end()) continue;
      if (run.cell == "curvature-only") a_by_seed[run.seed] = it->second;
      if (run.cell == "baseline") b_by_seed[run.seed] = it->second;
    }
    std::vector<double> a, b;
    for (const auto& [seed, value] : a_by_seed) {
      auto it = b_by_seed.find(seed);
      if (it != b_by_seed.end()) {
        a.push_back(value);
        b.push_back(it->second);
      }
    }
    if (a.size() >= 2) {
      const StatResult r = paired_t_test(a, b);
      csv += "curvature-only-vs-baseline,recon," + std::to_string(a.size()) + "," +
             format_double(r.t) + "," + format_double(r.df) + "," + format_double(r.p) + "," +
             (r.exact_separation ? "1" : "0") + "\n";
    }
    write_text_file(out_dir / "ttest.csv", csv);
  }

  // curves.csv: all per-epoch rows, tagged with cell and seed.
  {
    std::string csv = "cell,seed,epoch,split,recon,kl,curvature,normal,edge,total,"
                      "surface_voxels,lr\n";
    for (const auto& run : runs) {
      for (const auto& row : run.curve_rows) {
        csv += run.cell + "," + std::to_string(run.seed) + "," + row + "\n";
      }
    }
    write_text_file(out_dir / "curves.csv", csv);
  }

  // Plots: training/validation totals for every run, and the three loss
  // components for the first curvature-only run.
  auto series_for = [&](const std::string& want_split, int field) {
    std::vector<PlotSeries> series;
    for (const auto& run : runs) {
      PlotSeries s;
      s.label = run.cell + "/" + std::to_string(run.seed);
      for (const auto& row : run.curve_rows) {
        const auto f = split(row, ',');
        if (f.size() < 10 || f[1] != want_split) continue;
        s.x.push_back(std::strtod(f[0].c_str(), nullptr));
        s.y.push_back(std::strtod(f[static_cast<std::size_t>(field)].c_str(), nullptr));
      }
      if (!s.x.empty()) series.push_back(std::move(s));
    }
    return series;
  };

  const int kTotalField = 7;
  const auto train_series = series_for("train", kTotalField);
  if (!train_series.empty()) {
    write_line_plot_svg(out_dir / "totals_train.svg", "Training total loss", "epoch", "total",
                        train_series);
  }
  const auto val_series = series_for("val", kTotalField);
  if (!val_series.empty()) {
    write_line_plot_svg(out_dir / "totals_val.svg", "Validation total loss", "epoch", "total",
                        val_series);
  }

  const RunFiles* component_run = nullptr;
  for (const auto& run : runs) {
    if (run.cell == "curvature-only" && !run.curve_rows.empty()) {
      component_run = &run;
      break;
    }
  }
  if (component_run == nullptr) {
    for (const auto& run : runs) {
      if (!run.curve_rows.empty()) {
        component_run = &run;
        break;
      }
    }
  }
  if (component_run != nullptr) {
    const struct {
      const char* label;
      int field;
    } components[] = {{"recon", 2}, {"kl", 3}, {"curvature", 4}};
    std::vector<PlotSeries> series;
    for (const auto& c : components) {
      PlotSeries s;
      s.label = c.label;
      for (const auto& row : component_run->curve_rows) {
        const auto f = split(row, ',');
        if (f.size() < 10 || f[1] != "train") continue;
        s.x.push_back(std::strtod(f[0].c_str(), nullptr));
        s.y.push_back(std::strtod(f[static_cast<std::size_t>(c.field)].c_str(), nullptr));
      }
      if (!s.x.empty()) series.push_back(std::move(s));
    }
    if (!series.empty()) {
      write_line_plot_svg(out_dir / "components.svg",
                          "Loss components (" + component_run->cell + ", seed " +
                              std::to_string(component_run->seed) + ")",
                          "epoch", "component value", series);
    }
  }
}

}  // namespace curvox
