#pragma once

#include "enose/metrics.hpp"
#include "enose/selection.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace enose {

/// Writes `content` verbatim, creating parent directories. Throws Io naming
/// the path on failure.
void write_text_file(const std::filesystem::path& path, std::string_view content);

std::string read_text_file(const std::filesystem::path& path);

/// Fixed-point text with `decimals` places; "-inf"/"inf"/"nan" otherwise.
std::string fixed(double value, int decimals);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

// SVG renderers. Output depends only on the inputs (no timestamps, fixed
// number formatting), so plots are as reproducible as the CSV reports.

/// Line chart with axes scaled to [x_lo, x_hi] x [y_lo, y_hi].
std::string svg_lines(const std::vector<Series>& series, const std::string& title,
                      const std::string& x_label, const std::string& y_label, double x_lo,
                      double x_hi, double y_lo, double y_hi, bool diagonal = false);

std::string svg_confusion(const EvalReport& report, const std::string& title);
std::string svg_roc(const EvalReport& report, const std::string& title);
std::string svg_learning_curve(const std::vector<LearningPoint>& points, const std::string& title);

/// Horizontal bars; `highlight` (if < labels.size()) is drawn in a second colour.
std::string svg_bars(const std::vector<std::string>& labels, const std::vector<double>& values,
                     const std::string& title, std::size_t highlight = static_cast<std::size_t>(-1));

}  // namespace enose
