#include "enose/report.hpp"

#include "enose/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace enose {

namespace fs = std::filesystem;

void write_text_file(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Io, path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, path.string() + ": cannot open for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw Error(ErrorCode::Io, path.string() + ": write failed");
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixed(double value, int decimals) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.*f", decimals, value);
  std::string s(buf.data());
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 480;
constexpr double kLeft = 70;
constexpr double kRight = 170;
constexpr double kTop = 40;
constexpr double kBottom = 60;

const std::array<const char*, 12> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                              "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                              "#bcbd22", "#17becf", "#000000", "#aec7e8"};

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string px(double v) { return fixed(v, 2); }

std::string open_svg(double w, double h, const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(w) + "\" height=\"" +
                  px(h) + "\" viewBox=\"0 0 " + px(w) + " " + px(h) +
                  "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + px(w / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
       escape(title) + "</text>\n";
  return s;
}

std::string text(double x, double y, const std::string& body, const char* anchor = "start",
                 const std::string& extra = {}) {
  return "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\" text-anchor=\"" + anchor + "\"" + extra + ">" +
         escape(body) + "</text>\n";
}

std::string line(double x1, double y1, double x2, double y2, const std::string& style) {
  return "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" + px(x2) + "\" y2=\"" + px(y2) +
         "\" " + style + "/>\n";
}

}  // namespace

std::string svg_lines(const std::vector<Series>& series, const std::string& title,
                      const std::string& x_label, const std::string& y_label, double x_lo,
                      double x_hi, double y_lo, double y_hi, bool diagonal) {
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  if (!(x_hi > x_lo)) x_hi = x_lo + 1.0;
  if (!(y_hi > y_lo)) y_hi = y_lo + 1.0;
  auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto sy = [&](double y) { return kTop + ph - (y - y_lo) / (y_hi - y_lo) * ph; };

  std::string s = open_svg(kWidth, kHeight, title);
  s += "<rect x=\"" + px(kLeft) + "\" y=\"" + px(kTop) + "\" width=\"" + px(pw) + "\" height=\"" + px(ph) +
       "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double fx = x_lo + (x_hi - x_lo) * t / 5.0;
    const double fy = y_lo + (y_hi - y_lo) * t / 5.0;
    s += line(sx(fx), kTop + ph, sx(fx), kTop + ph + 5, "stroke=\"#333\"");
    s += text(sx(fx), kTop + ph + 18, fixed(fx, 2), "middle");
    s += line(kLeft - 5, sy(fy), kLeft, sy(fy), "stroke=\"#333\"");
    s += text(kLeft - 8, sy(fy) + 4, fixed(fy, 2), "end");
  }
  s += text(kLeft + pw / 2, kHeight - 15, x_label, "middle");
  s += text(18, kTop + ph / 2, y_label, "middle",
            " transform=\"rotate(-90 18 " + px(kTop + ph / 2) + ")\"");
  if (diagonal) {
    s += line(sx(x_lo), sy(y_lo), sx(x_hi), sy(y_hi), "stroke=\"#999\" stroke-dasharray=\"4 4\"");
  }
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& ser = series[k];
    const char* colour = kPalette[k % kPalette.size()];
    std::string pts;
    for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
      if (!pts.empty()) pts += ' ';
      pts += px(sx(std::clamp(ser.x[i], x_lo, x_hi))) + "," + px(sy(std::clamp(ser.y[i], y_lo, y_hi)));
    }
    s += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"" +
         pts + "\"/>\n";
    const double ly = kTop + 10 + 16.0 * static_cast<double>(k);
    s += line(kWidth - kRight + 10, ly, kWidth - kRight + 30, ly,
              "stroke=\"" + std::string(colour) + "\" stroke-width=\"2\"");
    s += text(kWidth - kRight + 35, ly + 4, ser.name);
  }
  s += "</svg>\n";
  return s;
}

std::string svg_confusion(const EvalReport& report, const std::string& title) {
  const auto c = static_cast<double>(report.classes.size());
  const double cell = 36;
  const double left = 150;
  const double top = 50;
  const double w = left + cell * c + 20;
  const double h = top + cell * c + 140;
  std::string s = open_svg(w, h, title);
  for (Eigen::Index i = 0; i < report.confusion.rows(); ++i) {
    const double row_total = std::max<double>(1.0, static_cast<double>(report.confusion.row(i).sum()));
    for (Eigen::Index j = 0; j < report.confusion.cols(); ++j) {
      const auto count = report.confusion(i, j);
      const double share = static_cast<double>(count) / row_total;
      const int shade = static_cast<int>(std::lround(255.0 * (1.0 - share)));
      char fill[16];
      std::snprintf(fill, sizeof fill, "#%02x%02xff", shade, shade);
      const double x = left + cell * static_cast<double>(j);
      const double y = top + cell * static_cast<double>(i);
      s += "<rect x=\"" + px(x) + "\" y=\"" + px(y) + "\" width=\"" + px(cell) + "\" height=\"" + px(cell) +
           "\" fill=\"" + fill + "\" stroke=\"#ccc\"/>\n";
      s += text(x + cell / 2, y + cell / 2 + 4, std::to_string(count), "middle",
                share > 0.5 ? " fill=\"white\" font-size=\"10\"" : " font-size=\"10\"");
    }
  }
  for (std::size_t k = 0; k < report.classes.size(); ++k) {
    const double off = cell * static_cast<double>(k) + cell / 2;
    s += text(left - 6, top + off + 4, report.classes[k], "end");
    const double lx = left + off;
    const double ly = top + cell * c + 8;
    s += text(lx, ly, report.classes[k], "end",
              " transform=\"rotate(-60 " + px(lx) + " " + px(ly) + ")\"");
  }
  s += "</svg>\n";
  return s;
}

std::string svg_roc(const EvalReport& report, const std::string& title) {
  std::vector<Series> series;
  for (std::size_t k = 0; k < report.classes.size(); ++k) {
    const auto& curve = report.roc.per_class[k];
    if (!curve.defined) continue;
    series.push_back({report.classes[k] + " " + fixed(curve.auc, 3), curve.fpr, curve.tpr});
  }
  series.push_back({"micro " + fixed(report.roc.micro_auc, 3), report.roc.micro.fpr, report.roc.micro.tpr});
  return svg_lines(series, title, "false positive rate", "true positive rate", 0, 1, 0, 1, true);
}

std::string svg_learning_curve(const std::vector<LearningPoint>& points, const std::string& title) {
  Series train{"train", {}, {}};
  Series val{"validation", {}, {}};
  double lo = 1.0;
  for (const auto& p : points) {
    train.x.push_back(p.train_size);
    train.y.push_back(p.train_accuracy);
    val.x.push_back(p.train_size);
    val.y.push_back(p.val_accuracy);
    if (std::isfinite(p.val_accuracy)) lo = std::min(lo, p.val_accuracy);
    if (std::isfinite(p.train_accuracy)) lo = std::min(lo, p.train_accuracy);
  }
  const double y_lo = std::max(0.0, std::floor(lo * 20.0) / 20.0 - 0.05);
  const double x_hi = points.empty() ? 1.0 : points.back().train_size;
  return svg_lines({train, val}, title, "training samples", "accuracy", 0, x_hi, y_lo, 1.0);
}

std::string svg_bars(const std::vector<std::string>& labels, const std::vector<double>& values,
                     const std::string& title, std::size_t highlight) {
  const double bar = 18;
  const double left = 190;
  const double plot_w = 380;
  const double top = 45;
  const double n = static_cast<double>(labels.size());
  std::string s = open_svg(left + plot_w + 70, top + (bar + 6) * n + 30, title);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double v = i < values.size() && std::isfinite(values[i]) ? std::clamp(values[i], 0.0, 1.0) : 0.0;
    const double y = top + (bar + 6) * static_cast<double>(i);
    s += text(left - 6, y + bar - 5, labels[i], "end");
    s += "<rect x=\"" + px(left) + "\" y=\"" + px(y) + "\" width=\"" + px(plot_w * v) + "\" height=\"" +
         px(bar) + "\" fill=\"" + (i == highlight ? "#d62728" : "#1f77b4") + "\"/>\n";
    s += text(left + plot_w * v + 4, y + bar - 5, i < values.size() ? fixed(values[i], 4) : "");
  }
  s += "</svg>\n";
  return s;
}

}  // namespace enose
