// Copyright (c) 2026 The bofscan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bofscan/evaluation.hpp"
#include "bofscan/vocabulary.hpp"

namespace bofscan {

inline std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

/// "96.33%" or "n/a".
inline std::string format_percent(const std::optional<double>& v) {
  return v ? format_fixed(*v * 100.0, 2) + "%" : "n/a";
}

/// One comparison-table line: "BOF+MLP | 96.33% | 97.33% | 95.40% | 95.28%".
inline std::string format_table_row(const std::string& name, const Metrics& m) {
  std::string s = name;
  for (const auto& v : m.as_array()) s += " | " + format_percent(v);
  return s;
}

inline std::string format_table(std::span<const MethodResult> rows) {
  std::string s = "# | method | accuracy | sensitivity | specificity | precision\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s += std::to_string(i + 1) + " | " + format_table_row(rows[i].name, rows[i].metrics) + "\n";
  }
  return s;
}

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

inline std::string csv_value(const std::optional<double>& v) { return v ? format_fixed(*v, 6) : "n/a"; }

inline std::string xml_escape(const std::string& s) {
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

// Minimal SVG 1.1 writer; all coordinates printed with two decimals.
class Svg {
 public:
  Svg(double w, double h) : w_(w), h_(h) {}

  void rect(double x, double y, double w, double h, const std::string& fill) {
    body_ += "<rect x=\"" + f(x) + "\" y=\"" + f(y) + "\" width=\"" + f(w) + "\" height=\"" + f(h) +
             "\" fill=\"" + fill + "\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const std::string& stroke = "#000") {
    body_ += "<line x1=\"" + f(x1) + "\" y1=\"" + f(y1) + "\" x2=\"" + f(x2) + "\" y2=\"" + f(y2) +
             "\" stroke=\"" + stroke + "\" stroke-width=\"1\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) body_ += (i ? " " : "") + f(pts[i].first) + "," + f(pts[i].second);
    body_ += "\"/>\n";
  }
  void circle(double cx, double cy, double r, const std::string& fill) {
    body_ += "<circle cx=\"" + f(cx) + "\" cy=\"" + f(cy) + "\" r=\"" + f(r) + "\" fill=\"" + fill + "\"/>\n";
  }
  void text(double x, double y, const std::string& t, const std::string& anchor = "middle", int size = 12) {
    body_ += "<text x=\"" + f(x) + "\" y=\"" + f(y) + "\" font-family=\"sans-serif\" font-size=\"" +
             std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + xml_escape(t) + "</text>\n";
  }

  std::string str() const {
    return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
           f(w_) + "\" height=\"" + f(h_) + "\" viewBox=\"0 0 " + f(w_) + " " + f(h_) + "\">\n<rect width=\"100%\" "
           "height=\"100%\" fill=\"#fff\"/>\n" + body_ + "</svg>\n";
  }

 private:
  static std::string f(double v) { return format_fixed(v, 2); }
  double w_, h_;
  std::string body_;
};

struct Frame {
  double x0, y0, w, h;  // plot area
};

inline void axes(Svg& svg, const Frame& fr, double y_max, const std::string& y_label, int ticks = 4) {
  svg.line(fr.x0, fr.y0 + fr.h, fr.x0 + fr.w, fr.y0 + fr.h);
  svg.line(fr.x0, fr.y0, fr.x0, fr.y0 + fr.h);
  for (int t = 0; t <= ticks; ++t) {
    const double v = y_max * t / ticks;
    const double y = fr.y0 + fr.h - fr.h * t / ticks;
    svg.line(fr.x0 - 4, y, fr.x0, y);
    svg.text(fr.x0 - 6, y + 4, y_max >= 10 ? format_fixed(v, 0) : format_fixed(v, 2), "end", 10);
  }
  svg.text(fr.x0 + fr.w / 2, fr.y0 - 10, y_label, "middle", 13);
}

inline std::string bar_chart(const std::string& title, std::span<const double> values, std::span<const std::string> labels,
                             double y_max, const std::string& fill) {
  const double w = 640, h = 360;
  Svg svg(w, h);
  const Frame fr{60, 40, w - 80, h - 90};
  axes(svg, fr, y_max, title);
  const double slot = fr.w / std::max<std::size_t>(1, values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double bh = y_max > 0 ? fr.h * std::clamp(values[i] / y_max, 0.0, 1.0) : 0.0;
    svg.rect(fr.x0 + i * slot + slot * 0.15, fr.y0 + fr.h - bh, slot * 0.7, bh, fill);
    if (i < labels.size() && !labels[i].empty()) svg.text(fr.x0 + (i + 0.5) * slot, fr.y0 + fr.h + 16, labels[i], "middle", 10);
  }
  return svg.str();
}

}  // namespace detail

/// metrics.csv: one row per method, test-split metrics ("n/a" marks a zero denominator).
inline std::string metrics_csv(std::span<const MethodResult> rows) {
  std::string s = "index,method,split,accuracy,sensitivity,specificity,precision,tp,fn,tn,fp\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    s += std::to_string(i + 1) + "," + r.name + ",test";
    for (const auto& v : r.metrics.as_array()) s += "," + detail::csv_value(v);
    s += "," + std::to_string(r.cm.tp) + "," + std::to_string(r.cm.fn) + "," + std::to_string(r.cm.tn) + "," +
         std::to_string(r.cm.fp) + "\n";
  }
  return s;
}

inline std::string word_occurrence_csv(const ClassOccurrence& occ) {
  std::string s = "word,ma,normal\n";
  for (std::size_t i = 0; i < occ.ma.size(); ++i) {
    s += std::to_string(i) + "," + std::to_string(occ.ma[i]) + "," + std::to_string(occ.normal[i]) + "\n";
  }
  return s;
}

/// Two stacked bar charts of per-word occurrence totals (MA above, NORMAL below).
inline std::string word_occurrence_svg(const ClassOccurrence& occ) {
  const std::size_t k = occ.ma.size();
  double y_max = 1.0;
  for (std::size_t i = 0; i < k; ++i) y_max = std::max({y_max, double(occ.ma[i]), double(occ.normal[i])});
  const double w = 900, panel = 260;
  detail::Svg svg(w, 2 * panel + 20);
  const std::pair<const std::vector<std::uint64_t>*, const char*> panels[] = {{&occ.ma, "MA: visual word occurrences"},
                                                                              {&occ.normal, "NORMAL: visual word occurrences"}};
  for (int p = 0; p < 2; ++p) {
    const detail::Frame fr{60, 40 + p * panel, w - 80, panel - 80};
    detail::axes(svg, fr, y_max, panels[p].second);
    const double slot = fr.w / std::max<std::size_t>(1, k);
    for (std::size_t i = 0; i < k; ++i) {
      const double bh = fr.h * static_cast<double>((*panels[p].first)[i]) / y_max;
      svg.rect(fr.x0 + i * slot, fr.y0 + fr.h - bh, slot * 0.8, bh, p == 0 ? "#c0392b" : "#2e86c1");
    }
    for (std::size_t i = 0; i < k; i += std::max<std::size_t>(1, k / 10)) {
      svg.text(fr.x0 + (i + 0.5) * slot, fr.y0 + fr.h + 14, std::to_string(i + 1), "middle", 9);
    }
  }
  return svg.str();
}

inline std::string sweep_csv(const SweepResult& sweep) {
  std::string s = "hidden,validation_accuracy\n";
  for (const auto& p : sweep.points) s += std::to_string(p.hidden) + "," + format_fixed(p.accuracy, 6) + "\n";
  return s;
}

/// Validation accuracy (%) against hidden-neuron count.
inline std::string sweep_svg(const SweepResult& sweep) {
  const double w = 640, h = 360;
  detail::Svg svg(w, h);
  const detail::Frame fr{60, 40, w - 80, h - 90};
  detail::axes(svg, fr, 100.0, "Validation accuracy (%) vs hidden neurons");
  std::size_t hmin = sweep.points.front().hidden, hmax = hmin;
  for (const auto& p : sweep.points) {
    hmin = std::min(hmin, p.hidden);
    hmax = std::max(hmax, p.hidden);
  }
  const double span = hmax > hmin ? static_cast<double>(hmax - hmin) : 1.0;
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : sweep.points) {
    const double x = fr.x0 + fr.w * (hmax > hmin ? (p.hidden - hmin) / span : 0.5);
    const double y = fr.y0 + fr.h * (1.0 - p.accuracy);
    pts.emplace_back(x, y);
  }
  svg.polyline(pts, "#1f618d");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    svg.circle(pts[i].first, pts[i].second, 3.5, "#1f618d");
    svg.text(pts[i].first, fr.y0 + fr.h + 16, std::to_string(sweep.points[i].hidden), "middle", 10);
  }
  return svg.str();
}

/// One bar per method (x-axis = 1-based method index) for a single criterion.
inline std::string criterion_svg(std::span<const MethodResult> rows, std::size_t metric) {
  std::vector<double> values;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    values.push_back(rows[i].metrics.as_array()[metric].value_or(0.0) * 100.0);
    labels.push_back(std::to_string(i + 1));
  }
  std::string title = kMetricNames[metric];
  title[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(title[0])));
  return detail::bar_chart(title + " (%)", values, labels, 100.0, "#7d3c98");
}

/// Writes the report set under `out_dir`. Empty occurrence or sweep inputs
/// skip their files.
inline std::vector<std::filesystem::path> emit_report(std::span<const MethodResult> rows, const ClassOccurrence* occurrence,
                                                      const SweepResult* sweep, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) throw DataError("cannot create report directory " + out_dir.string());

  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    detail::write_text(out_dir / name, text);
    written.push_back(out_dir / name);
  };
  put("metrics.csv", metrics_csv(rows));
  if (occurrence && !occurrence->ma.empty()) {
    put("word_occurrence.csv", word_occurrence_csv(*occurrence));
    put("fig5.svg", word_occurrence_svg(*occurrence));
  }
  if (sweep && !sweep->points.empty()) {
    put("sweep.csv", sweep_csv(*sweep));
    put("fig6.svg", sweep_svg(*sweep));
  }
  if (!rows.empty()) {
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      put(std::string("fig7_") + kMetricNames[m] + ".svg", criterion_svg(rows, m));
    }
  }
  return written;
}

}  // namespace bofscan
