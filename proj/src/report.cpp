#include "anomkit/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "anomkit/json_io.hpp"

namespace anomkit::report {

namespace {

// shortest representation that round-trips; markdown and JSON must agree
// on values, not on digit counts
std::string shortest(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string runtime_label(double seconds) {
  std::ostringstream out;
  if (seconds < 60.0) {
    out << shortest(seconds) << "s";
  } else {
    out << shortest(seconds / 60.0) << "min";
  }
  return out.str();
}

}  // namespace

nlohmann::json to_json(const BenchmarkReport& report) {
  nlohmann::json j;
  j["dataset"] = report.dataset;
  j["n_rows"] = report.n_rows;
  j["n_cols"] = report.n_cols;
  j["master_seed"] = report.master_seed;
  j["artifact_version"] = report.artifact_version;
  j["hardware"] = report.hardware;
  j["runtimes_comparable"] = report.runtimes_comparable;
  j["timeout_seconds"] = report.timeout_seconds;
  j["methods"] = nlohmann::json::array();
  for (const auto& m : report.methods) {
    nlohmann::json mj;
    mj["method"] = m.method;
    mj["status"] = m.status;
    if (m.status == "ok") {
      mj["injected_found"] = m.metrics.injected_found;
      mj["total_flagged"] = m.metrics.total_flagged;
      mj["flagged_fraction"] = m.metrics.flagged_fraction;
      mj["runtime_seconds"] = m.metrics.runtime_seconds;
      if (m.metrics.quality.has_value()) {
        mj["quality"] = *m.metrics.quality;
      } else {
        mj["quality"] = nullptr;
      }
      mj["threshold"] = m.threshold;
    }
    mj["config"] = m.config_used;
    j["methods"].push_back(mj);
  }
  return j;
}

std::string to_markdown(const BenchmarkReport& report) {
  std::ostringstream out;
  out << "# Benchmark report: " << report.dataset << "\n\n";
  out << "- rows: " << report.n_rows << "\n";
  out << "- feature columns: " << report.n_cols << "\n";
  out << "- master seed: " << report.master_seed << "\n";
  out << "- hardware: " << report.hardware << "\n";
  out << "- runtimes comparable: "
      << (report.runtimes_comparable ? "yes" : "no (methods ran concurrently)")
      << "\n\n";

  out << "## Method comparison\n\n";
  out << "| Method | Anomalies detected out of 4 | Total running time | Quality score |\n";
  out << "|---|---|---|---|\n";
  for (const auto& m : report.methods) {
    out << "| " << m.method << " | ";
    if (m.status != "ok") {
      out << "DNF | >" << runtime_label(report.timeout_seconds) << " | - |\n";
      continue;
    }
    out << m.metrics.injected_found << " | "
        << shortest(m.metrics.runtime_seconds) << "s | ";
    if (m.metrics.quality.has_value()) {
      out << shortest(*m.metrics.quality);
    } else {
      out << "-";
    }
    out << " |\n";
  }

  out << "\n## Total detected anomalies\n\n";
  out << "| Method | Total flagged | Flagged fraction |\n";
  out << "|---|---|---|\n";
  for (const auto& m : report.methods) {
    out << "| " << m.method << " | ";
    if (m.status != "ok") {
      out << "DNF | DNF |\n";
    } else {
      out << m.metrics.total_flagged << " | "
          << shortest(m.metrics.flagged_fraction) << " |\n";
    }
  }
  out << "\n*DNF: did not finish inside the "
      << shortest(report.timeout_seconds) << "s budget.*\n";
  return out.str();
}

std::string to_svg(const BenchmarkReport& report) {
  const std::size_t n = report.methods.size();
  const double slot = 110.0;
  const double margin_left = 70.0, margin_right = 70.0;
  const double margin_top = 40.0, margin_bottom = 70.0;
  const double plot_h = 300.0;
  const double width = margin_left + margin_right + slot * static_cast<double>(n);
  const double height = margin_top + plot_h + margin_bottom;

  double max_frac = 0.0;
  for (const auto& m : report.methods) {
    if (m.status == "ok") max_frac = std::max(max_frac, m.metrics.flagged_fraction);
  }
  if (max_frac <= 0.0) max_frac = 0.01;
  const double axis_max = max_frac * 1.15;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "  <text x=\"" << width / 2
      << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << "Flagged fraction per method (markers: injected anomalies found, of 4)"
      << "</text>\n";

  // axes
  const double base_y = margin_top + plot_h;
  svg << "  <line x1=\"" << margin_left << "\" y1=\"" << base_y << "\" x2=\""
      << width - margin_right << "\" y2=\"" << base_y
      << "\" stroke=\"black\"/>\n";
  svg << "  <line x1=\"" << margin_left << "\" y1=\"" << margin_top
      << "\" x2=\"" << margin_left << "\" y2=\"" << base_y
      << "\" stroke=\"black\"/>\n";
  svg << "  <line x1=\"" << width - margin_right << "\" y1=\"" << margin_top
      << "\" x2=\"" << width - margin_right << "\" y2=\"" << base_y
      << "\" stroke=\"black\"/>\n";

  // left axis ticks (flagged fraction)
  for (int t = 0; t <= 4; ++t) {
    double frac = axis_max * t / 4.0;
    double y = base_y - plot_h * t / 4.0;
    svg << "  <text x=\"" << margin_left - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-size=\"11\">" << shortest(std::round(frac * 1000.0) / 10.0)
        << "%</text>\n";
  }
  // right axis ticks (injected found)
  for (int t = 0; t <= 4; ++t) {
    double y = base_y - plot_h * t / 4.0;
    svg << "  <text x=\"" << width - margin_right + 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"start\" font-size=\"11\">" << t << "</text>\n";
  }

  for (std::size_t i = 0; i < n; ++i) {
    const auto& m = report.methods[i];
    const double cx = margin_left + slot * (static_cast<double>(i) + 0.5);
    const double bar_w = slot * 0.55;
    if (m.status == "ok") {
      double h = plot_h * (m.metrics.flagged_fraction / axis_max);
      svg << "  <rect class=\"bar\" x=\"" << cx - bar_w / 2 << "\" y=\""
          << base_y - h << "\" width=\"" << bar_w << "\" height=\"" << h
          << "\" fill=\"#4878a8\"/>\n";
      double my = base_y - plot_h * (static_cast<double>(m.metrics.injected_found) / 4.0);
      svg << "  <circle class=\"marker\" cx=\"" << cx << "\" cy=\"" << my
          << "\" r=\"6\" fill=\"#c0392b\"/>\n";
    } else {
      svg << "  <rect class=\"bar\" x=\"" << cx - bar_w / 2 << "\" y=\""
          << base_y << "\" width=\"" << bar_w
          << "\" height=\"0\" fill=\"#999999\"/>\n";
      svg << "  <text x=\"" << cx << "\" y=\"" << base_y - 10
          << "\" text-anchor=\"middle\" font-size=\"12\">DNF</text>\n";
    }
    svg << "  <text x=\"" << cx << "\" y=\"" << base_y + 20
        << "\" text-anchor=\"middle\" font-size=\"12\">" << m.method
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string hardware_summary() {
  std::string model = "unknown cpu";
  std::ifstream cpuinfo("/proc/cpuinfo");
  std::string line;
  while (std::getline(cpuinfo, line)) {
    if (line.rfind("model name", 0) == 0) {
      auto pos = line.find(':');
      if (pos != std::string::npos) {
        model = line.substr(pos + 2);
      }
      break;
    }
  }
  return model + ", " + std::to_string(std::thread::hardware_concurrency()) +
         " threads";
}

}  // namespace anomkit::report
