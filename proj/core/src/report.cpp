#include "uhoi/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "uhoi/datamodel.hpp"
#include "uhoi/error.hpp"

namespace uhoi {

namespace {

std::string pct(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", value * 100.0);
  return buf;
}

std::string pct(const std::optional<SplitScore>& s) { return s ? pct(s->map_avg) : std::string(); }

void require_compatible(const std::vector<NamedReport>& reports) {
  if (reports.empty()) throw ConfigError("no reports given");
  const auto diffs = report_incompatibilities(reports);
  if (diffs.empty()) return;
  std::string msg = "reports are not comparable:";
  for (const auto& d : diffs) msg += "\n  " + d;
  throw ConfigError(msg);
}

std::vector<std::vector<std::string>> rows(const std::vector<NamedReport>& reports, bool csv) {
  const auto& ts = reports.front().report.config.thresholds;
  std::vector<std::string> header{csv ? "method" : "Method"};
  for (double tau : ts) header.push_back((csv ? "map@" : "mAP@") + format_threshold(tau));
  for (const char* h : {"full", "rare", "nonrare", "sr"}) header.push_back(h);
  if (!csv) header = [&] {
    auto h = header;
    h[h.size() - 4] = "Full";
    h[h.size() - 3] = "Rare";
    h[h.size() - 2] = "Non-rare";
    h[h.size() - 1] = "SR";
    return h;
  }();
  std::vector<std::vector<std::string>> out{header};
  for (const auto& r : reports) {
    std::vector<std::string> row{r.name};
    for (double v : r.report.map_per_threshold) row.push_back(pct(v));
    row.push_back(pct(r.report.map_avg));
    const std::string missing = csv ? "" : "-";
    row.push_back(r.report.rare ? pct(r.report.rare) : missing);
    row.push_back(r.report.nonrare ? pct(r.report.nonrare) : missing);
    row.push_back(pct(r.report.sr));
    out.push_back(std::move(row));
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

}  // namespace

NamedReport load_named_report(const std::string& path) {
  const auto doc = read_json_file(path);
  NamedReport r;
  try {
    r.report = report_from_json(doc);
  } catch (const Error& e) {
    throw ParseError(path + ": " + e.what());
  }
  r.run = doc.value("run", nlohmann::json::object());
  r.name = r.run.is_object() && r.run.contains("name") && r.run["name"].is_string() &&
                   !r.run["name"].get<std::string>().empty()
               ? r.run["name"].get<std::string>()
               : std::filesystem::path(path).stem().string();
  return r;
}

std::vector<std::string> report_incompatibilities(const std::vector<NamedReport>& reports) {
  std::vector<std::string> out;
  if (reports.empty()) return out;
  const auto& first = reports.front();
  for (std::size_t i = 1; i < reports.size(); ++i) {
    const auto& r = reports[i];
    for (const auto& d : config_differences(first.report.config, r.report.config)) {
      out.push_back(first.name + " vs " + r.name + ": " + d);
    }
    if (first.report.vocabulary_fingerprint != r.report.vocabulary_fingerprint) {
      out.push_back(first.name + " vs " + r.name + ": vocabulary " +
                    first.report.vocabulary_fingerprint + " vs " + r.report.vocabulary_fingerprint);
    }
  }
  return out;
}

std::string render_table(const std::vector<NamedReport>& reports) {
  require_compatible(reports);
  const auto table = rows(reports, false);
  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& row : table) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(width[c] - row[c].size(), ' ');
      if (c == 0) {
        out << row[c] << pad;
      } else {
        out << "  " << pad << row[c];
      }
    }
    out << '\n';
  };
  emit(table.front());
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (std::size_t i = 1; i < table.size(); ++i) emit(table[i]);
  return out.str();
}

std::string render_csv(const std::vector<NamedReport>& reports) {
  require_compatible(reports);
  std::ostringstream out;
  for (const auto& row : rows(reports, true)) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_field(row[c]);
    out << '\n';
  }
  return out.str();
}

std::string render_generations_plot(const std::vector<NamedReport>& reports) {
  require_compatible(reports);
  std::vector<std::pair<int, double>> points;
  for (const auto& r : reports) {
    if (!r.run.is_object() || !r.run.contains("num_generations") ||
        !r.run["num_generations"].is_number_integer()) {
      throw ConfigError("report '" + r.name + "' does not record num_generations");
    }
    points.emplace_back(r.run["num_generations"].get<int>(), r.report.map_avg * 100.0);
  }
  std::stable_sort(points.begin(), points.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 20, kTop = 20, kBottom = 50;
  const double x_lo = points.front().first;
  const double x_hi = std::max(points.back().first, points.front().first + 1);
  double y_hi = 0.0;
  for (const auto& p : points) y_hi = std::max(y_hi, p.second);
  y_hi = y_hi <= 0.0 ? 1.0 : y_hi * 1.1;
  auto sx = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * (kW - kLeft - kRight); };
  auto sy = [&](double y) { return kH - kBottom - y / y_hi * (kH - kTop - kBottom); };
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return std::string(buf);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kH - kBottom << "\" x2=\"" << kW - kRight
      << "\" y2=\"" << kH - kBottom << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kH - kBottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = y_hi * i / 4.0;
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(sy(y) + 4)
        << "\" text-anchor=\"end\">" << num(y) << "</text>\n";
  }
  for (const auto& p : points) {
    svg << "<text x=\"" << num(sx(p.first)) << "\" y=\"" << kH - kBottom + 16
        << "\" text-anchor=\"middle\">" << p.first << "</text>\n";
  }
  svg << "<text x=\"" << (kLeft + kW - kRight) / 2 << "\" y=\"" << kH - 10
      << "\" text-anchor=\"middle\">Number of generations</text>\n";
  svg << "<text x=\"14\" y=\"" << (kTop + kH - kBottom) / 2 << "\" text-anchor=\"middle\" "
      << "transform=\"rotate(-90 14 " << (kTop + kH - kBottom) / 2 << ")\">mAP Avg.</text>\n";
  svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (std::size_t i = 0; i < points.size(); ++i) {
    svg << (i ? " " : "") << num(sx(points[i].first)) << "," << num(sy(points[i].second));
  }
  svg << "\"/>\n";
  for (const auto& p : points) {
    svg << "<circle cx=\"" << num(sx(p.first)) << "\" cy=\"" << num(sy(p.second))
        << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace uhoi
