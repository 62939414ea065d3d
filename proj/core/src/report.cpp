#include "dvfinv/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "dvfinv/error.hpp"

namespace dvfinv {
namespace {

using nlohmann::json;

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
double number(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

json to_json(const PercentileSummary& s) {
  json values = json::array();
  for (double v : s.values) values.push_back(number(v));
  return {{"levels", s.levels}, {"values", values}, {"count", s.count}, {"invalid_fraction", number(s.invalid_fraction)}};
}

PercentileSummary summary_from(const json& j) {
  PercentileSummary s;
  s.levels = j.at("levels").get<std::vector<double>>();
  for (const auto& v : j.at("values")) s.values.push_back(number(v));
  s.count = j.at("count").get<std::size_t>();
  s.invalid_fraction = number(j.at("invalid_fraction"));
  if (s.levels.size() != s.values.size()) throw Error(Errc::InvalidArgument, "report: levels/values size differ");
  return s;
}

std::string format_double(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double x = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || end != s.data() + s.size()) throw Error(Errc::InvalidArgument, "bad table value '" + s + "'");
  return x;
}

}  // namespace

InversionReport make_report(const InversionRun& run, std::map<std::string, std::string> parameters,
                            std::map<std::string, PercentileSummary> summaries) {
  InversionReport r;
  r.parameters = std::move(parameters);
  if (std::isfinite(run.initial_mu)) r.initial_mu = run.initial_mu;
  r.initial_residual = run.initial_residual;
  for (const auto& s : run.steps) r.steps.push_back({s.step, s.mu, s.residual, s.frozen});
  r.summaries = std::move(summaries);
  return r;
}

void write_report(const std::filesystem::path& json_path, const InversionReport& r) {
  json steps = json::array();
  for (const auto& s : r.steps)
    steps.push_back({{"step", s.step},
                     {"mu", s.mu ? number(*s.mu) : json(nullptr)},
                     {"residual", to_json(s.residual)},
                     {"frozen", s.frozen}});
  json summaries = json::object();
  for (const auto& [name, s] : r.summaries) summaries[name] = to_json(s);
  const json doc = {{"parameters", r.parameters},
                    {"initial_mu", r.initial_mu ? number(*r.initial_mu) : json(nullptr)},
                    {"initial_residual", to_json(r.initial_residual)},
                    {"steps", steps},
                    {"summaries", summaries}};
  std::ofstream out(json_path, std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + json_path.string());
  out << doc.dump(2) << '\n';
}

InversionReport read_report(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + json_path.string());
  json doc;
  try {
    doc = json::parse(in);
    InversionReport r;
    r.parameters = doc.at("parameters").get<std::map<std::string, std::string>>();
    if (!doc.at("initial_mu").is_null()) r.initial_mu = doc["initial_mu"].get<double>();
    r.initial_residual = summary_from(doc.at("initial_residual"));
    for (const auto& s : doc.at("steps")) {
      ReportStep step;
      step.step = s.at("step").get<int>();
      if (!s.at("mu").is_null()) step.mu = s["mu"].get<double>();
      step.residual = summary_from(s.at("residual"));
      step.frozen = s.at("frozen").get<std::size_t>();
      r.steps.push_back(std::move(step));
    }
    for (const auto& [name, s] : doc.at("summaries").items()) r.summaries[name] = summary_from(s);
    return r;
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument, "malformed report " + json_path.string() + ": " + e.what());
  }
}

void write_step_table(const std::filesystem::path& csv_path, const InversionReport& r) {
  std::ofstream out(csv_path, std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + csv_path.string());
  out << "step,level,residual,invalid_fraction,mu\n";
  auto rows = [&](int step, const PercentileSummary& s, std::optional<double> mu) {
    for (std::size_t i = 0; i < s.levels.size(); ++i)
      out << step << ',' << format_double(s.levels[i]) << ',' << format_double(s.values[i]) << ','
          << format_double(s.invalid_fraction) << ',' << (mu ? format_double(*mu) : "") << '\n';
  };
  rows(0, r.initial_residual, std::nullopt);
  for (const auto& s : r.steps) rows(s.step, s.residual, s.mu);
}

std::vector<StepTableRow> read_step_table(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + csv_path.string());
  std::string line;
  std::getline(in, line);
  if (line != "step,level,residual,invalid_fraction,mu") throw Error(Errc::InvalidArgument, "unexpected table header");
  std::vector<StepTableRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() == 4) cells.emplace_back();
    if (cells.size() != 5) throw Error(Errc::InvalidArgument, "table row needs 5 cells");
    StepTableRow row;
    row.step = static_cast<int>(parse_double(cells[0]));
    row.level = parse_double(cells[1]);
    row.residual = parse_double(cells[2]);
    row.invalid_fraction = parse_double(cells[3]);
    if (!cells[4].empty()) row.mu = parse_double(cells[4]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dvfinv
