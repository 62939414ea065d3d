// dvfinv command-line tool: synthesize, characterize, invert, evaluate,
// predict contraction and export slices. Every command writes a manifest
// next to its outputs.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dvfinv/control.hpp"
#include "dvfinv/error.hpp"
#include "dvfinv/image.hpp"
#include "dvfinv/io.hpp"
#include "dvfinv/metrics.hpp"
#include "dvfinv/parallel.hpp"
#include "dvfinv/report.hpp"
#include "dvfinv/solver.hpp"
#include "dvfinv/spectral.hpp"
#include "dvfinv/stats.hpp"
#include "dvfinv/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dvfinv;

namespace {

enum Exit { kOk = 0, kUsage = 2, kData = 3, kInfeasible = 4 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string t; std::getline(ss, t, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(t, &used));
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw UsageError(std::string("bad number '") + t + "' in " + what);
    }
  }
  return out;
}

// Run manifest written next to the outputs of a command.
struct Manifest {
  std::string command;
  json parameters = json::object();
  json inputs = json::array();
  json outputs = json::array();
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void output(const fs::path& p) { outputs.push_back(p.string()); }
  void input(const fs::path& p) { inputs.push_back(p.string()); }

  void write(const fs::path& dir) const {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json doc = {{"subcommand", command}, {"parameters", parameters}, {"inputs", inputs},
                      {"outputs", outputs},    {"version", DVFINV_VERSION}, {"wall_clock_seconds", secs}};
    fs::create_directories(dir.empty() ? fs::path(".") : dir);
    std::ofstream(dir / (command + ".manifest.json"), std::ios::trunc) << doc.dump(2) << '\n';
  }
};

fs::path dir_of(const fs::path& p) { return p.has_parent_path() ? p.parent_path() : fs::path("."); }

void ensure_dir(const fs::path& p) {
  if (!p.empty()) fs::create_directories(p);
}

json summary_json(const PercentileSummary& s) {
  json values = json::array();
  for (double v : s.values) values.push_back(std::isfinite(v) ? json(v) : json(nullptr));
  return {{"levels", s.levels}, {"values", values}, {"count", s.count}, {"invalid_fraction", s.invalid_fraction}};
}

// valid | box:H | path to a mask container.
DomainMask resolve_domain(const std::string& spec, const VectorField& u) {
  if (spec.empty() || spec == "valid") return valid_domain(u);
  if (spec.rfind("box:", 0) == 0) {
    const auto h = parse_list(spec.substr(4), "--domain");
    if (h.size() != 1 || !(h[0] > 0.0)) throw UsageError("--domain box:H needs one positive half width");
    return centered_box(u.geometry, h[0]);
  }
  DomainMask m = read_mask(spec);
  if (!(m.geometry == u.geometry)) throw Error(Errc::GeometryMismatch, "domain mask geometry differs from field");
  return m;
}

struct SchemeOptions {
  std::string spec;
  std::optional<DomainMask> degenerate;
};

ControlScheme parse_scheme(const SchemeOptions& o, const VectorField& u, const DomainMask& domain,
                           json& resolved) {
  const std::string& s = o.spec;
  const auto colon = s.find(':');
  const std::string kind = s.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : s.substr(colon + 1);

  if (kind == "constant") {
    const auto v = parse_list(arg, "--scheme constant:mu");
    if (v.size() != 1) throw UsageError("constant scheme needs one value, e.g. constant:0");
    return ConstantControl{v[0]};
  }
  if (kind == "alternating" && arg != "auto") {
    const auto v = parse_list(arg, "--scheme alternating:mu_odd,mu_even");
    if (v.size() != 2) throw UsageError("alternating scheme needs two values or 'auto'");
    return AlternatingControl{v[0], v[1]};
  }

  const SpectralMaps maps = characterize(u, domain);
  if (kind == "alternating") {
    const auto [mo, me] = alternating_from_percentiles(maps);
    resolved["mu_odd"] = mo;
    resolved["mu_even"] = me;
    return AlternatingControl{mo, me};
  }
  if (kind == "midrange") {
    double radius = -1.0;
    if (!arg.empty()) {
      const auto v = parse_list(arg, "--scheme midrange:radius");
      if (v.size() != 1 || v[0] < 0.0) throw UsageError("midrange radius must be one value >= 0");
      radius = v[0];
    }
    if (radius < 0.0) radius = percentile(magnitude(u, &domain), 98.0, PercentileMode::Exact, &domain);
    resolved["midrange_radius"] = radius;
    return MidRangeControl{radius, MuLookup::Displaced};
  }
  if (kind == "variant" || kind == "hybrid") {
    int k = 2;
    if (kind == "hybrid" && !arg.empty()) {
      const auto v = parse_list(arg, "--scheme hybrid:k");
      if (v.size() != 1 || v[0] < 0.0 || v[0] != std::floor(v[0])) throw UsageError("hybrid:k needs an integer k >= 0");
      k = static_cast<int>(v[0]);
    } else if (kind == "variant" && !arg.empty()) {
      throw UsageError("variant takes no argument");
    }
    MuMapOptions mo;
    mo.degenerate = o.degenerate;
    MuMap mm = build_mu_map(u, maps, mo);
    resolved["fallback_radius"] = mm.fallback_radius;
    resolved["fallback_voxels"] = mm.fallback.count();
    resolved["clamped_voxels"] = mm.clamped;
    if (kind == "variant") return VariantControl{std::move(mm.mu), MuLookup::Displaced};
    resolved["uniform_steps"] = k;
    return HybridControl{k, std::move(mm.mu), MuLookup::Displaced};
  }
  throw UsageError("unknown scheme '" + s + "'");
}

std::optional<DomainMask> load_degenerate(const std::string& path, const GridGeometry& g) {
  if (path.empty()) return std::nullopt;
  DomainMask m = read_mask(path);
  if (!(m.geometry == g)) throw Error(Errc::GeometryMismatch, "degenerate mask geometry differs from field");
  return m;
}

SampleType parse_sample_type(const std::string& s) {
  if (s == "float32") return SampleType::Float32;
  if (s == "float64") return SampleType::Float64;
  throw UsageError("sample type must be float32 or float64");
}

// ---- synth ----

struct SynthArgs {
  std::string family;
  std::optional<double> b;
  std::optional<int> m;
  double spacing = 0.05;
  double half_width = 34.0;
  std::string extent;
  std::string vector;
  std::string matrix;
  double angle = 0.0;
  std::string out_forward = "forward.hdr";
  std::string out_inverse = "inverse.hdr";
  std::string out_singular;
  std::string sample_type = "float64";
};

int run_synth(const SynthArgs& a) {
  Manifest man{"synth"};
  DvfFamily family;
  GridGeometry g;
  if (a.family == "appendix") {
    if (!a.b) throw UsageError("--b is required for the appendix family");
    if (!a.m) throw UsageError("--m is required for the appendix family");
    family = AppendixRadial{*a.b, *a.m};
    g = appendix_geometry(a.spacing, a.half_width);
    man.parameters["b"] = *a.b;
    man.parameters["m"] = *a.m;
    man.parameters["half_width"] = a.half_width;
  } else {
    if (a.extent.empty()) throw UsageError("--extent nx,ny[,nz] is required for family " + a.family);
    const auto e = parse_list(a.extent, "--extent");
    if (e.size() != 2 && e.size() != 3) throw UsageError("--extent needs 2 or 3 values");
    const int dim = static_cast<int>(e.size());
    Index3 ext{1, 1, 1};
    Vec3 sp{1.0, 1.0, 1.0}, org{0.0, 0.0, 0.0};
    for (int i = 0; i < dim; ++i) {
      ext[i] = static_cast<int>(e[i]);
      sp[i] = a.spacing;
      org[i] = -0.5 * (ext[i] - 1) * a.spacing;  // centered on the physical origin
    }
    g = GridGeometry::make(dim, ext, sp, org);
    man.parameters["extent"] = a.extent;
    if (a.family == "translation") {
      const auto v = parse_list(a.vector, "--vector");
      if (static_cast<int>(v.size()) != dim) throw UsageError("--vector needs one value per dimension");
      Vec3 t{0.0, 0.0, 0.0};
      for (int i = 0; i < dim; ++i) t[i] = v[i];
      family = Translation{t};
      man.parameters["vector"] = a.vector;
    } else if (a.family == "linear") {
      const auto v = parse_list(a.matrix, "--matrix");
      if (static_cast<int>(v.size()) != dim * dim) throw UsageError("--matrix needs dim*dim values, row-major");
      Mat3 m{};
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m[i][j] = v[i * dim + j];
      family = LinearMap{m};
      man.parameters["matrix"] = a.matrix;
    } else if (a.family == "rotation") {
      family = PlanarRotation{a.angle};
      man.parameters["angle"] = a.angle;
    } else {
      throw UsageError("unknown family '" + a.family + "'");
    }
  }
  man.parameters["family"] = a.family;
  man.parameters["spacing"] = a.spacing;
  man.parameters["sample_type"] = a.sample_type;
  const SampleType type = parse_sample_type(a.sample_type);

  const GeneratedDvf dvf = generate({family, g});
  ensure_dir(dir_of(a.out_forward));
  ensure_dir(dir_of(a.out_inverse));
  write_field(a.out_forward, dvf.forward, Semantic::ForwardDvf, type);
  write_field(a.out_inverse, dvf.inverse, Semantic::InverseDvf, type);
  man.output(a.out_forward);
  man.output(a.out_inverse);
  if (!a.out_singular.empty()) {
    write_field(a.out_singular, dvf.singular);
    man.output(a.out_singular);
  }
  man.write(dir_of(a.out_forward));
  std::printf("wrote %s and %s (%d x %d x %d)\n", a.out_forward.c_str(), a.out_inverse.c_str(), g.extent[0],
              g.extent[1], g.extent[2]);
  return kOk;
}

// ---- characterize ----

struct CharacterizeArgs {
  std::string input;
  std::string out_dir = "characterize";
  std::string domain = "valid";
};

int run_characterize(const CharacterizeArgs& a) {
  Manifest man{"characterize"};
  man.input(a.input);
  man.parameters["domain"] = a.domain;
  const VectorField u = read_vector_field(a.input);
  const DomainMask domain = resolve_domain(a.domain, u);
  const SpectralMaps maps = characterize(u, domain);

  const fs::path dir = a.out_dir;
  ensure_dir(dir);
  auto out = [&](const std::string& name, const auto& field) {
    write_field(dir / (name + ".hdr"), field);
    man.output(dir / (name + ".hdr"));
  };
  out("det_jf", maps.det_jf);
  out("rho_ju", maps.rho_ju);
  out("gamma", maps.gamma);
  out("control_index", maps.control_index);
  out("controllable", maps.controllable);
  out("domain", domain);

  std::size_t nonsmall = 0, in = 0;
  for (std::size_t l = 0; l < domain.size(); ++l) {
    if (!domain.inside[l]) continue;
    ++in;
    nonsmall += maps.control_index.valid[l] && maps.control_index.values[l] >= 0.0;
  }
  const json summary = {
      {"domain_voxels", in},
      {"det_jf", summary_json(summarize(maps.det_jf, &domain, default_percentile_levels(), PercentileMode::Histogram, true))},
      {"rho_ju", summary_json(summarize(maps.rho_ju, &domain))},
      {"control_index", summary_json(summarize(maps.control_index, &domain))},
      {"complex_fraction", maps.complex_fraction},
      {"uncontrollable_fraction", maps.uncontrollable_fraction},
      {"nonsmall_fraction", static_cast<double>(nonsmall) / static_cast<double>(in)},
  };
  std::ofstream(dir / "summary.json", std::ios::trunc) << summary.dump(2) << '\n';
  man.output(dir / "summary.json");
  man.write(dir);
  std::printf("complex fraction %.4f, index >= 0 fraction %.4f, uncontrollable fraction %.4f\n",
              maps.complex_fraction, summary["nonsmall_fraction"].get<double>(), maps.uncontrollable_fraction);
  return kOk;
}

// ---- invert ----

struct InvertArgs {
  std::string input;
  std::string scheme = "variant";
  int steps = 10;
  std::string init = "scaled98";
  std::string oob = "freeze";
  std::string out = "estimate.hdr";
  std::string report;
  std::string domain = "valid";
  std::string degenerate;
  std::optional<double> tolerance;
  bool even_first = false;
  std::string sample_type = "float64";
};

int run_invert(const InvertArgs& a) {
  Manifest man{"invert"};
  man.input(a.input);
  const VectorField u = read_vector_field(a.input);
  const DomainMask domain = resolve_domain(a.domain, u);

  InversionConfig cfg;
  cfg.max_steps = a.steps;
  cfg.domain = domain;
  cfg.residual_tolerance = a.tolerance;
  cfg.odd_first = !a.even_first;
  if (a.init == "zero") cfg.init = InitKind::Zero;
  else if (a.init == "scaled98") cfg.init = InitKind::Scaled98;
  else throw UsageError("--init must be zero or scaled98");
  if (a.oob == "freeze") cfg.oob = OobPolicy::Freeze;
  else if (a.oob == "clamp") cfg.oob = OobPolicy::Clamp;
  else throw UsageError("--oob must be freeze or clamp");
  if (!a.degenerate.empty()) man.input(a.degenerate);
  json resolved = json::object();
  cfg.scheme = parse_scheme({a.scheme, load_degenerate(a.degenerate, u.geometry)}, u, domain, resolved);
  try {
    validate(cfg.scheme);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }

  const InversionRun run = invert(u, cfg);

  ensure_dir(dir_of(a.out));
  write_field(a.out, run.estimate, Semantic::InverseDvf, parse_sample_type(a.sample_type));
  man.output(a.out);
  ScalarField status(u.geometry, 0.0, true);
  for (std::size_t l = 0; l < status.size(); ++l) status.values[l] = static_cast<double>(run.status[l]);
  fs::path status_path = fs::path(a.out);
  status_path.replace_filename(status_path.stem().string() + "_status.hdr");
  write_field(status_path, status);
  man.output(status_path);

  std::map<std::string, std::string> params = {
      {"scheme", describe(cfg.scheme)}, {"scheme_spec", a.scheme},     {"steps", std::to_string(a.steps)},
      {"init", a.init},                 {"oob", a.oob},                {"domain", a.domain},
      {"odd_first", cfg.odd_first ? "true" : "false"}};
  for (const auto& [k, v] : resolved.items()) params[k] = v.is_string() ? v.get<std::string>() : v.dump();
  if (a.tolerance) params["tolerance"] = std::to_string(*a.tolerance);
  for (const auto& [k, v] : params) man.parameters[k] = v;

  const fs::path report = a.report.empty() ? dir_of(a.out) / "report.json" : fs::path(a.report);
  ensure_dir(dir_of(report));
  const ScalarField final_mag = magnitude(run.estimate, &run.domain);
  const InversionReport rep = make_report(run, params, {{"estimate_magnitude", summarize(final_mag, &run.domain)}});
  write_report(report, rep);
  fs::path table = report;
  table.replace_extension(".csv");
  write_step_table(table, rep);
  man.output(report);
  man.output(table);
  man.write(dir_of(a.out));

  for (const auto& s : run.steps)
    std::printf("step %2d  |r_v| 50%% %.4g  98%% %.4g  frozen %zu\n", s.step, s.residual.values[2],
                s.residual.values[5], s.frozen);
  return kOk;
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string forward;
  std::string estimate;
  std::string truth;
  std::string out_dir = "evaluate";
  std::string domain = "valid";
};

int run_evaluate(const EvaluateArgs& a) {
  Manifest man{"evaluate"};
  man.input(a.forward);
  man.input(a.estimate);
  man.parameters["domain"] = a.domain;
  const VectorField u = read_vector_field(a.forward);
  const VectorField v = read_vector_field(a.estimate);
  if (!(u.geometry == v.geometry)) throw Error(Errc::GeometryMismatch, "forward and estimate grids differ");
  const DomainMask domain = resolve_domain(a.domain, u);

  const fs::path dir = a.out_dir;
  ensure_dir(dir);
  json summary = json::object();
  auto out = [&](const std::string& name, const ScalarField& f) {
    write_field(dir / (name + ".hdr"), f);
    man.output(dir / (name + ".hdr"));
    summary[name] = summary_json(summarize(f, &domain));
  };

  const ResidualField rv = residual_v(u, v, domain);
  ScalarField rv_mag = magnitude(rv.r, &domain);
  for (std::size_t l = 0; l < rv_mag.size(); ++l) rv_mag.valid[l] = rv_mag.valid[l] && rv.valid.inside[l];
  out("rv", rv_mag);

  const ResidualU ru = residual_u(u, v, domain);
  ScalarField ru_mag = magnitude(ru.target, &domain);
  for (std::size_t l = 0; l < ru_mag.size(); ++l) ru_mag.valid[l] = ru_mag.valid[l] && ru.target_valid.inside[l];
  out("ru", ru_mag);

  if (!a.truth.empty()) {
    man.input(a.truth);
    const VectorField t = read_vector_field(a.truth);
    if (!(t.geometry == u.geometry)) throw Error(Errc::GeometryMismatch, "truth grid differs from forward grid");
    out("error", inversion_error(v, t, &domain));
  }
  std::ofstream(dir / "evaluate.json", std::ios::trunc) << summary.dump(2) << '\n';
  man.output(dir / "evaluate.json");
  man.write(dir);
  for (const auto& [name, s] : summary.items())
    std::printf("%-6s 50%% %.4g  98%% %.4g\n", name.c_str(), s["values"][2].is_null() ? NAN : s["values"][2].get<double>(),
                s["values"][5].is_null() ? NAN : s["values"][5].get<double>());
  return kOk;
}

// ---- contraction ----

struct ContractionArgs {
  std::string forward;
  std::string scheme = "variant";
  std::string out = "contraction.hdr";
  std::string domain = "valid";
  std::string degenerate;
};

int run_contraction(const ContractionArgs& a) {
  Manifest man{"contraction"};
  man.input(a.forward);
  const VectorField u = read_vector_field(a.forward);
  const DomainMask domain = resolve_domain(a.domain, u);
  json resolved = json::object();
  const ControlScheme scheme = parse_scheme({a.scheme, load_degenerate(a.degenerate, u.geometry)}, u, domain, resolved);
  try {
    validate(scheme);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const ContractionMap cm = contraction_map(u, scheme, domain);
  ensure_dir(dir_of(a.out));
  write_field(a.out, cm.ratio);
  man.output(a.out);
  fs::path region = a.out;
  region.replace_filename(region.stem().string() + "_region.hdr");
  write_field(region, cm.region);
  man.output(region);
  man.parameters = resolved;
  man.parameters["domain"] = a.domain;
  man.parameters["area_fraction"] = cm.area_fraction;
  man.write(dir_of(a.out));
  std::printf("contraction area fraction %.4f\n", cm.area_fraction);
  return kOk;
}

// ---- slice ----

struct SliceArgs {
  std::string volume;
  int axis = 2;
  int index = -1;
  std::string range;
  std::string color = "heat";
  bool determinant = false;
  std::string out = "slice.ppm";
};

int run_slice(const SliceArgs& a) {
  Manifest man{"slice"};
  man.input(a.volume);
  const ContainerHeader h = read_header(a.volume);
  const int index = a.index >= 0 ? a.index : h.geometry.extent[a.axis < 0 || a.axis > 2 ? 2 : a.axis] / 2;
  Image img;
  if (h.semantic == Semantic::Mask) {
    img = render_mask(read_mask(a.volume), a.axis, index);
  } else {
    ScalarField f = h.semantic == Semantic::ScalarMap ? read_scalar_field(a.volume) : magnitude(read_vector_field(a.volume));
    SliceOptions o;
    o.axis = a.axis;
    o.index = index;
    if (a.color == "gray") o.color = ColorMap::Gray;
    else if (a.color == "heat") o.color = ColorMap::Heat;
    else throw UsageError("--color must be gray or heat");
    o.range_mode = a.determinant ? RangeMode::ZeroToP90 : RangeMode::ZeroToMax;
    if (!a.range.empty()) {
      const auto r = parse_list(a.range, "--range");
      if (r.size() != 2) throw UsageError("--range needs lo,hi");
      o.range = std::make_pair(r[0], r[1]);
    }
    img = render_slice(f, o);
  }
  ensure_dir(dir_of(a.out));
  write_pnm(a.out, img);
  man.output(a.out);
  man.parameters = {{"axis", a.axis}, {"index", index}, {"color", a.color}, {"range", a.range},
                    {"determinant_range", a.determinant}};
  man.write(dir_of(a.out));
  return kOk;
}

int exit_code(Errc c) {
  switch (c) {
    case Errc::InfeasibleControl: return kInfeasible;
    case Errc::InvalidArgument:
    case Errc::InvalidSpec: return kUsage;
    default: return kData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse deformation vector fields by controlled fixed-point iteration"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DVFINV_VERSION);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: DVFINV_THREADS or all cores)")
      ->check(CLI::NonNegativeNumber);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate an analytic forward/inverse pair");
  synth->add_option("--family", sa.family, "appendix | translation | linear | rotation")->required();
  synth->add_option("--b", sa.b, "Appendix stretch, in (0,1)");
  synth->add_option("--m", sa.m, "Appendix angular frequency, >= 1");
  synth->add_option("--spacing", sa.spacing, "Grid spacing")->capture_default_str();
  synth->add_option("--half-width", sa.half_width, "Appendix grid half width")->capture_default_str();
  synth->add_option("--extent", sa.extent, "nx,ny[,nz] for non-appendix families");
  synth->add_option("--vector", sa.vector, "Translation vector");
  synth->add_option("--matrix", sa.matrix, "Displacement Jacobian A, row-major");
  synth->add_option("--angle", sa.angle, "Rotation angle in radians");
  synth->add_option("--out-forward", sa.out_forward)->capture_default_str();
  synth->add_option("--out-inverse", sa.out_inverse)->capture_default_str();
  synth->add_option("--out-singular", sa.out_singular, "Mask of voxels where the closed form is undefined");
  synth->add_option("--sample-type", sa.sample_type, "float32 | float64")->capture_default_str();

  CharacterizeArgs ca;
  auto* charz = app.add_subcommand("characterize", "Spectral maps and summary of a forward field");
  charz->add_option("input", ca.input)->required();
  charz->add_option("--out-dir", ca.out_dir)->capture_default_str();
  charz->add_option("--domain", ca.domain, "valid | box:H | mask file")->capture_default_str();

  InvertArgs ia;
  auto* inv = app.add_subcommand("invert", "Invert a forward field");
  inv->add_option("input", ia.input)->required();
  inv->add_option("--scheme", ia.scheme,
                  "constant:mu | alternating:mu_odd,mu_even | alternating:auto | midrange[:radius] | variant | hybrid:k")
      ->capture_default_str();
  inv->add_option("--steps", ia.steps)->check(CLI::PositiveNumber)->capture_default_str();
  inv->add_option("--init", ia.init, "zero | scaled98")->capture_default_str();
  inv->add_option("--oob", ia.oob, "freeze | clamp")->capture_default_str();
  inv->add_option("--out", ia.out)->capture_default_str();
  inv->add_option("--report", ia.report, "JSON report path (CSV table written alongside)");
  inv->add_option("--domain", ia.domain, "valid | box:H | mask file")->capture_default_str();
  inv->add_option("--degenerate", ia.degenerate, "Mask of voxels where local mu* is not trusted");
  inv->add_option("--tolerance", ia.tolerance, "Stop once the 98th percentile |r_v| is below this");
  inv->add_flag("--even-first", ia.even_first, "Alternating schemes start with mu_even");
  inv->add_option("--sample-type", ia.sample_type, "float32 | float64")->capture_default_str();

  EvaluateArgs ea;
  auto* eval = app.add_subcommand("evaluate", "Residual and error maps for an estimate");
  eval->add_option("forward", ea.forward)->required();
  eval->add_option("estimate", ea.estimate)->required();
  eval->add_option("--truth", ea.truth);
  eval->add_option("--out-dir", ea.out_dir)->capture_default_str();
  eval->add_option("--domain", ea.domain, "valid | box:H | mask file")->capture_default_str();

  ContractionArgs cta;
  auto* contr = app.add_subcommand("contraction", "Predicted contraction ratio map for a scheme");
  contr->add_option("forward", cta.forward)->required();
  contr->add_option("--scheme", cta.scheme)->capture_default_str();
  contr->add_option("--out", cta.out)->capture_default_str();
  contr->add_option("--domain", cta.domain)->capture_default_str();
  contr->add_option("--degenerate", cta.degenerate);

  SliceArgs sla;
  auto* slice = app.add_subcommand("slice", "Export a 2D slice as PGM/PPM");
  slice->add_option("volume", sla.volume)->required();
  slice->add_option("--axis", sla.axis)->capture_default_str();
  slice->add_option("--index", sla.index, "Slice index (default: middle)");
  slice->add_option("--range", sla.range, "lo,hi display range");
  slice->add_option("--color", sla.color, "gray | heat")->capture_default_str();
  slice->add_flag("--determinant-range", sla.determinant, "Default range [0, 90th percentile]");
  slice->add_option("--out", sla.out)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (threads > 0) set_thread_count(threads);
    if (*synth) return run_synth(sa);
    if (*charz) return run_characterize(ca);
    if (*inv) return run_invert(ia);
    if (*eval) return run_evaluate(ea);
    if (*contr) return run_contraction(cta);
    if (*slice) return run_slice(sla);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kUsage;
  } catch (const Error& e) {
    if (e.code() == Errc::InfeasibleControl)
      std::fprintf(stderr, "infeasible control: %s (requires gamma(x) = min Re(1/lambda(J_f)) > 0)\n", e.what());
    else
      std::fprintf(stderr, "%s\n", e.what());
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  }
  return kUsage;
}
