#include "cli.hpp"

#include "fowler/erosion.hpp"
#include "fowler/errors.hpp"
#include "fowler/kernel.hpp"
#include "fowler/nonlocal.hpp"
#include "fowler/presets.hpp"
#include "fowler/symbol.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace fowler::cli {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Configuration

namespace {

double number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
  return d;
}

std::size_t count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

bool flag(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
  return v.get<bool>();
}

std::string text(const json& v, const std::string& key, std::initializer_list<const char*> allowed) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  const auto s = v.get<std::string>();
  std::string options;
  for (const char* a : allowed) {
    if (s == a) return s;
    options += options.empty() ? a : std::string(", ") + a;
  }
  throw ConfigError(key, "'" + s + "' is not one of: " + options);
}

[[noreturn]] void unknown_key(const std::string& key, std::initializer_list<const char*> allowed) {
  std::string options;
  for (const char* a : allowed) options += options.empty() ? a : std::string(", ") + a;
  throw ConfigError(key, "unknown key; expected one of: " + options);
}

InitialSpec initial_from_json(const json& j, InitialSpec s) {
  if (!j.is_object()) throw ConfigError("initial", "expected an object");
  for (const auto& [key, v] : j.items()) {
    const std::string k = "initial." + key;
    if (key == "type") s.type = text(v, k, {"dune", "bump", "gaussian", "traveling-wave"});
    else if (key == "center") s.center = number(v, k);
    else if (key == "radius") s.radius = number(v, k);
    else if (key == "amplitude") s.amplitude = number(v, k);
    else unknown_key(k, {"type", "center", "radius", "amplitude"});
  }
  return s;
}

void validate(const RunSpec& s) {
  text(s.scheme, "scheme", {"fd", "spectral"});
  text(s.model, "model", {"burgers", "fowler"});
  if (!(s.length > 0.0)) throw ConfigError("length", "must be positive");
  if (s.points < 3) throw ConfigError("points", "must be at least 3");
  if (s.modes < 8 || s.modes % 2 != 0) throw ConfigError("modes", "must be even and at least 8");
  if (!(s.viscosity > 0.0)) throw ConfigError("viscosity", "must be positive");
  if (!(s.t_end > 0.0)) throw ConfigError("t_end", "must be positive");
  if (s.dt < 0.0) throw ConfigError("dt", "must be non-negative (0 selects the CFL-Peclet step)");
  if (!(s.spectral_dt > 0.0)) throw ConfigError("spectral_dt", "must be positive");
  if (!(s.snapshot_interval > 0.0)) throw ConfigError("snapshot_interval", "must be positive");
  if (!(s.cfl_factor > 0.0)) throw ConfigError("cfl_factor", "must be positive");
  if (s.initial.type == "bump" || s.initial.type == "gaussian") {
    if (!(s.initial.radius > 0.0)) throw ConfigError("initial.radius", "must be positive");
  }
  if (s.initial.type == "traveling-wave") {
    if (s.scheme != "fd" || s.model != "burgers" || s.viscosity != 1.0) {
      throw ConfigError("initial.type", "traveling-wave is an exact solution only for fd burgers with viscosity 1");
    }
  } else if (s.boundary == "exact") {
    throw ConfigError("boundary", "exact boundary values need the traveling-wave initial data");
  }
}

}  // namespace

json to_json(const RunSpec& s) {
  return json{{"scheme", s.scheme},
              {"model", s.model},
              {"length", s.length},
              {"x0", s.x0},
              {"points", s.points},
              {"modes", s.modes},
              {"viscosity", s.viscosity},
              {"t_end", s.t_end},
              {"dt", s.dt},
              {"spectral_dt", s.spectral_dt},
              {"snapshot_interval", s.snapshot_interval},
              {"cfl_factor", s.cfl_factor},
              {"strict_cfl", s.strict_cfl},
              {"zero_weight", s.zero_weight},
              {"riemann_weight", s.riemann_weight},
              {"dealias", s.dealias},
              {"boundary", s.boundary},
              {"x_star", s.x_star},
              {"initial",
               {{"type", s.initial.type},
                {"center", s.initial.center},
                {"radius", s.initial.radius},
                {"amplitude", s.initial.amplitude}}}};
}

RunSpec run_spec_from_json(const json& j, RunSpec s) {
  if (!j.is_object()) throw ConfigError("<root>", "configuration must be a JSON object");
  if (j.contains("preset")) s = load_preset(text(j["preset"], "preset", {"dune", "traveling-wave"}));
  for (const auto& [key, v] : j.items()) {
    if (key == "preset") continue;
    if (key == "scheme") s.scheme = text(v, key, {"fd", "spectral"});
    else if (key == "model") s.model = text(v, key, {"burgers", "fowler"});
    else if (key == "length") s.length = number(v, key);
    else if (key == "x0") s.x0 = number(v, key);
    else if (key == "points") s.points = count(v, key);
    else if (key == "modes") s.modes = count(v, key);
    else if (key == "viscosity") s.viscosity = number(v, key);
    else if (key == "t_end") s.t_end = number(v, key);
    else if (key == "dt") s.dt = number(v, key);
    else if (key == "spectral_dt") s.spectral_dt = number(v, key);
    else if (key == "snapshot_interval") s.snapshot_interval = number(v, key);
    else if (key == "cfl_factor") s.cfl_factor = number(v, key);
    else if (key == "strict_cfl") s.strict_cfl = flag(v, key);
    else if (key == "zero_weight") s.zero_weight = text(v, key, {"cell-average", "skip"});
    else if (key == "riemann_weight") s.riemann_weight = flag(v, key);
    else if (key == "dealias") s.dealias = flag(v, key);
    else if (key == "boundary") s.boundary = text(v, key, {"zero", "exact"});
    else if (key == "x_star") s.x_star = number(v, key);
    else if (key == "initial") s.initial = initial_from_json(v, s.initial);
    else {
      unknown_key(key, {"preset", "scheme", "model", "length", "x0", "points", "modes", "viscosity", "t_end", "dt",
                        "spectral_dt", "snapshot_interval", "cfl_factor", "strict_cfl", "zero_weight",
                        "riemann_weight", "dealias", "boundary", "x_star", "initial"});
    }
  }
  validate(s);
  return s;
}

std::vector<std::string> preset_names() { return {"dune", "traveling-wave"}; }

RunSpec load_preset(const std::string& name) {
  RunSpec s;
  if (name == "dune") {
    // L = 30, M = 4001, eps = 0.1, dune of unit radius centred at L/2.
    s.initial = {"dune", 15.0, 1.0, 1.0};
    return s;
  }
  if (name == "traveling-wave") {
    // The wave is centred at x = 0, so the mesh is shifted to [-15, 15].
    s.model = "burgers";
    s.x0 = -15.0;
    s.viscosity = 1.0;
    s.boundary = "exact";
    s.initial = {"traveling-wave", 0.0, 1.0, 1.0};
    return s;
  }
  std::string options;
  for (const auto& n : preset_names()) options += (options.empty() ? "" : ", ") + n;
  throw ConfigError("preset", "unknown preset '" + name + "'; available: " + options);
}

namespace {

SmoothProfile profile(const RunSpec& s) {
  const auto& in = s.initial;
  if (in.type == "dune") return SmoothProfile::bump(s.x0 + 0.5 * s.length, 1.0, 1.0);
  if (in.type == "bump") return SmoothProfile::bump(in.center, in.radius, in.amplitude);
  if (in.type == "gaussian") return SmoothProfile::gaussian(in.center, in.radius, in.amplitude);
  throw ConfigError("initial.type", "'" + in.type + "' has no compactly supported profile");
}

}  // namespace

std::function<double(double, double)> exact_solution(const RunSpec& s) {
  if (s.initial.type == "traveling-wave") return burgers_travelling_wave;
  return {};
}

FdConfig fd_config(const RunSpec& s) {
  FdConfig c;
  c.model = s.model == "burgers" ? FdModel::Burgers : FdModel::Fowler;
  c.length = s.length;
  c.points = s.points;
  c.x0 = s.x0;
  c.eps = s.viscosity;
  c.t_end = s.t_end;
  c.dt = s.dt;
  c.cfl_factor = s.cfl_factor;
  c.snapshot_interval = s.snapshot_interval;
  c.step.strict = s.strict_cfl;
  c.step.nonlocal.zero_weight = s.zero_weight == "skip" ? ZeroWeight::Skip : ZeroWeight::CellAverage;
  c.step.nonlocal.riemann_weight = s.riemann_weight;
  c.exact = exact_solution(s);
  if (s.boundary == "exact") {
    const auto u = c.exact;
    const double a = s.x0, b = s.x0 + s.length;
    c.step.boundary.left = [u, a](double t) { return u(t, a); };
    c.step.boundary.right = [u, b](double t) { return u(t, b); };
  }
  return c;
}

std::vector<double> fd_initial(const RunSpec& s) {
  const double dx = s.length / static_cast<double>(s.points - 1);
  std::vector<double> u(s.points);
  if (s.initial.type == "traveling-wave") {
    for (std::size_t i = 0; i < s.points; ++i) u[i] = burgers_travelling_wave(0.0, s.x0 + static_cast<double>(i) * dx);
    return u;
  }
  const auto p = profile(s);
  for (std::size_t i = 0; i < s.points; ++i) u[i] = p(s.x0 + static_cast<double>(i) * dx).value;
  u.front() = 0.0;
  u.back() = 0.0;
  return u;
}

SimConfig spectral_config(const RunSpec& s) {
  if (s.x0 != 0.0) throw ConfigError("x0", "the spectral grid starts at 0");
  SimConfig c;
  c.grid = Grid(s.length, s.modes);
  c.t_end = s.t_end;
  c.dt = s.spectral_dt;
  c.dealias = s.dealias;
  c.viscosity = s.viscosity;
  const double stride = std::round(s.snapshot_interval / s.spectral_dt);
  if (stride < 1.0 || std::abs(stride * s.spectral_dt - s.snapshot_interval) > 1e-9 * s.snapshot_interval) {
    throw ConfigError("snapshot_interval", "must be a multiple of spectral_dt");
  }
  c.snapshot_stride = static_cast<std::size_t>(stride);
  c.steps();
  return c;
}

Field spectral_initial(const RunSpec& s) {
  const auto p = profile(s);
  return sample(Grid(s.length, s.modes), [&](double x) { return p(x).value; });
}

// ---------------------------------------------------------------------------
// Output

std::string format_double(double v) {
  std::array<char, 40> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

std::string sha256_hex(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::array<char, 1 << 16> buf{};
  while (in.read(buf.data(), buf.size()) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  static const char* digits = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    hex += digits[md[i] >> 4];
    hex += digits[md[i] & 15];
  }
  return hex;
}

fs::path output_dir() {
  const char* env = std::getenv(kOutputDirVariable);
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path("fowler-out");
}

namespace {

class Session {
 public:
  Session(std::string subcommand) : subcommand_(std::move(subcommand)), start_(std::chrono::steady_clock::now()) {
    dir_ = output_dir() / subcommand_;
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }
  json& config() { return config_; }
  json& results() { return results_; }
  std::vector<std::string>& warnings() { return warnings_; }

  /// Columns of equal length under a header row.
  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& columns) {
    std::ofstream out(dir_ / name, std::ios::binary);
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << format_double(columns[c][r]);
      out << '\n';
    }
    finish(name, out);
  }

  void document(const std::string& name, const json& j) {
    std::ofstream out(dir_ / name, std::ios::binary);
    out << j.dump(2) << '\n';
    finish(name, out);
  }

  /// Writes manifest.json listing every output with its digest.
  void manifest(bool with_constants = true) {
    json m;
    m["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
    m["subcommand"] = subcommand_;
    m["config"] = config_;
    if (with_constants) m["constants"] = constants_json();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m["timings"] = {{"wall_seconds", wall}};
    json files = json::array();
    for (const auto& f : files_) {
      files.push_back({{"file", f}, {"bytes", fs::file_size(dir_ / f)}, {"sha256", sha256_hex(dir_ / f)}});
    }
    m["outputs"] = files;
    m["results"] = results_;
    m["warnings"] = warnings_;
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    out << m.dump(2) << '\n';
  }

  static json constants_json() {
    const auto& sel = constant_selection();
    json cands = json::array();
    for (const auto& c : sel.candidates) {
      cands.push_back({{"name", c.constants.name}, {"a", c.constants.a}, {"b", c.constants.b}, {"residual", c.residual}});
    }
    return {{"selected", sel.selected.name},
            {"a", sel.selected.a},
            {"b", sel.selected.b},
            {"c_i", kCI},
            {"selected_by", "oracle adjudication at xi in {1/2, 1, 2, 4}"},
            {"residual", sel.selected_residual},
            {"matched_candidate", sel.matched_candidate},
            {"candidates", cands}};
  }

 private:
  void finish(const std::string& name, std::ofstream& out) {
    out.flush();
    if (!out) throw std::runtime_error("failed to write " + (dir_ / name).string());
    files_.push_back(name);
  }

  std::string subcommand_;
  std::chrono::steady_clock::time_point start_;
  fs::path dir_;
  json config_ = json::object();
  json results_ = json::object();
  std::vector<std::string> warnings_;
  std::vector<std::string> files_;
};

std::string snapshot_label(double t) { return "u(t=" + format_double(t) + ")"; }

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
}

RunSpec resolve(const std::string& config, const std::string& preset) {
  if (!config.empty() && !preset.empty()) throw ConfigError("--preset", "give either --config or --preset");
  if (!config.empty()) return run_spec_from_json(read_json(config));
  return run_spec_from_json(json::object(), load_preset(preset.empty() ? "dune" : preset));
}

std::vector<double> mesh(double x0, double dx, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = x0 + static_cast<double>(i) * dx;
  return x;
}

// ---------------------------------------------------------------------------
// Subcommands

struct FdOutcome {
  FdReport report;
  double mass_drift = 0.0;
};

FdOutcome run_fd_spec(const RunSpec& spec) {
  FdOutcome o;
  o.report = run_fd(fd_config(spec), fd_initial(spec));
  const double m0 = o.report.diagnostics.front().mass;
  const double m1 = o.report.diagnostics.back().mass;
  o.mass_drift = m0 != 0.0 ? (m1 - m0) / std::abs(m0) : m1;
  return o;
}

int emit_fd(Session& session, const RunSpec& spec, const std::string& prefix) {
  const auto o = run_fd_spec(spec);
  const auto& r = o.report;
  std::vector<std::string> header{"x"};
  std::vector<std::vector<double>> cols{mesh(r.x0, r.dx, spec.points)};
  for (const auto& s : r.snapshots) {
    header.push_back(snapshot_label(s.t));
    cols.push_back(s.u);
  }
  session.csv(prefix + "snapshots.csv", header, cols);

  std::vector<std::vector<double>> diag(6);
  for (const auto& d : r.diagnostics) {
    for (auto [i, v] : {std::pair{0, d.t}, {1, d.dt}, {2, d.mass}, {3, d.min}, {4, d.argmin}, {5, d.max}}) {
      diag[static_cast<std::size_t>(i)].push_back(v);
    }
  }
  session.csv(prefix + "diagnostics.csv", {"t", "dt", "mass", "min", "argmin", "max"}, diag);

  json res{{"steps", r.diagnostics.size() - 1},
           {"final_time", r.diagnostics.back().t},
           {"run_min", r.run_min},
           {"run_max", r.run_max},
           {"final_argmin", r.diagnostics.back().argmin},
           {"mass_drift", o.mass_drift},
           {"blew_up", r.blew_up}};
  if (spec.initial.type == "traveling-wave") res["max_error"] = r.max_error;
  if (r.blew_up) res["failure"] = r.failure;
  session.results()[prefix.empty() ? "fd" : prefix.substr(0, prefix.size() - 1)] = res;
  for (const auto& w : r.warnings) session.warnings().push_back(w);
  return r.blew_up ? kNumerical : kOk;
}

int emit_spectral(Session& session, const RunSpec& spec) {
  const SimConfig cfg = spectral_config(spec);
  const Field u0 = spectral_initial(spec);
  const SymbolConstants none{"none", 0.0, 0.0};
  const SymbolTable table = spec.model == "burgers" ? SymbolTable(cfg.grid, none, spec.viscosity)
                                                    : SymbolTable(cfg.grid, spec.viscosity);
  const SimReport r = simulate(cfg, u0, table);

  std::vector<double> x(cfg.grid.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = cfg.grid.node(j);
  std::vector<std::string> header{"x"};
  std::vector<std::vector<double>> cols{x};
  for (const auto& s : r.snapshots) {
    header.push_back(snapshot_label(s.t));
    cols.push_back(s.u.values);
  }
  session.csv("snapshots.csv", header, cols);

  std::vector<std::vector<double>> diag(7);
  for (const auto& d : r.diagnostics) {
    const double row[] = {d.t, d.l2, d.mass, d.min, d.argmin, d.tail_fraction, d.energy_ratio};
    for (std::size_t i = 0; i < 7; ++i) diag[i].push_back(row[i]);
  }
  session.csv("diagnostics.csv", {"t", "l2", "mass", "min", "argmin", "tail_fraction", "energy_ratio"}, diag);

  const double m0 = r.diagnostics.front().mass;
  json res{{"steps", r.diagnostics.size() - 1},
           {"final_time", r.diagnostics.back().t},
           {"omega0", r.omega0},
           {"final_min", r.diagnostics.back().min},
           {"final_argmin", r.diagnostics.back().argmin},
           {"mass_drift", m0 != 0.0 ? (r.diagnostics.back().mass - m0) / std::abs(m0) : 0.0},
           {"max_energy_ratio", r.max_energy_ratio},
           {"blew_up", r.blew_up}};
  if (r.blew_up) res["failure"] = r.failure;
  session.results()["spectral"] = res;
  for (const auto& w : r.warnings) session.warnings().push_back(w);
  return r.blew_up ? kNumerical : kOk;
}

int cmd_symbol(const std::vector<double>& xis, std::size_t modes, double length, double viscosity) {
  Session session("symbol");
  const auto& c = canonical_constants();
  std::vector<double> xi = xis;
  if (xi.empty()) {
    for (long k = -static_cast<long>(modes) / 2; k < static_cast<long>(modes) / 2; ++k) {
      xi.push_back(static_cast<double>(k) / length);
    }
    session.config() = {{"modes", modes}, {"length", length}, {"viscosity", viscosity}};
  } else {
    session.config() = {{"xi", xis}, {"viscosity", viscosity}};
  }
  std::vector<double> re, im;
  for (double v : xi) {
    const complex p = psi_closed(v, c, viscosity);
    re.push_back(p.real());
    im.push_back(p.imag());
  }
  if (xis.empty()) {
    session.csv("symbol.csv", {"xi", "re_psi", "im_psi"}, {xi, re, im});
  } else {
    // Explicit frequencies also get the quadrature oracle.
    std::vector<double> ore, oim, diff;
    for (std::size_t i = 0; i < xi.size(); ++i) {
      const auto o = psi_oracle(xi[i], viscosity);
      ore.push_back(o.value.real());
      oim.push_back(o.value.imag());
      diff.push_back(std::abs(complex(re[i], im[i]) - o.value));
    }
    session.csv("symbol.csv", {"xi", "re_psi", "im_psi", "oracle_re", "oracle_im", "abs_diff"},
                {xi, re, im, ore, oim, diff});
  }
  session.results() = {{"omega0", omega0(c.a, viscosity)}, {"sign_change_frequency", sign_change_frequency(c.a, viscosity)}};
  session.manifest();
  return kOk;
}

/// Trigonometric interpolation of a spectrum at an arbitrary x.
double interpolate(const Spectrum& s, double x) {
  const double L = s.grid.length();
  double acc = 0.0;
  for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
    const complex c = s.coeffs[j];
    if (j == s.grid.nyquist_slot()) {
      acc += c.real() * std::cos(2.0 * std::numbers::pi * s.grid.frequency(j) * x);
      continue;
    }
    acc += (c * std::polar(1.0, 2.0 * std::numbers::pi * s.grid.frequency(j) * x)).real();
  }
  return acc / L;
}

struct NonlocalFlags {
  std::string profile, route = "all";
  std::optional<double> center, radius, amplitude;
};

int cmd_nonlocal(const std::string& config, std::vector<double> xs, const NonlocalFlags& flags) {
  Session session("nonlocal");
  RunSpec spec = load_preset("dune");
  spec.scheme = "spectral";
  spec.length = 64.0;
  spec.modes = 32768;
  spec.initial = {"bump", 32.0, 1.0, 1.0};
  if (!config.empty()) spec = run_spec_from_json(read_json(config), spec);
  if (!flags.profile.empty()) spec.initial.type = flags.profile;
  if (flags.center) spec.initial.center = *flags.center;
  if (flags.radius) spec.initial.radius = *flags.radius;
  if (flags.amplitude) spec.initial.amplitude = *flags.amplitude;
  spec = run_spec_from_json(json::object(), spec);
  const auto p = profile(spec);
  if (xs.empty()) {
    for (int i = 0; i < 10; ++i) xs.push_back(p.lo() + (p.width() + 2.0) * (i + 0.5) / 10.0);
  }
  session.config() = to_json(spec);
  session.config()["x"] = xs;
  session.config()["route"] = flags.route;
  const bool all = flags.route == "all";

  const SymbolTable table(Grid(spec.length, spec.modes), 1.0);
  Diagnostics diag;
  const Field f = spectral_initial(spec);
  check_seam_distance(f, &diag);
  Spectrum s = forward(f);
  for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
    s.coeffs[j] *= j == table.grid().nyquist_slot() ? complex(table.nonlocal(j).real()) : table.nonlocal(j);
  }
  std::vector<double> def, form, spec_v;
  for (double x : xs) {
    if (all || flags.route == "def") def.push_back(apply_I_definition(p, x));
    if (all || flags.route == "formula") form.push_back(apply_I_formula(p, x));
    if (all || flags.route == "spectral") spec_v.push_back(interpolate(s, x));
  }
  std::vector<std::string> header{"x"};
  std::vector<std::vector<double>> cols{xs};
  for (auto [name, v] : {std::pair{"definition", &def}, {"formula", &form}, {"spectral", &spec_v}}) {
    if (v->empty()) continue;
    header.push_back(name);
    cols.push_back(*v);
  }
  session.csv("nonlocal.csv", header, cols);
  if (all) {
    double worst_formula = 0.0, worst_spectral = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      worst_formula = std::max(worst_formula, std::abs(def[i] - form[i]));
      worst_spectral = std::max(worst_spectral, std::abs(form[i] - spec_v[i]));
    }
    session.results() = {{"max_definition_formula_gap", worst_formula}, {"max_formula_spectral_gap", worst_spectral}};
  }
  session.warnings() = diag.warnings;
  session.manifest();
  return kOk;
}

int cmd_kernel(std::vector<double> ts, std::size_t modes, double length, double viscosity, double tmin, double tmax,
               std::size_t n) {
  Session session("kernel");
  if (ts.empty()) ts = {0.05, 0.1, 0.5};
  for (double t : ts) {
    if (!(t > 0.0)) throw ConfigError("--t", "kernel times must be positive");
  }
  if (!(tmin > 0.0) || !(tmax > tmin)) throw ConfigError("--tmin", "need 0 < tmin < tmax");
  if (n < 2) throw ConfigError("--count", "need at least two fit times");
  session.config() = {{"t", ts},       {"modes", modes}, {"length", length}, {"viscosity", viscosity},
                      {"tmin", tmin}, {"tmax", tmax},   {"count", n}};
  const SymbolTable table(Grid(length, modes), viscosity);

  // Kernel columns centred on x = 0.
  const Grid& g = table.grid();
  std::vector<double> x(modes);
  std::vector<std::size_t> order(modes);
  for (std::size_t i = 0; i < modes; ++i) {
    order[i] = (i + modes / 2) % modes;
    x[i] = g.node(i) - 0.5 * length;
  }
  std::vector<std::string> header{"x"};
  std::vector<std::vector<double>> cols{x};
  for (double t : ts) {
    const Kernel k = build_kernel(t, table);
    std::vector<double> v(modes);
    for (std::size_t i = 0; i < modes; ++i) v[i] = k.values.values[order[i]];
    header.push_back("K(t=" + format_double(t) + ")");
    cols.push_back(v);
  }
  session.csv("kernel.csv", header, cols);

  std::vector<std::vector<double>> rows(8);
  auto add = [&](const KernelRow& r) {
    const double vals[] = {r.t,      r.mass,    r.min, r.argmin, r.grad_l1, r.grad_l2, r.semigroup_residual,
                           r.nyquist_envelope};
    for (std::size_t i = 0; i < 8; ++i) rows[i].push_back(vals[i]);
  };
  json named = json::array();
  for (double t : ts) {
    const auto r = kernel_row(t, table);
    add(r);
    named.push_back({{"t", t}, {"mass", r.mass}, {"min", r.min}, {"semigroup_residual", r.semigroup_residual},
                     {"resolved", r.resolved}});
  }
  const auto d = kernel_diagnostics(tmin, tmax, n, table);
  for (const auto& r : d.rows) add(r);
  session.csv("kernel_diagnostics.csv",
              {"t", "mass", "min", "argmin", "grad_l1", "grad_l2", "semigroup_residual", "nyquist_envelope"}, rows);
  session.results() = {{"kernels", named}, {"grad_l2_slope", d.grad_l2_slope}, {"grad_l1_slope", d.grad_l1_slope}};
  session.manifest();
  return kOk;
}

int cmd_simulate(const std::string& config, const std::string& preset, const std::string& scheme,
                 const std::string& model) {
  Session session("simulate");
  RunSpec spec = resolve(config, preset);
  if (!scheme.empty()) spec.scheme = scheme;
  if (!model.empty()) spec.model = model;
  spec = run_spec_from_json(json::object(), spec);
  session.config() = to_json(spec);
  const int code = spec.scheme == "fd" ? emit_fd(session, spec, "") : emit_spectral(session, spec);
  session.manifest(spec.model == "fowler");
  return code;
}

int cmd_erosion(const std::string& config, const std::string& preset, std::optional<double> x_star) {
  Session session("erosion");
  if (!config.empty() && !preset.empty()) throw ConfigError("--preset", "give either --config or --preset");
  // Unscaled equation: unit viscosity, spectral solver, dt = 1e-4 for the early-time slope.
  RunSpec base = load_preset(preset.empty() ? "dune" : preset);
  base.scheme = "spectral";
  base.viscosity = 1.0;
  base.spectral_dt = 1e-4;
  base.snapshot_interval = 0.1;
  RunSpec spec = run_spec_from_json(config.empty() ? json::object() : read_json(config), base);
  if (x_star) spec.x_star = *x_star;
  session.config() = to_json(spec);

  SimConfig cfg = spectral_config(spec);
  const auto rep = verify_erosion(profile(spec), spec.x_star, cfg);

  std::vector<double> t, u;
  for (const auto& [a, b] : rep.trace) {
    t.push_back(a);
    u.push_back(b);
  }
  session.csv("trace.csv", {"t", "u_at_x_star"}, {t, u});
  std::vector<double> x(cfg.grid.size());
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = cfg.grid.node(j);
  std::vector<std::string> header{"x"};
  std::vector<std::vector<double>> cols{x};
  for (const auto& s : rep.run.snapshots) {
    header.push_back(snapshot_label(s.t));
    cols.push_back(s.u.values);
  }
  session.csv("snapshots.csv", header, cols);
  json report{{"x_star", rep.x_star},
              {"predicted_rate", rep.predicted_rate},
              {"measured_rate", rep.measured_rate},
              {"relative_slope_error", rep.relative_slope_error()},
              {"t_star", rep.t_star ? json(*rep.t_star) : json(nullptr)},
              {"min_location", rep.min_location},
              {"min_value", rep.min_value},
              {"support_right", rep.support_right},
              {"downstream", rep.downstream()}};
  session.document("erosion.json", report);
  session.results() = report;
  session.warnings() = rep.run.warnings;
  session.manifest();
  return kOk;
}

int cmd_compare(const std::string& config, const std::string& preset) {
  Session session("compare");
  RunSpec spec = resolve(config, preset);
  spec.scheme = "fd";
  session.config() = to_json(spec);
  RunSpec burgers = spec, fowler_spec = spec;
  burgers.model = "burgers";
  fowler_spec.model = "fowler";
  const int a = emit_fd(session, run_spec_from_json(json::object(), burgers), "burgers_");
  const int b = emit_fd(session, run_spec_from_json(json::object(), fowler_spec), "fowler_");
  const double bmin = session.results()["burgers"]["run_min"].get<double>();
  const double fmin = session.results()["fowler"]["run_min"].get<double>();
  json summary{{"burgers_min", bmin},
               {"fowler_min", fmin},
               {"burgers_keeps_sign", bmin >= -1e-12},
               {"fowler_erodes", fmin < -1e-4}};
  session.document("compare.json", summary);
  session.results()["summary"] = summary;
  session.manifest();
  return std::max(a, b);
}

void report_error(const std::string& kind, const std::string& message, const std::string& key = {}) {
  json e{{"error", kind}, {"message", message}};
  if (!key.empty()) e["key"] = key;
  std::cerr << e.dump() << '\n';
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Fowler equation toolkit: symbol, nonlocal operator, kernel, solvers and erosion checks"};
  app.name(kToolName);
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  std::vector<double> xis, ts, xs;
  std::size_t modes = 4096, kernel_modes = 16384, count = 9;
  double length = 30.0, viscosity = 1.0, tmin = 1e-3, tmax = 1e-1;
  std::string config, preset, scheme, model;
  std::optional<double> x_star;

  auto* sym = app.add_subcommand("symbol", "psi(xi) at given frequencies or on a grid");
  sym->add_option("--xi", xis, "frequencies (repeatable)");
  sym->add_option("--modes", modes, "grid size when no --xi is given");
  sym->add_option("--length", length, "period");
  sym->add_option("--viscosity", viscosity, "diffusion coefficient");

  auto* nl = app.add_subcommand("nonlocal", "I[phi] by definition, closed formula and multiplier");
  nl->add_option("--config", config, "JSON run configuration (initial profile, length, modes)");
  nl->add_option("--x", xs, "evaluation points (repeatable)");
  NonlocalFlags nl_flags;
  nl->add_option("--profile", nl_flags.profile, "bump | gaussian")->check(CLI::IsMember({"bump", "gaussian"}));
  nl->add_option("--center", nl_flags.center, "profile centre");
  nl->add_option("--radius", nl_flags.radius, "bump radius or gaussian scale");
  nl->add_option("--amplitude", nl_flags.amplitude, "profile amplitude");
  nl->add_option("--route", nl_flags.route, "def | formula | spectral | all")
      ->check(CLI::IsMember({"def", "formula", "spectral", "all"}));

  auto* ker = app.add_subcommand("kernel", "semigroup kernel K(t, .) and its diagnostics");
  ker->add_option("--t", ts, "kernel times (repeatable)");
  std::string grid_spec;
  ker->add_option("--grid", grid_spec, "N,L (overrides --modes and --length)");
  ker->add_option("--modes", kernel_modes, "grid size");
  ker->add_option("--length", length, "period");
  ker->add_option("--viscosity", viscosity, "diffusion coefficient");
  ker->add_option("--tmin", tmin, "start of the slope fit");
  ker->add_option("--tmax", tmax, "end of the slope fit");
  ker->add_option("--count", count, "log-spaced fit times");

  auto* sim = app.add_subcommand("simulate", "spectral or finite-difference run");
  sim->add_option("--config", config, "JSON run configuration");
  sim->add_option("--preset", preset, "dune | traveling-wave");
  sim->add_option("--scheme", scheme, "spectral | fd");
  sim->add_option("--model", model, "burgers | fowler");

  auto* ero = app.add_subcommand("erosion", "erosion rate at a flat point and sign change of u");
  ero->add_option("--config", config, "JSON run configuration");
  ero->add_option("--preset", preset, "dune");
  ero->add_option("--x-star", x_star, "probe position");

  auto* cmp = app.add_subcommand("compare", "Burgers vs Fowler FD runs on the same initial data");
  cmp->add_option("--config", config, "JSON run configuration");
  cmp->add_option("--preset", preset, "dune");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("config", e.what());
    return kConfig;
  }

  try {
    if (sym->parsed()) return cmd_symbol(xis, modes, length, viscosity);
    if (nl->parsed()) return cmd_nonlocal(config, xs, nl_flags);
    if (ker->parsed() && !grid_spec.empty()) {
      const auto comma = grid_spec.find(',');
      try {
        if (comma == std::string::npos) throw std::invalid_argument("missing comma");
        kernel_modes = std::stoul(grid_spec.substr(0, comma));
        length = std::stod(grid_spec.substr(comma + 1));
      } catch (const std::exception&) {
        throw ConfigError("--grid", "expected N,L, e.g. 16384,30");
      }
    }
    if (ker->parsed()) return cmd_kernel(ts, kernel_modes, length, viscosity, tmin, tmax, count);
    if (sim->parsed()) return cmd_simulate(config, preset, scheme, model);
    if (ero->parsed()) return cmd_erosion(config, preset, x_star);
    if (cmp->parsed()) return cmd_compare(config, preset);
  } catch (const ConfigError& e) {
    report_error("config", e.what(), e.key());
    return kConfig;
  } catch (const NumericalError& e) {
    report_error("numerical", e.what());
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    report_error("config", e.what());
    return kConfig;
  } catch (const std::domain_error& e) {
    report_error("config", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return kInternal;
  }
  return kInternal;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv{kToolName};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fowler::cli
