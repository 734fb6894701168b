#pragma once

// Command-line front end: configuration, presets, CSV/JSON output and run manifests.

#include "fowler/fd_solver.hpp"
#include "fowler/grid.hpp"
#include "fowler/spectral_solver.hpp"

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace fowler::cli {

inline constexpr const char* kToolName = "fowler";
inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kOutputDirVariable = "FOWLER_OUTPUT_DIR";

enum ExitCode : int { kOk = 0, kInternal = 1, kConfig = 2, kNumerical = 3 };

using json = nlohmann::ordered_json;

struct InitialSpec {
  std::string type = "dune";  // dune | bump | gaussian | traveling-wave
  double center = 15.0;
  double radius = 1.0;        // bump radius or gaussian scale
  double amplitude = 1.0;
};

/// Everything a simulation run needs; serialises to the manifest verbatim.
struct RunSpec {
  std::string scheme = "fd";      // fd | spectral
  std::string model = "fowler";   // burgers | fowler
  double length = 30.0;
  double x0 = 0.0;
  std::size_t points = 4001;      // FD mesh nodes
  std::size_t modes = 4096;       // spectral grid size
  double viscosity = 0.1;
  double t_end = 1.0;
  double dt = 0.0;                // FD: 0 selects the CFL-Peclet step; spectral: required
  double spectral_dt = 1e-3;
  double snapshot_interval = 0.25;
  double cfl_factor = 1.0;
  bool strict_cfl = false;
  std::string zero_weight = "cell-average";  // cell-average | skip
  bool riemann_weight = true;
  bool dealias = true;
  std::string boundary = "zero";  // zero | exact
  double x_star = 17.0;           // erosion probe
  InitialSpec initial;
};

json to_json(const RunSpec& spec);
RunSpec run_spec_from_json(const json& j, RunSpec base = {});
RunSpec load_preset(const std::string& name);
std::vector<std::string> preset_names();

/// Reference solution when the initial data is the travelling wave, else empty.
std::function<double(double, double)> exact_solution(const RunSpec& spec);

FdConfig fd_config(const RunSpec& spec);
std::vector<double> fd_initial(const RunSpec& spec);
SimConfig spectral_config(const RunSpec& spec);
Field spectral_initial(const RunSpec& spec);

/// "%.17g": shortest fixed width that round-trips every double.
std::string format_double(double v);
std::string sha256_hex(const std::filesystem::path& file);

std::filesystem::path output_dir();

int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace fowler::cli
