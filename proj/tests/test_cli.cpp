#include "cli.hpp"
#include "fowler/presets.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using fowler::cli::json;
using fowler::cli::run;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("fowler-cli-" + std::to_string(::getpid()) + "-" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ::setenv(fowler::cli::kOutputDirVariable, dir_.c_str(), 1);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const json& j) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  json read(const fs::path& p) const {
    std::ifstream in(p);
    return json::parse(in);
  }

  std::string slurp(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  // Small FD run that finishes in well under a second.
  json small_fd() const {
    return {{"scheme", "fd"}, {"model", "fowler"}, {"points", 301}, {"t_end", 0.05}, {"snapshot_interval", 0.025}};
  }

  fs::path dir_;
};

TEST_F(Cli, SymbolAtZero) {
  ASSERT_EQ(run({"symbol", "--xi", "0"}), 0);
  std::ifstream in(dir_ / "symbol" / "symbol.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "xi,re_psi,im_psi,oracle_re,oracle_im,abs_diff");
  EXPECT_EQ(row.substr(0, 6), "0,0,0,");
}

TEST_F(Cli, SymbolMatchesOracle) {
  ASSERT_EQ(run({"symbol", "--xi", "0.5", "1", "2", "4"}), 0);
  std::ifstream in(dir_ / "symbol" / "symbol.csv");
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    const double diff = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_LE(diff, 1e-8) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 4);
}

TEST_F(Cli, UnknownSubcommandIsConfigError) { EXPECT_EQ(run({"frobnicate"}), 2); }

TEST_F(Cli, UnknownPreset) { EXPECT_EQ(run({"simulate", "--preset", "nope"}), 2); }

TEST_F(Cli, BadConfigValues) {
  json c = small_fd();
  c["points"] = 2;
  EXPECT_EQ(run({"simulate", "--config", write_config("a.json", c).string()}), 2);
  c = small_fd();
  c["viscosity"] = -1.0;
  EXPECT_EQ(run({"simulate", "--config", write_config("b.json", c).string()}), 2);
  c = small_fd();
  c["no_such_key"] = 1;
  EXPECT_EQ(run({"simulate", "--config", write_config("c.json", c).string()}), 2);
  c = small_fd();
  c["t_end"] = "soon";
  EXPECT_EQ(run({"simulate", "--config", write_config("d.json", c).string()}), 2);
  EXPECT_EQ(run({"simulate", "--scheme", "foo"}), 2);
  EXPECT_EQ(run({"simulate", "--config", (dir_ / "missing.json").string()}), 2);
}

TEST_F(Cli, BlowUpIsNumericalFailure) {
  json c = small_fd();
  c["model"] = "burgers";
  c["t_end"] = 20.0;
  c["snapshot_interval"] = 20.0;
  c["dt"] = 2.0;
  EXPECT_EQ(run({"simulate", "--config", write_config("blow.json", c).string()}), 3);
  const json m = read(dir_ / "simulate" / "manifest.json");
  EXPECT_TRUE(m["results"]["fd"]["blew_up"].get<bool>());
  EXPECT_FALSE(m["warnings"].empty());
}

TEST_F(Cli, DunePreset) {
  const auto spec = fowler::cli::load_preset("dune");
  const auto u0 = fowler::cli::fd_initial(spec);
  const auto cfg = fowler::cli::fd_config(spec);
  const double dx = cfg.length / static_cast<double>(cfg.points - 1);
  EXPECT_NEAR(u0[static_cast<std::size_t>(std::lround(15.0 / dx))], std::exp(-1.0), 1e-15);
  const auto profile = fowler::dune_profile(spec.length);
  EXPECT_EQ(profile(14.0).value, 0.0);
  EXPECT_EQ(profile(16.0).value, 0.0);
  EXPECT_LT(u0[static_cast<std::size_t>(std::lround(14.0 / dx))], 1e-80);
  EXPECT_EQ(*std::max_element(u0.begin(), u0.end()), u0[2000]);
}

TEST_F(Cli, TravelingWavePreset) {
  const auto spec = fowler::cli::load_preset("traveling-wave");
  EXPECT_EQ(spec.model, "burgers");
  EXPECT_EQ(spec.viscosity, 1.0);
  const auto exact = fowler::cli::exact_solution(spec);
  ASSERT_TRUE(static_cast<bool>(exact));
  EXPECT_DOUBLE_EQ(exact(0.0, 0.0), 0.5);
  const auto u0 = fowler::cli::fd_initial(spec);
  EXPECT_DOUBLE_EQ(u0[(u0.size() - 1) / 2], 0.5);
}

TEST_F(Cli, PresetNames) {
  const auto names = fowler::cli::preset_names();
  EXPECT_NE(std::find(names.begin(), names.end(), "dune"), names.end());
  EXPECT_NE(std::find(names.begin(), names.end(), "traveling-wave"), names.end());
}

TEST_F(Cli, CsvPrecisionRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    EXPECT_EQ(std::stod(fowler::cli::format_double(v)), v);
  }
}

TEST_F(Cli, ManifestDigests) {
  ASSERT_EQ(run({"simulate", "--config", write_config("run.json", small_fd()).string()}), 0);
  const json m = read(dir_ / "simulate" / "manifest.json");
  EXPECT_EQ(m["tool"]["name"], "fowler");
  EXPECT_EQ(m["constants"]["selected"], "gamma-half-2pi43");
  ASSERT_EQ(m["outputs"].size(), 2u);
  for (const auto& o : m["outputs"]) {
    const fs::path f = dir_ / "simulate" / o["file"].get<std::string>();
    EXPECT_EQ(o["sha256"], fowler::cli::sha256_hex(f));
    EXPECT_EQ(o["bytes"].get<std::uintmax_t>(), fs::file_size(f));
    EXPECT_EQ(o["sha256"].get<std::string>().size(), 64u);
  }
}

TEST_F(Cli, DeterministicAndReplayable) {
  const auto cfg = write_config("run.json", small_fd());
  ASSERT_EQ(run({"simulate", "--config", cfg.string()}), 0);
  const json first = read(dir_ / "simulate" / "manifest.json");
  const std::string snaps = slurp(dir_ / "simulate" / "snapshots.csv");

  // Replaying the echoed config reproduces every output byte for byte.
  const auto echoed = write_config("echo.json", first["config"]);
  ASSERT_EQ(run({"simulate", "--config", echoed.string()}), 0);
  const json second = read(dir_ / "simulate" / "manifest.json");
  EXPECT_EQ(first["config"], second["config"]);
  EXPECT_EQ(first["outputs"], second["outputs"]);
  EXPECT_EQ(slurp(dir_ / "simulate" / "snapshots.csv"), snaps);
}

TEST_F(Cli, SpectralSimulate) {
  json c{{"scheme", "spectral"}, {"modes", 512}, {"t_end", 0.1}, {"spectral_dt", 1e-2}, {"snapshot_interval", 0.05}};
  ASSERT_EQ(run({"simulate", "--config", write_config("s.json", c).string()}), 0);
  std::ifstream in(dir_ / "simulate" / "snapshots.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), 3);
}

TEST_F(Cli, Compare) {
  json c = small_fd();
  c["t_end"] = 0.5;
  c["snapshot_interval"] = 0.5;
  ASSERT_EQ(run({"compare", "--config", write_config("cmp.json", c).string()}), 0);
  const json s = read(dir_ / "compare" / "compare.json");
  EXPECT_TRUE(s["burgers_keeps_sign"].get<bool>());
  EXPECT_LT(s["fowler_min"].get<double>(), 0.0);
  EXPECT_TRUE(fs::exists(dir_ / "compare" / "burgers_snapshots.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "compare" / "fowler_diagnostics.csv"));
}

TEST_F(Cli, Kernel) {
  ASSERT_EQ(run({"kernel", "--t", "0.1", "--grid", "1024,30", "--count", "3"}), 0);
  EXPECT_TRUE(fs::exists(dir_ / "kernel" / "kernel.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "kernel" / "kernel_diagnostics.csv"));
}

TEST_F(Cli, NonlocalRoutes) {
  ASSERT_EQ(run({"nonlocal", "--route", "def", "--x", "31", "33"}), 0);
  EXPECT_TRUE(fs::exists(dir_ / "nonlocal" / "nonlocal.csv"));
  EXPECT_EQ(run({"nonlocal", "--route", "sideways"}), 2);
}

TEST_F(Cli, ErosionRejectsNonFlatProbe) {
  json c{{"modes", 512}};
  EXPECT_EQ(run({"erosion", "--config", write_config("e.json", c).string(), "--x-star", "15.2"}), 2);
}

}  // namespace
