#include <doctest.h>

#include "swarmfield.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const char* name)
{
  const fs::path p = fs::temp_directory_path() / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text)
{
  std::ofstream(p) << text;
}

std::string read(const fs::path& p)
{
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* tiny_ini = "[mission]\nn = 20\nmax_outer = 1\ngamma = 1e-6\n"
                       "[domain]\nnx = 12\nny = 12\n"
                       "[planner]\nI = 2\nJ = 2\nN = 2\nmax_iters = 3\n";

std::string gaussian_csv(int n, double b, double cx, double cy)
{
  std::ostringstream out;
  out.precision(17);
  out << "nx,ny,b,c\n" << n << "," << n << "," << b << "," << b << "\n";
  const double h = b / n;
  auto bump = [&](int i, int j) {
    const double x = (i + 0.5) * h - cx, y = (j + 0.5) * h - cy;
    return std::exp(-(x * x + y * y) / 8.0);
  };
  double mass = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      mass += bump(i, j) * h * h;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i)
      out << (i ? "," : "") << bump(i, j) / mass;
    out << "\n";
  }
  return out.str();
}

} // namespace

TEST_CASE("version and error reporting")
{
  CHECK(std::string(sf_version()) == "1.0.0");
  sf_config* cfg = nullptr;
  CHECK(sf_config_load("/nonexistent/file.ini", &cfg) == SF_ERR_IO);
  CHECK(cfg == nullptr);
  CHECK(std::string(sf_last_error()).find("nonexistent") != std::string::npos);
  CHECK(sf_config_load(nullptr, &cfg) == SF_ERR_ARGUMENT);

  const fs::path dir = scratch("sf_capi_err");
  write(dir / "bad.ini", "[mission]\ndt = 0\n");
  CHECK(sf_config_load((dir / "bad.ini").c_str(), &cfg) == SF_ERR_VALIDATION);
  CHECK(std::string(sf_last_error()).find("dt") != std::string::npos);
  write(dir / "broken.ini", "[mission\n");
  CHECK(sf_config_load((dir / "broken.ini").c_str(), &cfg) == SF_ERR_PARSE);
  fs::remove_all(dir);
  sf_config_free(nullptr);
  sf_mission_free(nullptr);
}

TEST_CASE("config hash and canonical text")
{
  sf_config* a = nullptr;
  REQUIRE(sf_config_default(&a) == SF_OK);
  sf_config* b = nullptr;
  REQUIRE(sf_config_load((std::string(SWARMFIELD_SOURCE_DIR) + "/configs/full.ini").c_str(), &b) == SF_OK);
  char ha[65], hb[65];
  REQUIRE(sf_config_hash(a, ha) == SF_OK);
  REQUIRE(sf_config_hash(b, hb) == SF_OK);
  CHECK(std::string(ha) == std::string(hb));
  CHECK(std::string(ha).size() == 64);
  CHECK(sf_config_set_seed(b, 9) == SF_OK);
  REQUIRE(sf_config_hash(b, hb) == SF_OK);
  CHECK(std::string(ha) != std::string(hb));

  size_t needed = 0;
  CHECK(sf_config_canonical(a, nullptr, 0, &needed) == SF_OK);
  CHECK(needed > 100);
  std::vector<char> buf(needed);
  CHECK(sf_config_canonical(a, buf.data(), buf.size(), &needed) == SF_OK);
  CHECK(std::string(buf.data()).find("[mission]") != std::string::npos);
  CHECK(sf_config_canonical(a, buf.data(), 4, &needed) == SF_ERR_ARGUMENT);
  sf_config_free(a);
  sf_config_free(b);
}

TEST_CASE("mission through the C interface")
{
  const fs::path dir = scratch("sf_capi_mission");
  write(dir / "tiny.ini", tiny_ini);
  sf_config* cfg = nullptr;
  REQUIRE(sf_config_load((dir / "tiny.ini").c_str(), &cfg) == SF_OK);
  sf_mission* m = nullptr;
  REQUIRE(sf_mission_run(cfg, &m) == SF_OK);
  CHECK(sf_mission_outcome(m) == SF_OUTCOME_CAP);
  sf_mission_summary s{};
  REQUIRE(sf_mission_summary_get(m, &s) == SF_OK);
  CHECK(s.outer_periods == 1);
  CHECK(s.dataset_size == 20u * 9u);
  CHECK(s.final_sup_uncertainty <= 1.0);
  REQUIRE(sf_mission_export(m, (dir / "out").c_str()) == SF_OK);
  CHECK(fs::exists(dir / "out" / "mission.json"));
  REQUIRE(sf_export_plots((dir / "out" / "mission.json").c_str(), (dir / "plots").c_str()) == SF_OK);
  CHECK(read(dir / "plots" / "prediction_error.csv") == read(dir / "out" / "prediction_error.csv"));
  CHECK(read(dir / "plots" / "tracking_error.csv") == read(dir / "out" / "tracking_error.csv"));
  sf_mission_free(m);
  sf_config_free(cfg);
  fs::remove_all(dir);
}

TEST_CASE("plan and track entry points")
{
  const fs::path dir = scratch("sf_capi_plan");
  write(dir / "tiny.ini", tiny_ini);
  sf_config* cfg = nullptr;
  REQUIRE(sf_config_load((dir / "tiny.ini").c_str(), &cfg) == SF_OK);

  write(dir / "p0.csv", gaussian_csv(12, 20, 7, 7));
  write(dir / "pf.csv", gaussian_csv(12, 20, 13, 12));
  double cost = -1.0;
  const sf_status st = sf_plan_files(cfg, (dir / "p0.csv").c_str(), (dir / "pf.csv").c_str(),
                                     (dir / "plan").c_str(), &cost);
  REQUIRE_MESSAGE(st == SF_OK, std::string(sf_last_error()));
  CHECK(cost > 0.0);
  CHECK(fs::exists(dir / "plan" / "coefficients.json"));
  CHECK(fs::exists(dir / "plan" / "p_r" / "manifest.json"));
  CHECK(sf_plan_files(cfg, (dir / "none.csv").c_str(), (dir / "pf.csv").c_str(),
                      (dir / "plan").c_str(), &cost) == SF_ERR_IO);

  double ratio = -1.0;
  REQUIRE(sf_track(cfg, 0.0, "none", 20.0, (dir / "track").c_str(), &ratio) == SF_OK);
  CHECK(ratio > 0.0);
  CHECK(ratio < 1.0);
  CHECK(read(dir / "track" / "track.csv").rfind("t,phi_norm,lyapunov\n", 0) == 0);
  CHECK(sf_track(cfg, 0.1, "wobbly", 5.0, (dir / "track").c_str(), &ratio) == SF_ERR_ARGUMENT);
  sf_config_free(cfg);
  fs::remove_all(dir);
}
