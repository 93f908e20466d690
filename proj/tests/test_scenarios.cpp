#include <doctest.h>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "triodflow/errors.hpp"
#include "triodflow/report.hpp"
#include "triodflow/scenarios.hpp"

using namespace triodflow;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("triodflow_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Vec2 rotate_deg(Vec2 v, double deg) {
  const double a = deg * std::numbers::pi / 180.0;
  return {std::cos(a) * v.x - std::sin(a) * v.y, std::sin(a) * v.x + std::cos(a) * v.y};
}

}  // namespace

TEST_CASE("convergence initial data") {
  const double zt = convergence_junction_offset();
  CHECK(zt == doctest::Approx((std::sqrt(3.0) - std::sqrt(2.0)) / 2.0).epsilon(1e-15));
  for (bool rotated : {false, true}) {
    const TriodState t = make_convergence_initial(20, rotated);
    const Vec2 j = rotated ? rotate_deg(Vec2{zt, 0.0}, 18.0) : Vec2{zt, 0.0};
    CHECK(norm(t.junction() - j) <= 1e-15);
    for (const auto& c : t.curves) CHECK(norm(c.endpoint) == doctest::Approx(1.0).epsilon(1e-14));
    // Sectors of the sampled chains, not of the continuous curves.
    const auto s = junction_sector_angles(t);
    CHECK(s[0] == doctest::Approx(125.72726083086536).epsilon(1e-12));
    CHECK(s[1] == doctest::Approx(119.97510195212016).epsilon(1e-12));
    CHECK(s[2] == doctest::Approx(114.29763721701448).epsilon(1e-12));
  }
}

TEST_CASE("axis-aligned and spiral initial data") {
  const double z = 0.1;
  const TriodState e = make_epsilon_initial(20, z);
  const double zt = std::sqrt(1.0 - z * z);
  CHECK(e.junction() == Vec2{-zt, 0.0});
  CHECK(norm(e.curves[0].endpoint - Vec2{1.0, 0.0}) <= 1e-15);
  CHECK(norm(e.curves[1].endpoint - Vec2{-zt, z}) <= 1e-15);
  CHECK(norm(e.curves[2].endpoint - Vec2{-zt, -z}) <= 1e-15);

  const TriodState s = make_spiral_initial(60);
  CHECK(s.junction() == Vec2{0.0, 0.0});
  for (std::size_t j = 0; j <= 60; ++j) {
    CHECK(norm(s.curves[1].nodes[j] - rotate_deg(s.curves[0].nodes[j], 120.0)) <= 1e-14);
    CHECK(norm(s.curves[2].nodes[j] - rotate_deg(s.curves[0].nodes[j], 240.0)) <= 1e-14);
  }
  for (const auto& c : s.curves) CHECK(norm(c.endpoint) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("self-intersection initial data") {
  CHECK(self_intersect_profile(0.0) == doctest::Approx(-std::sqrt(3.0) / 3.0).epsilon(1e-15));
  CHECK(self_intersect_profile(1.0 / 3.0) == doctest::Approx(-std::sqrt(3.0) / 2.0).epsilon(1e-15));
  const TriodState a = make_self_intersect_initial(30, JunctionFix::shift);
  const TriodState b = make_self_intersect_initial(30, JunctionFix::reinterpret);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j <= 30; ++j) CHECK(norm(a.curves[i].nodes[j] - b.curves[i].nodes[j]) <= 1e-15);
  }
  // Curve 3 is curve 2 reflected through the junction.
  for (std::size_t j = 0; j <= 30; ++j) CHECK(norm(a.curves[1].nodes[j] + a.curves[2].nodes[j]) <= 1e-15);
  CHECK(a.junction() == Vec2{0.0, 0.0});
  CHECK(parse_junction_fix("shift") == JunctionFix::shift);
  CHECK(parse_junction_fix("reinterpret") == JunctionFix::reinterpret);
  CHECK_THROWS_AS(parse_junction_fix("bogus"), ConfigError);
}

TEST_CASE("config parsing") {
  SUBCASE("defaults and overrides") {
    const auto c = parse_config(nlohmann::json{{"scenario", "epsilon_study"}, {"J", 10}, {"epsilon_list", {1.0, 0.1}}});
    CHECK(c.kind == ScenarioKind::epsilon_study);
    CHECK(c.J == 10);
    CHECK(c.epsilons == std::vector<double>{1.0, 0.1});
    CHECK(*c.delta == 0.01);
    CHECK(*c.velocity_threshold == 1e-6);
  }
  SUBCASE("every scenario has valid defaults") {
    for (const char* name : {"convergence", "convergence_time", "epsilon_study", "conditioning_mass",
                             "conditioning_system", "spiral", "self_intersect"}) {
      CHECK_NOTHROW(parse_config(nlohmann::json{{"scenario", name}}));
      CHECK(to_string(parse_scenario_kind(name)) == name);
    }
    CHECK_NOTHROW(parse_config(nlohmann::json{{"scenario", "convergence"}, {"paper_scale", true}}));
  }
  SUBCASE("rejections") {
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"J", 10}}), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"scenario", "nope"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"scenario", "spiral"}, {"colour", "red"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"scenario", "spiral"}, {"threshold", 1e-3}}), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"scenario", "spiral"}, {"epsilon", -1.0}}), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"scenario", "spiral"}, {"J", "sixty"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"scenario", "convergence"}, {"J_list", {20, 25}}, {"J_ref", 180}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"scenario", "convergence_time"}, {"N_list", {3456, 5000}}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"scenario", "custom"}, {"initial", "steiner"}, {"delta", 0.01}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"scenario", "custom"}, {"initial", "steiner"}, {"delta", 0.01},
                                                {"N", 3}, {"T", 0.03}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"scenario", "custom"}, {"initial", "nope"}, {"delta", 0.01},
                                                {"N", 3}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"scenario", "self_intersect"}, {"preset", "other"}}), ConfigError);
    CHECK_THROWS_AS(parse_config(nlohmann::json{{"scenario", "self_intersect"}, {"T", 0.50005}}), ConfigError);
  }
  SUBCASE("files") {
    const fs::path dir = fresh_dir("config");
    fs::create_directories(dir);
    write_text(dir / "bad.json", "{ not json");
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
    write_text(dir / "ok.json", R"({"scenario": "conditioning_mass", "J": 6})");
    CHECK(load_config(dir / "ok.json").J == 6);
  }
  CHECK(steps_for(0.2, 0.2 / 400.0) == 400);
  CHECK_THROWS_AS(steps_for(0.2, 0.03), ConfigError);
}

TEST_CASE("scenario outputs are reproducible byte for byte") {
  const nlohmann::json base{{"scenario", "custom"}, {"initial", "convergence"}, {"J", 8},
                            {"delta", 1e-3},        {"N", 20},                  {"snapshot_stride", 10}};
  std::vector<std::string> contents[2];
  for (int run = 0; run < 2; ++run) {
    auto doc = base;
    doc["output_dir"] = fresh_dir("repro" + std::to_string(run)).string();
    const auto outcome = run_scenario(parse_config(doc));
    REQUIRE(outcome.files.size() == 5);
    for (const auto& f : outcome.files) contents[run].push_back(slurp(f));
    CHECK(!outcome.summary.contains("result.wall_time_s"));
    for (const auto& [key, value] : outcome.summary.items()) {
      CHECK((key.rfind("params.", 0) == 0 || key.rfind("result.", 0) == 0));
    }
    CHECK(outcome.summary["result.invariants_hold"] == true);
    CHECK(outcome.summary["result.steps_taken"] == 20);
  }
  CHECK(contents[0] == contents[1]);
  CHECK(contents[0][0].rfind("step,time,energy,min_segment_length,cg_iterations,max_nodal_speed\n", 0) == 0);

  auto doc = base;
  doc["output_dir"] = fresh_dir("walltime").string();
  doc["record_wall_time"] = true;
  CHECK(run_scenario(parse_config(doc)).summary.contains("result.wall_time_s"));
}

TEST_CASE("small conditioning scenarios write their tables") {
  const auto mass = run_scenario(parse_config(nlohmann::json{{"scenario", "conditioning_mass"},
                                                             {"J", 6},
                                                             {"epsilon_list", {1.0, 0.3, 0.09}},
                                                             {"output_dir", fresh_dir("mass").string()}}));
  const std::string csv = slurp(mass.files.front());
  CHECK(csv.rfind("l,epsilon,lambda_max,lambda_min,cond2,EOC\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  const auto sys = run_scenario(parse_config(nlohmann::json{{"scenario", "conditioning_system"},
                                                            {"J_list", {4, 6}},
                                                            {"output_dir", fresh_dir("system").string()}}));
  CHECK(slurp(sys.files.front()).rfind("J,h,delta,cond2_0.1,cond2_1e-05,ratio\n", 0) == 0);
}

TEST_CASE("csv, json and svg writers") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-5) == "1e-05");
  for (double v : {1.0 / 3.0, 5.9049e-6, 123456.789, -2.5e-300}) CHECK(std::stod(format_double(v)) == v);

  CsvTable t({"a", "b", "c"});
  t.add_row({std::int64_t{3}, 0.25, CsvCell{}});
  t.add_row({std::string("x"), 1e-3, 2.0});
  CHECK(t.to_string() == "a,b,c\n3,0.25,\nx,0.001,2\n");
  CHECK_THROWS_AS(t.add_row({1.0}), std::invalid_argument);

  const fs::path dir = fresh_dir("writers");
  Summary s;
  s["params.J"] = 20;
  s["result.E"] = 0.5;
  write_summary(dir / "nested" / "summary.json", s);
  const auto back = nlohmann::json::parse(slurp(dir / "nested" / "summary.json"));
  CHECK(back["params.J"] == 20);
  CHECK(back["result.E"] == 0.5);

  const std::string svg = render_svg(make_steiner_triod(4));
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("viewBox=\"-1.2 -1.2 2.4 2.4\"") != std::string::npos);
  std::size_t polylines = 0;
  for (auto p = svg.find("<polyline"); p != std::string::npos; p = svg.find("<polyline", p + 1)) ++polylines;
  CHECK(polylines == 3);
  // The first curve points up, so its endpoint is drawn at negative y.
  CHECK(svg.find(",-1\"") != std::string::npos);
}

TEST_CASE("worker pool") {
  ::setenv("TRIODFLOW_WORKERS", "3", 1);
  CHECK(worker_count() == 3);
  ::unsetenv("TRIODFLOW_WORKERS");
  CHECK(worker_count() >= 1);

  std::atomic<int> sum{0};
  parallel_for(100, 4, [&](std::size_t k) { sum += static_cast<int>(k); });
  CHECK(sum == 4950);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t k) {
                                 if (k == 7) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}
