#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "dpmts/errors.hpp"
#include "dpmts/io.hpp"
#include "dpmts/sampler.hpp"
#include "dpmts/stationary.hpp"

using namespace dpmts;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("dpmts_io_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

std::vector<double> small_series() {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> nd;
  std::vector<double> s = {0.0};
  for (int t = 1; t < 60; ++t) s.push_back(0.6 * s.back() + nd(gen));
  return s;
}

SamplerSettings short_run(std::uint64_t seed) {
  SamplerSettings s;
  s.n_iterations = 120;
  s.burn_in = 20;
  s.thin = 5;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_CASE("reading series") {
  TempDir dir;
  write_text(dir / "plain.txt", "1.5\n-2\n3e-1\n\n");
  CHECK(read_series(dir / "plain.txt") == std::vector<double>{1.5, -2.0, 0.3});
  write_text(dir / "header.txt", "value\n1\n2\n");
  CHECK(read_series(dir / "header.txt") == std::vector<double>{1.0, 2.0});
  write_text(dir / "two.csv", "\"eruptions\",\"waiting\"\n3.6,79\n1.8,54\n");
  CHECK(read_series(dir / "two.csv", "waiting") == std::vector<double>{79.0, 54.0});
  CHECK(error_of([&] { read_series(dir / "two.csv"); }).find("several columns") != std::string::npos);
  CHECK(error_of([&] { read_series(dir / "two.csv", "speed"); }).find("no column named 'speed'") != std::string::npos);

  write_text(dir / "bad.txt", "1\n2\nabc\n4\n");
  CHECK(error_of([&] { read_series(dir / "bad.txt"); }).find("bad.txt:3: 'abc' is not a number") != std::string::npos);
  write_text(dir / "blank.txt", "1\n\n2\n");
  CHECK(error_of([&] { read_series(dir / "blank.txt"); }).find(":2: blank value") != std::string::npos);
  write_text(dir / "inf.txt", "1\ninf\n");
  CHECK(error_of([&] { read_series(dir / "inf.txt"); }).find(":2: value is not finite") != std::string::npos);
  write_text(dir / "short.csv", "a,b\n1,2\n3\n");
  CHECK(error_of([&] { read_series(dir / "short.csv", "b"); }).find(":3: missing field") != std::string::npos);
  write_text(dir / "empty.txt", "");
  CHECK(!error_of([&] { read_series(dir / "empty.txt"); }).empty());
  CHECK(!error_of([&] { read_series(dir / "absent.txt"); }).empty());
}

TEST_CASE("series are written at full precision") {
  TempDir dir;
  const std::vector<double> v = {0.1, 1.0 / 3.0, -2.718281828459045, 1e-300, 123456789.123456789};
  write_series(dir / "s.txt", v, "z");
  CHECK(read_series(dir / "s.txt") == v);
}

TEST_CASE("general draws survive a write and read") {
  TempDir dir;
  const auto d = run_general(small_series(), default_priors(proxy_from_series(small_series()), {}, 6), short_run(3));
  write_draws(dir / "d.txt", d);
  const auto back = read_draws(dir / "d.txt");
  CHECK(back.model() == "general");
  CHECK(back.size() == d.draws.size());
  CHECK(back.mixture.iterations == d.iterations);
  CHECK(back.mixture.draws == d.draws);
  CHECK(back.meta().series_hash == d.meta.series_hash);
  CHECK(back.meta().n == d.meta.n);
  CHECK(back.meta().truncation == 6);
  CHECK(back.meta().settings == d.meta.settings);
  const auto view = back.view();
  CHECK(view->size() == d.draws.size());
}

TEST_CASE("stationary and TAR draws survive a write and read") {
  TempDir dir;
  const auto s = small_series();
  const auto st = fit_stationary(s, default_priors(proxy_from_series(s), {}, 4), short_run(5));
  write_draws(dir / "st.txt", st);
  const auto st_back = read_draws(dir / "st.txt");
  CHECK(st_back.model() == "stationary");
  CHECK(st_back.mixture.draws == st.draws);

  const auto tar = fit_tar(s, tar_default_priors(s), short_run(6));
  write_draws(dir / "tar.txt", tar);
  const auto tar_back = read_draws(dir / "tar.txt");
  CHECK(tar_back.model() == "tar");
  CHECK(tar_back.tar.draws == tar.draws);
  CHECK(tar_back.tar.iterations == tar.iterations);
  CHECK(tar_back.size() == tar.draws.size());
}

TEST_CASE("malformed draws files are rejected") {
  TempDir dir;
  write_text(dir / "x.txt", "# model: nonsense\niteration\n");
  CHECK_THROWS_AS(read_draws(dir / "x.txt"), ValidationError);
  write_text(dir / "y.txt", "");
  CHECK_THROWS_AS(read_draws(dir / "y.txt"), ValidationError);
}

TEST_CASE("a checkpoint written to disk resumes the chain exactly") {
  TempDir dir;
  const auto s = small_series();
  const auto cfg = default_priors(proxy_from_series(s), {}, 5);
  const auto full = run_general(s, cfg, short_run(9));
  GeneralSampler a(s, cfg, short_run(9));
  for (int i = 0; i < 47; ++i) a.sweep();
  write_checkpoint(dir / "c.json", a.checkpoint());
  auto b = GeneralSampler::resume(read_checkpoint(dir / "c.json"));
  const auto& d = b.run();
  // Sweeps driven by hand retain nothing, so only draws after the checkpoint are held.
  REQUIRE(d.draws.size() == 15);
  const std::size_t skip = full.draws.size() - d.draws.size();
  CHECK(std::equal(d.draws.begin(), d.draws.end(), full.draws.begin() + static_cast<std::ptrdiff_t>(skip)));
  CHECK(std::equal(d.iterations.begin(), d.iterations.end(), full.iterations.begin() + static_cast<std::ptrdiff_t>(skip)));
  CHECK(d.iterations.front() == 50);
}

TEST_CASE("run configuration round trip") {
  RunConfig c;
  c.model = "stationary";
  c.data = "series.txt";
  c.column = "waiting";
  c.center = 1.25;
  c.range = 0.1 + 0.2;
  c.shapes.a_c = 3.5;
  c.truncation = 12;
  c.settings.n_iterations = 5000;
  c.settings.burn_in = 1000;
  c.settings.thin = 7;
  c.settings.seed = 99;
  c.settings.adapt = false;
  c.requests.transition_at = {50.0, 80.0};
  c.requests.horizon = 3;
  c.requests.z_n = -0.5;
  c.requests.level = 0.9;
  c.output_dir = "out";
  c.chains = 2;
  const auto text = to_json_text(c);
  const auto back = run_config_from_json_text(text);
  CHECK(back == c);
  CHECK(to_json_text(back) == text);

  RunConfig t;
  t.model = "tar";
  TarPriors tp;
  tp.r_lo = 60.0;
  tp.r_hi = 80.0;
  t.tar_priors = tp;
  CHECK(run_config_from_json_text(to_json_text(t)) == t);

  RunConfig p;
  p.priors = default_priors({3.0, 2.0}, {}, 30);
  CHECK(run_config_from_json_text(to_json_text(p)) == p);
}

TEST_CASE("unknown configuration keys are rejected") {
  CHECK_THROWS_AS(run_config_from_json_text(R"({"model": "general", "iterations": 10})"), ValidationError);
  CHECK_THROWS_AS(run_config_from_json_text(R"({"settings": {"n_iterations": 10, "burnin": 1}})"), ValidationError);
  CHECK_THROWS_AS(run_config_from_json_text("{not json"), ValidationError);
}

TEST_CASE("configuration validation lists every problem") {
  RunConfig c;
  c.model = "arma";
  c.range = -1.0;
  c.chains = 0;
  c.requests.level = 1.5;
  const std::string msg = error_of([&] { c.validate(); });
  CHECK(msg.find("model must be one of") != std::string::npos);
  CHECK(msg.find("no data file given") != std::string::npos);
  CHECK(msg.find("range must be positive") != std::string::npos);
  CHECK(msg.find("chains must be at least 1") != std::string::npos);
  CHECK(msg.find("level must lie in (0, 1)") != std::string::npos);
}

TEST_CASE("output writers") {
  TempDir dir;
  DensityGrid g;
  g.z = {0.0, 0.5};
  g.mean = {0.1, 1.0 / 3.0};
  g.lower = {0.05, 0.2};
  g.upper = {0.2, 0.4};
  write_grid(dir / "g.txt", g, "test grid");
  std::ifstream in(dir / "g.txt");
  std::string all((std::istreambuf_iterator<char>(in)), {});
  CHECK(all.find("# test grid") != std::string::npos);
  CHECK(all.find("0.3333333333333333") != std::string::npos);

  PpoResult p;
  p.t_start = 3;
  p.t = {3};
  p.log_ordinate = {-1.5};
  p.ess = {10.0};
  p.finite = {true};
  p.log_sum = -1.5;
  write_ppo(dir / "p.txt", p);
  CHECK(fs::file_size(dir / "p.txt") > 0);
}
