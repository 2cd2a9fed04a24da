#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hvac/data/csv.hpp"
#include "hvac/data/grid.hpp"
#include "hvac/error.hpp"
#include "hvac/sim/simulator.hpp"

using namespace hvac;
using namespace hvac::data;

TEST_CASE("axes are inclusive linspaces") {
  const auto noise = GridSpec::training().noise_std.values();
  REQUIRE(noise.size() == 5);
  const double expect[] = {0.01, 0.07, 0.13, 0.19, 0.25};
  for (int i = 0; i < 5; ++i) CHECK(noise[i] == doctest::Approx(expect[i]).epsilon(1e-12));

  const Axis single{300.0, 300.0, 1};
  REQUIRE(single.values().size() == 1);
  CHECK(single.values()[0] == 300.0);

  const auto v = GridSpec::validation().noise_std.values();
  REQUIRE(v.size() == 9);
  CHECK(v.front() == doctest::Approx(0.01));
  CHECK(v.back() == doctest::Approx(0.25));
  for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] - v[i - 1] == doctest::Approx(0.03));

  CHECK(GridSpec::training().grid_size() == 5ull * 5 * 4 * 5 * 10 * 30);
  CHECK_THROWS_AS((Axis{1.0, 2.0, 0}.values()), ValidationError);
  GridSpec bad;
  bad.t_out = {300.0, 200.0, 3};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("grid points enumerate the Cartesian product lexicographically") {
  GridSpec g;
  g.noise_std = {0.1, 0.2, 2};
  g.t_indoor = {290.0, 290.0, 1};
  g.vent_level = {20.0, 40.0, 2};
  g.t_heater = {300.0, 300.0, 1};
  g.t_wall = {280.0, 280.0, 1};
  g.t_out = {260.0, 280.0, 3};
  g.session_minutes = 600;
  g.sequences_per_session = 2;
  g.subset_size = 4;
  const auto pts = sample_grid(g);
  REQUIRE(pts.size() == 12);
  CHECK(pts[0].init.t_out == 260.0);
  CHECK(pts[1].init.t_out == 270.0);
  CHECK(pts[3].init.vent_level == 40.0);
  CHECK(pts[6].config.noise_std == doctest::Approx(0.2));
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(grid_point(g, i).init == pts[i].init);
}

TEST_CASE("slicing a session reproduces it when concatenated") {
  sim::SimConfig cfg;
  cfg.noise_std = 0.1;
  cfg.rng_seed = 4;
  sim::SimState init;
  init.t_out = 270.0;
  const auto rec = sim::run_session(cfg, init, 3000);
  const auto parts = slice_session(rec, 10, 300);
  REQUIRE(parts.size() == 10);
  std::vector<double> obs, truth, out;
  std::vector<sim::ControlState> ctl;
  for (const auto& s : parts) {
    CHECK(s.size() == 300);
    obs.insert(obs.end(), s.t_obs.begin(), s.t_obs.end());
    truth.insert(truth.end(), s.t_true.begin(), s.t_true.end());
    out.insert(out.end(), s.t_out.begin(), s.t_out.end());
    ctl.insert(ctl.end(), s.control.begin(), s.control.end());
    CHECK(s.noise_std == 0.1);
  }
  CHECK(obs == rec.t_obs);
  CHECK(truth == rec.t_true);
  CHECK(out == rec.t_out);
  CHECK(ctl == rec.control);

  const auto whole = slice_session(rec, 1, 3000);
  CHECK(whole.front().t_obs == rec.t_obs);
  CHECK_THROWS_AS(slice_session(rec, 11, 300), ValidationError);
}

TEST_CASE("generated datasets are deterministic, equal-length and labelled") {
  GridSpec g;
  g.subset_size = 60;
  const Dataset a = generate_dataset(g, 3, 1);
  const Dataset b = generate_dataset(g, 3, 2);
  REQUIRE(a.size() == 60);
  CHECK(a.sequences == b.sequences);
  CHECK(a.sequence_length() == 300);
  for (const auto& s : a.sequences) {
    CHECK(s.has_noise_label());
    CHECK(s.has_truth());
  }
  const Dataset c = generate_dataset(g, 4, 1);
  CHECK_FALSE(a.sequences == c.sequences);

  GridSpec too_big;
  too_big.noise_std = {0.1, 0.1, 1};
  too_big.t_indoor = too_big.vent_level = too_big.t_heater = too_big.t_wall = too_big.t_out = {290.0, 290.0, 1};
  too_big.subset_size = 11;
  CHECK_THROWS_AS(generate_dataset(too_big, 0), ValidationError);
}

TEST_CASE("noise residuals match the label within the chi-square band") {
  GridSpec g;
  g.subset_size = 200;
  const Dataset ds = generate_dataset(g, 8, 1);
  for (const auto& s : ds.sequences) {
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double e = s.t_obs[i] - s.t_true[i];
      sum += e;
      sum2 += e * e;
    }
    const double n = static_cast<double>(s.size());
    const double sd = std::sqrt((sum2 - sum * sum / n) / (n - 1.0));
    CHECK(std::abs(sd / s.noise_std - 1.0) < 0.2);
  }
}

TEST_CASE("CSV round trip and schema errors") {
  GridSpec g;
  g.subset_size = 3;
  const Dataset ds = generate_dataset(g, 1, 1);
  std::stringstream buf;
  write_csv(ds, buf);
  const std::string text = buf.str();
  CHECK(text.rfind("seq_id,minute,t_obs,t_true,t_out,a_h,a_vent,a_ac,noise_std\n", 0) == 0);
  std::istringstream in(text);
  const Dataset back = read_csv(in);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& x = ds.sequences[i];
    const auto& y = back.sequences[i];
    REQUIRE(x.size() == y.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      CHECK(std::abs(x.t_obs[k] - y.t_obs[k]) <= 1e-6);
      CHECK(std::abs(x.t_true[k] - y.t_true[k]) <= 1e-6);
      CHECK(std::abs(x.t_out[k] - y.t_out[k]) <= 1e-6);
      CHECK(x.control[k].a_h == y.control[k].a_h);
      CHECK(x.control[k].a_vent == y.control[k].a_vent);
      CHECK(x.control[k].a_ac == y.control[k].a_ac);
    }
    CHECK(std::abs(x.noise_std - y.noise_std) <= 1e-6);
  }

  std::istringstream missing("seq_id,minute,t_obs,t_out,a_h,a_vent\n0,0,290,280,0,1\n");
  try {
    read_csv(missing);
    FAIL("expected a schema error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("a_ac") != std::string::npos);
  }

  std::istringstream no_truth("seq_id,minute,t_obs,t_out,a_h,a_vent,a_ac\n0,0,290,280,0,1,0\n0,1,290.1,280,1,1,0\n");
  const Dataset ext = read_csv(no_truth);
  REQUIRE(ext.size() == 1);
  CHECK_FALSE(ext.sequences[0].has_truth());
  CHECK_FALSE(ext.sequences[0].has_noise_label());
  CHECK(ext.sequences[0].control[1].a_h);

  std::istringstream ragged("seq_id,minute,t_obs,t_out,a_h,a_vent,a_ac\n0,0,290,280,0,1\n");
  CHECK_THROWS_AS(read_csv(ragged), ValidationError);
  std::istringstream nonfinite("seq_id,minute,t_obs,t_out,a_h,a_vent,a_ac\n0,0,nan,280,0,1,0\n");
  CHECK_THROWS_AS(read_csv(nonfinite), ValidationError);
  std::istringstream gap("seq_id,minute,t_obs,t_out,a_h,a_vent,a_ac\n0,0,290,280,0,1,0\n0,2,290,280,0,1,0\n");
  CHECK_THROWS_AS(read_csv(gap), ValidationError);
}
