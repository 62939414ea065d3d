#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dvfinv/error.hpp"
#include "dvfinv/metrics.hpp"
#include "dvfinv/solver.hpp"
#include "dvfinv/synth.hpp"

using namespace dvfinv;

namespace {

GridGeometry small2() { return GridGeometry::make(2, {24, 20, 1}, {0.5, 0.5, 1.0}, {-6.0, -5.0, 0.0}); }

double max_diff(const VectorField& a, const VectorField& b, const DomainMask& d) {
  double w = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l)
    if (d.inside[l])
      for (int c = 0; c < a.geometry.dimension; ++c) w = std::max(w, std::abs(a.comp[c][l] - b.comp[c][l]));
  return w;
}

}  // namespace

TEST_CASE("residual of translations") {
  const auto g = small2();
  const GeneratedDvf t = generate({Translation{{1.0, -0.5, 0.0}}, g});
  const DomainMask all(g, true);
  const ResidualField zero = residual_v(t.forward, VectorField(g), all);
  for (std::size_t l = 0; l < g.size(); ++l) {
    CHECK(zero.valid.inside[l]);
    CHECK(zero.r.at(l) == t.forward.at(l));
  }
  const DomainMask dom = valid_domain(t.forward);
  const ResidualField exact = residual_v(t.forward, t.inverse, dom);
  for (std::size_t l = 0; l < g.size(); ++l)
    if (dom.inside[l]) CHECK(std::hypot(exact.r.comp[0][l], exact.r.comp[1][l]) == 0.0);
}

TEST_CASE("residual of the analytic pair shrinks with the interpolation error") {
  // Multilinear interpolation error is second order in the spacing.
  std::vector<double> p90;
  for (double h : {0.1, 0.05}) {
    const GeneratedDvf ap = generate({AppendixRadial{0.5, 8}, appendix_geometry(h, 8.0)});
    const DomainMask dom = centered_box(ap.forward.geometry, 4.0);
    const ResidualField r = residual_v(ap.forward, ap.inverse, dom);
    CHECK(r.valid.count() == dom.count());
    std::vector<double> mags;
    for (std::size_t l = 0; l < r.r.size(); ++l)
      if (r.valid.inside[l]) mags.push_back(std::hypot(r.r.comp[0][l], r.r.comp[1][l]));
    std::sort(mags.begin(), mags.end());
    p90.push_back(mags[mags.size() * 9 / 10]);
  }
  CHECK(p90[0] / p90[1] == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("iterate_step for classical control values") {
  const auto g = small2();
  VectorField v(g), r(g);
  for (std::size_t l = 0; l < g.size(); ++l) {
    v.set(l, {0.1 * l, -0.2, 0.0});
    r.set(l, {1.0, 0.5 * l, 0.0});
  }
  DomainMask all(g, true);
  const VectorField chen = iterate_step(v, r, ScalarField(g, 0.0), all);
  const VectorField half = iterate_step(v, r, ScalarField(g, 0.5), all);
  const VectorField stall = iterate_step(v, r, ScalarField(g, 1.0), all);
  for (std::size_t l = 0; l < g.size(); ++l)
    for (int c = 0; c < 2; ++c) {
      CHECK(chen.comp[c][l] == doctest::Approx(v.comp[c][l] - r.comp[c][l]));
      CHECK(half.comp[c][l] == doctest::Approx(v.comp[c][l] - 0.5 * r.comp[c][l]));
      CHECK(stall.comp[c][l] == v.comp[c][l]);
    }
  all.inside[3] = 0;
  CHECK(iterate_step(v, r, ScalarField(g, 0.0), all).at(3) == v.at(3));
}

TEST_CASE("translations invert in one step") {
  const auto g = GridGeometry::make(3, {12, 10, 9}, {1, 1, 1}, {0, 0, 0});
  const GeneratedDvf t = generate({Translation{{2.0, -1.5, 0.75}}, g});
  InversionConfig cfg;
  cfg.scheme = ConstantControl{0.0};
  cfg.init = InitKind::Zero;
  cfg.max_steps = 1;
  const InversionRun run = invert(t.forward, cfg);
  CHECK(max_diff(run.estimate, t.inverse, run.domain) == 0.0);
  CHECK(run.steps.size() == 1);
  CHECK(run.steps[0].mu == 0.0);
  CHECK(run.steps[0].residual.values.back() == 0.0);
}

TEST_CASE("linear fields converge under every scheme") {
  const auto g = small2();
  Mat3 a{};
  a[0][0] = 0.3;
  a[0][1] = 0.1;
  a[1][0] = -0.05;
  a[1][1] = -0.2;
  const GeneratedDvf lin = generate({LinearMap{a}, g});
  const SpectralMaps maps = characterize(lin.forward, valid_domain(lin.forward));
  const MuMap mm = build_mu_map(lin.forward, maps);
  const std::vector<ControlScheme> schemes = {ConstantControl{0.0},       ConstantControl{0.5},
                                              AlternatingControl{0.0, 0.3}, MidRangeControl{1.0},
                                              VariantControl{mm.mu},        HybridControl{2, mm.mu}};
  for (const auto& s : schemes) {
    InversionConfig cfg;
    cfg.scheme = s;
    cfg.max_steps = 25;
    const InversionRun run = invert(lin.forward, cfg);
    CAPTURE(describe(s));
    CHECK(max_diff(run.estimate, lin.inverse, run.domain) < 1e-6);
    CHECK(run.steps.size() == 25);
  }
}

TEST_CASE("tolerance stops early and marks converged voxels") {
  const auto g = small2();
  Mat3 a{};
  a[0][0] = 0.2;
  a[1][1] = 0.2;
  const GeneratedDvf lin = generate({LinearMap{a}, g});
  InversionConfig cfg;
  cfg.scheme = ConstantControl{0.0};
  cfg.max_steps = 50;
  cfg.residual_tolerance = 1e-8;
  const InversionRun run = invert(lin.forward, cfg);
  CHECK(run.steps.size() < 50);
  std::size_t converged = 0;
  for (auto s : run.status) converged += s == VoxelStatus::Converged;
  CHECK(converged > run.domain.count() / 2);
}

TEST_CASE("step callback, alternating order and custom init") {
  const auto g = small2();
  const GeneratedDvf t = generate({Translation{{0.4, 0.0, 0.0}}, g});
  InversionConfig cfg;
  cfg.scheme = AlternatingControl{0.1, 0.6};
  cfg.max_steps = 4;
  std::vector<int> seen;
  cfg.on_step = [&](int k, const VectorField&) { seen.push_back(k); };
  const InversionRun run = invert(t.forward, cfg);
  CHECK(seen == std::vector<int>{1, 2, 3, 4});
  CHECK(*run.steps[0].mu == 0.1);
  CHECK(*run.steps[1].mu == 0.6);
  cfg.odd_first = false;
  CHECK(*invert(t.forward, cfg).steps[0].mu == 0.6);

  InversionConfig custom;
  custom.init = InitKind::Custom;
  custom.max_steps = 1;
  CHECK_THROWS_AS(invert(t.forward, custom), Error);
  custom.initial_estimate = t.inverse;
  const InversionRun exact = invert(t.forward, custom);
  CHECK(max_diff(exact.estimate, t.inverse, exact.domain) < 1e-15);
}

TEST_CASE("argument validation") {
  const auto g = small2();
  const GeneratedDvf t = generate({Translation{{0.4, 0.0, 0.0}}, g});
  InversionConfig cfg;
  cfg.max_steps = 0;
  CHECK_THROWS_AS(invert(t.forward, cfg), Error);
  cfg.max_steps = 1;
  cfg.scheme = ConstantControl{1.5};
  CHECK_THROWS_AS(invert(t.forward, cfg), Error);
  cfg.scheme = ConstantControl{0.0};
  cfg.domain = DomainMask(g, false);
  CHECK_THROWS_AS(invert(t.forward, cfg), Error);
  cfg.domain = DomainMask(GridGeometry::make(2, {5, 5, 1}, {1, 1, 1}, {0, 0, 0}), true);
  CHECK_THROWS_AS(invert(t.forward, cfg), Error);
}

TEST_CASE("out-of-bounds policies") {
  const auto g = small2();
  const GeneratedDvf t = generate({Translation{{0.4, 0.0, 0.0}}, g});
  // Wild initial estimate pushes every displaced point out of the grid.
  VectorField wild(g);
  for (std::size_t l = 0; l < g.size(); ++l) wild.set(l, {100.0, 0.0, 0.0});
  InversionConfig cfg;
  cfg.init = InitKind::Custom;
  cfg.initial_estimate = wild;
  cfg.max_steps = 2;
  const InversionRun frozen = invert(t.forward, cfg);
  for (std::size_t l = 0; l < g.size(); ++l)
    if (frozen.domain.inside[l]) {
      CHECK(frozen.status[l] == VoxelStatus::FrozenOob);
      CHECK(frozen.estimate.at(l) == wild.at(l));
    }
  cfg.oob = OobPolicy::Clamp;
  const InversionRun clamped = invert(t.forward, cfg);
  CHECK(clamped.steps.back().frozen == 0);
  for (std::size_t l = 0; l < g.size(); ++l)
    if (clamped.domain.inside[l]) CHECK(std::abs(clamped.estimate.comp[0][l] + 0.4) < 1e-12);
}

TEST_CASE("scaled98 init uses the mid-range value of the control map") {
  const auto g = small2();
  Mat3 a{};
  a[0][0] = a[1][1] = 1.0;  // gamma = 0.5 everywhere, mu_m = 0.5
  const GeneratedDvf s = generate({LinearMap{a}, g});
  InversionConfig cfg;
  cfg.scheme = ConstantControl{0.0};
  cfg.max_steps = 1;
  const InversionRun run = invert(s.forward, cfg);
  CHECK(run.initial_mu == doctest::Approx(0.5));
  // v0 = (mu - 1) u = -u/2, the exact inverse of u = x.
  CHECK(run.initial_residual.values.back() == doctest::Approx(0.0).epsilon(1e-12));
}
