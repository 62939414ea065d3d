#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dvfinv/error.hpp"
#include "dvfinv/synth.hpp"

using namespace dvfinv;

TEST_CASE("appendix closed forms are mutual inverses off the axis origin") {
  for (double b : {0.3, 0.5, 0.8}) {
    const AnalyticDvf f = closed_form(AppendixRadial{b, 8}, 2);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> d(-20.0, 20.0);
    for (int k = 0; k < 500; ++k) {
      const Vec3 x{d(rng), d(rng), 0.0};
      const Vec3 v = f.inverse(x);
      const Vec3 u = f.forward({x[0] + v[0], x[1] + v[1], 0.0});
      CHECK(std::abs(v[0] + u[0]) < 1e-12 * std::max(1.0, std::hypot(x[0], x[1])));
      CHECK(std::abs(v[1] + u[1]) < 1e-12 * std::max(1.0, std::hypot(x[0], x[1])));
    }
  }
}

TEST_CASE("analytic Jacobian matches central differences of the closed form") {
  const AnalyticDvf f = closed_form(AppendixRadial{0.8, 8}, 2);
  const double h = 1e-6;
  for (const Vec3 x : {Vec3{3.0, 1.0, 0.0}, Vec3{-2.0, 5.0, 0.0}, Vec3{0.7, -0.2, 0.0}}) {
    const Mat3 j = f.forward_jacobian(x);
    for (int c = 0; c < 2; ++c) {
      Vec3 lo = x, hi = x;
      lo[c] -= h;
      hi[c] += h;
      const Vec3 a = f.forward(lo), b = f.forward(hi);
      for (int r = 0; r < 2; ++r) CHECK(j[r][c] == doctest::Approx((b[r] - a[r]) / (2 * h)).epsilon(1e-6));
    }
  }
}

TEST_CASE("generated grids, singular flag and translation") {
  const GridGeometry g = appendix_geometry(0.05);
  CHECK(g.extent[0] == 1361);
  CHECK(g.lower()[0] == -34.0);
  CHECK(g.upper()[1] == doctest::Approx(34.0));
  CHECK(centered_box(g, 17.0).count() == 681u * 681u);

  const GeneratedDvf ap = generate({AppendixRadial{0.8, 8}, appendix_geometry(0.5, 4.0)});
  CHECK(ap.singular.count() == 1);
  const std::size_t origin = ap.forward.geometry.linear(ap.forward.geometry.nearest({0, 0, 0}));
  CHECK(ap.singular.inside[origin]);
  CHECK(ap.forward.at(origin) == Vec3{0, 0, 0});

  const auto g3 = GridGeometry::make(3, {4, 4, 4}, {1, 1, 1}, {0, 0, 0});
  const GeneratedDvf t = generate({Translation{{3.0, 0.0, -1.0}}, g3});
  for (std::size_t l = 0; l < g3.size(); ++l) {
    CHECK(t.forward.at(l) == Vec3{3.0, 0.0, -1.0});
    CHECK(t.inverse.at(l) == Vec3{-3.0, -0.0, 1.0});
  }
  CHECK(t.singular.count() == 0);
}

TEST_CASE("linear and rotation families invert exactly") {
  const auto g = GridGeometry::make(3, {5, 5, 5}, {1, 1, 1}, {-2, -2, -2});
  const Mat3 a{{{0.2, 0.1, 0.0}, {-0.3, 0.4, 0.1}, {0.0, 0.2, -0.1}}};
  for (const DvfFamily fam : {DvfFamily{LinearMap{a}}, DvfFamily{PlanarRotation{0.7}}}) {
    const AnalyticDvf f = closed_form(fam, 3);
    const Vec3 x{0.3, -1.2, 2.0};
    const Vec3 v = f.inverse(x);
    const Vec3 u = f.forward({x[0] + v[0], x[1] + v[1], x[2] + v[2]});
    for (int i = 0; i < 3; ++i) CHECK(v[i] + u[i] == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(validate(AppendixRadial{1.0, 8}, 2), Error);
  CHECK_THROWS_AS(validate(AppendixRadial{0.0, 8}, 2), Error);
  CHECK_THROWS_AS(validate(AppendixRadial{0.5, 0}, 2), Error);
  CHECK_THROWS_AS(validate(AppendixRadial{0.5, 8}, 3), Error);
  Mat3 sing{};
  sing[0][0] = -1.0;
  CHECK_THROWS_AS(validate(LinearMap{sing}, 2), Error);
  try {
    validate(AppendixRadial{1.5, 8}, 2);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidSpec);
  }
}

TEST_CASE("ring image symmetry and warping") {
  const auto g = GridGeometry::make(2, {81, 81, 1}, {0.25, 0.25, 1}, {-10, -10, 0});
  const ScalarField flat = ring_image(g, 0);
  for (double v : flat.values) CHECK(v == 1.0);

  const ScalarField rings = ring_image(g, 6);
  // Points of equal radius on the axes and diagonal-free lattice symmetric positions.
  const std::size_t a = g.linear(g.nearest({5.0, 0.0, 0.0})), b = g.linear(g.nearest({0.0, -5.0, 0.0}));
  const std::size_t c = g.linear(g.nearest({3.0, 4.0, 0.0}));
  CHECK(rings.values[a] == doctest::Approx(rings.values[b]));
  CHECK(rings.values[a] == doctest::Approx(rings.values[c]));

  const GeneratedDvf ap = generate({AppendixRadial{0.8, 8}, g});
  const ScalarField w = warp(rings, ap.forward);
  // Quarter-turn symmetry of the warped image (a multiple of 2 pi / 8).
  const int n = g.extent[0], mid = (n - 1) / 2;
  for (int i = 0; i < n; i += 3)
    for (int j = 0; j < n; j += 3) {
      const std::size_t p = g.linear({i, j, 0}), q = g.linear({mid - (j - mid), mid + (i - mid), 0});
      CHECK(w.valid[p] == w.valid[q]);
      if (w.valid[p]) CHECK(w.values[p] == doctest::Approx(w.values[q]).epsilon(1e-9));
    }
}
