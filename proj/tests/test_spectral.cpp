#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dvfinv/error.hpp"
#include "dvfinv/spectral.hpp"
#include "dvfinv/synth.hpp"
#include "oracles.hpp"

using namespace dvfinv;

namespace {

bool matches(const Spectrum& s, std::vector<std::complex<double>> expected, double tol) {
  if (static_cast<int>(expected.size()) != s.count) return false;
  for (int i = 0; i < s.count; ++i) {
    auto it = std::min_element(expected.begin(), expected.end(), [&](auto a, auto b) {
      return std::abs(a - s.values[i]) < std::abs(b - s.values[i]);
    });
    const double scale = std::max(1.0, std::abs(*it));
    if (std::abs(*it - s.values[i]) > tol * scale) return false;
    expected.erase(it);
  }
  return true;
}

}  // namespace

TEST_CASE("eigenvalues of identity and an embedded rotation") {
  CHECK(matches(eigenvalues(identity3(), 2), {1.0, 1.0}, 1e-15));
  CHECK(matches(eigenvalues(identity3(), 3), {1.0, 1.0, 1.0}, 1e-15));
  const double t = std::numbers::pi / 3.0;
  Mat3 r = identity3();
  r[0][0] = std::cos(t);
  r[0][1] = -std::sin(t);
  r[1][0] = std::sin(t);
  r[1][1] = std::cos(t);
  const Spectrum s = eigenvalues(r, 3);
  CHECK(s.complex_pair);
  CHECK(matches(s, {std::polar(1.0, t), std::polar(1.0, -t), 1.0}, 1e-14));
}

TEST_CASE("eigenvalues agree with an independent solver on random matrices") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> d(0.0, 1.0);
  int complex_seen = 0;
  for (int k = 0; k < 2000; ++k) {
    const int dim = 2 + k % 2;
    Mat3 m{};
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m[i][j] = d(rng);
    const Spectrum s = eigenvalues(m, dim);
    complex_seen += s.complex_pair;
    REQUIRE(matches(s, oracle::eigenvalues(oracle::to_eigen(m, dim)), 1e-10));
  }
  CHECK(complex_seen > 100);
}

TEST_CASE("repeated and defective eigenvalues") {
  Mat3 jordan{};
  jordan[0][0] = jordan[1][1] = 2.0;
  jordan[0][1] = 5.0;
  CHECK(matches(eigenvalues(jordan, 2), {2.0, 2.0}, 1e-12));
  Mat3 j3 = jordan;
  j3[2][2] = 2.0;
  j3[1][2] = 1.0;
  CHECK(matches(eigenvalues(j3, 3), {2.0, 2.0, 2.0}, 1e-5));
}

TEST_CASE("gamma of spectra") {
  Spectrum id = eigenvalues(identity3(), 3);
  CHECK(*gamma_of(id) == doctest::Approx(1.0));

  const double t = std::numbers::pi / 3.0;
  Spectrum rot;
  rot.count = 3;
  rot.values = {std::polar(1.0, -t), std::polar(1.0, t), Complex{1.0, 0.0}};
  rot.complex_pair = true;
  CHECK(*gamma_of(rot) == doctest::Approx(0.5));

  Spectrum singular;
  singular.count = 3;
  singular.values = {Complex{0.0, 0.0}, Complex{1.0, 0.0}, Complex{1.0, 0.0}};
  CHECK_FALSE(gamma_of(singular).has_value());

  Spectrum negative;
  negative.count = 2;
  negative.values = {Complex{-0.5, 0.0}, Complex{2.0, 0.0}};
  CHECK_FALSE(gamma_of(negative).has_value());
}

TEST_CASE("finite-difference Jacobian is exact for affine fields") {
  const auto g = GridGeometry::make(3, {6, 7, 5}, {0.5, 1.0, 2.0}, {0.0, 0.0, 0.0});
  const Mat3 a{{{0.1, 0.2, -0.3}, {0.0, -0.4, 0.5}, {0.25, 0.0, 0.1}}};
  const GeneratedDvf dvf = generate({LinearMap{a}, g});
  for (std::size_t l = 0; l < g.size(); ++l) {
    const JacobianSample s = displacement_jacobian(dvf.forward, g.index(l));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) CHECK(s.ju[i][j] == doctest::Approx(a[i][j]).epsilon(1e-12));
  }
  CHECK_THROWS_AS(displacement_jacobian(dvf.forward, {6, 0, 0}), Error);
  CHECK(displacement_jacobian(dvf.forward, {0, 3, 2}).boundary);
  CHECK_FALSE(displacement_jacobian(dvf.forward, {2, 3, 2}).boundary);
}

TEST_CASE("finite-difference Jacobian of the appendix field converges to the symbolic one") {
  // Oracle: J_u = (phi - 1) I + phi' x grad(theta)^T, differentiated by hand.
  auto symbolic = [](double b, double m, double x, double y) {
    const double th = std::atan2(y, x), r2 = x * x + y * y;
    const double den = 1.0 + b * std::cos(m * th);
    const double dphi = b * m * std::sin(m * th) / (den * den);
    return std::array<double, 4>{1.0 / den - 1.0 - dphi * x * y / r2, dphi * x * x / r2, -dphi * y * y / r2,
                                 1.0 / den - 1.0 + dphi * x * y / r2};
  };
  double prev = 0.0;
  for (double h : {0.04, 0.02}) {
    const GeneratedDvf dvf = generate({AppendixRadial{0.8, 8}, appendix_geometry(h, 6.0)});
    const auto& g = dvf.forward.geometry;
    const Vec3 p{2.3, 1.1, 0.0};
    const Index3 i = g.nearest(p);
    const Vec3 q = g.point(i);
    const Mat3 fd = displacement_jacobian(dvf.forward, i).ju;
    const auto s = symbolic(0.8, 8.0, q[0], q[1]);
    const double err = std::max({std::abs(fd[0][0] - s[0]), std::abs(fd[0][1] - s[1]), std::abs(fd[1][0] - s[2]),
                                 std::abs(fd[1][1] - s[3])});
    // On grid samples the stencil is the closed-form central difference.
    const AnalyticDvf f = closed_form(AppendixRadial{0.8, 8}, 2);
    for (int c = 0; c < 2; ++c) {
      Vec3 lo = q, hi = q;
      lo[c] -= h;
      hi[c] += h;
      for (int r = 0; r < 2; ++r)
        CHECK(fd[r][c] == doctest::Approx((f.forward(hi)[r] - f.forward(lo)[r]) / (2 * h)).epsilon(1e-9));
    }
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.25));
    prev = err;
  }
}

TEST_CASE("characterize translational and scaling fields") {
  const auto g = GridGeometry::make(3, {8, 8, 8}, {1, 1, 1}, {-3.5, -3.5, -3.5});
  const GeneratedDvf t = generate({Translation{{1.0, -2.0, 0.5}}, g});
  const DomainMask all(g, true);
  const SpectralMaps mt = characterize(t.forward, all);
  for (std::size_t l = 0; l < g.size(); ++l) {
    CHECK(mt.det_jf.values[l] == doctest::Approx(1.0));
    CHECK(mt.rho_ju.values[l] == doctest::Approx(0.0));
    CHECK(mt.control_index.values[l] == doctest::Approx(-1.0));
  }
  CHECK(mt.complex_fraction == 0.0);

  Mat3 a{};
  for (int i = 0; i < 3; ++i) a[i][i] = 1.0;  // u = x
  const SpectralMaps ms = characterize(generate({LinearMap{a}, g}).forward, all);
  for (std::size_t l = 0; l < g.size(); ++l) {
    CHECK(ms.rho_ju.values[l] == doctest::Approx(1.0));
    CHECK(ms.control_index.values[l] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ms.det_jf.values[l] == doctest::Approx(8.0));
  }
}

TEST_CASE("appendix control index forms 8 ridges") {
  const GeneratedDvf dvf = generate({AppendixRadial{0.8, 8}, appendix_geometry(0.1, 10.0)});
  const auto& g = dvf.forward.geometry;
  const SpectralMaps maps = characterize(dvf.forward, centered_box(g, 8.0));
  // Walk a circle of radius 5 and count transitions into index >= 0.
  int entries = 0;
  bool prev = false;
  const int n = 3600;
  for (int k = 0; k <= n; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n;
    const std::size_t l = g.linear(g.nearest({5.0 * std::cos(t), 5.0 * std::sin(t), 0.0}));
    const bool on = maps.control_index.valid[l] && maps.control_index.values[l] >= 0.0;
    if (k > 0 && on && !prev) ++entries;
    prev = on;
  }
  CHECK(entries == 8);
  CHECK(maps.complex_fraction > 0.0);
}
