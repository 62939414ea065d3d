#pragma once

#include <functional>
#include <variant>

#include "dvfinv/grid.hpp"
#include "dvfinv/spectral.hpp"

namespace dvfinv {

// u(x) = (1 / (1 + b cos(m theta(x))) - 1) x with inverse v(x) = b cos(m theta(x)) x.
// Two-dimensional only; theta is undefined at x = 0 where both fields are set to 0.
struct AppendixRadial {
  double b = 0.8;
  int m = 8;
};
struct Translation {
  Vec3 shift{0.0, 0.0, 0.0};
};
// u(x) = A x; requires I + A nonsingular.
struct LinearMap {
  Mat3 a{};
};
// Rotation of the x-y plane by `angle` radians about the physical origin.
struct PlanarRotation {
  double angle = 0.0;
};

using DvfFamily = std::variant<AppendixRadial, Translation, LinearMap, PlanarRotation>;

struct AnalyticDvfSpec {
  DvfFamily family;
  GridGeometry geometry;
};

// Closed-form forward/inverse displacements and forward displacement Jacobian
// at arbitrary physical points.
struct AnalyticDvf {
  std::function<Vec3(const Vec3&)> forward;
  std::function<Vec3(const Vec3&)> inverse;
  std::function<Mat3(const Vec3&)> forward_jacobian;
};

// Throws InvalidSpec when the family parameters are out of range.
void validate(const DvfFamily& family, int dimension);
AnalyticDvf closed_form(const DvfFamily& family, int dimension);

struct GeneratedDvf {
  VectorField forward;
  VectorField inverse;
  DomainMask singular;  // grid points where the closed form is undefined
  AnalyticDvf analytic;

  // Closed-form displacement Jacobian sampled at grid indices.
  JacobianProvider jacobian() const;
};

GeneratedDvf generate(const AnalyticDvfSpec& spec);

// [-half_width, half_width]^2 sampled at `spacing`.
GridGeometry appendix_geometry(double spacing = 0.05, double half_width = 34.0);
// Sub-grid [-half_width, half_width]^dim of g.
DomainMask centered_box(const GridGeometry& g, double half_width = 17.0);

// Concentric sinusoidal rings about the physical origin, `rings` periods out
// to the farthest grid corner. Zero rings gives a constant image.
ScalarField ring_image(const GridGeometry& g, int rings);
// out(x) = image(x + d(x)); invalid where x + d(x) leaves the grid.
ScalarField warp(const ScalarField& image, const VectorField& d);

}  // namespace dvfinv
