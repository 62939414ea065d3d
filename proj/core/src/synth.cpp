#include "dvfinv/synth.hpp"

#include <cmath>
#include <numbers>

#include "dvfinv/error.hpp"
#include "dvfinv/parallel.hpp"

namespace dvfinv {
namespace {

Vec3 apply(const Mat3& m, const Vec3& x, int dim) {
  Vec3 y{0.0, 0.0, 0.0};
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) y[i] += m[i][j] * x[j];
  return y;
}

Mat3 inverse(const Mat3& m, int dim) {
  const double det = determinant(m, dim);
  Mat3 inv{};
  if (dim == 2) {
    inv[0][0] = m[1][1] / det;
    inv[0][1] = -m[0][1] / det;
    inv[1][0] = -m[1][0] / det;
    inv[1][1] = m[0][0] / det;
    return inv;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
      const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv[i][j] = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / det;
    }
  return inv;
}

Mat3 minus_identity(Mat3 m, int dim) {
  for (int a = 0; a < dim; ++a) m[a][a] -= 1.0;
  return m;
}

Mat3 rotation(double angle) {
  Mat3 r = identity3();
  r[0][0] = std::cos(angle);
  r[0][1] = -std::sin(angle);
  r[1][0] = std::sin(angle);
  r[1][1] = std::cos(angle);
  return r;
}

bool at_origin(const Vec3& x) { return x[0] == 0.0 && x[1] == 0.0; }

}  // namespace

void validate(const DvfFamily& family, int dimension) {
  if (dimension != 2 && dimension != 3) throw Error(Errc::InvalidSpec, "dimension must be 2 or 3");
  if (const auto* a = std::get_if<AppendixRadial>(&family)) {
    if (dimension != 2) throw Error(Errc::InvalidSpec, "appendix radial field is two-dimensional");
    if (!(a->b > 0.0 && a->b < 1.0)) throw Error(Errc::InvalidSpec, "appendix stretch b must lie in (0, 1)");
    if (a->m < 1) throw Error(Errc::InvalidSpec, "appendix oscillation m must be a positive integer");
  } else if (const auto* t = std::get_if<Translation>(&family)) {
    for (double c : t->shift)
      if (!std::isfinite(c)) throw Error(Errc::InvalidSpec, "translation must be finite");
  } else if (const auto* l = std::get_if<LinearMap>(&family)) {
    Mat3 f = l->a;
    for (int a = 0; a < dimension; ++a) f[a][a] += 1.0;
    const double det = determinant(f, dimension);
    if (!std::isfinite(det) || std::abs(det) < 1e-12)
      throw Error(Errc::InvalidSpec, "linear map requires I + A nonsingular");
  } else if (const auto* r = std::get_if<PlanarRotation>(&family)) {
    if (!std::isfinite(r->angle)) throw Error(Errc::InvalidSpec, "rotation angle must be finite");
  }
}

AnalyticDvf closed_form(const DvfFamily& family, int dim) {
  validate(family, dim);
  AnalyticDvf out;
  if (const auto* ar = std::get_if<AppendixRadial>(&family)) {
    const double b = ar->b;
    const double m = ar->m;
    out.forward = [b, m](const Vec3& x) -> Vec3 {
      if (at_origin(x)) return {0.0, 0.0, 0.0};
      const double s = 1.0 / (1.0 + b * std::cos(m * std::atan2(x[1], x[0]))) - 1.0;
      return {s * x[0], s * x[1], 0.0};
    };
    out.inverse = [b, m](const Vec3& x) -> Vec3 {
      if (at_origin(x)) return {0.0, 0.0, 0.0};
      const double s = b * std::cos(m * std::atan2(x[1], x[0]));
      return {s * x[0], s * x[1], 0.0};
    };
    // J_u = (phi - 1) I + phi'(theta) x grad(theta)^T, phi = 1 / (1 + b cos(m theta)).
    out.forward_jacobian = [b, m](const Vec3& x) -> Mat3 {
      Mat3 j{};
      if (at_origin(x)) return j;
      const double theta = std::atan2(x[1], x[0]);
      const double denom = 1.0 + b * std::cos(m * theta);
      const double phi = 1.0 / denom;
      const double dphi = b * m * std::sin(m * theta) / (denom * denom);
      const double r2 = x[0] * x[0] + x[1] * x[1];
      const double grad[2] = {-x[1] / r2, x[0] / r2};
      for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 2; ++k) j[i][k] = (i == k ? phi - 1.0 : 0.0) + dphi * x[i] * grad[k];
      return j;
    };
  } else if (const auto* t = std::get_if<Translation>(&family)) {
    Vec3 c = t->shift;
    if (dim == 2) c[2] = 0.0;
    out.forward = [c](const Vec3&) { return c; };
    out.inverse = [c](const Vec3&) { return Vec3{-c[0], -c[1], -c[2]}; };
    out.forward_jacobian = [](const Vec3&) { return Mat3{}; };
  } else {
    Mat3 fwd, inv;
    if (const auto* l = std::get_if<LinearMap>(&family)) {
      fwd = l->a;
      Mat3 f = fwd;
      for (int a = 0; a < dim; ++a) f[a][a] += 1.0;
      inv = minus_identity(inverse(f, dim), dim);
    } else {
      const Mat3 r = rotation(std::get<PlanarRotation>(family).angle);
      Mat3 rt{};
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) rt[i][k] = r[k][i];
      fwd = minus_identity(r, dim);
      inv = minus_identity(rt, dim);
    }
    if (dim == 2)
      for (int a = 0; a < 3; ++a) {
        fwd[2][a] = fwd[a][2] = 0.0;
        inv[2][a] = inv[a][2] = 0.0;
      }
    out.forward = [fwd, dim](const Vec3& x) { return apply(fwd, x, dim); };
    out.inverse = [inv, dim](const Vec3& x) { return apply(inv, x, dim); };
    out.forward_jacobian = [fwd](const Vec3&) { return fwd; };
  }
  return out;
}

JacobianProvider GeneratedDvf::jacobian() const {
  const GridGeometry g = forward.geometry;
  const auto jac = analytic.forward_jacobian;
  return [g, jac](const Index3& i) { return jac(g.point(i)); };
}

GeneratedDvf generate(const AnalyticDvfSpec& spec) {
  const GridGeometry& g = spec.geometry;
  GeneratedDvf out{VectorField(g), VectorField(g), DomainMask(g, false),
                   closed_form(spec.family, g.dimension)};
  const bool radial = std::holds_alternative<AppendixRadial>(spec.family);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t l = b; l < e; ++l) {
      const Vec3 x = g.point(l);
      out.forward.set(l, out.analytic.forward(x));
      out.inverse.set(l, out.analytic.inverse(x));
      if (radial && at_origin(x)) out.singular.inside[l] = 1;
    }
  });
  return out;
}

GridGeometry appendix_geometry(double spacing, double half_width) {
  if (!(spacing > 0.0) || !(half_width > 0.0))
    throw Error(Errc::InvalidSpec, "appendix grid needs positive spacing and half width");
  const int n = static_cast<int>(std::lround(2.0 * half_width / spacing)) + 1;
  return GridGeometry::make(2, {n, n, 1}, {spacing, spacing, 1.0}, {-half_width, -half_width, 0.0});
}

DomainMask centered_box(const GridGeometry& g, double half_width) {
  return box_domain(g, {-half_width, -half_width, -half_width}, {half_width, half_width, half_width});
}

ScalarField ring_image(const GridGeometry& g, int rings) {
  if (rings < 0) throw Error(Errc::InvalidArgument, "ring count must be >= 0");
  double reach = 0.0;
  for (int a = 0; a < g.dimension; ++a) {
    const double far = std::max(std::abs(g.lower()[a]), std::abs(g.upper()[a]));
    reach += far * far;
  }
  reach = std::sqrt(reach);
  ScalarField img(g, 0.0, true);
  for (std::size_t l = 0; l < g.size(); ++l) {
    const Vec3 x = g.point(l);
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    img.values[l] = 0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * rings * r / reach);
  }
  return img;
}

ScalarField warp(const ScalarField& image, const VectorField& d) {
  if (!(image.geometry == d.geometry)) throw Error(Errc::GeometryMismatch, "warp: geometries differ");
  const GridGeometry& g = image.geometry;
  ScalarField out(g, 0.0, false);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t l = b; l < e; ++l) {
      Vec3 p = g.point(l);
      const Vec3 v = d.at(l);
      for (int a = 0; a < g.dimension; ++a) p[a] += v[a];
      if (auto s = try_sample(image, p)) {
        out.values[l] = *s;
        out.valid[l] = 1;
      }
    }
  });
  return out;
}

}  // namespace dvfinv
