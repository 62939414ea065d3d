#include "dvfinv/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dvfinv/error.hpp"
#include "dvfinv/parallel.hpp"

namespace dvfinv {
namespace {

void sort_spectrum(Spectrum& s) {
  std::sort(s.values.begin(), s.values.begin() + s.count, [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
}

// Characteristic polynomial p(x) = x^3 - c2 x^2 + c1 x - c0.
double cubic_value(double c2, double c1, double c0, double x) {
  return ((x - c2) * x + c1) * x - c0;
}

double polish_root(double c2, double c1, double c0, double x) {
  for (int it = 0; it < 3; ++it) {
    const double f = cubic_value(c2, c1, c0, x);
    const double df = (3.0 * x - 2.0 * c2) * x + c1;
    if (df == 0.0) break;
    const double next = x - f / df;
    if (!(std::abs(cubic_value(c2, c1, c0, next)) < std::abs(f))) break;
    x = next;
  }
  return x;
}

Spectrum eigen2(const Mat3& m) {
  Spectrum s;
  s.count = 2;
  const double tr = m[0][0] + m[1][1];
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const double disc = tr * tr - 4.0 * det;
  const double scale = tr * tr + 4.0 * std::abs(det);
  if (disc < -kDiscriminantTolerance * scale) {
    const double im = 0.5 * std::sqrt(-disc);
    s.values[0] = {0.5 * tr, -im};
    s.values[1] = {0.5 * tr, im};
    s.complex_pair = true;
    return s;
  }
  const double root = std::sqrt(std::max(disc, 0.0));
  // Avoid cancellation: compute the larger-magnitude root first.
  const double big = 0.5 * (tr + std::copysign(root, tr));
  const double small = big != 0.0 ? det / big : 0.5 * (tr - std::copysign(root, tr));
  s.values[0] = {big, 0.0};
  s.values[1] = {small, 0.0};
  sort_spectrum(s);
  return s;
}

Spectrum eigen3(const Mat3& m) {
  Spectrum s;
  s.count = 3;
  const double c2 = m[0][0] + m[1][1] + m[2][2];
  const double c1 = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) +
                    (m[0][0] * m[2][2] - m[0][2] * m[2][0]) +
                    (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
  const double c0 = determinant(m, 3);

  // Depressed cubic t^3 + p t + q with x = t + c2 / 3.
  const double shift = c2 / 3.0;
  const double p = c1 - c2 * c2 / 3.0;
  const double q = -2.0 * c2 * c2 * c2 / 27.0 + c2 * c1 / 3.0 - c0;
  const double half_q = 0.5 * q;
  const double third_p = p / 3.0;
  const double disc = half_q * half_q + third_p * third_p * third_p;
  const double scale = half_q * half_q + std::abs(third_p * third_p * third_p);

  if (disc > kDiscriminantTolerance * scale) {
    // One real root (Cardano) and a conjugate pair from deflation.
    const double sq = std::sqrt(disc);
    const double w = std::cbrt(-half_q - std::copysign(sq, half_q));
    const double t = w != 0.0 ? w - third_p / w : 0.0;
    const double r = polish_root(c2, c1, c0, t + shift);
    // x^3 - c2 x^2 + c1 x - c0 = (x - r)(x^2 + B x + C)
    const double B = r - c2;
    const double C = c1 + r * B;
    const double re = -0.5 * B;
    const double im = 0.5 * std::sqrt(std::max(0.0, 4.0 * C - B * B));
    if (im == 0.0) {
      s.values = {Complex{r, 0.0}, Complex{re, 0.0}, Complex{re, 0.0}};
    } else {
      s.values = {Complex{r, 0.0}, Complex{re, -im}, Complex{re, im}};
      s.complex_pair = true;
    }
    sort_spectrum(s);
    return s;
  }

  // Three real roots (trigonometric form).
  std::array<double, 3> roots;
  if (third_p >= 0.0) {
    const double t = std::cbrt(-q);
    roots = {t + shift, t + shift, t + shift};
  } else {
    const double mag = 2.0 * std::sqrt(-third_p);
    double arg = (3.0 * q) / (2.0 * p) * std::sqrt(-3.0 / p);
    arg = std::clamp(arg, -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots[k] = mag * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) + shift;
  }
  for (int k = 0; k < 3; ++k) s.values[k] = {polish_root(c2, c1, c0, roots[k]), 0.0};
  sort_spectrum(s);
  return s;
}

template <class Provider>
SpectralMaps characterize_impl(const GridGeometry& g, const DomainMask& domain, Provider&& jac) {
  if (!(domain.geometry == g)) throw Error(Errc::GeometryMismatch, "domain geometry differs from field");
  if (domain.count() == 0) throw Error(Errc::EmptyDomain, "characterization domain is empty");

  SpectralMaps maps;
  maps.det_jf = ScalarField(g);
  maps.rho_ju = ScalarField(g);
  maps.control_index = ScalarField(g, 0.0, false);
  maps.gamma = ScalarField(g, 0.0, false);
  maps.controllable = DomainMask(g, false);
  maps.boundary = DomainMask(g, false);
  maps.domain = domain;

  std::vector<std::uint8_t> is_complex(g.size(), 0);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t l = b; l < e; ++l) {
      bool boundary = false;
      Mat3 ju = jac(g.index(l), boundary);
      Mat3 jf = ju;
      for (int a = 0; a < g.dimension; ++a) jf[a][a] += 1.0;
      const Spectrum s = eigenvalues(jf, g.dimension);
      maps.det_jf.values[l] = determinant(jf, g.dimension);
      maps.rho_ju.values[l] = displacement_spectral_radius(s);
      maps.boundary.inside[l] = boundary ? 1 : 0;
      is_complex[l] = s.complex_pair ? 1 : 0;
      if (auto gm = gamma_of(s)) {
        maps.gamma.values[l] = *gm;
        maps.gamma.valid[l] = 1;
        maps.control_index.values[l] = 1.0 - 2.0 * *gm;
        maps.control_index.valid[l] = 1;
        maps.controllable.inside[l] = 1;
      } else {
        maps.gamma.values[l] = std::numeric_limits<double>::quiet_NaN();
        maps.control_index.values[l] = std::numeric_limits<double>::quiet_NaN();
      }
    }
  });

  std::size_t in = 0, cplx = 0, unctl = 0;
  for (std::size_t l = 0; l < g.size(); ++l) {
    if (!domain.inside[l]) continue;
    ++in;
    cplx += is_complex[l];
    unctl += maps.controllable.inside[l] ? 0 : 1;
  }
  maps.complex_fraction = static_cast<double>(cplx) / static_cast<double>(in);
  maps.uncontrollable_fraction = static_cast<double>(unctl) / static_cast<double>(in);
  return maps;
}

}  // namespace

Mat3 identity3() {
  Mat3 m{};
  for (int a = 0; a < 3; ++a) m[a][a] = 1.0;
  return m;
}

double determinant(const Mat3& m, int dim) {
  if (dim == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Spectrum eigenvalues(const Mat3& m, int dim) {
  if (dim == 2) return eigen2(m);
  if (dim == 3) return eigen3(m);
  throw Error(Errc::InvalidArgument, "eigenvalues: dimension must be 2 or 3");
}

Mat3 JacobianSample::jf() const {
  Mat3 m = ju;
  for (int a = 0; a < dim; ++a) m[a][a] += 1.0;
  return m;
}

Mat3 displacement_jacobian_matrix(const VectorField& u, const Index3& x, bool* boundary) {
  const GridGeometry& g = u.geometry;
  Mat3 j{};
  bool on_face = false;
  for (int col = 0; col < g.dimension; ++col) {
    Index3 lo = x, hi = x;
    double width = 2.0 * g.spacing[col];
    if (x[col] == 0) {
      hi[col] += 1;
      width = g.spacing[col];
      on_face = true;
    } else if (x[col] == g.extent[col] - 1) {
      lo[col] -= 1;
      width = g.spacing[col];
      on_face = true;
    } else {
      lo[col] -= 1;
      hi[col] += 1;
    }
    const std::size_t l_lo = g.linear(lo), l_hi = g.linear(hi);
    for (int row = 0; row < g.dimension; ++row)
      j[row][col] = (u.comp[row][l_hi] - u.comp[row][l_lo]) / width;
  }
  if (boundary) *boundary = on_face;
  return j;
}

JacobianSample displacement_jacobian(const VectorField& u, const Index3& x) {
  const GridGeometry& g = u.geometry;
  for (int a = 0; a < 3; ++a)
    if (x[a] < 0 || x[a] >= g.extent[a])
      throw Error(Errc::IndexOutOfRange, "jacobian index outside the grid");
  JacobianSample s;
  s.dim = g.dimension;
  s.ju = displacement_jacobian_matrix(u, x, &s.boundary);
  s.spectrum = eigenvalues(s.jf(), s.dim);
  return s;
}

std::optional<double> gamma_of(const Spectrum& s) {
  double gamma = std::numeric_limits<double>::infinity();
  for (int i = 0; i < s.count; ++i) {
    const double mag = std::abs(s.values[i]);
    if (mag < kSingularTolerance) return std::nullopt;
    gamma = std::min(gamma, s.values[i].real() / (mag * mag));
  }
  if (!(gamma > 0.0)) return std::nullopt;
  return gamma;
}

double displacement_spectral_radius(const Spectrum& s) {
  double r = 0.0;
  for (int i = 0; i < s.count; ++i) r = std::max(r, std::abs(s.values[i] - 1.0));
  return r;
}

SpectralMaps characterize(const VectorField& u, const DomainMask& domain) {
  return characterize_impl(u.geometry, domain, [&u](const Index3& i, bool& boundary) {
    return displacement_jacobian_matrix(u, i, &boundary);
  });
}

SpectralMaps characterize(const GridGeometry& g, const DomainMask& domain,
                          const JacobianProvider& jacobian) {
  return characterize_impl(g, domain, [&g, &jacobian](const Index3& i, bool& boundary) {
    boundary = false;
    for (int a = 0; a < g.dimension; ++a)
      if (i[a] == 0 || i[a] == g.extent[a] - 1) boundary = true;
    return jacobian(i);
  });
}

}  // namespace dvfinv
