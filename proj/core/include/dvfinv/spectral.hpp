#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>

#include "dvfinv/grid.hpp"

namespace dvfinv {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Complex = std::complex<double>;

inline constexpr double kDiscriminantTolerance = 1e-12;
inline constexpr double kSingularTolerance = 1e-12;

Mat3 identity3();

// Eigenvalues of a 2x2 or 3x3 real matrix, sorted by (real, imag).
struct Spectrum {
  std::array<Complex, 3> values{};
  int count = 0;
  bool complex_pair = false;

  Complex operator[](int i) const { return values[i]; }
};

// Closed form: quadratic formula in 2D, trigonometric/Cardano in 3D. A negative
// discriminant smaller in magnitude than kDiscriminantTolerance times the
// coefficient scale is treated as a repeated real root.
Spectrum eigenvalues(const Mat3& m, int dim);

double determinant(const Mat3& m, int dim);

struct JacobianSample {
  Mat3 ju{};  // displacement Jacobian, d u_i / d x_j in physical units
  int dim = 3;
  Spectrum spectrum;  // of J_f = I + J_u
  bool boundary = false;

  Mat3 jf() const;
};

// Central differences in the interior, one-sided first-order differences on
// boundary faces (flagged through `boundary`).
JacobianSample displacement_jacobian(const VectorField& u, const Index3& x);
Mat3 displacement_jacobian_matrix(const VectorField& u, const Index3& x, bool* boundary = nullptr);

// min_j Re(1/lambda_j); nullopt when some |lambda_j| < kSingularTolerance or
// the minimum is not positive (controllability violated).
std::optional<double> gamma_of(const Spectrum& jf_spectrum);

// rho(J_u) from the J_f spectrum shifted by -1.
double displacement_spectral_radius(const Spectrum& jf_spectrum);

// Per-voxel characterization over the whole grid; percentiles are meant to be
// taken over `domain`.
struct SpectralMaps {
  ScalarField det_jf;
  ScalarField rho_ju;
  ScalarField control_index;  // 1 - 2 gamma
  ScalarField gamma;
  DomainMask controllable;
  DomainMask boundary;
  DomainMask domain;
  double complex_fraction = 0.0;         // over domain
  double uncontrollable_fraction = 0.0;  // over domain
};

using JacobianProvider = std::function<Mat3(const Index3&)>;

SpectralMaps characterize(const VectorField& u, const DomainMask& domain);
// Same, with displacement Jacobians supplied by the caller (e.g. closed form).
SpectralMaps characterize(const GridGeometry& g, const DomainMask& domain,
                          const JacobianProvider& jacobian);

}  // namespace dvfinv
