#pragma once

#include "dvfinv/control.hpp"
#include "dvfinv/grid.hpp"
#include "dvfinv/solver.hpp"
#include "dvfinv/spectral.hpp"
#include "dvfinv/stats.hpp"

namespace dvfinv {

struct ResidualU {
  // r_u(x') = u(x') + v(x' + u(x')) on the reference grid.
  VectorField reference;
  DomainMask reference_valid;
  // r_u(x + v(x)) reported at target voxels x, looked up at the grid point
  // nearest to x + v(x).
  VectorField target;
  DomainMask target_valid;
  DomainMask oob;
};

// `domain` is where v_hat is meaningful; lookups whose interpolation stencil
// leaves it are flagged rather than reported.
ResidualU residual_u(const VectorField& u, const VectorField& v_hat, const DomainMask& domain);

// |v_hat(x) - v_true(x)| over `domain` (whole grid when omitted).
ScalarField inversion_error(const VectorField& v_hat, const VectorField& v_true,
                            const DomainMask* domain = nullptr);

ScalarField magnitude(const VectorField& v, const DomainMask* domain = nullptr);

struct ContractionMap {
  ScalarField ratio;          // rho(Q(x; mu(x))), or sqrt(rho(P_o P_e)) for alternating control
  DomainMask region;          // ratio < 1 within the domain
  double area_fraction = 0.0; // |region| / |domain|
};

// Pre-inversion contraction ratio per voxel for a control scheme. Spatially
// variant maps are evaluated at x itself.
ContractionMap contraction_map(const VectorField& u, const ControlScheme& scheme,
                               const DomainMask& domain, const JacobianProvider* jacobian = nullptr);

}  // namespace dvfinv
