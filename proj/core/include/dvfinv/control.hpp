#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "dvfinv/grid.hpp"
#include "dvfinv/spectral.hpp"

namespace dvfinv {

// Open interval of control values guaranteeing local contraction.
struct FeasibleRange {
  double lower = -1.0;
  double upper = 1.0;

  bool contains(double mu) const { return mu > lower && mu < upper; }
  double midpoint() const { return 0.5 * (lower + upper); }
};

// (max{-1, 1 - 2 gamma}, 1); throws InfeasibleControl when gamma <= 0.
FeasibleRange feasible_range(double gamma);

// Center of feasible_range(gamma): 1 - gamma for gamma < 1, else 0.
double midrange_mu(double gamma);

// Minimum of gamma over the axis-aligned box of physical half-width `radius`,
// ignoring invalid voxels. Output is invalid where no valid neighbor exists.
ScalarField neighborhood_gamma(const ScalarField& gamma, double radius);

// rho(Q(mu)) with Q(mu) = I - (1 - mu) J_f.
double contraction_ratio(const Spectrum& jf_spectrum, double mu);
// rho(P_o P_e) for two control values applied at the same point.
double two_step_ratio(const Spectrum& jf_spectrum, double mu_odd, double mu_even);

enum class ControlCase { R, C1, C2 };
std::string_view to_string(ControlCase c);

struct OptimalControl {
  double mu = 0.0;
  double rho = 0.0;
  ControlCase kind = ControlCase::R;
  bool clamped = false;
};

// Largest |mu| returned after clamping a formula value back into (-1, 1).
inline constexpr double kMuBound = 1.0 - 1e-9;

// Locally optimal control value minimizing rho(Q(mu)) for the given J_f
// spectrum. All-real spectra use the extreme eigenvalues; spectra with a
// conjugate pair are split into the complex-dominant and real-dominant cases.
// Throws InfeasibleControl when the spectrum is not controllable.
OptimalControl optimal_mu(const Spectrum& jf_spectrum);

struct MuMapOptions {
  // Physical radius of the neighborhood used for fallback mid-range values.
  // Negative selects the 98th percentile displacement magnitude over the domain.
  double fallback_radius = -1.0;
  // Voxels where the local optimum is not trusted (e.g. a coordinate
  // singularity); they are dilated by `degenerate_radius` samples and given
  // the neighborhood mid-range value.
  std::optional<DomainMask> degenerate;
  int degenerate_radius = 5;
};

struct MuMap {
  ScalarField mu;        // valid everywhere on the grid
  ScalarField rho;       // predicted local contraction ratio at mu
  DomainMask fallback;   // true where the neighborhood mid-range value was used
  std::size_t clamped = 0;
  double fallback_radius = 0.0;
};

// Per-voxel mu*(x). When `jacobian` is given it replaces finite differences
// of u (closed-form Jacobians for analytic fields).
MuMap build_mu_map(const VectorField& u, const SpectralMaps& maps, const MuMapOptions& options = {},
                   const JacobianProvider* jacobian = nullptr);

// Mid-range values at the 50th and 98th percentiles of the control index over
// the controllable part of the domain.
std::pair<double, double> alternating_from_percentiles(const SpectralMaps& maps);

// 98th percentile of the per-voxel mid-range map over the controllable domain.
double scaled98_mu(const SpectralMaps& maps);

// Neighborhood mid-range map: midrange_mu(min gamma over a box of `radius`).
ScalarField midrange_map(const SpectralMaps& maps, double radius);

enum class MuLookup { Displaced, AtVoxel };

struct ConstantControl {
  double mu = 0.0;
};
// mu_odd drives steps 1, 3, 5, ... (0-based 0, 2, 4, ...) unless the solver is
// configured to start with mu_even.
struct AlternatingControl {
  double mu_odd = 0.0;
  double mu_even = 0.0;
};
struct MidRangeControl {
  double radius = 0.0;
  MuLookup lookup = MuLookup::Displaced;
};
struct VariantControl {
  ScalarField mu_map;
  MuLookup lookup = MuLookup::Displaced;
};
// Uniform mid-range control for `uniform_steps`, then the spatially variant map.
struct HybridControl {
  int uniform_steps = 2;
  ScalarField mu_map;
  MuLookup lookup = MuLookup::Displaced;
};

using ControlScheme =
    std::variant<ConstantControl, AlternatingControl, MidRangeControl, VariantControl, HybridControl>;

// Throws InvalidArgument when a stored mu leaves (-1, 1) or a map is malformed.
void validate(const ControlScheme& scheme);
std::string describe(const ControlScheme& scheme);

}  // namespace dvfinv
