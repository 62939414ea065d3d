#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dvfinv/control.hpp"
#include "dvfinv/grid.hpp"
#include "dvfinv/stats.hpp"

namespace dvfinv {

enum class OobPolicy { Freeze, Clamp };
enum class InitKind { Zero, Scaled98, Custom };

enum class VoxelStatus : std::uint8_t {
  Outside = 0,  // not part of the working domain
  Active = 1,
  Converged = 2,
  FrozenOob = 3,
  Uncontrollable = 4,
};

struct InversionConfig {
  ControlScheme scheme = ConstantControl{0.0};
  int max_steps = 10;
  // Stop once the 98th percentile of |r_v| drops to this length.
  std::optional<double> residual_tolerance;
  OobPolicy oob = OobPolicy::Freeze;
  InitKind init = InitKind::Scaled98;
  std::optional<VectorField> initial_estimate;  // used with InitKind::Custom
  // Working domain; defaults to valid_domain(u).
  std::optional<DomainMask> domain;
  // Alternating schemes apply mu_odd at 0-based steps 0, 2, 4, ... when true.
  bool odd_first = true;
  std::vector<double> levels = default_percentile_levels();
  // Called after every update with the 1-based step number and new estimate.
  std::function<void(int, const VectorField&)> on_step;
};

struct StepRecord {
  int step = 0;                 // 1-based; residual of the estimate after this step
  PercentileSummary residual;   // |r_v| over active voxels
  std::optional<double> mu;     // uniform control value used, if uniform
  PercentileSummary mu_used;    // spread of spatially variant values, if any
  std::size_t frozen = 0;
};

struct InversionRun {
  VectorField estimate;
  std::vector<VoxelStatus> status;
  DomainMask domain;
  double initial_mu = 0.0;  // mu_m[98%] used by Scaled98 (NaN otherwise)
  PercentileSummary initial_residual;
  std::vector<StepRecord> steps;
};

struct ResidualField {
  VectorField r;
  DomainMask valid;  // domain voxels whose displaced point stayed in bounds (or was clamped)
  DomainMask oob;    // domain voxels whose displaced point left the grid
};

// r_v(x) = v(x) + u(x + v(x)) over `domain`.
ResidualField residual_v(const VectorField& u, const VectorField& v_hat, const DomainMask& domain,
                         OobPolicy policy = OobPolicy::Freeze);

// v_{k+1}(x) = v_k(x) - (1 - mu(x)) r_k(x) where `active` is set.
VectorField iterate_step(const VectorField& v_k, const VectorField& r_k, const ScalarField& mu,
                         const DomainMask& active);

InversionRun invert(const VectorField& u, const InversionConfig& config);

}  // namespace dvfinv
