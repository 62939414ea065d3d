#include "dvfinv/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dvfinv/error.hpp"
#include "dvfinv/parallel.hpp"
#include "dvfinv/spectral.hpp"

namespace dvfinv {
namespace {

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

std::vector<std::size_t> members(const DomainMask& m) {
  std::vector<std::size_t> out;
  out.reserve(m.count());
  for (std::size_t l = 0; l < m.size(); ++l)
    if (m.inside[l]) out.push_back(l);
  return out;
}

PercentileSummary residual_summary(const ResidualField& res, const DomainMask& considered,
                                   const std::vector<double>& levels) {
  std::vector<double> mags;
  std::size_t invalid = 0;
  for (std::size_t l = 0; l < considered.size(); ++l) {
    if (!considered.inside[l]) continue;
    if (res.valid.inside[l]) mags.push_back(norm(res.r.at(l)));
    else ++invalid;
  }
  if (mags.empty()) {
    PercentileSummary s;
    s.levels = levels;
    s.values.assign(levels.size(), std::numeric_limits<double>::quiet_NaN());
    s.invalid_fraction = 1.0;
    return s;
  }
  return summarize(mags, invalid, levels, PercentileMode::Exact);
}

// Per-step control values, resolved from the configured scheme.
class ControlPlan {
 public:
  ControlPlan(const InversionConfig& cfg, const SpectralMaps& maps, const GridGeometry& g)
      : cfg_(cfg) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, ConstantControl>) {
            uniform_ = s.mu;
          } else if constexpr (std::is_same_v<T, AlternatingControl>) {
            alternating_ = s;
          } else if constexpr (std::is_same_v<T, MidRangeControl>) {
            ScalarField map = midrange_map(maps, s.radius);
            const double fallback = scaled98_mu(maps);
            for (std::size_t l = 0; l < map.size(); ++l) {
              if (!map.valid[l]) map.values[l] = fallback;
              map.valid[l] = 1;
            }
            map_ = std::move(map);
            lookup_ = s.lookup;
          } else if constexpr (std::is_same_v<T, VariantControl>) {
            map_ = s.mu_map;
            lookup_ = s.lookup;
          } else {
            map_ = s.mu_map;
            lookup_ = s.lookup;
            hybrid_steps_ = s.uniform_steps;
            hybrid_mu_ = scaled98_mu(maps);
          }
        },
        cfg.scheme);
    if (map_ && !(map_->geometry == g))
      throw Error(Errc::GeometryMismatch, "control map geometry differs from the field");
  }

  // Uniform value for step k, if the step is spatially uniform.
  std::optional<double> uniform(int k) const {
    if (uniform_) return uniform_;
    if (alternating_) {
      const bool first = (k % 2 == 0) == cfg_.odd_first;
      return first ? alternating_->mu_odd : alternating_->mu_even;
    }
    if (k < hybrid_steps_) return hybrid_mu_;
    return std::nullopt;
  }

  double at(std::size_t voxel, const Vec3& displaced) const {
    const GridGeometry& g = map_->geometry;
    if (lookup_ == MuLookup::AtVoxel) return map_->values[voxel];
    return map_->values[g.linear(g.nearest(displaced))];
  }

 private:
  const InversionConfig& cfg_;
  std::optional<double> uniform_;
  std::optional<AlternatingControl> alternating_;
  std::optional<ScalarField> map_;
  MuLookup lookup_ = MuLookup::Displaced;
  int hybrid_steps_ = 0;
  double hybrid_mu_ = 0.0;
};

}  // namespace

ResidualField residual_v(const VectorField& u, const VectorField& v_hat, const DomainMask& domain,
                         OobPolicy policy) {
  const GridGeometry& g = u.geometry;
  if (!(v_hat.geometry == g) || !(domain.geometry == g))
    throw Error(Errc::GeometryMismatch, "residual operands must share a geometry");
  ResidualField out{VectorField(g), DomainMask(g, false), DomainMask(g, false)};
  const auto voxels = members(domain);
  parallel_for(voxels.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      const std::size_t l = voxels[s];
      const Vec3 v = v_hat.at(l);
      Vec3 p = g.point(l);
      for (int a = 0; a < g.dimension; ++a) p[a] += v[a];
      std::optional<Vec3> up = try_sample(u, p);
      if (!up) {
        out.oob.inside[l] = 1;
        if (policy == OobPolicy::Freeze) continue;
        up = sample_vector_clamped(u, p);
      }
      Vec3 r{0.0, 0.0, 0.0};
      for (int a = 0; a < g.dimension; ++a) r[a] = v[a] + (*up)[a];
      out.r.set(l, r);
      out.valid.inside[l] = 1;
    }
  });
  return out;
}

VectorField iterate_step(const VectorField& v_k, const VectorField& r_k, const ScalarField& mu,
                         const DomainMask& active) {
  const GridGeometry& g = v_k.geometry;
  if (!(r_k.geometry == g) || !(mu.geometry == g) || !(active.geometry == g))
    throw Error(Errc::GeometryMismatch, "iteration operands must share a geometry");
  VectorField next = v_k;
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t l = b; l < e; ++l) {
      if (!active.inside[l]) continue;
      const double gain = 1.0 - mu.values[l];
      for (int a = 0; a < g.dimension; ++a) next.comp[a][l] = v_k.comp[a][l] - gain * r_k.comp[a][l];
    }
  });
  return next;
}

InversionRun invert(const VectorField& u, const InversionConfig& config) {
  validate(config.scheme);
  if (config.max_steps < 1) throw Error(Errc::InvalidArgument, "max_steps must be >= 1");
  if (config.residual_tolerance && !(*config.residual_tolerance >= 0.0))
    throw Error(Errc::InvalidArgument, "residual tolerance must be >= 0");
  if (!u.all_finite()) throw Error(Errc::InvalidArgument, "forward field has non-finite samples");

  const GridGeometry& g = u.geometry;
  InversionRun run;
  run.domain = config.domain ? *config.domain : valid_domain(u);
  if (!(run.domain.geometry == g)) throw Error(Errc::GeometryMismatch, "domain geometry differs from field");
  if (run.domain.count() == 0) throw Error(Errc::EmptyDomain, "inversion domain is empty");

  const SpectralMaps maps = characterize(u, run.domain);
  const ControlPlan plan(config, maps, g);

  run.initial_mu = std::numeric_limits<double>::quiet_NaN();
  VectorField v(g);
  switch (config.init) {
    case InitKind::Zero:
      break;
    case InitKind::Scaled98: {
      run.initial_mu = scaled98_mu(maps);
      const double scale = run.initial_mu - 1.0;
      for (std::size_t l = 0; l < g.size(); ++l)
        if (run.domain.inside[l])
          for (int a = 0; a < g.dimension; ++a) v.comp[a][l] = scale * u.comp[a][l];
      break;
    }
    case InitKind::Custom:
      if (!config.initial_estimate) throw Error(Errc::InvalidArgument, "custom init needs an estimate");
      if (!(config.initial_estimate->geometry == g))
        throw Error(Errc::GeometryMismatch, "initial estimate geometry differs from field");
      v = *config.initial_estimate;
      break;
  }

  DomainMask frozen(g, false);
  auto working = [&]() {
    DomainMask m = run.domain;
    for (std::size_t l = 0; l < m.size(); ++l)
      if (frozen.inside[l]) m.inside[l] = 0;
    return m;
  };
  auto freeze_new = [&](const ResidualField& res) {
    if (config.oob != OobPolicy::Freeze) return;
    for (std::size_t l = 0; l < res.oob.size(); ++l)
      if (res.oob.inside[l]) frozen.inside[l] = 1;
  };

  DomainMask active = working();
  ResidualField res = residual_v(u, v, active, config.oob);
  freeze_new(res);
  run.initial_residual = residual_summary(res, run.domain, config.levels);

  ScalarField mu(g, 0.0, true);
  for (int k = 0; k < config.max_steps; ++k) {
    if (config.residual_tolerance) {
      std::vector<double> mags;
      for (std::size_t l = 0; l < g.size(); ++l)
        if (res.valid.inside[l]) mags.push_back(norm(res.r.at(l)));
      if (!mags.empty() &&
          percentile(mags, 98.0, PercentileMode::Exact) <= *config.residual_tolerance)
        break;
    }

    StepRecord rec;
    rec.step = k + 1;
    const DomainMask updating = intersect(active, res.valid);
    if (auto m = plan.uniform(k)) {
      std::fill(mu.values.begin(), mu.values.end(), *m);
      rec.mu = *m;
    } else {
      std::vector<double> used;
      used.reserve(updating.count());
      for (std::size_t l = 0; l < g.size(); ++l) {
        if (!updating.inside[l]) continue;
        Vec3 p = g.point(l);
        for (int a = 0; a < g.dimension; ++a) p[a] += v.comp[a][l];
        mu.values[l] = plan.at(l, p);
        used.push_back(mu.values[l]);
      }
      if (!used.empty()) rec.mu_used = summarize(used, 0, config.levels, PercentileMode::Exact);
    }

    v = iterate_step(v, res.r, mu, updating);
    active = working();
    res = residual_v(u, v, active, config.oob);
    freeze_new(res);
    rec.frozen = frozen.count();
    rec.residual = residual_summary(res, run.domain, config.levels);
    run.steps.push_back(std::move(rec));
    if (config.on_step) config.on_step(k + 1, v);
  }

  run.estimate = std::move(v);
  run.status.assign(g.size(), VoxelStatus::Outside);
  for (std::size_t l = 0; l < g.size(); ++l) {
    if (!run.domain.inside[l]) continue;
    if (frozen.inside[l]) {
      run.status[l] = VoxelStatus::FrozenOob;
    } else if (!maps.controllable.inside[l]) {
      run.status[l] = VoxelStatus::Uncontrollable;
    } else if (config.residual_tolerance && res.valid.inside[l] &&
               norm(res.r.at(l)) <= *config.residual_tolerance) {
      run.status[l] = VoxelStatus::Converged;
    } else {
      run.status[l] = VoxelStatus::Active;
    }
  }
  return run;
}

}  // namespace dvfinv
