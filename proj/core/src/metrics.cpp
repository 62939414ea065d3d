#include "dvfinv/metrics.hpp"

#include <cmath>
#include <limits>

#include "dvfinv/error.hpp"
#include "dvfinv/parallel.hpp"

namespace dvfinv {
namespace {

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

void require_same(const GridGeometry& a, const GridGeometry& b, const char* what) {
  if (!(a == b)) throw Error(Errc::GeometryMismatch, what);
}

}  // namespace

ResidualU residual_u(const VectorField& u, const VectorField& v_hat, const DomainMask& domain) {
  const GridGeometry& g = u.geometry;
  require_same(g, v_hat.geometry, "residual_u: field geometries differ");
  require_same(g, domain.geometry, "residual_u: domain geometry differs");

  ScalarField indicator(g, 0.0, true);
  for (std::size_t l = 0; l < g.size(); ++l) indicator.values[l] = domain.inside[l] ? 1.0 : 0.0;

  ResidualU out{VectorField(g), DomainMask(g, false), VectorField(g), DomainMask(g, false),
                DomainMask(g, false)};
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t l = b; l < e; ++l) {
      const Vec3 uu = u.at(l);
      Vec3 p = g.point(l);
      for (int a = 0; a < g.dimension; ++a) p[a] += uu[a];
      const auto w = try_sample(indicator, p);
      if (!w || *w < 1.0 - 1e-12) continue;
      const Vec3 vv = sample_vector(v_hat, p);
      Vec3 r{0.0, 0.0, 0.0};
      for (int a = 0; a < g.dimension; ++a) r[a] = uu[a] + vv[a];
      out.reference.set(l, r);
      out.reference_valid.inside[l] = 1;
    }
  });

  for (std::size_t l = 0; l < g.size(); ++l) {
    if (!domain.inside[l]) continue;
    const Vec3 v = v_hat.at(l);
    Vec3 p = g.point(l);
    for (int a = 0; a < g.dimension; ++a) p[a] += v[a];
    if (!g.contains(p)) {
      out.oob.inside[l] = 1;
      continue;
    }
    const std::size_t src = g.linear(g.nearest(p));
    if (!out.reference_valid.inside[src]) {
      out.oob.inside[l] = 1;
      continue;
    }
    out.target.set(l, out.reference.at(src));
    out.target_valid.inside[l] = 1;
  }
  return out;
}

ScalarField inversion_error(const VectorField& v_hat, const VectorField& v_true, const DomainMask* domain) {
  require_same(v_hat.geometry, v_true.geometry, "inversion_error: field geometries differ");
  if (domain) require_same(v_hat.geometry, domain->geometry, "inversion_error: domain geometry differs");
  ScalarField out(v_hat.geometry, 0.0, true);
  for (std::size_t l = 0; l < out.size(); ++l) {
    if (domain && !domain->inside[l]) {
      out.valid[l] = 0;
      continue;
    }
    const Vec3 a = v_hat.at(l), b = v_true.at(l);
    out.values[l] = norm({a[0] - b[0], a[1] - b[1], a[2] - b[2]});
  }
  return out;
}

ScalarField magnitude(const VectorField& v, const DomainMask* domain) {
  if (domain) require_same(v.geometry, domain->geometry, "magnitude: domain geometry differs");
  ScalarField out(v.geometry, 0.0, true);
  for (std::size_t l = 0; l < out.size(); ++l) {
    if (domain && !domain->inside[l]) {
      out.valid[l] = 0;
      continue;
    }
    out.values[l] = norm(v.at(l));
  }
  return out;
}

ContractionMap contraction_map(const VectorField& u, const ControlScheme& scheme,
                               const DomainMask& domain, const JacobianProvider* jacobian) {
  validate(scheme);
  const GridGeometry& g = u.geometry;
  require_same(g, domain.geometry, "contraction_map: domain geometry differs");
  if (domain.count() == 0) throw Error(Errc::EmptyDomain, "contraction domain is empty");

  std::optional<double> uniform;
  std::optional<AlternatingControl> alternating;
  const ScalarField* map = nullptr;
  ScalarField owned;
  if (const auto* c = std::get_if<ConstantControl>(&scheme)) {
    uniform = c->mu;
  } else if (const auto* a = std::get_if<AlternatingControl>(&scheme)) {
    alternating = *a;
  } else if (const auto* m = std::get_if<MidRangeControl>(&scheme)) {
    const SpectralMaps maps = characterize(u, domain);
    owned = midrange_map(maps, m->radius);
    const double fallback = scaled98_mu(maps);
    for (std::size_t l = 0; l < owned.size(); ++l)
      if (!owned.valid[l]) owned.values[l] = fallback;
    map = &owned;
  } else if (const auto* v = std::get_if<VariantControl>(&scheme)) {
    map = &v->mu_map;
  } else {
    map = &std::get<HybridControl>(scheme).mu_map;
  }
  if (map) require_same(g, map->geometry, "contraction_map: control map geometry differs");

  ContractionMap out{ScalarField(g, 0.0, false), DomainMask(g, false), 0.0};
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t l = b; l < e; ++l) {
      if (!domain.inside[l]) continue;
      const Index3 idx = g.index(l);
      Mat3 jf = jacobian ? (*jacobian)(idx) : displacement_jacobian_matrix(u, idx);
      for (int a = 0; a < g.dimension; ++a) jf[a][a] += 1.0;
      const Spectrum s = eigenvalues(jf, g.dimension);
      double ratio;
      if (alternating) ratio = std::sqrt(two_step_ratio(s, alternating->mu_odd, alternating->mu_even));
      else ratio = contraction_ratio(s, uniform ? *uniform : map->values[l]);
      out.ratio.values[l] = ratio;
      out.ratio.valid[l] = 1;
      out.region.inside[l] = ratio < 1.0 ? 1 : 0;
    }
  });
  out.area_fraction = static_cast<double>(out.region.count()) / static_cast<double>(domain.count());
  return out;
}

}  // namespace dvfinv
