#include "dvfinv/control.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "dvfinv/error.hpp"
#include "dvfinv/parallel.hpp"
#include "dvfinv/stats.hpp"

namespace dvfinv {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Centered sliding minimum over [i - r, i + r] along one line.
void sliding_min(const std::vector<double>& in, std::vector<double>& out, int r) {
  const int n = static_cast<int>(in.size());
  out.assign(in.size(), kInf);
  std::deque<int> q;
  for (int j = 0; j < n + r; ++j) {
    if (j < n) {
      while (!q.empty() && in[q.back()] >= in[j]) q.pop_back();
      q.push_back(j);
    }
    const int i = j - r;
    if (i < 0) continue;
    while (!q.empty() && q.front() < i - r) q.pop_front();
    if (!q.empty()) out[i] = in[q.front()];
  }
}

double minimize_ratio_numerically(const Spectrum& s) {
  // rho(Q(mu)) is a maximum of convex functions of mu, so golden-section
  // search over the admissible interval finds its minimizer.
  double lo = -kMuBound, hi = kMuBound;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
  double fa = contraction_ratio(s, a), fb = contraction_ratio(s, b);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - phi * (hi - lo);
      fa = contraction_ratio(s, a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + phi * (hi - lo);
      fb = contraction_ratio(s, b);
    }
  }
  return 0.5 * (lo + hi);
}

double displacement_percentile98(const VectorField& u, const DomainMask& domain) {
  ScalarField mag(u.geometry, 0.0, true);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const Vec3 v = u.at(i);
    mag.values[i] = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  }
  return percentile(mag, 98.0, PercentileMode::Exact, &domain);
}

void check_mu(double mu, const char* what) {
  if (!(mu > -1.0 && mu < 1.0)) {
    std::ostringstream os;
    os << what << " = " << mu << " lies outside (-1, 1)";
    throw Error(Errc::InvalidArgument, os.str());
  }
}

void check_map(const ScalarField& map) {
  if (map.size() == 0) throw Error(Errc::InvalidArgument, "control map is empty");
  for (std::size_t i = 0; i < map.size(); ++i) check_mu(map.values[i], "control map value");
}

}  // namespace

FeasibleRange feasible_range(double gamma) {
  if (!(gamma > 0.0))
    throw Error(Errc::InfeasibleControl, "controllability condition gamma > 0 violated");
  return {std::max(-1.0, 1.0 - 2.0 * gamma), 1.0};
}

double midrange_mu(double gamma) {
  if (!(gamma > 0.0))
    throw Error(Errc::InfeasibleControl, "controllability condition gamma > 0 violated");
  return gamma < 1.0 ? 1.0 - gamma : 0.0;
}

ScalarField neighborhood_gamma(const ScalarField& gamma, double radius) {
  if (!(radius >= 0.0)) throw Error(Errc::InvalidArgument, "neighborhood radius must be >= 0");
  const GridGeometry& g = gamma.geometry;
  std::vector<double> cur(gamma.size());
  for (std::size_t i = 0; i < cur.size(); ++i) cur[i] = gamma.valid[i] ? gamma.values[i] : kInf;

  for (int a = 0; a < g.dimension; ++a) {
    const int r = static_cast<int>(std::floor(radius / g.spacing[a] + 1e-9));
    if (r == 0) continue;
    const int n = g.extent[a];
    // Enumerate every line parallel to axis a through its starting index.
    std::vector<std::size_t> starts;
    for (std::size_t l = 0; l < cur.size(); ++l)
      if (g.index(l)[a] == 0) starts.push_back(l);
    const std::size_t stride = a == 0 ? 1 : (a == 1 ? static_cast<std::size_t>(g.extent[0])
                                                    : static_cast<std::size_t>(g.extent[0]) * g.extent[1]);
    std::vector<double> next(cur.size());
    parallel_for(starts.size(), [&](std::size_t b, std::size_t e) {
      std::vector<double> line(static_cast<std::size_t>(n)), out;
      for (std::size_t s = b; s < e; ++s) {
        for (int k = 0; k < n; ++k) line[k] = cur[starts[s] + k * stride];
        sliding_min(line, out, r);
        for (int k = 0; k < n; ++k) next[starts[s] + k * stride] = out[k];
      }
    });
    cur.swap(next);
  }

  ScalarField out(g, 0.0, false);
  for (std::size_t i = 0; i < cur.size(); ++i) {
    if (std::isfinite(cur[i])) {
      out.values[i] = cur[i];
      out.valid[i] = 1;
    } else {
      out.values[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return out;
}

double contraction_ratio(const Spectrum& s, double mu) {
  double r = 0.0;
  for (int i = 0; i < s.count; ++i) r = std::max(r, std::abs(1.0 - (1.0 - mu) * s.values[i]));
  return r;
}

double two_step_ratio(const Spectrum& s, double mu_odd, double mu_even) {
  double r = 0.0;
  for (int i = 0; i < s.count; ++i) {
    const Complex po = 1.0 - (1.0 - mu_odd) * s.values[i];
    const Complex pe = 1.0 - (1.0 - mu_even) * s.values[i];
    r = std::max(r, std::abs(po * pe));
  }
  return r;
}

std::string_view to_string(ControlCase c) {
  switch (c) {
    case ControlCase::R: return "R";
    case ControlCase::C1: return "C1";
    case ControlCase::C2: return "C2";
  }
  return "?";
}

OptimalControl optimal_mu(const Spectrum& s) {
  if (!gamma_of(s))
    throw Error(Errc::InfeasibleControl, "controllability condition gamma > 0 violated");

  OptimalControl out;
  if (!s.complex_pair) {
    double lmax = -kInf, lmin = kInf;
    for (int i = 0; i < s.count; ++i) {
      lmax = std::max(lmax, s.values[i].real());
      lmin = std::min(lmin, s.values[i].real());
    }
    out.kind = ControlCase::R;
    out.mu = 1.0 - 2.0 / (lmax + lmin);
    out.rho = (lmax - lmin) / (lmax + lmin);
  } else {
    Complex lc{};
    double lr = 0.0;
    bool has_real = false;
    for (int i = 0; i < s.count; ++i) {
      if (s.values[i].imag() > 0.0) lc = s.values[i];
      else if (s.values[i].imag() == 0.0) {
        lr = s.values[i].real();
        has_real = true;
      }
    }
    const double gc = lc.real() / std::norm(lc);
    if (!has_real || std::abs(1.0 - gc * lr) <= std::abs(1.0 - gc * lc)) {
      out.kind = ControlCase::C1;
      out.mu = 1.0 - gc;
    } else {
      out.kind = ControlCase::C2;
      const double mod = std::abs(lc);
      if (std::abs(mod - lr) > 1e-14 * std::max(1.0, mod)) {
        out.mu = 1.0 - (lc.real() - lr) / (mod - lr) * 2.0 / (mod + lr);
      } else {
        out.mu = minimize_ratio_numerically(s);
      }
    }
    out.rho = std::abs(1.0 - (1.0 - out.mu) * lc);
  }

  if (!(out.mu > -kMuBound && out.mu < kMuBound)) {
    out.mu = std::clamp(out.mu, -kMuBound, kMuBound);
    out.clamped = true;
    out.rho = contraction_ratio(s, out.mu);
  }
  return out;
}

MuMap build_mu_map(const VectorField& u, const SpectralMaps& maps, const MuMapOptions& options,
                   const JacobianProvider* jacobian) {
  const GridGeometry& g = u.geometry;
  if (!(maps.gamma.geometry == g)) throw Error(Errc::GeometryMismatch, "spectral maps do not match field");
  if (intersect(maps.controllable, maps.domain).count() == 0)
    throw Error(Errc::InfeasibleControl, "no controllable voxel in the domain");

  MuMap out;
  out.mu = ScalarField(g, 0.0, true);
  out.rho = ScalarField(g, 0.0, true);
  out.fallback = DomainMask(g, false);
  out.fallback_radius = options.fallback_radius >= 0.0 ? options.fallback_radius
                                                       : displacement_percentile98(u, maps.domain);

  std::optional<DomainMask> degenerate;
  if (options.degenerate) degenerate = dilate(*options.degenerate, options.degenerate_radius);

  std::vector<std::uint8_t> clamped(g.size(), 0);
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t l = b; l < e; ++l) {
      if (!maps.controllable.inside[l] || (degenerate && degenerate->inside[l])) {
        out.fallback.inside[l] = 1;
        continue;
      }
      const Index3 idx = g.index(l);
      Mat3 jf = jacobian ? (*jacobian)(idx) : displacement_jacobian_matrix(u, idx);
      for (int a = 0; a < g.dimension; ++a) jf[a][a] += 1.0;
      const Spectrum s = eigenvalues(jf, g.dimension);
      if (!gamma_of(s)) {
        out.fallback.inside[l] = 1;
        continue;
      }
      const OptimalControl oc = optimal_mu(s);
      out.mu.values[l] = oc.mu;
      out.rho.values[l] = oc.rho;
      clamped[l] = oc.clamped ? 1 : 0;
    }
  });
  out.clamped = static_cast<std::size_t>(std::count(clamped.begin(), clamped.end(), std::uint8_t{1}));

  if (out.fallback.count() > 0) {
    const ScalarField mid = midrange_map(maps, out.fallback_radius);
    const double global = scaled98_mu(maps);
    for (std::size_t l = 0; l < g.size(); ++l) {
      if (!out.fallback.inside[l]) continue;
      const double mu = mid.valid[l] ? mid.values[l] : global;
      out.mu.values[l] = mu;
      out.rho.values[l] = std::numeric_limits<double>::quiet_NaN();
      out.rho.valid[l] = 0;
    }
  }
  return out;
}

ScalarField midrange_map(const SpectralMaps& maps, double radius) {
  const ScalarField ng = neighborhood_gamma(maps.gamma, radius);
  ScalarField out(ng.geometry, 0.0, false);
  for (std::size_t l = 0; l < ng.size(); ++l) {
    if (ng.valid[l]) {
      out.values[l] = midrange_mu(ng.values[l]);
      out.valid[l] = 1;
    }
  }
  return out;
}

std::pair<double, double> alternating_from_percentiles(const SpectralMaps& maps) {
  const DomainMask dom = intersect(maps.domain, maps.controllable);
  if (dom.count() == 0) throw Error(Errc::InfeasibleControl, "no controllable voxel in the domain");
  const double idx50 = percentile(maps.control_index, 50.0, PercentileMode::Exact, &dom);
  const double idx98 = percentile(maps.control_index, 98.0, PercentileMode::Exact, &dom);
  if (!(idx98 < 1.0))
    throw Error(Errc::InfeasibleControl, "98th percentile control index >= 1 (gamma > 0 violated)");
  auto mid = [](double idx) { return 0.5 * (std::max(-1.0, idx) + 1.0); };
  return {mid(idx50), mid(idx98)};
}

double scaled98_mu(const SpectralMaps& maps) {
  const DomainMask dom = intersect(maps.domain, maps.controllable);
  if (dom.count() == 0) throw Error(Errc::InfeasibleControl, "no controllable voxel in the domain");
  std::vector<double> mids;
  mids.reserve(dom.count());
  for (std::size_t l = 0; l < dom.size(); ++l)
    if (dom.inside[l]) mids.push_back(midrange_mu(maps.gamma.values[l]));
  return percentile(mids, 98.0, PercentileMode::Exact);
}

void validate(const ControlScheme& scheme) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantControl>) {
          check_mu(s.mu, "constant mu");
        } else if constexpr (std::is_same_v<T, AlternatingControl>) {
          check_mu(s.mu_odd, "mu_odd");
          check_mu(s.mu_even, "mu_even");
        } else if constexpr (std::is_same_v<T, MidRangeControl>) {
          if (!(s.radius >= 0.0)) throw Error(Errc::InvalidArgument, "mid-range radius must be >= 0");
        } else if constexpr (std::is_same_v<T, VariantControl>) {
          check_map(s.mu_map);
        } else {
          if (s.uniform_steps < 0) throw Error(Errc::InvalidArgument, "hybrid switch step must be >= 0");
          check_map(s.mu_map);
        }
      },
      scheme);
}

std::string describe(const ControlScheme& scheme) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantControl>) {
          os << "constant:" << s.mu;
        } else if constexpr (std::is_same_v<T, AlternatingControl>) {
          os << "alternating:" << s.mu_odd << "," << s.mu_even;
        } else if constexpr (std::is_same_v<T, MidRangeControl>) {
          os << "midrange:" << s.radius;
        } else if constexpr (std::is_same_v<T, VariantControl>) {
          os << "variant";
        } else {
          os << "hybrid:" << s.uniform_steps;
        }
      },
      scheme);
  return os.str();
}

}  // namespace dvfinv
