#include "dvfinv/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dvfinv/error.hpp"
#include "dvfinv/parallel.hpp"

namespace dvfinv {
namespace {

constexpr double kFaceSlack = 1e-9;  // index units
constexpr double kSnap = 1e-9;       // index units

double snap(double t) {
  const double r = std::round(t);
  return std::abs(t - r) <= kSnap ? r : t;
}

struct Stencil {
  Index3 base{0, 0, 0};
  Vec3 frac{0.0, 0.0, 0.0};
};

// Locates the cell holding a continuous index; false when outside.
bool locate(const GridGeometry& g, Vec3 t, bool clamp, Stencil& s) {
  for (int a = 0; a < g.dimension; ++a) {
    const double hi = static_cast<double>(g.extent[a] - 1);
    double ta = snap(t[a]);
    if (ta < -kFaceSlack || ta > hi + kFaceSlack) {
      if (!clamp) return false;
    }
    ta = std::clamp(ta, 0.0, hi);
    int i0 = static_cast<int>(std::floor(ta));
    if (i0 >= g.extent[a] - 1) i0 = g.extent[a] - 2;
    s.base[a] = i0;
    s.frac[a] = ta - i0;
  }
  return true;
}

template <class Fetch>
double interpolate(const GridGeometry& g, const Stencil& s, Fetch&& fetch) {
  const int corners = 1 << g.dimension;
  double acc = 0.0;
  bool first = true;
  for (int c = 0; c < corners; ++c) {
    double w = 1.0;
    Index3 idx = s.base;
    for (int a = 0; a < g.dimension; ++a) {
      if (c & (1 << a)) {
        w *= s.frac[a];
        idx[a] += 1;
      } else {
        w *= 1.0 - s.frac[a];
      }
    }
    if (w == 0.0) continue;
    const double term = w * fetch(g.linear(idx));
    if (first) {
      acc = term;
      first = false;
    } else {
      acc += term;
    }
  }
  return acc;
}

Vec3 interpolate_vector(const VectorField& f, const Stencil& s) {
  Vec3 out{0.0, 0.0, 0.0};
  for (int a = 0; a < f.geometry.dimension; ++a) {
    const auto& c = f.comp[a];
    out[a] = interpolate(f.geometry, s, [&c](std::size_t i) { return c[i]; });
  }
  return out;
}

void require_same(const GridGeometry& a, const GridGeometry& b) {
  if (!(a == b)) throw Error(Errc::GeometryMismatch, "masks must share a geometry");
}

// Marks grid points lying inside the simplex with the given continuous-index
// vertices. Vertices are in index units; points on faces count as inside.
void rasterize_triangle(const GridGeometry& g, const Vec3& a, const Vec3& b, const Vec3& c,
                        std::vector<std::uint8_t>& hit) {
  const double e1x = b[0] - a[0], e1y = b[1] - a[1];
  const double e2x = c[0] - a[0], e2y = c[1] - a[1];
  const double det = e1x * e2y - e2x * e1y;
  if (std::abs(det) < 1e-14) return;
  const double lo_x = std::min({a[0], b[0], c[0]}), hi_x = std::max({a[0], b[0], c[0]});
  const double lo_y = std::min({a[1], b[1], c[1]}), hi_y = std::max({a[1], b[1], c[1]});
  const int i0 = std::max(0, static_cast<int>(std::ceil(lo_x - kFaceSlack)));
  const int i1 = std::min(g.extent[0] - 1, static_cast<int>(std::floor(hi_x + kFaceSlack)));
  const int j0 = std::max(0, static_cast<int>(std::ceil(lo_y - kFaceSlack)));
  const int j1 = std::min(g.extent[1] - 1, static_cast<int>(std::floor(hi_y + kFaceSlack)));
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const double px = i - a[0], py = j - a[1];
      const double l1 = (px * e2y - e2x * py) / det;
      const double l2 = (e1x * py - px * e1y) / det;
      if (l1 >= -kFaceSlack && l2 >= -kFaceSlack && 1.0 - l1 - l2 >= -kFaceSlack) {
        hit[g.linear({i, j, 0})] = 1;
      }
    }
  }
}

double det3(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
  return c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1]) +
         c2[0] * (c0[1] * c1[2] - c0[2] * c1[1]);
}

void rasterize_tetrahedron(const GridGeometry& g, const std::array<Vec3, 4>& v,
                           std::vector<std::uint8_t>& hit) {
  Vec3 e[3];
  for (int k = 0; k < 3; ++k)
    for (int a = 0; a < 3; ++a) e[k][a] = v[k + 1][a] - v[0][a];
  const double det = det3(e[0], e[1], e[2]);
  if (std::abs(det) < 1e-14) return;
  Index3 lo, hi;
  for (int a = 0; a < 3; ++a) {
    double mn = v[0][a], mx = v[0][a];
    for (int k = 1; k < 4; ++k) {
      mn = std::min(mn, v[k][a]);
      mx = std::max(mx, v[k][a]);
    }
    lo[a] = std::max(0, static_cast<int>(std::ceil(mn - kFaceSlack)));
    hi[a] = std::min(g.extent[a] - 1, static_cast<int>(std::floor(mx + kFaceSlack)));
  }
  for (int k = lo[2]; k <= hi[2]; ++k)
    for (int j = lo[1]; j <= hi[1]; ++j)
      for (int i = lo[0]; i <= hi[0]; ++i) {
        const Vec3 p{i - v[0][0], j - v[0][1], k - v[0][2]};
        // Cramer's rule for p = l1 e0 + l2 e1 + l3 e2.
        const double l1 = det3(p, e[1], e[2]) / det;
        const double l2 = det3(e[0], p, e[2]) / det;
        const double l3 = det3(e[0], e[1], p) / det;
        if (l1 >= -kFaceSlack && l2 >= -kFaceSlack && l3 >= -kFaceSlack &&
            1.0 - l1 - l2 - l3 >= -kFaceSlack) {
          hit[g.linear({i, j, k})] = 1;
        }
      }
}

}  // namespace

GridGeometry GridGeometry::make(int dimension, Index3 extent, Vec3 spacing, Vec3 origin) {
  if (dimension != 2 && dimension != 3)
    throw Error(Errc::InvalidArgument, "dimension must be 2 or 3");
  GridGeometry g;
  g.dimension = dimension;
  for (int a = 0; a < 3; ++a) {
    if (a < dimension) {
      if (extent[a] < 2)
        throw Error(Errc::InvalidArgument, "extent must be >= 2 on axis " + std::to_string(a));
      if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
        throw Error(Errc::InvalidArgument, "spacing must be > 0 on axis " + std::to_string(a));
      if (!std::isfinite(origin[a]))
        throw Error(Errc::InvalidArgument, "origin must be finite on axis " + std::to_string(a));
      g.extent[a] = extent[a];
      g.spacing[a] = spacing[a];
      g.origin[a] = origin[a];
    } else {
      g.extent[a] = 1;
      g.spacing[a] = 1.0;
      g.origin[a] = 0.0;
    }
  }
  return g;
}

Index3 GridGeometry::index(std::size_t lin) const {
  Index3 i;
  i[0] = static_cast<int>(lin % static_cast<std::size_t>(extent[0]));
  lin /= static_cast<std::size_t>(extent[0]);
  i[1] = static_cast<int>(lin % static_cast<std::size_t>(extent[1]));
  i[2] = static_cast<int>(lin / static_cast<std::size_t>(extent[1]));
  return i;
}

Vec3 GridGeometry::point(const Index3& i) const {
  Vec3 p{0.0, 0.0, 0.0};
  for (int a = 0; a < dimension; ++a) p[a] = origin[a] + i[a] * spacing[a];
  return p;
}

Vec3 GridGeometry::continuous_index(const Vec3& p) const {
  Vec3 t{0.0, 0.0, 0.0};
  for (int a = 0; a < dimension; ++a) t[a] = (p[a] - origin[a]) / spacing[a];
  return t;
}

Vec3 GridGeometry::upper() const {
  Vec3 u{0.0, 0.0, 0.0};
  for (int a = 0; a < dimension; ++a) u[a] = origin[a] + (extent[a] - 1) * spacing[a];
  return u;
}

bool GridGeometry::contains(const Vec3& p) const {
  const Vec3 t = continuous_index(p);
  for (int a = 0; a < dimension; ++a) {
    if (!(t[a] >= -kFaceSlack && t[a] <= extent[a] - 1 + kFaceSlack)) return false;
  }
  return true;
}

Vec3 GridGeometry::clamp(const Vec3& p) const {
  Vec3 q = p;
  const Vec3 lo = lower(), hi = upper();
  for (int a = 0; a < dimension; ++a) q[a] = std::clamp(p[a], lo[a], hi[a]);
  return q;
}

Index3 GridGeometry::nearest(const Vec3& p) const {
  const Vec3 t = continuous_index(p);
  Index3 i{0, 0, 0};
  for (int a = 0; a < dimension; ++a) {
    const double r = std::round(t[a]);
    i[a] = static_cast<int>(std::clamp(r, 0.0, static_cast<double>(extent[a] - 1)));
  }
  return i;
}

VectorField::VectorField(const GridGeometry& g) : geometry(g) {
  for (int a = 0; a < g.dimension; ++a) comp[a].assign(g.size(), 0.0);
}

bool VectorField::all_finite() const {
  for (int a = 0; a < geometry.dimension; ++a)
    for (double v : comp[a])
      if (!std::isfinite(v)) return false;
  return true;
}

ScalarField::ScalarField(const GridGeometry& g, double fill, bool valid_fill)
    : geometry(g), values(g.size(), fill), valid(g.size(), valid_fill ? 1 : 0) {}

std::size_t ScalarField::valid_count() const {
  return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), std::uint8_t{1}));
}

DomainMask::DomainMask(const GridGeometry& g, bool fill) : geometry(g), inside(g.size(), fill ? 1 : 0) {}

std::size_t DomainMask::count() const {
  return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

std::optional<Vec3> try_sample(const VectorField& field, const Vec3& point) {
  Stencil s;
  if (!locate(field.geometry, field.geometry.continuous_index(point), false, s)) return std::nullopt;
  return interpolate_vector(field, s);
}

Vec3 sample_vector(const VectorField& field, const Vec3& point) {
  auto v = try_sample(field, point);
  if (!v) throw Error(Errc::OutOfBounds, "sample point outside the grid bounding box");
  return *v;
}

Vec3 sample_vector_clamped(const VectorField& field, const Vec3& point) {
  Stencil s;
  locate(field.geometry, field.geometry.continuous_index(point), true, s);
  return interpolate_vector(field, s);
}

std::optional<double> try_sample(const ScalarField& field, const Vec3& point) {
  Stencil s;
  if (!locate(field.geometry, field.geometry.continuous_index(point), false, s)) return std::nullopt;
  const auto& v = field.values;
  return interpolate(field.geometry, s, [&v](std::size_t i) { return v[i]; });
}

DomainMask valid_domain(const VectorField& u) {
  const GridGeometry& g = u.geometry;
  const std::size_t n = g.size();

  // Mapped positions in continuous index units.
  std::array<std::vector<double>, 3> mapped;
  for (int a = 0; a < g.dimension; ++a) mapped[a].resize(n);
  DomainMask mask(g, false);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Vec3 x = g.point(i);
      Vec3 p = x;
      for (int a = 0; a < g.dimension; ++a) p[a] += u.comp[a][i];
      const Vec3 t = g.continuous_index(p);
      for (int a = 0; a < g.dimension; ++a) mapped[a][i] = t[a];
      mask.inside[i] = g.contains(p) ? 1 : 0;
    }
  });

  auto mapped_at = [&](const Index3& idx) {
    const std::size_t l = g.linear(idx);
    return Vec3{mapped[0][l], mapped[1][l], g.dimension == 3 ? mapped[2][l] : 0.0};
  };

  std::vector<std::uint8_t> covered(n, 0);
  if (g.dimension == 2) {
    for (int j = 0; j + 1 < g.extent[1]; ++j) {
      for (int i = 0; i + 1 < g.extent[0]; ++i) {
        const Vec3 c00 = mapped_at({i, j, 0}), c10 = mapped_at({i + 1, j, 0});
        const Vec3 c01 = mapped_at({i, j + 1, 0}), c11 = mapped_at({i + 1, j + 1, 0});
        rasterize_triangle(g, c00, c10, c11, covered);
        rasterize_triangle(g, c00, c11, c01, covered);
      }
    }
  } else {
    // Kuhn decomposition: one tetrahedron per axis ordering.
    static constexpr int kOrders[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                          {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (int k = 0; k + 1 < g.extent[2]; ++k)
      for (int j = 0; j + 1 < g.extent[1]; ++j)
        for (int i = 0; i + 1 < g.extent[0]; ++i) {
          for (const auto& order : kOrders) {
            std::array<Vec3, 4> v;
            Index3 idx{i, j, k};
            v[0] = mapped_at(idx);
            for (int s = 0; s < 3; ++s) {
              idx[order[s]] += 1;
              v[s + 1] = mapped_at(idx);
            }
            rasterize_tetrahedron(g, v, covered);
          }
        }
  }

  for (std::size_t i = 0; i < n; ++i) mask.inside[i] = (mask.inside[i] && covered[i]) ? 1 : 0;
  if (mask.count() == 0) throw Error(Errc::EmptyDomain, "valid displacement domain is empty");
  return mask;
}

DomainMask box_domain(const GridGeometry& g, const Vec3& lo, const Vec3& hi) {
  DomainMask m(g, false);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 p = g.point(i);
    bool in = true;
    for (int a = 0; a < g.dimension; ++a) {
      const double tol = kFaceSlack * g.spacing[a];
      if (p[a] < lo[a] - tol || p[a] > hi[a] + tol) in = false;
    }
    m.inside[i] = in ? 1 : 0;
  }
  return m;
}

DomainMask dilate(const DomainMask& mask, int samples) {
  if (samples <= 0) return mask;
  const GridGeometry& g = mask.geometry;
  std::vector<std::uint8_t> cur = mask.inside, next(cur.size());
  // Separable max filter, one axis at a time.
  for (int a = 0; a < g.dimension; ++a) {
    for (std::size_t l = 0; l < cur.size(); ++l) {
      const Index3 i = g.index(l);
      std::uint8_t v = 0;
      const int lo = std::max(0, i[a] - samples), hi = std::min(g.extent[a] - 1, i[a] + samples);
      Index3 j = i;
      for (int s = lo; s <= hi && !v; ++s) {
        j[a] = s;
        v = cur[g.linear(j)];
      }
      next[l] = v;
    }
    cur.swap(next);
  }
  DomainMask out(g, false);
  out.inside = std::move(cur);
  return out;
}

DomainMask intersect(const DomainMask& a, const DomainMask& b) {
  require_same(a.geometry, b.geometry);
  DomainMask out(a.geometry, false);
  for (std::size_t i = 0; i < a.size(); ++i) out.inside[i] = (a.inside[i] && b.inside[i]) ? 1 : 0;
  return out;
}

}  // namespace dvfinv
