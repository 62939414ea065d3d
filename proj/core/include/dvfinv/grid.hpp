#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace dvfinv {

using Vec3 = std::array<double, 3>;
using Index3 = std::array<int, 3>;

// Regular sampling lattice in 2D or 3D. For 2D grids the third axis is inert
// (extent 1, spacing 1, origin 0) so that all loops can be written once.
struct GridGeometry {
  int dimension = 3;
  Index3 extent{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{0.0, 0.0, 0.0};

  // Validates dimension, extents and spacings; throws Error(InvalidArgument).
  static GridGeometry make(int dimension, Index3 extent, Vec3 spacing, Vec3 origin);

  std::size_t size() const {
    return static_cast<std::size_t>(extent[0]) * static_cast<std::size_t>(extent[1]) *
           static_cast<std::size_t>(extent[2]);
  }
  std::size_t linear(const Index3& i) const {
    return static_cast<std::size_t>(i[0]) +
           static_cast<std::size_t>(extent[0]) *
               (static_cast<std::size_t>(i[1]) +
                static_cast<std::size_t>(extent[1]) * static_cast<std::size_t>(i[2]));
  }
  Index3 index(std::size_t linear) const;
  Vec3 point(const Index3& i) const;
  Vec3 point(std::size_t linear) const { return point(index(linear)); }

  // Physical coordinate to continuous index coordinate (no bounds check).
  Vec3 continuous_index(const Vec3& p) const;
  Vec3 lower() const { return origin; }
  Vec3 upper() const;
  // Inclusive bounding-box test, tolerant to round-off at the faces.
  bool contains(const Vec3& p) const;
  Vec3 clamp(const Vec3& p) const;
  // Grid index nearest to p, clamped into the grid.
  Index3 nearest(const Vec3& p) const;

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

// Displacement samples stored component-major: comp[a][linear] is the a-th
// component at a grid point. Components beyond the dimension stay empty.
struct VectorField {
  GridGeometry geometry;
  std::array<std::vector<double>, 3> comp;

  VectorField() = default;
  explicit VectorField(const GridGeometry& g);

  Vec3 at(std::size_t linear) const {
    return {comp[0][linear], comp[1][linear],
            geometry.dimension == 3 ? comp[2][linear] : 0.0};
  }
  void set(std::size_t linear, const Vec3& v) {
    for (int a = 0; a < geometry.dimension; ++a) comp[a][linear] = v[a];
  }
  std::size_t size() const { return geometry.size(); }
  bool all_finite() const;
};

struct ScalarField {
  GridGeometry geometry;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  ScalarField() = default;
  explicit ScalarField(const GridGeometry& g, double fill = 0.0, bool valid_fill = true);

  std::size_t size() const { return values.size(); }
  std::size_t valid_count() const;
};

struct DomainMask {
  GridGeometry geometry;
  std::vector<std::uint8_t> inside;

  DomainMask() = default;
  explicit DomainMask(const GridGeometry& g, bool fill = true);

  std::size_t size() const { return inside.size(); }
  std::size_t count() const;
};

// Multilinear interpolation at a physical point. Exact at grid points.
std::optional<Vec3> try_sample(const VectorField& field, const Vec3& point);
// As try_sample but throws Error(OutOfBounds) outside the bounding box.
Vec3 sample_vector(const VectorField& field, const Vec3& point);
// Clamps the point into the bounding box before interpolating.
Vec3 sample_vector_clamped(const VectorField& field, const Vec3& point);
// Multilinear interpolation of the values of a scalar field (validity ignored).
std::optional<double> try_sample(const ScalarField& field, const Vec3& point);

// Valid displacement domain: grid points whose image stays in the grid and
// which are covered by the image of the grid under x -> x + u(x). Coverage is
// rasterized cell by cell after splitting each mapped cell into simplices.
// Throws Error(EmptyDomain) when nothing survives.
DomainMask valid_domain(const VectorField& u);

// Grid points inside the axis-aligned physical box [lo, hi] (inclusive).
DomainMask box_domain(const GridGeometry& g, const Vec3& lo, const Vec3& hi);
// Box (Chebyshev) dilation by the given number of samples per axis.
DomainMask dilate(const DomainMask& mask, int samples);
DomainMask intersect(const DomainMask& a, const DomainMask& b);

}  // namespace dvfinv
