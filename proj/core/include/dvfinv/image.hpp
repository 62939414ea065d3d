#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "dvfinv/grid.hpp"

namespace dvfinv {

enum class ColorMap { Gray, Heat };

// How the display range is chosen when none is given.
enum class RangeMode {
  ZeroToMax,  // [0, max]
  ZeroToP90,  // [0, 90th percentile], used for determinant maps
};

struct SliceOptions {
  int axis = 2;  // normal axis of the slice; must be 2 for 2D fields
  int index = 0;
  ColorMap color = ColorMap::Heat;
  RangeMode range_mode = RangeMode::ZeroToMax;
  std::optional<std::pair<double, double>> range;  // explicit [lo, hi]
};

// 8-bit image, row-major with row 0 at the top; 1 (gray) or 3 (rgb) channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;
};

// Invalid pixels are white; values outside the display range clamp to its ends.
Image render_slice(const ScalarField& field, const SliceOptions& options);
// Binary image: inside white, outside black.
Image render_mask(const DomainMask& mask, int axis, int index);

// PGM (1 channel) or PPM (3 channels), binary.
void write_pnm(const std::filesystem::path& path, const Image& image);
Image read_pnm(const std::filesystem::path& path);

}  // namespace dvfinv
