#include "dvfinv/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "dvfinv/error.hpp"
#include "dvfinv/stats.hpp"

namespace dvfinv {
namespace {

struct SliceAxes {
  int u, v;  // in-plane axes: columns, rows
};

SliceAxes check_slice(const GridGeometry& g, int axis, int index) {
  if (axis < 0 || axis > 2) throw Error(Errc::IndexOutOfRange, "slice axis must be 0, 1 or 2");
  if (g.dimension == 2 && axis != 2) throw Error(Errc::IndexOutOfRange, "2D fields only slice along axis 2");
  if (index < 0 || index >= g.extent[axis])
    throw Error(Errc::IndexOutOfRange, "slice index " + std::to_string(index) + " outside [0, " +
                                           std::to_string(g.extent[axis]) + ")");
  if (axis == 0) return {1, 2};
  if (axis == 1) return {0, 2};
  return {0, 1};
}

template <class Pixel>
Image render(const GridGeometry& g, int axis, int index, int channels, Pixel&& pixel) {
  const SliceAxes ax = check_slice(g, axis, index);
  Image img;
  img.width = g.extent[ax.u];
  img.height = g.extent[ax.v];
  img.channels = channels;
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * channels);
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      Index3 i{0, 0, 0};
      i[axis] = index;
      i[ax.u] = c;
      i[ax.v] = img.height - 1 - r;  // second axis increases upward
      pixel(g.linear(i), &img.pixels[(static_cast<std::size_t>(r) * img.width + c) * channels]);
    }
  return img;
}

// Black, red, yellow ramp; white stays reserved for invalid pixels.
void heat(double t, std::uint8_t* rgb) {
  const double s = 2.0 * t;
  rgb[0] = static_cast<std::uint8_t>(std::lround(255.0 * std::min(1.0, s)));
  rgb[1] = static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(s - 1.0, 0.0, 1.0)));
  rgb[2] = 0;
}

}  // namespace

Image render_slice(const ScalarField& field, const SliceOptions& o) {
  const GridGeometry& g = field.geometry;
  check_slice(g, o.axis, o.index);
  double lo = 0.0, hi = 0.0;
  if (o.range) {
    std::tie(lo, hi) = *o.range;
    if (!(hi >= lo)) throw Error(Errc::InvalidArgument, "display range must satisfy lo <= hi");
  } else {
    std::vector<double> vals;
    for (std::size_t l = 0; l < field.size(); ++l)
      if (field.valid[l] && std::isfinite(field.values[l])) vals.push_back(field.values[l]);
    if (!vals.empty())
      hi = o.range_mode == RangeMode::ZeroToP90 ? percentile(vals, 90.0, PercentileMode::Exact)
                                                : *std::max_element(vals.begin(), vals.end());
    hi = std::max(hi, 0.0);
  }
  const int channels = o.color == ColorMap::Gray ? 1 : 3;
  return render(g, o.axis, o.index, channels, [&](std::size_t l, std::uint8_t* px) {
    const double x = field.values[l];
    if (!field.valid[l] || !std::isfinite(x)) {
      std::fill(px, px + channels, std::uint8_t{255});
      return;
    }
    const double t = hi > lo ? std::clamp((x - lo) / (hi - lo), 0.0, 1.0) : 0.0;
    if (channels == 1) px[0] = static_cast<std::uint8_t>(std::lround(254.0 * t));
    else heat(t, px);
  });
}

Image render_mask(const DomainMask& mask, int axis, int index) {
  return render(mask.geometry, axis, index, 1,
                [&](std::size_t l, std::uint8_t* px) { px[0] = mask.inside[l] ? 255 : 0; });
}

void write_pnm(const std::filesystem::path& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw Error(Errc::InvalidArgument, "images need 1 or 3 channels");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  out << (img.channels == 1 ? "P5" : "P6") << '\n' << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
}

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::string magic;
  int maxval = 0;
  Image img;
  in >> magic >> img.width >> img.height >> maxval;
  if (!in || (magic != "P5" && magic != "P6") || maxval != 255 || img.width <= 0 || img.height <= 0)
    throw Error(Errc::HeaderMismatch, "unsupported pixmap " + path.string());
  in.get();
  img.channels = magic == "P5" ? 1 : 3;
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height * img.channels);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!in) throw Error(Errc::TruncatedPayload, "short pixmap " + path.string());
  return img;
}

}  // namespace dvfinv
