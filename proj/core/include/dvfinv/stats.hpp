#pragma once

#include <span>
#include <vector>

#include "dvfinv/grid.hpp"

namespace dvfinv {

enum class PercentileMode { Histogram, Exact };

inline constexpr int kDefaultHistogramBins = 4096;

inline const std::vector<double>& default_percentile_levels() {
  static const std::vector<double> levels{2.0, 10.0, 50.0, 90.0, 95.0, 98.0};
  return levels;
}

// beta-th percentile as the smallest tau whose cumulative fraction exceeds
// beta%. Exact mode selects the order statistic; histogram mode returns the
// upper edge of the first bin crossing beta% (within one bin width of exact).
double percentile(std::span<const double> samples, double beta,
                  PercentileMode mode = PercentileMode::Histogram,
                  int bins = kDefaultHistogramBins);

// Valid samples of `field`, optionally restricted to `domain`.
std::vector<double> gather(const ScalarField& field, const DomainMask* domain = nullptr);

double percentile(const ScalarField& field, double beta,
                  PercentileMode mode = PercentileMode::Histogram,
                  const DomainMask* domain = nullptr, int bins = kDefaultHistogramBins);

struct PercentileSummary {
  std::vector<double> levels;
  std::vector<double> values;
  std::size_t count = 0;
  double invalid_fraction = 0.0;
};

// Percentiles at `levels`. With `complement` set, the value reported for
// level beta is the (100 - beta)-th percentile (used for determinant maps so
// that small values, i.e. compression, appear at the upper levels).
PercentileSummary summarize(const ScalarField& field, const DomainMask* domain = nullptr,
                            const std::vector<double>& levels = default_percentile_levels(),
                            PercentileMode mode = PercentileMode::Histogram,
                            bool complement = false);

PercentileSummary summarize(std::span<const double> samples, std::size_t invalid,
                            const std::vector<double>& levels = default_percentile_levels(),
                            PercentileMode mode = PercentileMode::Histogram);

}  // namespace dvfinv
