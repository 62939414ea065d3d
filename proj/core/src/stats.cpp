#include "dvfinv/stats.hpp"

#include <algorithm>
#include <cmath>

#include "dvfinv/error.hpp"

namespace dvfinv {
namespace {

void check_level(double beta) {
  if (!(beta > 0.0 && beta < 100.0))
    throw Error(Errc::InvalidArgument, "percentile level must lie in (0, 100)");
}

void check_levels(const std::vector<double>& levels) {
  for (std::size_t i = 0; i < levels.size(); ++i) {
    check_level(levels[i]);
    if (i > 0 && !(levels[i] > levels[i - 1]))
      throw Error(Errc::InvalidArgument, "percentile levels must be strictly increasing");
  }
}

// Smallest count k with k / n > beta / 100.
std::size_t crossing_count(std::size_t n, double beta) {
  const double target = beta * static_cast<double>(n);
  std::size_t k = static_cast<std::size_t>(std::floor(target / 100.0));
  while (k > 0 && static_cast<double>(k) * 100.0 > target) --k;
  while (static_cast<double>(k) * 100.0 <= target) ++k;
  return std::min(k, n);
}

double exact_percentile(std::span<const double> samples, double beta) {
  std::vector<double> v(samples.begin(), samples.end());
  const std::size_t k = crossing_count(v.size(), beta);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k - 1), v.end());
  return v[k - 1];
}

double histogram_percentile(std::span<const double> samples, double beta, int bins) {
  const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
  const double mn = *mn_it, mx = *mx_it;
  if (mn == mx) return mn;
  const double width = (mx - mn) / bins;
  std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
  for (double s : samples) {
    auto b = static_cast<long>((s - mn) / width);
    b = std::clamp<long>(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const double target = beta * static_cast<double>(samples.size());
  std::size_t cum = 0;
  for (int b = 0; b < bins; ++b) {
    cum += counts[static_cast<std::size_t>(b)];
    if (static_cast<double>(cum) * 100.0 > target) return std::min(mx, mn + (b + 1) * width);
  }
  return mx;
}

}  // namespace

double percentile(std::span<const double> samples, double beta, PercentileMode mode, int bins) {
  check_level(beta);
  if (samples.empty()) throw Error(Errc::EmptyField, "no valid samples for percentile");
  if (bins < 1) throw Error(Errc::InvalidArgument, "histogram needs at least one bin");
  return mode == PercentileMode::Exact ? exact_percentile(samples, beta)
                                       : histogram_percentile(samples, beta, bins);
}

std::vector<double> gather(const ScalarField& field, const DomainMask* domain) {
  if (domain && !(domain->geometry == field.geometry))
    throw Error(Errc::GeometryMismatch, "domain geometry differs from field");
  std::vector<double> out;
  out.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (domain && !domain->inside[i]) continue;
    if (field.valid[i]) out.push_back(field.values[i]);
  }
  return out;
}

double percentile(const ScalarField& field, double beta, PercentileMode mode,
                  const DomainMask* domain, int bins) {
  const auto samples = gather(field, domain);
  return percentile(samples, beta, mode, bins);
}

PercentileSummary summarize(std::span<const double> samples, std::size_t invalid,
                            const std::vector<double>& levels, PercentileMode mode) {
  check_levels(levels);
  PercentileSummary s;
  s.levels = levels;
  s.count = samples.size();
  const double total = static_cast<double>(samples.size() + invalid);
  s.invalid_fraction = total > 0 ? static_cast<double>(invalid) / total : 0.0;
  if (samples.empty()) throw Error(Errc::EmptyField, "no valid samples to summarize");
  if (mode == PercentileMode::Exact) {
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    for (double beta : levels) s.values.push_back(sorted[crossing_count(sorted.size(), beta) - 1]);
  } else {
    for (double beta : levels) s.values.push_back(histogram_percentile(samples, beta, kDefaultHistogramBins));
  }
  return s;
}

PercentileSummary summarize(const ScalarField& field, const DomainMask* domain,
                            const std::vector<double>& levels, PercentileMode mode, bool complement) {
  const auto samples = gather(field, domain);
  const std::size_t considered = domain ? domain->count() : field.size();
  const std::size_t invalid = considered - samples.size();
  if (!complement) return summarize(samples, invalid, levels, mode);

  std::vector<double> flipped(levels.rbegin(), levels.rend());
  for (double& b : flipped) b = 100.0 - b;
  PercentileSummary s = summarize(samples, invalid, flipped, mode);
  std::reverse(s.values.begin(), s.values.end());
  s.levels = levels;
  return s;
}

}  // namespace dvfinv
