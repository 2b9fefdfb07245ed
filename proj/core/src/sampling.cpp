#include "nuemt/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "nuemt/errors.hpp"
#include "nuemt/random.hpp"

namespace nuemt {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return sq;
}

}  // namespace

// ---------------------------------------------------------------------------

NoiseTable::NoiseTable(std::uint64_t seed, std::size_t length) : seed_(seed) {
  require(length >= 2, "noise table needs at least two entries");
  values_.resize(length);
  for (std::size_t k = 0; k < length; ++k) values_[k] = entry_at(seed, k);
}

std::span<const float> NoiseTable::slice(std::size_t offset, std::size_t count) const {
  require(offset + count <= values_.size(), "noise slice runs past the end of the table");
  return std::span<const float>(values_).subspan(offset, count);
}

float NoiseTable::entry_at(std::uint64_t seed, std::size_t k) noexcept {
  // Box-Muller on a counter-based pair: entries 2m and 2m+1 share one draw.
  const std::uint64_t pair = k / 2;
  const std::uint64_t bits_a = derive_seed(seed, {pair, 0});
  const std::uint64_t bits_b = derive_seed(seed, {pair, 1});
  const double u1 = (static_cast<double>(bits_a >> 11) + 0.5) * 0x1.0p-53;
  const double u2 = bits_to_unit(bits_b);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return static_cast<float>(k % 2 == 0 ? radius * std::cos(angle) : radius * std::sin(angle));
}

// ---------------------------------------------------------------------------

void MixtureState::validate(double self_floor) const {
  require(!means.empty(), "mixture needs at least one component");
  require(weights.size() == means.size(), "mixture weights and means differ in length");
  require(sigma > 0.0 && std::isfinite(sigma), "mixture sigma must be positive");
  const std::size_t n = means.front().size();
  for (const auto& m : means) {
    require(m.size() == n, "mixture means differ in dimension");
    require(all_finite(m), "mixture mean has non-finite entries");
  }
  double sum = 0.0;
  for (double w : weights) {
    require(w >= 0.0 && std::isfinite(w), "mixture weights must be nonnegative");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= 1e-9, "mixture weights must sum to one");
  require(weights.back() >= self_floor * (1.0 - 1e-12),
          "self weight below its floor");
}

std::vector<std::size_t> stratified_counts(std::span<const double> weights, std::size_t total) {
  require(total % 2 == 0, "population size must be even for mirrored sampling, got " +
                              std::to_string(total));
  require(!weights.empty(), "stratified_counts needs weights");
  const std::size_t pairs = total / 2;
  const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(wsum > 0.0, "stratified_counts needs a positive weight sum");

  std::vector<std::size_t> alloc(weights.size());
  std::vector<double> remainder(weights.size());
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double quota = static_cast<double>(pairs) * weights[j] / wsum;
    alloc[j] = static_cast<std::size_t>(std::floor(quota));
    remainder[j] = quota - static_cast<double>(alloc[j]);
    assigned += alloc[j];
  }
  // Float error can push the floors one over; take back from the smallest remainder.
  while (assigned > pairs) {
    std::size_t best = 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < alloc.size(); ++j) {
      if (alloc[j] > 0 && remainder[j] < lowest) {
        lowest = remainder[j];
        best = j;
      }
    }
    --alloc[best];
    remainder[best] += 1.0;
    --assigned;
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t r = 0; assigned < pairs; ++r, ++assigned) ++alloc[order[r % order.size()]];

  for (auto& c : alloc) c *= 2;
  return alloc;
}

std::vector<SampleRecord> sample_population(const MixtureState& mix, std::size_t count,
                                            const NoiseTable& table,
                                            std::uint64_t iteration_seed, std::size_t task) {
  require(count % 2 == 0, "population size must be even for mirrored sampling, got " +
                              std::to_string(count));
  require(!mix.means.empty() && mix.weights.size() == mix.means.size(),
          "sample_population: malformed mixture");
  const std::size_t n = mix.dimension();
  require(table.size() >= n, "noise table shorter than the parameter vector");

  const auto counts = stratified_counts(mix.weights, count);
  Rng rng(derive_seed(iteration_seed, {task, 0x5A3Bu}));
  const std::uint64_t offsets = table.size() - n + 1;

  std::vector<SampleRecord> records;
  records.reserve(count);
  std::size_t pair = 0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    for (std::size_t c = 0; c < counts[j]; c += 2, ++pair) {
      const std::size_t offset = static_cast<std::size_t>(rng.index(offsets));
      // Mirrored partners share an episode seed (common random numbers).
      const std::uint64_t episode = derive_seed(iteration_seed, {task, pair, 0xE915u});
      for (int sign : {+1, -1}) {
        SampleRecord r;
        r.index = records.size();
        r.component = j;
        r.noise_offset = offset;
        r.sign = sign;
        r.episode_seed = episode;
        records.push_back(r);
      }
    }
  }
  return records;
}

void reconstruct(const ParamVector& mean, double sigma, const NoiseTable& table,
                 std::size_t offset, int sign, std::span<double> out) {
  require(out.size() == mean.size(), "reconstruct: output has the wrong length");
  const auto eps = table.slice(offset, mean.size());
  const double scale = static_cast<double>(sign) * sigma;
  for (std::size_t i = 0; i < mean.size(); ++i) {
    out[i] = mean[i] + scale * static_cast<double>(eps[i]);
  }
}

ParamVector reconstruct(const MixtureState& mix, const NoiseTable& table,
                        const SampleRecord& record) {
  require(record.component < mix.components(), "sample component out of range");
  ParamVector theta(mix.dimension());
  reconstruct(mix.means[record.component], mix.sigma, table, record.noise_offset, record.sign,
              theta);
  return theta;
}

std::vector<double> density_ratios(std::span<const double> theta, const MixtureState& mix) {
  require(mix.sigma > 0.0, "density_ratio: sigma must be positive");
  require(!mix.means.empty() && mix.weights.size() == mix.means.size(),
          "density_ratio: malformed mixture");
  const std::size_t k = mix.components();
  const double inv_two_var = 1.0 / (2.0 * mix.sigma * mix.sigma);

  // Shared sigma^2 I covariance: normalizing constants cancel, only the
  // exponents -||theta - mean_l||^2 / (2 sigma^2) matter.
  std::vector<double> neg_log(k);
  double shift = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < k; ++l) {
    require(mix.means[l].size() == theta.size(), "density_ratio: dimension mismatch");
    neg_log[l] = squared_distance(theta, mix.means[l]) * inv_two_var;
    if (mix.weights[l] > 0.0) shift = std::min(shift, neg_log[l]);
  }
  require(std::isfinite(shift), "density_ratio: mixture has no positively weighted component");

  double denom = 0.0;
  for (std::size_t l = 0; l < k; ++l) {
    if (mix.weights[l] > 0.0) denom += mix.weights[l] * std::exp(shift - neg_log[l]);
  }
  std::vector<double> ratios(k);
  for (std::size_t j = 0; j < k; ++j) ratios[j] = std::exp(shift - neg_log[j]) / denom;
  return ratios;
}

double density_ratio(std::size_t component, std::span<const double> theta,
                     const MixtureState& mix) {
  require(component < mix.components(), "density_ratio: component out of range");
  return density_ratios(theta, mix)[component];
}

ParamVector mahalanobis_project(std::span<const double> theta, std::span<const double> centre,
                                double sigma, double radius) {
  require(sigma > 0.0, "mahalanobis_project: sigma must be positive");
  require(radius > 0.0, "mahalanobis_project: radius must be positive");
  require(theta.size() == centre.size(), "mahalanobis_project: dimension mismatch");
  const double distance = std::sqrt(squared_distance(theta, centre)) / sigma;
  ParamVector out(theta.begin(), theta.end());
  if (distance <= radius) return out;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    out[i] = centre[i] + (theta[i] - centre[i]) * radius / distance;
  }
  return out;
}

}  // namespace nuemt
