#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nuemt/policy.hpp"

namespace nuemt {

// Read-only table of standard-normal draws. Entry k depends only on
// (seed, k), so any worker can rebuild a perturbation from its offset.
class NoiseTable {
 public:
  static constexpr std::size_t kDefaultLength = std::size_t{1} << 25;

  explicit NoiseTable(std::uint64_t seed, std::size_t length = kDefaultLength);

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t size() const noexcept { return values_.size(); }
  float operator[](std::size_t k) const noexcept { return values_[k]; }
  std::span<const float> slice(std::size_t offset, std::size_t count) const;

  // The value stored at position k for a given seed, computed from scratch.
  static float entry_at(std::uint64_t seed, std::size_t k) noexcept;

 private:
  std::uint64_t seed_;
  std::vector<float> values_;
};

// Search distribution of one task: an equal-variance Gaussian mixture whose
// last component is the task's own distribution p_i and whose earlier
// components are the distributions of the tasks before it.
struct MixtureState {
  std::vector<ParamVector> means;
  double sigma = 0.02;
  std::vector<double> weights;

  static constexpr double kSelfFloor = 1e-3;

  std::size_t components() const noexcept { return means.size(); }
  std::size_t self_component() const noexcept { return means.size() - 1; }
  std::size_t dimension() const noexcept { return means.front().size(); }

  // Throws ContractViolation when the mixture is malformed or the weights are
  // off the simplex (sum within 1e-9, nonnegative, self weight >= self_floor).
  void validate(double self_floor = kSelfFloor) const;
};

struct SampleRecord {
  std::size_t index = 0;
  std::size_t component = 0;  // which mixture component produced the sample
  std::size_t noise_offset = 0;
  int sign = 1;  // mirror sign
  std::uint64_t episode_seed = 0;
  double fitness = 0.0;
  double utility = 0.0;
  std::size_t timesteps = 0;
};

// Even per-component counts summing to `total`: pairs are apportioned by
// largest remainder of (total/2) * w_j, ties going to the lower index.
std::vector<std::size_t> stratified_counts(std::span<const double> weights, std::size_t total);

// Mirrored, stratified draw of `count` samples from the mixture. Records are
// grouped by component in ascending order with each +/- pair adjacent.
// Deterministic in (mixture weights, count, table, iteration_seed, task).
std::vector<SampleRecord> sample_population(const MixtureState& mix, std::size_t count,
                                            const NoiseTable& table,
                                            std::uint64_t iteration_seed, std::size_t task);

// theta = means[component] + sign * sigma * eps(offset)
void reconstruct(const ParamVector& mean, double sigma, const NoiseTable& table,
                 std::size_t offset, int sign, std::span<double> out);
ParamVector reconstruct(const MixtureState& mix, const NoiseTable& table,
                        const SampleRecord& record);

// p_j(theta) / sum_l w_l p_l(theta), computed in the log domain.
double density_ratio(std::size_t component, std::span<const double> theta,
                     const MixtureState& mix);
// All numerators at once; entry j is density_ratio(j, theta, mix).
std::vector<double> density_ratios(std::span<const double> theta, const MixtureState& mix);

// Pulls theta back to Mahalanobis radius r around `centre`, keeping its
// direction; points already inside are returned unchanged.
ParamVector mahalanobis_project(std::span<const double> theta, std::span<const double> centre,
                                double sigma, double radius = 1.0);

}  // namespace nuemt
