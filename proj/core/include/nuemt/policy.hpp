#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nuemt {

// Flat policy parameters; the only thing the optimizers ever see.
using ParamVector = std::vector<double>;

bool all_finite(std::span<const double> values) noexcept;

// Fully connected tanh network from observations to bounded actions.
struct PolicySpec {
  std::size_t obs_dim = 0;
  std::size_t action_dim = 0;
  std::vector<std::size_t> hidden_sizes{64, 64};
  std::vector<double> action_low;
  std::vector<double> action_high;

  // Throws ContractViolation on zero dims or inverted bounds.
  void validate() const;

  // Layer widths including input and output: {obs, h1, ..., action}.
  std::vector<std::size_t> layer_sizes() const;
};

// Sum over layers of (fan_in + 1) * fan_out.
std::size_t parameter_count(const PolicySpec& spec);

// One dense layer. `weights` is fan_out x fan_in, row-major.
struct LayerWeights {
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  bool operator==(const LayerWeights&) const = default;
};

// Flat layout: for each layer in order, weights (row-major) then bias.
ParamVector flatten(std::span<const LayerWeights> layers);
std::vector<LayerWeights> unflatten(const PolicySpec& spec, std::span<const double> params);

// Running mean/variance of observations (Welford, mergeable via Chan et al.).
class RunningNormalizer {
 public:
  static constexpr double kEpsilon = 1e-8;

  RunningNormalizer() = default;
  explicit RunningNormalizer(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}
  RunningNormalizer(std::uint64_t count, std::vector<double> mean, std::vector<double> m2);

  std::size_t dim() const noexcept { return mean_.size(); }
  std::uint64_t count() const noexcept { return count_; }
  const std::vector<double>& mean() const noexcept { return mean_; }
  const std::vector<double>& m2() const noexcept { return m2_; }

  // Population variance m2/count; zero when count == 0.
  std::vector<double> variance() const;

  void push(std::span<const double> observation);
  // `observations` is row-major, dim() values per row.
  void push_rows(std::span<const double> observations);
  void merge(const RunningNormalizer& other);

  // (x - mean) / sqrt(var + eps); identity while count == 0.
  void normalize(std::span<const double> observation, std::span<double> out) const;

 private:
  std::uint64_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

// Functional form of a batch update; an empty batch returns `norm` unchanged.
RunningNormalizer normalizer_update(const RunningNormalizer& norm,
                                    std::span<const std::vector<double>> batch);

// Evaluates a policy with reusable scratch buffers. Not thread-safe; give each
// worker its own instance.
class PolicyNetwork {
 public:
  explicit PolicyNetwork(PolicySpec spec);

  const PolicySpec& spec() const noexcept { return spec_; }
  std::size_t parameter_count() const noexcept { return param_count_; }

  // Returns a view into internal storage valid until the next call.
  std::span<const double> act(std::span<const double> params, std::span<const double> obs,
                              const RunningNormalizer& norm);

 private:
  PolicySpec spec_;
  std::vector<std::size_t> sizes_;
  std::size_t param_count_ = 0;
  std::vector<double> buffer_a_;
  std::vector<double> buffer_b_;
  std::vector<double> action_;
};

// Convenience wrapper allocating a fresh network per call.
std::vector<double> forward(const PolicySpec& spec, std::span<const double> params,
                            std::span<const double> obs, const RunningNormalizer& norm);

}  // namespace nuemt
