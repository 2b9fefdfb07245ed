#include "nuemt/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nuemt/errors.hpp"

namespace nuemt {

namespace {

// tanh saturates to exactly +-1 in double precision; pull back by a hair so
// the rescaled action stays strictly inside its bounds.
constexpr double kSaturation = 1.0 - 1e-12;

}  // namespace

bool all_finite(std::span<const double> values) noexcept {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

void PolicySpec::validate() const {
  require(obs_dim > 0, "policy obs_dim must be positive");
  require(action_dim > 0, "policy action_dim must be positive");
  for (std::size_t h : hidden_sizes) require(h > 0, "policy hidden sizes must be positive");
  require(action_low.size() == action_dim && action_high.size() == action_dim,
          "policy action bounds must have action_dim entries");
  for (std::size_t i = 0; i < action_dim; ++i) {
    require(std::isfinite(action_low[i]) && std::isfinite(action_high[i]) &&
                action_low[i] < action_high[i],
            "policy action_low must be below action_high in every dimension");
  }
}

std::vector<std::size_t> PolicySpec::layer_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(hidden_sizes.size() + 2);
  sizes.push_back(obs_dim);
  sizes.insert(sizes.end(), hidden_sizes.begin(), hidden_sizes.end());
  sizes.push_back(action_dim);
  return sizes;
}

std::size_t parameter_count(const PolicySpec& spec) {
  const auto sizes = spec.layer_sizes();
  std::size_t total = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) total += (sizes[l] + 1) * sizes[l + 1];
  return total;
}

ParamVector flatten(std::span<const LayerWeights> layers) {
  ParamVector out;
  for (const auto& layer : layers) {
    require(layer.weights.size() == layer.fan_in * layer.fan_out &&
                layer.bias.size() == layer.fan_out,
            "layer weight shapes do not match fan_in/fan_out");
    out.insert(out.end(), layer.weights.begin(), layer.weights.end());
    out.insert(out.end(), layer.bias.begin(), layer.bias.end());
  }
  return out;
}

std::vector<LayerWeights> unflatten(const PolicySpec& spec, std::span<const double> params) {
  require(params.size() == parameter_count(spec),
          "parameter vector has " + std::to_string(params.size()) + " entries, expected " +
              std::to_string(parameter_count(spec)));
  const auto sizes = spec.layer_sizes();
  std::vector<LayerWeights> layers;
  std::size_t at = 0;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    LayerWeights layer;
    layer.fan_in = sizes[l];
    layer.fan_out = sizes[l + 1];
    const std::size_t nw = layer.fan_in * layer.fan_out;
    layer.weights.assign(params.begin() + at, params.begin() + at + nw);
    at += nw;
    layer.bias.assign(params.begin() + at, params.begin() + at + layer.fan_out);
    at += layer.fan_out;
    layers.push_back(std::move(layer));
  }
  return layers;
}

RunningNormalizer::RunningNormalizer(std::uint64_t count, std::vector<double> mean,
                                     std::vector<double> m2)
    : count_(count), mean_(std::move(mean)), m2_(std::move(m2)) {
  require(mean_.size() == m2_.size(), "normalizer mean and m2 must have equal length");
  for (double v : m2_) require(v >= 0.0, "normalizer m2 must be nonnegative");
}

std::vector<double> RunningNormalizer::variance() const {
  std::vector<double> var(dim(), 0.0);
  if (count_ == 0) return var;
  for (std::size_t i = 0; i < dim(); ++i) var[i] = m2_[i] / static_cast<double>(count_);
  return var;
}

void RunningNormalizer::push(std::span<const double> observation) {
  require(observation.size() == dim(), "observation has " + std::to_string(observation.size()) +
                                           " entries, normalizer expects " +
                                           std::to_string(dim()));
  ++count_;
  const double n = static_cast<double>(count_);
  for (std::size_t i = 0; i < dim(); ++i) {
    const double delta = observation[i] - mean_[i];
    mean_[i] += delta / n;
    m2_[i] += delta * (observation[i] - mean_[i]);
  }
}

void RunningNormalizer::push_rows(std::span<const double> observations) {
  if (dim() == 0) return;
  require(observations.size() % dim() == 0, "observation trace length is not a multiple of dim");
  for (std::size_t at = 0; at < observations.size(); at += dim()) {
    push(observations.subspan(at, dim()));
  }
}

void RunningNormalizer::merge(const RunningNormalizer& other) {
  require(other.dim() == dim(), "cannot merge normalizers of different dimension");
  if (other.count_ == 0) return;
  if (count_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(count_);
  const double nb = static_cast<double>(other.count_);
  const double n = na + nb;
  for (std::size_t i = 0; i < dim(); ++i) {
    const double delta = other.mean_[i] - mean_[i];
    mean_[i] += delta * (nb / n);
    m2_[i] += other.m2_[i] + delta * delta * (na * nb / n);
  }
  count_ += other.count_;
}

void RunningNormalizer::normalize(std::span<const double> observation,
                                  std::span<double> out) const {
  require(observation.size() == dim() && out.size() == dim(),
          "normalize: observation has " + std::to_string(observation.size()) +
              " entries, expected " + std::to_string(dim()));
  if (count_ == 0) {
    std::copy(observation.begin(), observation.end(), out.begin());
    return;
  }
  const double n = static_cast<double>(count_);
  for (std::size_t i = 0; i < dim(); ++i) {
    out[i] = (observation[i] - mean_[i]) / std::sqrt(m2_[i] / n + kEpsilon);
  }
}

RunningNormalizer normalizer_update(const RunningNormalizer& norm,
                                    std::span<const std::vector<double>> batch) {
  RunningNormalizer delta(norm.dim());
  for (const auto& obs : batch) delta.push(obs);
  RunningNormalizer out = norm;
  out.merge(delta);
  return out;
}

PolicyNetwork::PolicyNetwork(PolicySpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  sizes_ = spec_.layer_sizes();
  param_count_ = nuemt::parameter_count(spec_);
  const std::size_t widest = *std::max_element(sizes_.begin(), sizes_.end());
  buffer_a_.resize(widest);
  buffer_b_.resize(widest);
  action_.resize(spec_.action_dim);
}

std::span<const double> PolicyNetwork::act(std::span<const double> params,
                                           std::span<const double> obs,
                                           const RunningNormalizer& norm) {
  require(params.size() == param_count_,
          "policy expects " + std::to_string(param_count_) + " parameters, got " +
              std::to_string(params.size()));
  require(obs.size() == spec_.obs_dim, "policy expects observations of length " +
                                           std::to_string(spec_.obs_dim) + ", got " +
                                           std::to_string(obs.size()));
  require(norm.dim() == spec_.obs_dim, "normalizer dimension does not match policy obs_dim");

  double* in = buffer_a_.data();
  double* out = buffer_b_.data();
  norm.normalize(obs, std::span<double>(in, spec_.obs_dim));

  const double* p = params.data();
  const std::size_t layers = sizes_.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t fan_in = sizes_[l];
    const std::size_t fan_out = sizes_[l + 1];
    const double* w = p;
    const double* b = p + fan_in * fan_out;
    for (std::size_t o = 0; o < fan_out; ++o) {
      const double* row = w + o * fan_in;
      double acc = b[o];
      for (std::size_t i = 0; i < fan_in; ++i) acc += row[i] * in[i];
      out[o] = std::tanh(acc);
    }
    p = b + fan_out;
    std::swap(in, out);
  }

  for (std::size_t a = 0; a < spec_.action_dim; ++a) {
    const double y = std::clamp(in[a], -kSaturation, kSaturation);
    const double mid = 0.5 * (spec_.action_low[a] + spec_.action_high[a]);
    const double half = 0.5 * (spec_.action_high[a] - spec_.action_low[a]);
    action_[a] = mid + half * y;
  }
  return action_;
}

std::vector<double> forward(const PolicySpec& spec, std::span<const double> params,
                            std::span<const double> obs, const RunningNormalizer& norm) {
  PolicyNetwork net(spec);
  const auto action = net.act(params, obs, norm);
  return {action.begin(), action.end()};
}

}  // namespace nuemt
