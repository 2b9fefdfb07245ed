#include "nuemt/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nuemt/errors.hpp"
#include "nuemt/random.hpp"

namespace nuemt {

namespace {

double wrap_angle(double angle) {
  // Into [-pi, pi).
  const double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  return a - std::numbers::pi;
}

void check_action(const EnvSpec& spec, std::span<const double> action) {
  require(action.size() == spec.action_dim,
          spec.id + ": action has " + std::to_string(action.size()) + " entries, expected " +
              std::to_string(spec.action_dim));
}

}  // namespace

// ---------------------------------------------------------------------------

LinearActuator::LinearActuator(Params params) : params_(params) {
  spec_ = EnvSpec{"linear_actuator", 1, 1, {-1.0}, {1.0}, params_.max_horizon, params_.dt};
}

void LinearActuator::reset(std::uint64_t /*seed*/, std::span<double> obs) {
  x_ = params_.start;
  obs[0] = x_;
}

StepOutcome LinearActuator::step(std::span<const double> action, std::span<double> obs) {
  check_action(spec_, action);
  x_ += action[0] * params_.dt;
  obs[0] = x_;
  const double err = x_ - params_.goal;
  return {-err * err, false};
}

// ---------------------------------------------------------------------------

CorridorDash::CorridorDash(Params params) : params_(params) {
  spec_ = EnvSpec{"corridor_dash", 6, 2, {-1.0, -1.0}, {1.0, 1.0}, params_.max_horizon,
                  params_.dt};
  // The gate layout depends only on the layout seed, never on the episode.
  gate_x_.resize(params_.gate_count);
  gap_y_.resize(params_.gate_count);
  for (std::size_t g = 0; g < params_.gate_count; ++g) {
    gate_x_[g] = params_.first_gate + params_.gate_spacing * static_cast<double>(g);
    const double u = bits_to_unit(derive_seed(params_.layout_seed, {g}));
    gap_y_[g] = params_.gap_range * (2.0 * u - 1.0);
  }
}

void CorridorDash::reset(std::uint64_t seed, std::span<double> obs) {
  Rng rng(derive_seed(seed, {0xC0DDu}));
  x_ = 0.0;
  y_ = rng.uniform(-0.1, 0.1);
  vx_ = rng.uniform(0.0, 0.1);
  vy_ = rng.uniform(-0.05, 0.05);
  best_x_ = x_;
  next_gate_ = 0;
  collisions_ = 0;
  observe(obs);
}

void CorridorDash::observe(std::span<double> obs) const {
  constexpr double kSightRange = 5.0;
  obs[0] = vx_;
  obs[1] = vy_;
  obs[2] = y_;
  if (next_gate_ < gate_x_.size()) {
    obs[3] = std::min(gate_x_[next_gate_] - x_, kSightRange);
    obs[4] = gap_y_[next_gate_] - y_;
  } else {
    obs[3] = kSightRange;
    obs[4] = 0.0;
  }
  obs[5] = next_gate_ + 1 < gate_x_.size() ? gap_y_[next_gate_ + 1] - y_ : 0.0;
}

StepOutcome CorridorDash::step(std::span<const double> action, std::span<double> obs) {
  check_action(spec_, action);
  const double dt = params_.dt;
  const double ax = params_.thrust * action[0] - params_.drag * vx_;
  const double ay = params_.thrust * action[1] - params_.drag * vy_;

  double x_new = x_ + vx_ * dt;
  double y_new = y_ + vy_ * dt;
  vx_ += ax * dt;
  vy_ += ay * dt;

  if (std::abs(y_new) > params_.half_width) {
    y_new = std::copysign(params_.half_width, y_new);
    vy_ = 0.0;
  }
  if (x_new < -params_.knockback) {
    x_new = -params_.knockback;
    vx_ = 0.0;
  }

  auto passes = [&](std::size_t gate) {
    const double t = (gate_x_[gate] - x_) / (x_new - x_);
    const double y_cross = y_ + t * (y_new - y_);
    return std::abs(y_cross - gap_y_[gate]) <= params_.gap_half_width;
  };

  // Forward crossings; x_ < gate_x_[next_gate_] holds on entry.
  while (next_gate_ < gate_x_.size() && x_new >= gate_x_[next_gate_]) {
    if (passes(next_gate_)) {
      ++next_gate_;
      continue;
    }
    x_new = gate_x_[next_gate_] - params_.knockback;
    vx_ = 0.0;
    ++collisions_;
    break;
  }
  // Backward crossings through gates already passed.
  while (next_gate_ > 0 && x_new < gate_x_[next_gate_ - 1]) {
    const std::size_t gate = next_gate_ - 1;
    if (passes(gate)) {
      --next_gate_;
      continue;
    }
    x_new = gate_x_[gate] + 1e-9;
    vx_ = 0.0;
    ++collisions_;
    break;
  }

  x_ = x_new;
  y_ = y_new;
  const double progress = std::max(0.0, x_ - best_x_);
  best_x_ = std::max(best_x_, x_);
  observe(obs);
  return {progress, false};
}

// ---------------------------------------------------------------------------

CartPoleSwingUp::CartPoleSwingUp(Params params) : params_(params) {
  spec_ = EnvSpec{"cartpole_swingup", 5, 1, {-1.0}, {1.0}, params_.max_horizon, params_.dt};
}

void CartPoleSwingUp::reset(std::uint64_t seed, std::span<double> obs) {
  Rng rng(derive_seed(seed, {0xCA27u}));
  x_ = rng.uniform(-0.05, 0.05);
  x_dot_ = rng.uniform(-0.05, 0.05);
  angle_ = std::numbers::pi + rng.uniform(-0.05, 0.05);
  angle_dot_ = rng.uniform(-0.05, 0.05);
  observe(obs);
}

void CartPoleSwingUp::observe(std::span<double> obs) const {
  obs[0] = x_;
  obs[1] = x_dot_;
  obs[2] = std::cos(angle_);
  obs[3] = std::sin(angle_);
  obs[4] = angle_dot_;
}

StepOutcome CartPoleSwingUp::step(std::span<const double> action, std::span<double> obs) {
  check_action(spec_, action);
  const auto& p = params_;
  const double force = p.force_scale * action[0];
  const double total_mass = p.cart_mass + p.pole_mass;
  const double pole_moment = p.pole_mass * p.half_length;
  const double s = std::sin(angle_);
  const double c = std::cos(angle_);

  const double temp = (force + pole_moment * angle_dot_ * angle_dot_ * s) / total_mass;
  const double angle_acc =
      (p.gravity * s - c * temp) /
      (p.half_length * (4.0 / 3.0 - p.pole_mass * c * c / total_mass));
  const double x_acc = temp - pole_moment * angle_acc * c / total_mass;

  x_ += p.dt * x_dot_;
  x_dot_ += p.dt * x_acc;
  angle_ += p.dt * angle_dot_;
  angle_dot_ += p.dt * angle_acc;
  observe(obs);

  if (std::abs(x_) > p.track_limit) return {0.0, true};
  const double upright = 0.5 * (1.0 + std::cos(angle_));
  const double centred = std::max(0.0, 1.0 - (x_ / p.track_limit) * (x_ / p.track_limit));
  return {upright * (0.5 + 0.5 * centred), false};
}

// ---------------------------------------------------------------------------

PendulumSwingUp::PendulumSwingUp(Params params) : params_(params) {
  spec_ = EnvSpec{"pendulum_swingup", 3, 1, {-params_.max_torque}, {params_.max_torque},
                  params_.max_horizon, params_.dt};
}

void PendulumSwingUp::reset(std::uint64_t seed, std::span<double> obs) {
  Rng rng(derive_seed(seed, {0x9E4Du}));
  angle_ = std::numbers::pi + rng.uniform(-0.1, 0.1);
  angle_dot_ = rng.uniform(-0.1, 0.1);
  observe(obs);
}

void PendulumSwingUp::observe(std::span<double> obs) const {
  obs[0] = std::cos(angle_);
  obs[1] = std::sin(angle_);
  obs[2] = angle_dot_;
}

StepOutcome PendulumSwingUp::step(std::span<const double> action, std::span<double> obs) {
  check_action(spec_, action);
  const auto& p = params_;
  const double torque = std::clamp(action[0], -p.max_torque, p.max_torque);
  const double err = wrap_angle(angle_);
  const double cost = err * err + 0.1 * angle_dot_ * angle_dot_ + 0.001 * torque * torque;

  const double angle_acc = 3.0 * p.gravity / (2.0 * p.length) * std::sin(angle_) +
                           3.0 / (p.mass * p.length * p.length) * torque;
  angle_ += p.dt * angle_dot_;
  angle_dot_ = std::clamp(angle_dot_ + p.dt * angle_acc, -p.max_speed, p.max_speed);
  observe(obs);
  return {-cost, false};
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& registered_environments() {
  static const std::vector<std::string> ids{"corridor_dash", "cartpole_swingup",
                                            "pendulum_swingup", "linear_actuator"};
  return ids;
}

std::unique_ptr<Environment> make_environment(std::string_view id) {
  if (id == "corridor_dash") return std::make_unique<CorridorDash>();
  if (id == "cartpole_swingup") return std::make_unique<CartPoleSwingUp>();
  if (id == "pendulum_swingup") return std::make_unique<PendulumSwingUp>();
  if (id == "linear_actuator") return std::make_unique<LinearActuator>();
  throw ConfigError("env_id", "unknown environment '" + std::string(id) + "'");
}

EnvSpec environment_spec(std::string_view id) { return make_environment(id)->spec(); }

PolicySpec policy_for(const EnvSpec& env, std::vector<std::size_t> hidden_sizes) {
  PolicySpec spec;
  spec.obs_dim = env.obs_dim;
  spec.action_dim = env.action_dim;
  spec.hidden_sizes = std::move(hidden_sizes);
  spec.action_low = env.action_low;
  spec.action_high = env.action_high;
  spec.validate();
  return spec;
}

RolloutResult rollout(Environment& env, PolicyNetwork& policy, std::span<const double> params,
                      std::size_t horizon, std::uint64_t seed, const RunningNormalizer& norm,
                      bool record_observations) {
  const EnvSpec& spec = env.spec();
  require(horizon >= 1 && horizon <= spec.max_horizon,
          spec.id + ": horizon " + std::to_string(horizon) + " outside [1, " +
              std::to_string(spec.max_horizon) + "]");
  require(policy.spec().obs_dim == spec.obs_dim && policy.spec().action_dim == spec.action_dim,
          spec.id + ": policy dimensions do not match the environment");

  RolloutResult result;
  if (record_observations) result.observations.reserve(horizon * spec.obs_dim);
  std::vector<double> obs(spec.obs_dim);
  env.reset(seed, obs);
  for (std::size_t t = 0; t < horizon; ++t) {
    if (record_observations) result.observations.insert(result.observations.end(), obs.begin(), obs.end());
    const auto action = policy.act(params, obs, norm);
    const StepOutcome out = env.step(action, obs);
    result.episode.total_return += out.reward;
    ++result.episode.timesteps_used;
    if (out.terminated) break;
  }
  return result;
}

RolloutResult rollout(std::string_view env_id, const PolicySpec& policy,
                      std::span<const double> params, std::size_t horizon, std::uint64_t seed,
                      const RunningNormalizer& norm) {
  auto env = make_environment(env_id);
  PolicyNetwork net(policy);
  return rollout(*env, net, params, horizon, seed, norm);
}

}  // namespace nuemt
