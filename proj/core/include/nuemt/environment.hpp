#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nuemt/policy.hpp"

namespace nuemt {

struct EnvSpec {
  std::string id;
  std::size_t obs_dim = 0;
  std::size_t action_dim = 0;
  std::vector<double> action_low;
  std::vector<double> action_high;
  std::size_t max_horizon = 0;  // H: no rollout may exceed this many steps
  double dt = 0.0;              // explicit Euler step
};

struct StepOutcome {
  double reward = 0.0;
  bool terminated = false;
};

// A deterministic control environment. Instances hold mutable episode state
// and are used by a single thread.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvSpec& spec() const noexcept = 0;
  // Starts an episode; `seed` drives any initial-state jitter.
  virtual void reset(std::uint64_t seed, std::span<double> obs) = 0;
  virtual StepOutcome step(std::span<const double> action, std::span<double> obs) = 0;
};

// Registry of shipped environments, addressed by string id.
std::unique_ptr<Environment> make_environment(std::string_view id);
EnvSpec environment_spec(std::string_view id);
const std::vector<std::string>& registered_environments();

// Policy architecture sized for an environment.
PolicySpec policy_for(const EnvSpec& env, std::vector<std::size_t> hidden_sizes = {64, 64});

struct EpisodeResult {
  double total_return = 0.0;
  std::size_t timesteps_used = 0;

  bool operator==(const EpisodeResult&) const = default;
};

struct RolloutResult {
  EpisodeResult episode;
  // Observations fed to the policy, row-major, obs_dim values per step.
  std::vector<double> observations;
};

// Runs one episode for at most `horizon` steps (1 <= horizon <= max_horizon).
RolloutResult rollout(Environment& env, PolicyNetwork& policy, std::span<const double> params,
                      std::size_t horizon, std::uint64_t seed, const RunningNormalizer& norm,
                      bool record_observations = true);

RolloutResult rollout(std::string_view env_id, const PolicySpec& policy,
                      std::span<const double> params, std::size_t horizon, std::uint64_t seed,
                      const RunningNormalizer& norm);

// ---------------------------------------------------------------------------
// Concrete environments. Dynamics and rewards are documented in
// docs/environments.md.

// 1-D integrator: x <- x + a*dt, r = -(x - goal)^2. No jitter.
class LinearActuator final : public Environment {
 public:
  struct Params {
    double dt = 1.0;
    double goal = 1.0;
    double start = 0.0;
    std::size_t max_horizon = 1000;
  };

  LinearActuator() : LinearActuator(Params{}) {}
  explicit LinearActuator(Params params);

  const EnvSpec& spec() const noexcept override { return spec_; }
  void reset(std::uint64_t seed, std::span<double> obs) override;
  StepOutcome step(std::span<const double> action, std::span<double> obs) override;

 private:
  Params params_;
  EnvSpec spec_;
  double x_ = 0.0;
};

// Point mass dashing down a walled corridor through a sequence of gated
// walls. Reward is new forward progress; hitting a wall knocks the agent back.
class CorridorDash final : public Environment {
 public:
  struct Params {
    double dt = 0.05;
    double thrust = 1.0;
    double drag = 0.5;
    double half_width = 1.0;
    double first_gate = 2.0;
    double gate_spacing = 2.5;
    std::size_t gate_count = 48;
    double gap_half_width = 0.3;
    double gap_range = 0.6;  // gap centres in [-gap_range, gap_range]
    double knockback = 0.5;
    std::uint64_t layout_seed = 7;
    std::size_t max_horizon = 2000;
  };

  CorridorDash() : CorridorDash(Params{}) {}
  explicit CorridorDash(Params params);

  const EnvSpec& spec() const noexcept override { return spec_; }
  void reset(std::uint64_t seed, std::span<double> obs) override;
  StepOutcome step(std::span<const double> action, std::span<double> obs) override;

  const std::vector<double>& gate_positions() const noexcept { return gate_x_; }
  const std::vector<double>& gap_centres() const noexcept { return gap_y_; }
  std::size_t collisions() const noexcept { return collisions_; }

 private:
  void observe(std::span<double> obs) const;

  Params params_;
  EnvSpec spec_;
  std::vector<double> gate_x_;
  std::vector<double> gap_y_;
  double x_ = 0.0, y_ = 0.0, vx_ = 0.0, vy_ = 0.0;
  double best_x_ = 0.0;
  std::size_t next_gate_ = 0;
  std::size_t collisions_ = 0;
};

// Cart-pole that starts hanging down and must swing up and balance using a
// continuous force. Leaving the track ends the episode.
class CartPoleSwingUp final : public Environment {
 public:
  struct Params {
    double dt = 0.02;
    double gravity = 9.8;
    double cart_mass = 1.0;
    double pole_mass = 0.1;
    double half_length = 0.5;
    double force_scale = 10.0;
    double track_limit = 2.4;
    std::size_t max_horizon = 2000;
  };

  CartPoleSwingUp() : CartPoleSwingUp(Params{}) {}
  explicit CartPoleSwingUp(Params params);

  const EnvSpec& spec() const noexcept override { return spec_; }
  void reset(std::uint64_t seed, std::span<double> obs) override;
  StepOutcome step(std::span<const double> action, std::span<double> obs) override;

 private:
  void observe(std::span<double> obs) const;

  Params params_;
  EnvSpec spec_;
  double x_ = 0.0, x_dot_ = 0.0, angle_ = 0.0, angle_dot_ = 0.0;
};

// Torque-limited pendulum starting near the bottom.
class PendulumSwingUp final : public Environment {
 public:
  struct Params {
    double dt = 0.05;
    double gravity = 10.0;
    double mass = 1.0;
    double length = 1.0;
    double max_torque = 2.0;
    double max_speed = 8.0;
    std::size_t max_horizon = 1000;
  };

  PendulumSwingUp() : PendulumSwingUp(Params{}) {}
  explicit PendulumSwingUp(Params params);

  const EnvSpec& spec() const noexcept override { return spec_; }
  void reset(std::uint64_t seed, std::span<double> obs) override;
  StepOutcome step(std::span<const double> action, std::span<double> obs) override;

 private:
  void observe(std::span<double> obs) const;

  Params params_;
  EnvSpec spec_;
  double angle_ = 0.0, angle_dot_ = 0.0;
};

}  // namespace nuemt
