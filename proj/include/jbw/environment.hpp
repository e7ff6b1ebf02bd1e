#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "jbw/schedule.hpp"
#include "jbw/simulator.hpp"

namespace jbw {

struct EnvObservation {
  VisionTensor vision;
  std::vector<double> scent;
  bool moved{false};
};

struct EnvStep {
  EnvObservation observation;
  double reward{0.0};
  AgentTransition transition;
};

/// Single-agent, single-episode environment: there is no reset.
class Environment {
 public:
  Environment(WorldConfig config, RewardSchedule schedule);
  /// Resumes from an existing simulator holding exactly one agent.
  Environment(Simulator simulator, RewardSchedule schedule);

  EnvStep step(const Action& action);
  EnvObservation observe() const;

  const Simulator& simulator() const { return sim_; }
  AgentId agent_id() const { return agent_; }
  const RewardSchedule& schedule() const { return schedule_; }
  const std::vector<double>& rewards() const { return rewards_; }

 private:
  Simulator sim_;
  AgentId agent_;
  RewardSchedule schedule_;
  std::vector<double> rewards_;
};

/// Independent environments with seeds seed, seed + 1, ...; stepped in parallel.
class EnvBatch {
 public:
  EnvBatch(const WorldConfig& config, const RewardSchedule& schedule, std::size_t size);

  std::size_t size() const { return envs_.size(); }
  Environment& operator[](std::size_t i) { return envs_[i]; }
  const Environment& operator[](std::size_t i) const { return envs_[i]; }

  /// One action per entry; results are in batch order.
  std::vector<EnvStep> step(std::span<const Action> actions);

 private:
  std::vector<Environment> envs_;
};

/// rate[t] = (r[max(0, t-W+1)] + ... + r[t]) / min(W, t + 1).
std::vector<double> reward_rate(std::span<const double> rewards, std::size_t window);

/// Streaming form of reward_rate.
class RewardRate {
 public:
  explicit RewardRate(std::size_t window);
  double push(double reward);

 private:
  std::size_t window_;
  std::vector<double> ring_;
  std::size_t count_{0};
  double sum_{0.0};
  double compensation_{0.0};
};

/// Writes "time,reward,reward_rate" rows; `time` is 1 for the first step.
void write_metrics_csv(std::ostream& out, std::span<const double> rewards, std::size_t window,
                       std::size_t stride = 1);

}  // namespace jbw
