#include "jbw/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace jbw {

namespace {

// Neumaier-compensated accumulation.
void accumulate(double& sum, double& compensation, double x) {
  const double t = sum + x;
  if (std::abs(sum) >= std::abs(x)) {
    compensation += (sum - t) + x;
  } else {
    compensation += (x - t) + sum;
  }
  sum = t;
}

}  // namespace

Environment::Environment(WorldConfig config, RewardSchedule schedule)
    : sim_(std::move(config)), agent_(sim_.add_agent()), schedule_(std::move(schedule)) {}

Environment::Environment(Simulator simulator, RewardSchedule schedule)
    : sim_(std::move(simulator)), agent_(0), schedule_(std::move(schedule)) {
  if (sim_.agents().size() != 1) throw std::invalid_argument("environment requires exactly one agent");
  agent_ = sim_.agents().begin()->first;
}

EnvObservation Environment::observe() const {
  const Observation o = sim_.observe(agent_);
  return {o.vision, o.scent, false};
}

EnvStep Environment::step(const Action& action) {
  const std::int64_t time = sim_.time();
  auto transitions = sim_.request_action(agent_, action);
  if (!transitions) throw std::logic_error("environment step did not complete a turn");
  EnvStep out;
  out.transition = std::move(transitions->front());
  out.reward = eval_reward(schedule_.at(time), out.transition);
  out.observation = observe();
  out.observation.moved = out.transition.moved;
  rewards_.push_back(out.reward);
  return out;
}

EnvBatch::EnvBatch(const WorldConfig& config, const RewardSchedule& schedule, std::size_t size) {
  envs_.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    WorldConfig c = config;
    c.seed = config.seed + i;
    envs_.emplace_back(std::move(c), schedule);
  }
}

std::vector<EnvStep> EnvBatch::step(std::span<const Action> actions) {
  if (actions.size() != envs_.size()) throw std::invalid_argument("one action per batch entry is required");
  std::vector<EnvStep> out(envs_.size());
  if (envs_.size() == 1) {
    out[0] = envs_[0].step(actions[0]);
    return out;
  }
  std::vector<std::exception_ptr> errors(envs_.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < envs_.size(); ++i) {
      workers.emplace_back([&, i] {
        try {
          out[i] = envs_[i].step(actions[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<double> reward_rate(std::span<const double> rewards, std::size_t window) {
  RewardRate rate(window);
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back(rate.push(r));
  return out;
}

RewardRate::RewardRate(std::size_t window) : window_(window), ring_(window, 0.0) {
  if (window == 0) throw std::invalid_argument("reward-rate window must be at least 1");
}

double RewardRate::push(double reward) {
  const std::size_t slot = count_ % window_;
  if (count_ >= window_) accumulate(sum_, compensation_, -ring_[slot]);
  ring_[slot] = reward;
  accumulate(sum_, compensation_, reward);
  ++count_;
  return (sum_ + compensation_) / static_cast<double>(std::min(count_, window_));
}

void write_metrics_csv(std::ostream& out, std::span<const double> rewards, std::size_t window, std::size_t stride) {
  if (stride == 0) throw std::invalid_argument("stride must be at least 1");
  RewardRate rate(window);
  out << "time,reward,reward_rate\n";
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    const double r = rate.push(rewards[t]);
    if ((t + 1) % stride == 0 || t + 1 == rewards.size()) out << (t + 1) << ',' << rewards[t] << ',' << r << '\n';
  }
}

}  // namespace jbw
