#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "jbw/config.hpp"
#include "jbw/simulator.hpp"

namespace jbw {

/// Reward expression tree. Avoid[i, v] is represented as Collect(i, -v).
struct RewardExpr {
  enum class Kind : std::uint8_t { Action, Collect, Explore, Combined };

  Kind kind{Kind::Action};
  double value{1.0};
  std::uint32_t item{0};
  std::shared_ptr<const RewardExpr> left;
  std::shared_ptr<const RewardExpr> right;

  static RewardExpr action(double v = 1.0);
  static RewardExpr collect(std::uint32_t item, double v = 1.0);
  static RewardExpr explore(double v = 1.0);
  static RewardExpr combined(RewardExpr l, RewardExpr r);

  friend bool operator==(const RewardExpr& a, const RewardExpr& b);
};

class RewardParseError : public std::runtime_error {
 public:
  RewardParseError(std::size_t position, const std::string& message);
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// expr := term ('&' term)* ; term := NAME '[' args ']' | NAME.
/// Names: Action[v], Collect[item(, v)], Avoid[item(, v)], Explore[v]; v defaults to 1.
RewardExpr parse_reward(std::string_view text, const WorldConfig& config);

/// Canonical text, e.g. "Collect[JellyBean,1] & Collect[Onion,-1]".
std::string to_string(const RewardExpr& expr, const WorldConfig& config);

double eval_reward(const RewardExpr& expr, const AgentTransition& transition);

}  // namespace jbw
