#include "jbw/reward.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <vector>

namespace jbw {

RewardExpr RewardExpr::action(double v) { return {Kind::Action, v, 0, nullptr, nullptr}; }
RewardExpr RewardExpr::collect(std::uint32_t item, double v) { return {Kind::Collect, v, item, nullptr, nullptr}; }
RewardExpr RewardExpr::explore(double v) { return {Kind::Explore, v, 0, nullptr, nullptr}; }
RewardExpr RewardExpr::combined(RewardExpr l, RewardExpr r) {
  return {Kind::Combined, 0.0, 0, std::make_shared<const RewardExpr>(std::move(l)),
          std::make_shared<const RewardExpr>(std::move(r))};
}

bool operator==(const RewardExpr& a, const RewardExpr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case RewardExpr::Kind::Combined:
      return *a.left == *b.left && *a.right == *b.right;
    case RewardExpr::Kind::Collect:
      return a.item == b.item && a.value == b.value;
    default:
      return a.value == b.value;
  }
}

RewardParseError::RewardParseError(std::size_t position, const std::string& message)
    : std::runtime_error("reward expression, column " + std::to_string(position + 1) + ": " + message),
      position_(position) {}

namespace {

class Parser {
 public:
  Parser(std::string_view text, const WorldConfig& config) : text_(text), config_(config) {}

  RewardExpr parse() {
    RewardExpr expr = term();
    for (;;) {
      skip_space();
      if (at_end()) return expr;
      if (text_[pos_] != '&') throw RewardParseError(pos_, "expected '&' or end of input");
      ++pos_;
      expr = RewardExpr::combined(std::move(expr), term());
    }
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }

  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  static bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  std::pair<std::string_view, std::size_t> name() {
    skip_space();
    const std::size_t start = pos_;
    while (!at_end() && name_char(text_[pos_])) ++pos_;
    if (start == pos_) throw RewardParseError(start, "expected a name");
    return {text_.substr(start, pos_ - start), start};
  }

  struct Arg {
    std::string_view text;
    std::size_t position;
  };

  std::vector<Arg> args() {
    std::vector<Arg> out;
    skip_space();
    if (at_end() || text_[pos_] != '[') return out;
    ++pos_;
    for (;;) {
      skip_space();
      const std::size_t start = pos_;
      while (!at_end() && text_[pos_] != ',' && text_[pos_] != ']') ++pos_;
      if (at_end()) throw RewardParseError(start, "unterminated argument list");
      std::string_view arg = text_.substr(start, pos_ - start);
      while (!arg.empty() && std::isspace(static_cast<unsigned char>(arg.back()))) arg.remove_suffix(1);
      if (arg.empty()) throw RewardParseError(start, "empty argument");
      out.push_back({arg, start});
      if (text_[pos_++] == ']') return out;
    }
  }

  static double number(const Arg& arg) {
    double v = 0.0;
    std::string_view s = arg.text;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
      throw RewardParseError(arg.position, "expected a number, got '" + std::string(arg.text) + "'");
    }
    return v;
  }

  std::uint32_t item(const Arg& arg) const {
    const auto id = config_.type_index(arg.text);
    if (!id) throw RewardParseError(arg.position, "unknown item type '" + std::string(arg.text) + "'");
    return *id;
  }

  RewardExpr term() {
    const auto [n, at] = name();
    const std::vector<Arg> a = args();
    const auto arity = [&](std::size_t lo, std::size_t hi) {
      if (a.size() < lo || a.size() > hi) {
        throw RewardParseError(at, std::string(n) + " takes " + std::to_string(lo) + " to " + std::to_string(hi) +
                                       " arguments");
      }
    };
    if (n == "Action" || n == "Explore") {
      arity(0, 1);
      const double v = a.empty() ? 1.0 : number(a[0]);
      return n == "Action" ? RewardExpr::action(v) : RewardExpr::explore(v);
    }
    if (n == "Collect" || n == "Avoid") {
      arity(1, 2);
      const double v = a.size() < 2 ? 1.0 : number(a[1]);
      return RewardExpr::collect(item(a[0]), n == "Avoid" ? -v : v);
    }
    throw RewardParseError(at, "unknown reward primitive '" + std::string(n) + "'");
  }

  std::string_view text_;
  const WorldConfig& config_;
  std::size_t pos_{0};
};

}  // namespace

RewardExpr parse_reward(std::string_view text, const WorldConfig& config) { return Parser(text, config).parse(); }

std::string to_string(const RewardExpr& expr, const WorldConfig& config) {
  switch (expr.kind) {
    case RewardExpr::Kind::Action:
      return "Action[" + format_number(expr.value) + "]";
    case RewardExpr::Kind::Explore:
      return "Explore[" + format_number(expr.value) + "]";
    case RewardExpr::Kind::Collect:
      return "Collect[" + config.item_types.at(expr.item).name + "," + format_number(expr.value) + "]";
    case RewardExpr::Kind::Combined:
      break;
  }
  return to_string(*expr.left, config) + " & " + to_string(*expr.right, config);
}

double eval_reward(const RewardExpr& expr, const AgentTransition& t) {
  switch (expr.kind) {
    case RewardExpr::Kind::Action:
      return t.action.kind != ActionKind::NoOp ? expr.value : 0.0;
    case RewardExpr::Kind::Explore:
      return t.explored ? expr.value : 0.0;
    case RewardExpr::Kind::Collect:
      return expr.value * static_cast<double>(std::count(t.items_collected.begin(), t.items_collected.end(), expr.item));
    case RewardExpr::Kind::Combined:
      break;
  }
  return eval_reward(*expr.left, t) + eval_reward(*expr.right, t);
}

}  // namespace jbw
