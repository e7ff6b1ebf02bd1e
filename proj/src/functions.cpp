#include "jbw/functions.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "jbw/hash.hpp"

namespace jbw {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double cross_value(double inner, double outer, double inner_value, double outer_value,
                   double inner_misaligned, double outer_misaligned, Position a, Position b) {
  const double dx = std::abs(static_cast<double>(a.x - b.x));
  const double dy = std::abs(static_cast<double>(a.y - b.y));
  const double d = std::min(dx, dy);
  const double big_d = std::max(dx, dy);
  if (big_d <= inner) return d == 0 ? inner_value : inner_misaligned;
  if (big_d <= outer) return d == 0 ? outer_value : outer_misaligned;
  return 0.0;
}

struct Call {
  std::string name;
  std::vector<double> args;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view text) {
  text = trim(text);
  double value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("invalid number '" + std::string(text) + "'");
  }
  return value;
}

// NAME or NAME[a,b,...]
Call parse_call(std::string_view text) {
  text = trim(text);
  Call call;
  const auto open = text.find('[');
  if (open == std::string_view::npos) {
    call.name = std::string(text);
    return call;
  }
  if (text.back() != ']') throw std::invalid_argument("missing ']' in '" + std::string(text) + "'");
  call.name = std::string(trim(text.substr(0, open)));
  std::string_view body = text.substr(open + 1, text.size() - open - 2);
  if (trim(body).empty()) return call;
  std::size_t start = 0;
  for (;;) {
    const auto comma = body.find(',', start);
    call.args.push_back(parse_double(body.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return call;
}

void expect_arity(const Call& call, std::size_t n) {
  if (call.args.size() != n) {
    throw std::invalid_argument(call.name + " expects " + std::to_string(n) + " arguments, got " +
                                std::to_string(call.args.size()));
  }
}

std::string join(std::string_view name, std::initializer_list<double> args) {
  std::string out(name);
  out += '[';
  bool first = true;
  for (double a : args) {
    if (!first) out += ',';
    out += format_number(a);
    first = false;
  }
  out += ']';
  return out;
}

}  // namespace

double eval_intensity(const IntensityFn& fn, Position pos) {
  return std::visit(
      Overloaded{
          [](const ZeroIntensity&) { return 0.0; },
          [](const ConstantIntensity& c) { return c.value; },
          [pos](const RadialHashIntensity& r) {
            const double x = static_cast<double>(pos.x);
            const double y = static_cast<double>(pos.y);
            return r.offset - r.amplitude * hash_interp(std::sqrt(x * x + y * y) / r.scale + r.shift);
          },
      },
      fn);
}

double eval_interaction(const InteractionFn& fn, Position first, Position second) {
  return std::visit(
      Overloaded{
          [](const ZeroInteraction&) { return 0.0; },
          [&](const PiecewiseBoxInteraction& b) {
            const double dx = static_cast<double>(first.x - second.x);
            const double dy = static_cast<double>(first.y - second.y);
            const double d = dx * dx + dy * dy;
            if (d < b.inner) return b.inner_value;
            if (d < b.outer) return b.outer_value;
            return 0.0;
          },
          [&](const CrossInteraction& c) {
            return cross_value(c.inner, c.outer, c.inner_value, c.outer_value, c.inner_misaligned,
                               c.outer_misaligned, first, second);
          },
          [&](const CrossHashInteraction& c) {
            const double inner =
                c.offset + c.amplitude * hash_interp(static_cast<double>(first.x) / c.scale);
            return cross_value(inner, inner + c.width, c.inner_value, c.outer_value,
                               c.inner_misaligned, c.outer_misaligned, first, second);
          },
      },
      fn);
}

std::optional<std::int64_t> interaction_reach(const InteractionFn& fn) {
  return std::visit(
      Overloaded{
          [](const ZeroInteraction&) -> std::optional<std::int64_t> { return std::nullopt; },
          [](const PiecewiseBoxInteraction& b) -> std::optional<std::int64_t> {
            double bound = 0;
            if (b.inner_value != 0) bound = std::max(bound, b.inner);
            if (b.outer_value != 0) bound = std::max(bound, b.outer);
            if (bound <= 0) return std::nullopt;
            // d < bound with d a squared integer distance => each axis offset < sqrt(bound).
            return static_cast<std::int64_t>(std::ceil(std::sqrt(bound)));
          },
          [](const CrossInteraction& c) -> std::optional<std::int64_t> {
            double bound = -1;
            if (c.inner_value != 0 || c.inner_misaligned != 0) bound = std::max(bound, c.inner);
            if (c.outer_value != 0 || c.outer_misaligned != 0) bound = std::max(bound, c.outer);
            if (bound < 0) return std::nullopt;
            return static_cast<std::int64_t>(std::floor(bound));
          },
          [](const CrossHashInteraction& c) -> std::optional<std::int64_t> {
            if (c.inner_value == 0 && c.inner_misaligned == 0 && c.outer_value == 0 &&
                c.outer_misaligned == 0) {
              return std::nullopt;
            }
            const double inner_max = c.offset + std::max(c.amplitude, 0.0);
            const double bound = std::max(inner_max, inner_max + c.width);
            if (bound < 0) return std::nullopt;
            return static_cast<std::int64_t>(std::floor(bound));
          },
      },
      fn);
}

IntensityFn parse_intensity(std::string_view text) {
  const Call call = parse_call(text);
  if (call.name == "Zero") {
    expect_arity(call, 0);
    return ZeroIntensity{};
  }
  if (call.name == "Constant") {
    expect_arity(call, 1);
    return ConstantIntensity{call.args[0]};
  }
  if (call.name == "RadialHash") {
    expect_arity(call, 4);
    if (call.args[1] == 0) throw std::invalid_argument("RadialHash scale must be non-zero");
    return RadialHashIntensity{call.args[0], call.args[1], call.args[2], call.args[3]};
  }
  throw std::invalid_argument("unknown intensity function '" + call.name + "'");
}

InteractionFn parse_interaction(std::string_view text) {
  const Call call = parse_call(text);
  const auto& a = call.args;
  if (call.name == "Zero") {
    expect_arity(call, 0);
    return ZeroInteraction{};
  }
  if (call.name == "PiecewiseBox") {
    expect_arity(call, 4);
    return PiecewiseBoxInteraction{a[0], a[1], a[2], a[3]};
  }
  if (call.name == "Cross") {
    expect_arity(call, 6);
    return CrossInteraction{a[0], a[1], a[2], a[3], a[4], a[5]};
  }
  if (call.name == "CrossHash") {
    expect_arity(call, 8);
    if (a[0] == 0) throw std::invalid_argument("CrossHash scale must be non-zero");
    return CrossHashInteraction{a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7]};
  }
  throw std::invalid_argument("unknown interaction function '" + call.name + "'");
}

std::string to_string(const IntensityFn& fn) {
  return std::visit(
      Overloaded{
          [](const ZeroIntensity&) { return std::string("Zero"); },
          [](const ConstantIntensity& c) { return join("Constant", {c.value}); },
          [](const RadialHashIntensity& r) {
            return join("RadialHash", {r.shift, r.scale, r.offset, r.amplitude});
          },
      },
      fn);
}

std::string to_string(const InteractionFn& fn) {
  return std::visit(
      Overloaded{
          [](const ZeroInteraction&) { return std::string("Zero"); },
          [](const PiecewiseBoxInteraction& b) {
            return join("PiecewiseBox", {b.inner, b.outer, b.inner_value, b.outer_value});
          },
          [](const CrossInteraction& c) {
            return join("Cross", {c.inner, c.outer, c.inner_value, c.outer_value, c.inner_misaligned,
                                  c.outer_misaligned});
          },
          [](const CrossHashInteraction& c) {
            return join("CrossHash", {c.scale, c.offset, c.amplitude, c.width, c.inner_value,
                                      c.outer_value, c.inner_misaligned, c.outer_misaligned});
          },
      },
      fn);
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("format_number failed");
  return std::string(buf, ptr);
}

}  // namespace jbw
