#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "jbw/geometry.hpp"

namespace jbw {

// Intensity functions: per-type log-probability of an item at a position.

struct ZeroIntensity {
  friend bool operator==(const ZeroIntensity&, const ZeroIntensity&) = default;
};

struct ConstantIntensity {
  double value{0};
  friend bool operator==(const ConstantIntensity&, const ConstantIntensity&) = default;
};

/// c - k * hash_interp(sqrt(x^2 + y^2) / s + shift)
struct RadialHashIntensity {
  double shift{0};
  double scale{1};
  double offset{0};
  double amplitude{0};
  friend bool operator==(const RadialHashIntensity&, const RadialHashIntensity&) = default;
};

using IntensityFn = std::variant<ZeroIntensity, ConstantIntensity, RadialHashIntensity>;

// Interaction functions: pairwise log-probability terms between two items.

struct ZeroInteraction {
  friend bool operator==(const ZeroInteraction&, const ZeroInteraction&) = default;
};

/// `inner_value` when d < inner, `outer_value` when inner <= d < outer, else 0,
/// where d is the squared Euclidean distance.
struct PiecewiseBoxInteraction {
  double inner{0};
  double outer{0};
  double inner_value{0};
  double outer_value{0};
  friend bool operator==(const PiecewiseBoxInteraction&, const PiecewiseBoxInteraction&) = default;
};

/// Axis-aligned cross. With d = min(|dx|, |dy|) and D = max(|dx|, |dy|):
/// aligned (d == 0) pairs get `inner_value`/`outer_value`, misaligned pairs get
/// `inner_misaligned`/`outer_misaligned`, for D <= inner and inner < D <= outer.
struct CrossInteraction {
  double inner{0};
  double outer{0};
  double inner_value{0};
  double outer_value{0};
  double inner_misaligned{0};
  double outer_misaligned{0};
  friend bool operator==(const CrossInteraction&, const CrossInteraction&) = default;
};

/// Cross whose radii depend on the first item's x coordinate:
/// inner = offset + amplitude * hash_interp(x1 / scale), outer = inner + width.
struct CrossHashInteraction {
  double scale{1};
  double offset{0};
  double amplitude{0};
  double width{0};
  double inner_value{0};
  double outer_value{0};
  double inner_misaligned{0};
  double outer_misaligned{0};
  friend bool operator==(const CrossHashInteraction&, const CrossHashInteraction&) = default;
};

using InteractionFn =
    std::variant<ZeroInteraction, PiecewiseBoxInteraction, CrossInteraction, CrossHashInteraction>;

double eval_intensity(const IntensityFn& fn, Position pos);
double eval_interaction(const InteractionFn& fn, Position first, Position second);

/// Largest Chebyshev distance at which `fn` can be non-zero, or nullopt when it
/// is identically zero.
std::optional<std::int64_t> interaction_reach(const InteractionFn& fn);

/// Parses the bracket notation used in configuration files, e.g. "Constant[1.5]"
/// or "PiecewiseBox[10,100,0,-6]". Throws std::invalid_argument on bad input.
IntensityFn parse_intensity(std::string_view text);
InteractionFn parse_interaction(std::string_view text);

std::string to_string(const IntensityFn& fn);
std::string to_string(const InteractionFn& fn);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

}  // namespace jbw
