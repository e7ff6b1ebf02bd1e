#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "jbw/action.hpp"
#include "jbw/config.hpp"
#include "jbw/functions.hpp"
#include "jbw/geometry.hpp"
#include "jbw/hash.hpp"
#include "jbw/rng.hpp"

using namespace jbw;

namespace {

// Reference PCG32 written from the published description, independent of Pcg32.
struct RefPcg {
  std::uint64_t state = 0;
  std::uint64_t inc = 0;
  RefPcg(std::uint64_t seed, std::uint64_t seq) {
    inc = (seq << 1u) | 1u;
    next();
    state += seed;
    next();
  }
  std::uint32_t next() {
    const std::uint64_t old = state;
    state = old * 6364136223846793005ULL + inc;
    const auto xorshifted = static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    const auto rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }
};

std::uint32_t ref_fmix(std::uint32_t h) {
  std::uint64_t x = h;
  x ^= x >> 16;
  x = (x * 0x85EBCA6BULL) % 4294967296ULL;
  x ^= x >> 13;
  x = (x * 0xC2B2AE35ULL) % 4294967296ULL;
  x ^= x >> 16;
  return static_cast<std::uint32_t>(x);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("pcg32 reference vectors") {
  Pcg32 rng(42, 54);
  CHECK(rng.next_u32() == 0xa15c02b7U);
  CHECK(rng.next_u32() == 0x7b47f409U);
  CHECK(rng.next_u32() == 0xba1d3330U);
  CHECK(rng.next_u32() == 0x83d2f293U);
  CHECK(rng.next_u32() == 0xbfa4784bU);
  CHECK(rng.next_u32() == 0xcbed606eU);
}

TEST_CASE("pcg32 matches an independent implementation") {
  for (std::uint64_t seed : {0ULL, 1ULL, 12345ULL, 0xdeadbeefcafeULL}) {
    Pcg32 a(seed, 7);
    RefPcg b(seed, 7);
    for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u32() == b.next());
  }
}

TEST_CASE("pcg32 determinism and raw state round trip") {
  Pcg32 a(99), b(99);
  for (int i = 0; i < 1000000; ++i) REQUIRE(a.next_u32() == b.next_u32());
  Pcg32 c = Pcg32::from_raw(a.state(), a.increment());
  CHECK(c == a);
  for (int i = 0; i < 100; ++i) CHECK(c.next_u32() == a.next_u32());
}

TEST_CASE("pcg32 uniform helpers") {
  Pcg32 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform_real();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    REQUIRE(rng.uniform_int(7) < 7U);
  }
  CHECK(rng.uniform_int(1) == 0U);
  // uniform_real is n / 2^32 of the next output.
  Pcg32 x(3), y(3);
  CHECK(x.uniform_real() == static_cast<double>(y.next_u32()) / 4294967296.0);
}

TEST_CASE("murmur fmix32") {
  CHECK(murmur_mix32(0) == 0U);
  for (std::uint32_t v : {1U, 2U, 0x12345678U, 0xFFFFFFFFU, 0x80000000U}) {
    CHECK(murmur_mix32(v) == ref_fmix(v));
  }
  CHECK(murmur_mix32(1) == 0x514E28B7U);
}

TEST_CASE("hash_interp") {
  const double denom = 4294967295.0;
  for (int n : {0, 1, 7, 500, -3}) {
    CHECK(hash_interp(n) == doctest::Approx(ref_fmix(static_cast<std::uint32_t>(n)) / denom).epsilon(1e-15));
    const double lo = ref_fmix(static_cast<std::uint32_t>(n)) / denom;
    const double hi = ref_fmix(static_cast<std::uint32_t>(n + 1)) / denom;
    CHECK(hash_interp(n + 0.5) == doctest::Approx((lo + hi) / 2).epsilon(1e-12));
  }
  double prev = hash_interp(0.0);
  for (int i = 1; i <= 3000; ++i) {
    const double t = i * 0.001;
    const double v = hash_interp(t);
    REQUIRE(v >= 0.0);
    REQUIRE(v <= 1.0);
    // Continuity: the slope between integer knots is bounded by 1.
    REQUIRE(std::abs(v - prev) <= 0.001 + 1e-12);
    prev = v;
  }
}

TEST_CASE("intensity functions") {
  CHECK(eval_intensity(ConstantIntensity{1.5}, {123, -9}) == 1.5);
  CHECK(eval_intensity(ZeroIntensity{}, {7, -3}) == 0.0);
  const RadialHashIntensity r{500, 60, -3.0, 14};
  CHECK(eval_intensity(r, {0, 0}) == doctest::Approx(-3.0 - 14 * hash_interp(500)).epsilon(1e-15));
  CHECK(eval_intensity(r, {3, 4}) == doctest::Approx(-3.0 - 14 * hash_interp(5.0 / 60 + 500)).epsilon(1e-15));
}

TEST_CASE("interaction functions") {
  const PiecewiseBoxInteraction box{10, 100, 2, -100};
  CHECK(eval_interaction(box, {0, 0}, {3, 0}) == 2);
  CHECK(eval_interaction(box, {0, 0}, {6, 0}) == -100);
  CHECK(eval_interaction(box, {0, 0}, {10, 0}) == 0);
  const CrossInteraction cross{20, 40, 8, -1000, -1000, -1};
  CHECK(eval_interaction(cross, {0, 0}, {0, 4}) == 8);
  CHECK(eval_interaction(cross, {2, 0}, {0, 5}) == -1000);
  CHECK(eval_interaction(cross, {0, 0}, {30, 0}) == -1000);
  CHECK(eval_interaction(cross, {0, 0}, {30, 1}) == -1);
  CHECK(eval_interaction(cross, {0, 0}, {41, 0}) == 0);
  CHECK(eval_interaction(ZeroInteraction{}, {0, 0}, {1, 1}) == 0);

  const CrossHashInteraction ch{60, 4, 25, 2, 20, -200, -20, 1};
  const double inner = 4 + 25 * hash_interp(10.0 / 60);
  const Position p{10, 0};
  const auto dd = static_cast<std::int64_t>(std::floor(inner));
  CHECK(eval_interaction(ch, p, {10, dd}) == 20);
  CHECK(eval_interaction(ch, p, {11, dd}) == -20);
  CHECK(eval_interaction(ch, p, {10, dd + 1}) == (dd + 1 <= inner + 2 ? -200 : 0));
}

TEST_CASE("interactions are symmetric and translation covariant") {
  Pcg32 rng(17);
  const InteractionFn fns[] = {PiecewiseBoxInteraction{10, 100, 2, -100},
                               CrossInteraction{20, 40, 8, -1000, -1000, -1}};
  for (int i = 0; i < 2000; ++i) {
    const Position a{static_cast<std::int64_t>(rng.uniform_int(80)) - 40,
                     static_cast<std::int64_t>(rng.uniform_int(80)) - 40};
    const Position b{static_cast<std::int64_t>(rng.uniform_int(80)) - 40,
                     static_cast<std::int64_t>(rng.uniform_int(80)) - 40};
    const Position shift{static_cast<std::int64_t>(rng.uniform_int(1000)) - 500, 77};
    for (const auto& f : fns) {
      REQUIRE(eval_interaction(f, a, b) == eval_interaction(f, b, a));
      REQUIRE(eval_interaction(f, a, b) == eval_interaction(f, a + shift, b + shift));
    }
  }
}

TEST_CASE("interaction reach bounds the support") {
  const InteractionFn fns[] = {PiecewiseBoxInteraction{10, 100, 2, -100}, PiecewiseBoxInteraction{10, 100, 0, -6},
                               CrossInteraction{20, 40, 8, -1000, -1000, -1},
                               CrossHashInteraction{60, 4, 25, 2, 20, -200, -20, 1}};
  for (const auto& f : fns) {
    const auto reach = interaction_reach(f);
    REQUIRE(reach);
    for (std::int64_t x = -200; x <= 200; x += 1) {
      for (std::int64_t dx = -60; dx <= 60; ++dx) {
        for (std::int64_t dy : {-60L, -*reach - 1, 0L, 3L, *reach + 1, 60L}) {
          if (std::max(std::abs(dx), std::abs(dy)) > *reach) {
            REQUIRE(eval_interaction(f, {x, 0}, {x + dx, dy}) == 0.0);
          }
        }
      }
    }
  }
  CHECK_FALSE(interaction_reach(ZeroInteraction{}));
  CHECK_FALSE(interaction_reach(PiecewiseBoxInteraction{10, 100, 0, 0}));
}

TEST_CASE("function text round trip") {
  for (const char* text : {"Zero", "Constant[1.5]", "Constant[-5.3]", "RadialHash[500,60,-3,14]"}) {
    CHECK(to_string(parse_intensity(text)) == text);
  }
  for (const char* text : {"Zero", "PiecewiseBox[10,100,2,-100]", "Cross[20,40,8,-1000,-1000,-1]",
                           "CrossHash[60,4,25,2,20,-200,-20,1]"}) {
    CHECK(to_string(parse_interaction(text)) == text);
  }
  CHECK(parse_intensity(" Constant[ 2 ] ") == IntensityFn{ConstantIntensity{2}});
  CHECK_THROWS_AS(parse_intensity("Constant[1,2]"), std::invalid_argument);
  CHECK_THROWS_AS(parse_intensity("Banana[1]"), std::invalid_argument);
  CHECK_THROWS_AS(parse_interaction("PiecewiseBox[1,2,3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_interaction("Cross[1,2,x,4,5,6]"), std::invalid_argument);
  CHECK(format_number(0.1) == "0.1");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("geometry helpers") {
  CHECK(floor_div(-1, 64) == -1);
  CHECK(floor_div(-64, 64) == -1);
  CHECK(floor_div(-65, 64) == -2);
  CHECK(floor_div(63, 64) == 0);
  CHECK(turn_left(Direction::Up) == Direction::Left);
  CHECK(turn_right(Direction::Up) == Direction::Right);
  CHECK(turn_right(Direction::Left) == Direction::Up);
  CHECK(forward_vector(Direction::Up) == Position{0, 1});
  CHECK(chebyshev({0, 0}, {3, -5}) == 5);
  CHECK(manhattan({0, 0}, {3, -5}) == 8);
  for (ActionKind k : kAllActionKinds) CHECK(parse_action_kind(to_string(k)) == k);
  CHECK_FALSE(parse_action_kind("Jump"));
}

TEST_CASE("shipped configs load and round trip") {
  for (const char* name : {"case_studies", "case_studies_occlusion", "limited_vision", "hashed_walls", "hashed_walls_occlusion"}) {
    const std::string path = std::string(JBW_SOURCE_DIR) + "/configs/" + name + ".json";
    const WorldConfig c = load_config(path);
    CHECK_NOTHROW(c.validate());
    const WorldConfig again = parse_config(canonical_config_text(c));
    CHECK(canonical_config_text(again) == canonical_config_text(c));
  }
}

TEST_CASE("case-study world values") {
  const WorldConfig c = load_config(std::string(JBW_SOURCE_DIR) + "/configs/case_studies.json");
  CHECK(c.scent_decay == 0.4);
  CHECK(c.scent_diffusion == 0.14);
  CHECK(c.patch_size == 64);
  CHECK(c.mh_iterations == 10000);
  CHECK(c.agent_defaults.visual_range == 8);
  CHECK(c.agent_defaults.field_of_view == 360.0);
  const auto jb = c.type_index("JellyBean");
  REQUIRE(jb);
  CHECK(c.item_types[*jb].color == std::vector<double>{0.82, 0.27, 0.2});
  CHECK(c.item_types[*jb].scent == std::vector<double>{1.64, 0.54, 0.4});
  CHECK(c.item_types[*jb].intensity == IntensityFn{ConstantIntensity{1.5}});
  const auto banana = c.type_index("Banana");
  REQUIRE(banana);
  CHECK(c.interaction(*jb, *banana) == InteractionFn{PiecewiseBoxInteraction{10, 100, 2, -100}});
  const auto wall = c.type_index("Wall");
  REQUIRE(wall);
  CHECK(c.item_types[*wall].blocks_movement);
  CHECK(c.interaction(*wall, *wall) == InteractionFn{CrossInteraction{20, 40, 8, -1000, -1000, -1}});
  // Unspecified pairs default to Zero.
  CHECK(c.interaction(*wall, *banana) == InteractionFn{ZeroInteraction{}});
}

TEST_CASE("config validation errors") {
  const std::string base = read_file(std::string(JBW_SOURCE_DIR) + "/configs/case_studies.json");
  auto doc = nlohmann::json::parse(base);
  auto mutate = [&](auto fn) {
    auto d = doc;
    fn(d);
    return d;
  };
  CHECK_THROWS_AS(config_from_json(mutate([](auto& d) { d["version"] = 2; })), ConfigError);
  CHECK_THROWS_AS(config_from_json(mutate([](auto& d) { d["map"]["scent_decay"] = 0.9; })), ConfigError);
  CHECK_THROWS_AS(config_from_json(mutate([](auto& d) { d["map"]["bogus"] = 1; })), ConfigError);
  CHECK_THROWS_AS(config_from_json(mutate([](auto& d) { d["items"][0]["color"] = {1, 2}; })), ConfigError);
  CHECK_THROWS_AS(config_from_json(mutate([](auto& d) { d["items"][0]["interactions"]["Nope"] = "Zero"; })),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json(mutate([](auto& d) { d["items"][1]["name"] = "JellyBean"; })), ConfigError);
  CHECK_THROWS_AS(config_from_json(mutate([](auto& d) { d["agent"]["field_of_view"] = 0; })), ConfigError);
  CHECK_THROWS_AS(config_from_json(mutate([](auto& d) { d["agent"]["action_space"] = {"Fly"}; })), ConfigError);
  CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
}
