#include <bit>
#include <cstring>
#include <string>

#include "jbw/hash.hpp"
#include "jbw/simulator.hpp"

// Save layout (all integers little-endian, reals as IEEE-754 binary64 bits):
//   "JBWSAVE\0"  u32 version
//   sections: u32 tag, u64 length, payload   (tags 1..6, in order)
//   u64 FNV-1a-64 of every preceding byte
// See docs/save_format.md for the payloads.

namespace jbw {

namespace {

constexpr char kMagic[8] = {'J', 'B', 'W', 'S', 'A', 'V', 'E', '\0'};

enum Tag : std::uint32_t { kConfig = 1, kMap = 2, kAgents = 3, kSources = 4, kRng = 5, kClock = 6 };

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void pos(Position p) {
    i64(p.x);
    i64(p.y);
  }
  void reals(const std::vector<double>& v) {
    u64(v.size());
    for (double x : v) f64(x);
  }
  void bytes(const std::string& s) {
    u64(s.size());
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void section(std::uint32_t tag, const Writer& payload) {
    u32(tag);
    u64(payload.out_.size());
    out_.insert(out_.end(), payload.out_.begin(), payload.out_.end());
  }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    const auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  Position pos() {
    const std::int64_t x = i64();
    return {x, i64()};
  }
  std::size_t count(std::size_t min_element_size) {
    const std::uint64_t n = u64();
    if (min_element_size > 0 && n > remaining() / min_element_size) throw SaveFormatError("corrupt save: bad count");
    return static_cast<std::size_t>(n);
  }
  std::vector<double> reals() {
    std::vector<double> v(count(8));
    for (double& x : v) x = f64();
    return v;
  }
  std::string bytes() {
    const auto b = take(count(1));
    return {b.begin(), b.end()};
  }
  Reader section(std::uint32_t tag) {
    if (u32() != tag) throw SaveFormatError("corrupt save: unexpected section " + std::to_string(tag));
    return Reader(take(count(1)));
  }
  std::size_t remaining() const { return in_.size() - at_; }
  void expect_end() const {
    if (remaining() != 0) throw SaveFormatError("corrupt save: trailing bytes in section");
  }

 private:
  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > remaining()) throw SaveFormatError("corrupt save: truncated");
    const auto s = in_.subspan(at_, n);
    at_ += n;
    return s;
  }

  std::span<const std::uint8_t> in_;
  std::size_t at_{0};
};

}  // namespace

class SimulatorCodec {
 public:
  static std::vector<std::uint8_t> save(const Simulator& sim);
  static Simulator load(std::span<const std::uint8_t> bytes);
};

std::vector<std::uint8_t> SimulatorCodec::save(const Simulator& sim) {
  Writer out;
  for (char c : kMagic) out.u8(static_cast<std::uint8_t>(c));
  out.u32(kSaveVersion);

  Writer config;
  config.bytes(canonical_config_text(*sim.config_));
  out.section(kConfig, config);

  Writer map;
  map.u64(sim.map_.patches().size());
  for (const auto& [coord, patch] : sim.map_.patches()) {
    map.pos(coord);
    map.u8(static_cast<std::uint8_t>(patch.status()));
    map.u64(patch.items().size());
    for (const Item& item : patch.items()) {
      map.pos(item.position);
      map.u32(item.type);
      map.i64(item.created_at);
    }
  }
  map.u64(sim.map_.fixed_order().size());
  for (Position p : sim.map_.fixed_order()) map.pos(p);
  out.section(kMap, map);

  Writer agents;
  agents.u64(sim.next_id_);
  agents.u64(sim.agents_.size());
  for (const auto& [id, a] : sim.agents_) {
    agents.u64(id);
    agents.pos(a.position);
    agents.u8(static_cast<std::uint8_t>(a.direction));
    agents.pos(a.spawn);
    agents.u32(static_cast<std::uint32_t>(a.visual_range));
    agents.f64(a.field_of_view);
    agents.reals(a.color);
    agents.reals(a.scent);
    agents.u64(a.action_space.size());
    for (ActionKind k : a.action_space) agents.u8(static_cast<std::uint8_t>(k));
    agents.u64(a.inventory.size());
    for (std::uint64_t n : a.inventory) agents.u64(n);
    agents.u8(a.pending ? 1 : 0);
    agents.u8(a.pending ? static_cast<std::uint8_t>(a.pending->kind) : 0);
    agents.u32(a.pending ? a.pending->item : 0);
    agents.f64(a.distance_max);
    agents.i64(a.scent_since);
  }
  agents.u64(sim.request_order_.size());
  for (AgentId id : sim.request_order_) agents.u64(id);
  out.section(kAgents, agents);

  Writer sources;
  sources.u64(sim.sources_.size());
  for (const ScentSource& s : sim.sources_) {
    sources.pos(s.position);
    sources.reals(s.scent);
    sources.i64(s.start);
    sources.u8(s.end ? 1 : 0);
    sources.i64(s.end.value_or(0));
  }
  out.section(kSources, sources);

  Writer rng;
  rng.u64(sim.rng_.state());
  rng.u64(sim.rng_.increment());
  out.section(kRng, rng);

  Writer clock;
  clock.i64(sim.time_);
  out.section(kClock, clock);

  Fnv1a64 h;
  h.update(out.data().data(), out.data().size());
  out.u64(h.value());
  return std::move(out.data());
}

Simulator SimulatorCodec::load(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof(kMagic) + 4 + 8) throw SaveFormatError("corrupt save: truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) throw SaveFormatError("not a save file");
  const auto body = bytes.first(bytes.size() - 8);
  Fnv1a64 h;
  h.update(body.data(), body.size());
  if (Reader(bytes.last(8)).u64() != h.value()) throw SaveFormatError("corrupt save: checksum mismatch");

  Reader in(body.subspan(sizeof(kMagic)));
  const std::uint32_t version = in.u32();
  if (version != kSaveVersion) {
    throw SaveFormatError("unsupported save version " + std::to_string(version) + " (expected " +
                          std::to_string(kSaveVersion) + ")");
  }

  Reader config = in.section(kConfig);
  WorldConfig cfg;
  try {
    cfg = parse_config(config.bytes());
  } catch (const ConfigError& e) {
    throw SaveFormatError(std::string("corrupt save: ") + e.what());
  }
  config.expect_end();
  Simulator sim(Simulator::Internal{}, std::make_shared<const WorldConfig>(std::move(cfg)));
  const WorldConfig& c = *sim.config_;
  const std::size_t types = c.item_types.size();

  Reader map = in.section(kMap);
  std::vector<Patch> patches;
  for (std::size_t n = map.count(17); n > 0; --n) {
    const Position coord = map.pos();
    const std::uint8_t status = map.u8();
    if (status > 1) throw SaveFormatError("corrupt save: patch status");
    Patch patch(coord, c.patch_size, static_cast<PatchStatus>(status));
    for (std::size_t k = map.count(28); k > 0; --k) {
      Item item;
      item.position = map.pos();
      item.type = map.u32();
      item.created_at = map.i64();
      if (item.type >= types || !patch.add(item)) throw SaveFormatError("corrupt save: patch item");
    }
    patches.push_back(std::move(patch));
  }
  std::vector<Position> fixed_order(map.count(16));
  for (Position& p : fixed_order) p = map.pos();
  map.expect_end();
  sim.map_.restore(std::move(patches), std::move(fixed_order));

  Reader agents = in.section(kAgents);
  sim.next_id_ = agents.u64();
  for (std::size_t n = agents.count(8); n > 0; --n) {
    AgentState a;
    a.id = agents.u64();
    a.position = agents.pos();
    const std::uint8_t dir = agents.u8();
    if (dir > 3) throw SaveFormatError("corrupt save: direction");
    a.direction = static_cast<Direction>(dir);
    a.spawn = agents.pos();
    a.visual_range = static_cast<int>(agents.u32());
    a.field_of_view = agents.f64();
    a.color = agents.reals();
    a.scent = agents.reals();
    for (std::size_t k = agents.count(1); k > 0; --k) {
      const std::uint8_t kind = agents.u8();
      if (kind > static_cast<std::uint8_t>(ActionKind::NoOp)) throw SaveFormatError("corrupt save: action");
      a.action_space.push_back(static_cast<ActionKind>(kind));
    }
    a.inventory.resize(agents.count(8));
    if (a.inventory.size() != types) throw SaveFormatError("corrupt save: inventory size");
    for (std::uint64_t& v : a.inventory) v = agents.u64();
    const std::uint8_t has_pending = agents.u8();
    const std::uint8_t kind = agents.u8();
    const std::uint32_t item = agents.u32();
    if (kind > static_cast<std::uint8_t>(ActionKind::NoOp)) throw SaveFormatError("corrupt save: action");
    if (has_pending != 0) a.pending = Action{static_cast<ActionKind>(kind), item};
    a.distance_max = agents.f64();
    a.scent_since = agents.i64();
    const AgentId id = a.id;
    sim.agents_.emplace(id, std::move(a));
  }
  for (std::size_t n = agents.count(8); n > 0; --n) sim.request_order_.push_back(agents.u64());
  agents.expect_end();

  Reader sources = in.section(kSources);
  for (std::size_t n = sources.count(41); n > 0; --n) {
    ScentSource s;
    s.position = sources.pos();
    s.scent = sources.reals();
    s.start = sources.i64();
    const std::uint8_t has_end = sources.u8();
    const std::int64_t end = sources.i64();
    if (has_end != 0) s.end = end;
    sim.sources_.push_back(std::move(s));
  }
  sources.expect_end();

  Reader rng = in.section(kRng);
  const std::uint64_t state = rng.u64();
  const std::uint64_t inc = rng.u64();
  rng.expect_end();
  if ((inc & 1U) == 0) throw SaveFormatError("corrupt save: rng increment");
  sim.rng_ = Pcg32::from_raw(state, inc);

  Reader clock = in.section(kClock);
  sim.time_ = clock.i64();
  clock.expect_end();
  in.expect_end();
  return sim;
}

std::vector<std::uint8_t> Simulator::save() const { return SimulatorCodec::save(*this); }

Simulator Simulator::load(std::span<const std::uint8_t> bytes) { return SimulatorCodec::load(bytes); }

}  // namespace jbw
