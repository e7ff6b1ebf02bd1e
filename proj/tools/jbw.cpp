#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <thread>

#include "CLI11.hpp"

#include "jbw/experiment.hpp"
#include "jbw/net/server.hpp"

namespace {

using namespace jbw;

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3 };

struct ConfigFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigFailure("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

Simulator load_save(const std::filesystem::path& path) {
  try {
    return Simulator::load(read_file(path));
  } catch (const SaveFormatError& e) {
    throw ConfigFailure(path.string() + ": " + e.what());
  }
}

RewardSchedule make_schedule(const std::string& reward, const std::string& schedule_file, const WorldConfig& config) {
  try {
    if (!schedule_file.empty()) return load_schedule(schedule_file, config);
    return RewardSchedule::fixed(parse_reward(reward, config));
  } catch (const RewardParseError& e) {
    throw ConfigFailure(e.what());
  } catch (const ConfigError& e) {
    throw ConfigFailure(e.what());
  }
}

WorldConfig read_config(const std::string& path, std::optional<std::uint64_t> seed) {
  try {
    WorldConfig c = load_config(path);
    if (seed) c.seed = *seed;
    return c;
  } catch (const ConfigError& e) {
    throw ConfigFailure(e.what());
  }
}

std::string indexed_path(const std::string& path, std::size_t i, std::size_t n) {
  if (n == 1 || path.empty()) return path;
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + "." + std::to_string(i) + p.extension().string())).string();
}

struct RunArgs {
  std::string config;
  std::string reward{"Collect[JellyBean]"};
  std::string schedule;
  std::string agent{"greedy"};
  std::int64_t steps{100000};
  std::optional<std::uint64_t> seed;
  std::size_t window{100000};
  std::size_t stride{1};
  std::string out;
  std::string save;
  std::string initial_save;
  std::string log;
  std::size_t batch{1};
  bool forward_when_clear{false};
};

int cmd_run(const RunArgs& a) {
  const WorldConfig base = read_config(a.config, a.seed);
  const RewardSchedule schedule = make_schedule(a.reward, a.schedule, base);
  const AgentKind kind = a.agent == "random" ? AgentKind::Random : AgentKind::Greedy;

  std::vector<std::unique_ptr<Environment>> envs(a.batch);
  std::vector<std::exception_ptr> errors(a.batch);
  std::vector<double> seconds(a.batch, 0.0);
  {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < a.batch; ++i) {
      workers.emplace_back([&, i] {
        try {
          WorldConfig config = base;
          config.seed = base.seed + i;
          envs[i] = std::make_unique<Environment>(config, schedule);
          Environment& env = *envs[i];
          if (!a.initial_save.empty()) write_file(indexed_path(a.initial_save, i, a.batch), env.simulator().save());
          std::ofstream log;
          if (!a.log.empty()) {
            log.open(indexed_path(a.log, i, a.batch));
            log << "# jbw action log v1\n";
          }
          RunOptions options;
          options.agent = kind;
          options.steps = a.steps;
          options.policy_seed = config.seed;
          options.forward_when_clear = a.forward_when_clear;
          if (log.is_open()) {
            options.on_step = [&](const LoggedAction& e, const EnvStep&) {
              log << format_log_line(e, env.simulator().config()) << '\n';
            };
          }
          const auto start = std::chrono::steady_clock::now();
          run_agent(env, options);
          seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t i = 0; i < a.batch; ++i) {
    const Environment& env = *envs[i];
    if (!a.out.empty()) {
      std::ofstream csv(indexed_path(a.out, i, a.batch));
      write_metrics_csv(csv, env.rewards(), a.window, a.stride);
      if (!csv) throw std::runtime_error("cannot write " + a.out);
    }
    if (!a.save.empty()) write_file(indexed_path(a.save, i, a.batch), env.simulator().save());
    const std::vector<double> rate = reward_rate(env.rewards(), a.window);
    double total = 0.0;
    for (double r : env.rewards()) total += r;
    std::cout << "entry " << i << " seed " << base.seed + i << ": steps " << env.rewards().size() << ", total reward "
              << total << ", final reward rate " << (rate.empty() ? 0.0 : rate.back()) << ", steps/sec "
              << (seconds[i] > 0 ? static_cast<double>(a.steps) / seconds[i] : 0.0) << ", digest "
              << net::hex64(env.simulator().digest()) << '\n';
  }
  return kOk;
}

Position spiral(std::size_t n) {
  // Square spiral: 0 -> (0,0), then (1,0), (1,1), (0,1), (-1,1), ...
  std::int64_t x = 0, y = 0, leg = 1;
  std::size_t i = 0;
  int dir = 0;
  static constexpr std::int64_t dx[4] = {1, 0, -1, 0};
  static constexpr std::int64_t dy[4] = {0, 1, 0, -1};
  while (i < n) {
    for (int twice = 0; twice < 2 && i < n; ++twice) {
      for (std::int64_t k = 0; k < leg && i < n; ++k, ++i) {
        x += dx[dir];
        y += dy[dir];
      }
      dir = (dir + 1) % 4;
    }
    ++leg;
  }
  return {x, y};
}

int cmd_bench(const std::string& config_path, std::size_t patches, std::optional<int> mh, std::optional<std::uint64_t> seed) {
  WorldConfig config = read_config(config_path, seed);
  if (mh) config.mh_iterations = *mh;
  WorldMap map(std::make_shared<const WorldConfig>(config));
  Pcg32 rng(config.seed);
  std::size_t min_items = SIZE_MAX, max_items = 0, total_items = 0;
  double seconds = 0.0;
  for (std::size_t i = 0; i < patches; ++i) {
    const Position coord = spiral(i);
    const auto start = std::chrono::steady_clock::now();
    map.generate_patch(coord, rng);
    seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::size_t n = map.find(coord)->items().size();
    min_items = std::min(min_items, n);
    max_items = std::max(max_items, n);
    total_items += n;
  }
  std::cout << "patches " << patches << "\nmh_iterations " << config.mh_iterations << "\npatch_size "
            << config.patch_size << "\nseconds " << seconds << "\npatches_per_second "
            << static_cast<double>(patches) / seconds << "\nitems_per_patch_mean "
            << static_cast<double>(total_items) / static_cast<double>(patches) << "\nitems_per_patch_min " << min_items
            << "\nitems_per_patch_max " << max_items << '\n';
  return kOk;
}

struct ServeArgs {
  std::string config;
  std::string load;
  std::string save{"jbw-final.save"};
  std::string save_dir{"."};
  std::string reward;
  std::string schedule;
  std::uint16_t port{54353};
  std::uint16_t ws_port{54354};
  std::string address{"127.0.0.1"};
  std::optional<std::uint64_t> seed;
  double grace{30.0};
};

int cmd_serve(const ServeArgs& a) {
  if (a.config.empty() && a.load.empty()) throw CLI::ValidationError("serve needs --config or --load");
  Simulator sim = a.load.empty() ? Simulator(read_config(a.config, a.seed)) : load_save(a.load);
  net::ServerOptions options;
  options.save_dir = a.save_dir;
  options.grace = std::chrono::milliseconds(static_cast<std::int64_t>(a.grace * 1000));
  if (!a.reward.empty() || !a.schedule.empty()) options.schedule = make_schedule(a.reward, a.schedule, sim.config());
  net::ServerCore core(std::move(sim), std::move(options));
  net::Server server(core, a.port, a.ws_port, a.address);
  server.start();
  std::cout << "serving tcp " << a.address << ":" << server.tcp_port() << " ws " << a.address << ":" << server.ws_port()
            << " time " << core.time() << std::endl;

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::jthread io([&] { server.run(); });
  while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server.stop();
  io.join();
  if (!a.save.empty()) {
    write_file(a.save, core.save());
    std::cout << "saved " << a.save << " time " << core.time() << " digest " << net::hex64(core.digest()) << std::endl;
  }
  return kOk;
}

int cmd_replay(const std::string& load, const std::string& log_path, const std::string& save) {
  Simulator sim = load_save(load);
  std::ifstream in(log_path);
  if (!in) throw ConfigFailure("cannot open " + log_path);
  replay(sim, read_action_log(in, sim.config()));
  if (!save.empty()) write_file(save, sim.save());
  std::cout << "time " << sim.time() << "\ndigest " << net::hex64(sim.digest()) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Jelly Bean World simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run an agent and export metrics");
  run_cmd->add_option("--config", run.config, "World configuration JSON")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--reward", run.reward, "Reward DSL expression (Fixed schedule)")->capture_default_str();
  run_cmd->add_option("--schedule", run.schedule, "Reward schedule JSON file (overrides --reward)")->check(CLI::ExistingFile);
  run_cmd->add_option("--agent", run.agent, "Agent policy")->check(CLI::IsMember({"greedy", "random"}))->capture_default_str();
  run_cmd->add_option("--steps", run.steps, "Number of steps")->check(CLI::PositiveNumber)->capture_default_str();
  run_cmd->add_option("--seed", run.seed, "World seed (overrides the config)");
  run_cmd->add_option("--window", run.window, "Reward-rate window")->check(CLI::PositiveNumber)->capture_default_str();
  run_cmd->add_option("--stride", run.stride, "Write every n-th CSV row")->check(CLI::PositiveNumber)->capture_default_str();
  run_cmd->add_option("--out", run.out, "Metrics CSV path");
  run_cmd->add_option("--save", run.save, "Final save file");
  run_cmd->add_option("--initial-save", run.initial_save, "Save file of the state before the first step");
  run_cmd->add_option("--log", run.log, "Action log path");
  run_cmd->add_flag("--greedy-forward-when-clear", run.forward_when_clear,
                    "Greedy idles by moving forward unless an obstacle is ahead");
  run_cmd->add_option("--batch", run.batch, "Independent entries with seeds seed+i")->check(CLI::PositiveNumber)->capture_default_str();

  std::string bench_config;
  std::size_t bench_patches = 10;
  std::optional<int> bench_mh;
  std::optional<std::uint64_t> bench_seed;
  auto* bench_cmd = app.add_subcommand("bench", "Measure patch generation throughput");
  bench_cmd->add_option("--config", bench_config, "World configuration JSON")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--patches", bench_patches, "Patches to generate")->check(CLI::PositiveNumber)->capture_default_str();
  bench_cmd->add_option("--mh-iterations", bench_mh, "Override the MH iterations per patch")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bench_seed, "Seed (overrides the config)");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Host a simulator over TCP and WebSocket");
  serve_cmd->add_option("--config", serve.config, "World configuration JSON")->check(CLI::ExistingFile);
  serve_cmd->add_option("--load", serve.load, "Resume from a save file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--save", serve.save, "Save file written on shutdown (empty to skip)")->capture_default_str();
  serve_cmd->add_option("--save-dir", serve.save_dir, "Directory for client save/load requests")->capture_default_str();
  serve_cmd->add_option("--reward", serve.reward, "Reward DSL; observations then carry rewards");
  serve_cmd->add_option("--schedule", serve.schedule, "Reward schedule JSON file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", serve.port, "TCP port (newline-delimited JSON)")->envname("JBW_PORT")->capture_default_str();
  serve_cmd->add_option("--ws-port", serve.ws_port, "WebSocket port")->envname("JBW_WS_PORT")->capture_default_str();
  serve_cmd->add_option("--address", serve.address, "Bind address")->capture_default_str();
  serve_cmd->add_option("--seed", serve.seed, "World seed (overrides the config)");
  serve_cmd->add_option("--grace", serve.grace, "Seconds a disconnected session's agents are kept")->capture_default_str();

  std::string replay_load, replay_log, replay_save;
  auto* replay_cmd = app.add_subcommand("replay", "Re-apply an action log to a save and print the digest");
  replay_cmd->add_option("--load", replay_load, "Starting save file")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--log", replay_log, "Action log")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--save", replay_save, "Write the final state here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*bench_cmd) return cmd_bench(bench_config, bench_patches, bench_mh, bench_seed);
    if (*serve_cmd) return cmd_serve(serve);
    if (*replay_cmd) return cmd_replay(replay_load, replay_log, replay_save);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigFailure& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}
