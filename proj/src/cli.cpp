#include "soniguide/cli.hpp"

#include "soniguide/agent.hpp"
#include "soniguide/analysis.hpp"
#include "soniguide/error.hpp"
#include "soniguide/io.hpp"
#include "soniguide/random.hpp"
#include "soniguide/service.hpp"
#include "soniguide/synth.hpp"
#include "soniguide/wav.hpp"

#include "CLI11.hpp"

#include <glob.h>

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace soniguide {

namespace {

namespace fs = std::filesystem;
using io::json;

// Exit with a specific code and message.
struct Exit {
  int code;
  std::string message;
};

struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> listen;
  std::optional<std::string> preset;
  std::optional<std::string> out;
  std::optional<std::string> mapping;
  std::optional<std::string> synth;
  std::optional<std::string> layout;
};

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

// Optional settings file for render/simulate/analyze.
json settings_file(const Flags& flags) {
  const auto path = flags.config ? flags.config : env("SONIGUIDE_CONFIG");
  if (!path) return json::object();
  json j = io::read_json_file(*path);
  if (!j.is_object()) throw ParseError("<root>", "settings file must be an object");
  static const std::vector<std::string> known = {"seed", "preset", "out", "listen", "mapping_config", "synth_config", "layout"};
  const fs::path base = fs::path(*path).parent_path();
  for (auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ParseError(key, "unknown settings field");
    if (key == "seed") {
      if (!value.is_number_unsigned()) throw ParseError(key, "expected a non-negative integer");
    } else if (!value.is_string()) {
      throw ParseError(key, "expected a string");
    } else if (key == "mapping_config" || key == "synth_config" || key == "layout") {
      const fs::path p(value.get<std::string>());
      value = p.is_absolute() ? p.string() : (base / p).string();
    }
  }
  return j;
}

std::optional<std::string> pick(const std::optional<std::string>& flag, const char* env_name, const json& file,
                                const char* key) {
  if (flag) return flag;
  if (env_name != nullptr) {
    if (auto v = env(env_name)) return v;
  }
  if (file.contains(key)) return file[key].get<std::string>();
  return std::nullopt;
}

std::uint64_t resolve_seed(const Flags& flags, const json& file, std::ostream& err) {
  if (flags.seed) return *flags.seed;
  if (auto v = env("SONIGUIDE_SEED")) {
    try {
      std::size_t used = 0;
      const auto seed = std::stoull(*v, &used);
      if (used == v->size()) return seed;
    } catch (const std::exception&) {
    }
    throw Exit{kExitUsage, "SONIGUIDE_SEED must be a non-negative integer, got '" + *v + "'"};
  }
  if (file.contains("seed")) return file["seed"].get<std::uint64_t>();
  std::random_device rd;
  const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "seed: " << seed << '\n';
  return seed;
}

MappingConfig mapping_from(const std::optional<std::string>& path) {
  return path ? io::load_mapping_config(*path) : MappingConfig{};
}

SynthConfig synth_from(const std::optional<std::string>& path, double mod_freq) {
  if (path) return io::load_synth_config(*path);
  SynthConfig cfg;
  cfg.mod_freq = mod_freq;
  return cfg;
}

int cmd_render(const std::string& trial_path, const Flags& flags, std::ostream& out, std::ostream& err) {
  const json file = settings_file(flags);
  const MappingConfig mcfg = mapping_from(pick(flags.mapping, nullptr, file, "mapping_config"));
  const SynthConfig scfg = synth_from(pick(flags.synth, nullptr, file, "synth_config"), mcfg.mod_freq);
  const std::string out_path = pick(flags.out, "SONIGUIDE_OUT", file, "out").value_or("render.wav");
  const std::uint64_t seed = resolve_seed(flags, file, err);

  const Trial trial = io::load_trial(trial_path);
  const TrajectoryRender render = render_trajectory(trial, trial.target, mcfg, scfg, seed);
  try {
    write_wav(out_path, render.pcm, static_cast<std::uint32_t>(scfg.sample_rate));
  } catch (const std::exception& e) {
    throw Exit{kExitUnwritable, e.what()};
  }
  out << "wrote " << out_path << ": " << render.pcm.size() << " samples, " << render.block_params.size()
      << " blocks, " << render.events.size() << " events\n";
  return kExitOk;
}

int cmd_simulate(int n, std::optional<std::uint64_t> path_seed, const Flags& flags, std::ostream& out,
                 std::ostream& err) {
  if (n < 1) throw Exit{kExitUsage, "--n must be at least 1"};
  const json file = settings_file(flags);
  const std::string preset = pick(flags.preset, "SONIGUIDE_PRESET", file, "preset").value_or("equal");
  const ModePolicies policies = [&] {
    try {
      return policy_preset(preset);
    } catch (const ValidationError& e) {
      throw Exit{kExitUsage, e.what()};
    }
  }();
  const fs::path out_dir = pick(flags.out, "SONIGUIDE_OUT", file, "out").value_or("sessions");
  const MappingConfig mcfg = mapping_from(pick(flags.mapping, nullptr, file, "mapping_config"));
  const auto layout_path = pick(flags.layout, nullptr, file, "layout");
  const TargetLayout layout = layout_path ? io::load_layout(*layout_path) : default_layout();
  const std::vector<int> path = target_path(layout, path_seed.value_or(kDefaultPathSeed));
  const std::uint64_t seed = resolve_seed(flags, file, err);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw Exit{kExitUnwritable, "cannot create directory " + out_dir.string()};

  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "sim-%03d", i + 1);
    SessionSpec spec{name, GroupOrder::from_index(i % 6), SkullProxy{}.apex(), rng.next()};
    const Session session = synthesize_session(layout, path, policies, spec, mcfg);
    std::snprintf(name, sizeof name, "session_%03d.json", i + 1);
    try {
      io::save(out_dir / name, io::to_json(session));
    } catch (const std::exception& e) {
      throw Exit{kExitUnwritable, e.what()};
    }
  }
  out << "wrote " << n << " sessions (preset " << preset << ") to " << out_dir.string() << '\n';
  return kExitOk;
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t g{};
  std::vector<std::string> files;
  if (::glob(pattern.c_str(), 0, nullptr, &g) == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) files.emplace_back(g.gl_pathv[i]);
  }
  ::globfree(&g);
  std::sort(files.begin(), files.end());
  return files;
}

int cmd_analyze(const std::string& pattern, const ReportOptions& base, bool seed_given, const Flags& flags,
                std::ostream& out, std::ostream& err) {
  const json file = settings_file(flags);
  const std::string prefix = pick(flags.out, "SONIGUIDE_OUT", file, "out").value_or("report");
  ReportOptions options = base;
  Flags seed_flags = flags;
  if (!seed_given) seed_flags.seed.reset();
  options.seed = resolve_seed(seed_flags, file, err);

  const auto files = expand_glob(pattern);
  if (files.empty()) throw Exit{kExitNoMatches, "no session files match '" + pattern + "'"};
  std::vector<Session> sessions;
  for (const auto& f : files) {
    try {
      sessions.push_back(io::load_session(f));
    } catch (const ParseError& e) {
      throw Exit{kExitBadInput, f + ":" + e.location() + ": " + e.what()};
    } catch (const ValidationError& e) {
      throw Exit{kExitBadInput, f + ": " + e.what()};
    }
  }
  const StatsReport rep = report(sessions, options);
  const std::string text = report_text(rep);
  try {
    io::write_text_file(prefix + ".csv", report_csv(rep));
    io::write_text_file(prefix + ".txt", text);
  } catch (const std::exception& e) {
    throw Exit{kExitUnwritable, e.what()};
  }
  out << text;
  return kExitOk;
}

int cmd_serve(const Flags& flags, std::ostream& err) {
  const auto config = flags.config ? flags.config : env("SONIGUIDE_CONFIG");
  ServiceConfig cfg = config ? load_service_config(*config) : ServiceConfig{};
  if (auto listen = flags.listen ? flags.listen : env("SONIGUIDE_LISTEN")) cfg.listen = *listen;
  if (auto dir = flags.out ? flags.out : env("SONIGUIDE_OUT")) cfg.session_dir = *dir;
  if (flags.seed) {
    cfg.path_seed = *flags.seed;
  } else if (auto s = env("SONIGUIDE_SEED")) {
    cfg.path_seed = std::stoull(*s);
  }
  err << "path seed: " << cfg.path_seed << '\n';
  serve(cfg);
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Psychoacoustic 3D sonification guidance engine", "soniguide"};
  app.set_version_flag("--version", SONIGUIDE_VERSION);
  app.require_subcommand(1);
  Flags flags;

  auto common = [&flags](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Settings JSON file");
    sub->add_option("--seed", flags.seed, "RNG seed (drawn from entropy and printed when omitted)");
    sub->add_option("--out", flags.out, "Output path");
  };

  std::string trial_path;
  auto* render = app.add_subcommand("render", "Render a trial JSON to a WAV file");
  render->add_option("trial", trial_path, "Trial JSON file")->required();
  render->add_option("--mapping", flags.mapping, "Mapping config JSON");
  render->add_option("--synth", flags.synth, "Synth config JSON");
  common(render);

  int n_sessions = 24;
  std::optional<std::uint64_t> path_seed;
  auto* simulate = app.add_subcommand("simulate", "Write synthetic sessions driven by homing agents");
  simulate->add_option("--n", n_sessions, "Number of sessions")->capture_default_str();
  simulate->add_option("--preset", flags.preset, "Agent policy preset (equal, aud-slow)");
  simulate->add_option("--layout", flags.layout, "Target layout JSON");
  simulate->add_option("--mapping", flags.mapping, "Mapping config JSON");
  simulate->add_option("--path-seed", path_seed, "Seed of the target visiting order");
  common(simulate);

  std::string pattern;
  ReportOptions options;
  auto* analyze = app.add_subcommand("analyze", "Outlier filter, per-decade metrics and MANOVA over sessions");
  analyze->add_option("sessions", pattern, "Glob of session JSON files")->required();
  analyze->add_option("--alpha", options.alpha, "Significance level")->capture_default_str();
  analyze->add_option("--permutations", options.n_permutations, "Label permutations for the MANOVA and post-hoc tests")->capture_default_str();
  common(analyze);

  auto* serve_cmd = app.add_subcommand("serve", "Run the websocket session service");
  serve_cmd->add_option("--listen", flags.listen, "host:port");
  common(serve_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*render) return cmd_render(trial_path, flags, out, err);
    if (*simulate) return cmd_simulate(n_sessions, path_seed, flags, out, err);
    if (*analyze) return cmd_analyze(pattern, options, flags.seed.has_value(), flags, out, err);
    if (*serve_cmd) return cmd_serve(flags, err);
  } catch (const Exit& e) {
    err << "error: " << e.message << '\n';
    return e.code;
  } catch (const ParseError& e) {
    err << "error: " << e.location() << ": " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace soniguide
