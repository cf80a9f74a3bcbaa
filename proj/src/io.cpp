#include "soniguide/io.hpp"

#include "soniguide/error.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace soniguide::io {

namespace {

constexpr const char* kLayoutFormat = "soniguide.layout/1";
constexpr const char* kSessionFormat = "soniguide.session/1";

std::string child(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

std::string element(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

const json& field(const json& j, std::string_view key, const std::string& path) {
  if (!j.is_object()) throw ParseError(path.empty() ? "<root>" : path, "expected an object");
  const auto it = j.find(std::string(key));
  if (it == j.end()) throw ParseError(child(path, key), "missing field");
  return *it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ParseError(path, "expected a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ParseError(path, "expected an integer");
  return j.get<int>();
}

std::string string(const json& j, const std::string& path) {
  if (!j.is_string()) throw ParseError(path, "expected a string");
  return j.get<std::string>();
}

const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ParseError(path, "expected an array");
  return j;
}

Vec3 vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw ParseError(path, "expected [x, y, z]");
  return {number(j[0], element(path, 0)), number(j[1], element(path, 1)), number(j[2], element(path, 2))};
}

void check_format(const json& j, const char* expected) {
  if (!j.is_object()) throw ParseError("<root>", "expected an object");
  if (const auto it = j.find("format"); it != j.end() && *it != expected) {
    throw ParseError("format", "expected '" + std::string(expected) + "'");
  }
}

// Optional keys with defaults; unknown keys are rejected so typos surface.
class ConfigReader {
 public:
  ConfigReader(const json& j, std::string what) : j_(j), what_(std::move(what)) {
    if (!j.is_object()) throw ParseError("<root>", what_ + " must be an object");
  }

  void read(const char* key, double& value) {
    seen_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) value = number(*it, key);
  }
  void read(const char* key, int& value) {
    seen_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) value = integer(*it, key);
  }
  void read(const char* key, Vec3& value) {
    seen_.insert(key);
    if (const auto it = j_.find(key); it != j_.end()) value = vec3(*it, key);
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (key != "format" && !seen_.contains(key)) throw ParseError(key, "unknown " + what_ + " field");
    }
  }

 private:
  const json& j_;
  std::string what_;
  std::set<std::string> seen_;
};

}  // namespace

json parse(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    const std::size_t limit = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string message = e.what();
    if (const auto pos = message.find("syntax error"); pos != std::string::npos) message = message.substr(pos);
    throw ParseError(std::to_string(line) + ":" + std::to_string(col), message);
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << file.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open '" + path.string() + "' for writing");
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) throw Error("failed writing '" + path.string() + "'");
}

json read_json_file(const std::filesystem::path& path) { return parse(read_text_file(path)); }

void save(const std::filesystem::path& path, const json& document) { write_text_file(path, document.dump(2) + "\n"); }

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const TargetLayout& layout) {
  json rings = json::array();
  for (const auto& ring : layout.rings) {
    json targets = json::array();
    for (const auto& t : ring.targets) targets.push_back(to_json(t));
    rings.push_back({{"center_direction", to_json(ring.center_direction)},
                     {"ring_radius", ring.ring_radius},
                     {"targets", std::move(targets)}});
  }
  return {{"format", kLayoutFormat},
          {"proxy", {{"center", to_json(layout.proxy.center)}, {"semi_axes", to_json(layout.proxy.semi_axes)}}},
          {"rings", std::move(rings)}};
}

json to_json(const Trial& trial) {
  json samples = json::array();
  for (const auto& s : trial.samples) samples.push_back(json::array({s.t, s.pos.x(), s.pos.y(), s.pos.z()}));
  return {{"index", trial.index},
          {"target", to_json(trial.target)},
          {"mode", std::string(to_string(trial.mode))},
          {"samples", std::move(samples)},
          {"click_pos", to_json(trial.click_pos)},
          {"click_t", trial.click_t}};
}

json to_json(const Session& session) {
  json trials = json::array();
  for (const auto& t : session.trials) trials.push_back(to_json(t));
  return {{"format", kSessionFormat},
          {"participant_id", session.participant_id},
          {"order", session.order.name()},
          {"trials", std::move(trials)}};
}

json to_json(const MappingConfig& c) {
  return {{"omega_max", c.omega_max},     {"x_sat", c.x_sat},
          {"am_freq_min", c.am_freq_min}, {"am_freq_max", c.am_freq_max},
          {"y_sat", c.y_sat},             {"beta_max", c.beta_max},
          {"mod_freq", c.mod_freq},       {"shift_max", c.shift_max},
          {"z_sat", c.z_sat},             {"fullness_min", c.fullness_min},
          {"prox_radius", c.prox_radius}, {"deadzone", to_json(c.deadzone)}};
}

json to_json(const SynthConfig& c) {
  return {{"sample_rate", c.sample_rate},   {"block_size", c.block_size},     {"f_lo", c.f_lo},
          {"f_hi", c.f_hi},                 {"env_center", c.env_center},     {"env_sigma", c.env_sigma},
          {"edge_taper", c.edge_taper},     {"mod_freq", c.mod_freq},         {"shepard_rms", c.shepard_rms},
          {"master_gain", c.master_gain},   {"shepard_gain", c.shepard_gain}, {"click_gain", c.click_gain},
          {"chord_gain", c.chord_gain},     {"noise_gain", c.noise_gain}};
}

json to_json(const SoniParams& p) {
  return {{"chroma_rate", p.chroma_rate},
          {"am_freq", p.am_freq},
          {"fm_index", p.fm_index},
          {"brightness_shift", p.brightness_shift},
          {"fullness", p.fullness},
          {"proximity_noise", p.proximity_noise}};
}

json to_json(const AgentPolicy& p) {
  return {{"gain", p.gain},
          {"step_hz", p.step_hz},
          {"noise_sigma", p.noise_sigma},
          {"click_threshold", p.click_threshold},
          {"click_steps", p.click_steps},
          {"step_cap", p.step_cap}};
}

TargetLayout layout_from_json(const json& j) {
  check_format(j, kLayoutFormat);
  TargetLayout layout;
  const json& proxy = field(j, "proxy", "");
  layout.proxy.center = vec3(field(proxy, "center", "proxy"), "proxy.center");
  layout.proxy.semi_axes = vec3(field(proxy, "semi_axes", "proxy"), "proxy.semi_axes");
  const json& rings = array(field(j, "rings", ""), "rings");
  if (rings.size() != kRingCount) throw ParseError("rings", "expected 6 rings");
  for (std::size_t r = 0; r < rings.size(); ++r) {
    const std::string path = element("rings", r);
    Ring& ring = layout.rings[r];
    ring.center_direction = vec3(field(rings[r], "center_direction", path), child(path, "center_direction"));
    ring.ring_radius = number(field(rings[r], "ring_radius", path), child(path, "ring_radius"));
    const json& targets = array(field(rings[r], "targets", path), child(path, "targets"));
    if (targets.size() != kTargetsPerRing) throw ParseError(child(path, "targets"), "expected 5 targets");
    for (std::size_t k = 0; k < targets.size(); ++k) ring.targets[k] = vec3(targets[k], element(child(path, "targets"), k));
  }
  validate_layout(layout);
  return layout;
}

void validate_layout(const TargetLayout& layout) {
  layout.proxy.validate();
  for (int r = 0; r < kRingCount; ++r) {
    const Ring& ring = layout.rings[static_cast<std::size_t>(r)];
    for (const Vec3& t : ring.targets) {
      // Distance to the surface along the radial ray.
      const double off = (t - layout.proxy.radial_projection(t - layout.proxy.center)).norm();
      if (!(off <= 1e-6)) throw InvalidRingError(r, "target is not on the skull proxy surface");
    }
  }
}

Trial trial_from_json(const json& j, const std::string& path) {
  Trial trial;
  trial.index = integer(field(j, "index", path), child(path, "index"));
  trial.target = vec3(field(j, "target", path), child(path, "target"));
  try {
    trial.mode = parse_mode(string(field(j, "mode", path), child(path, "mode")));
  } catch (const ValidationError& e) {
    throw ParseError(child(path, "mode"), e.what());
  }
  const std::string samples_path = child(path, "samples");
  const json& samples = array(field(j, "samples", path), samples_path);
  trial.samples.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::string sp = element(samples_path, i);
    const json& s = samples[i];
    if (!s.is_array() || s.size() != 4) throw ParseError(sp, "expected [t, x, y, z]");
    trial.samples.push_back({number(s[0], element(sp, 0)),
                             Vec3(number(s[1], element(sp, 1)), number(s[2], element(sp, 2)), number(s[3], element(sp, 3)))});
  }
  trial.click_pos = vec3(field(j, "click_pos", path), child(path, "click_pos"));
  trial.click_t = number(field(j, "click_t", path), child(path, "click_t"));
  return trial;
}

Session session_from_json(const json& j) {
  check_format(j, kSessionFormat);
  Session session;
  session.participant_id = string(field(j, "participant_id", ""), "participant_id");
  try {
    session.order = GroupOrder::parse(string(field(j, "order", ""), "order"));
  } catch (const ValidationError& e) {
    throw ParseError("order", e.what());
  }
  const json& trials = array(field(j, "trials", ""), "trials");
  for (std::size_t i = 0; i < trials.size(); ++i) session.trials.push_back(trial_from_json(trials[i], element("trials", i)));
  session.validate();
  return session;
}

MappingConfig mapping_config_from_json(const json& j) {
  MappingConfig c;
  ConfigReader r(j, "mapping config");
  r.read("omega_max", c.omega_max);
  r.read("x_sat", c.x_sat);
  r.read("am_freq_min", c.am_freq_min);
  r.read("am_freq_max", c.am_freq_max);
  r.read("y_sat", c.y_sat);
  r.read("beta_max", c.beta_max);
  r.read("mod_freq", c.mod_freq);
  r.read("shift_max", c.shift_max);
  r.read("z_sat", c.z_sat);
  r.read("fullness_min", c.fullness_min);
  r.read("prox_radius", c.prox_radius);
  r.read("deadzone", c.deadzone);
  r.finish();
  c.validate();
  return c;
}

SynthConfig synth_config_from_json(const json& j) {
  SynthConfig c;
  ConfigReader r(j, "synth config");
  r.read("sample_rate", c.sample_rate);
  r.read("block_size", c.block_size);
  r.read("f_lo", c.f_lo);
  r.read("f_hi", c.f_hi);
  r.read("env_center", c.env_center);
  r.read("env_sigma", c.env_sigma);
  r.read("edge_taper", c.edge_taper);
  r.read("mod_freq", c.mod_freq);
  r.read("shepard_rms", c.shepard_rms);
  r.read("master_gain", c.master_gain);
  r.read("shepard_gain", c.shepard_gain);
  r.read("click_gain", c.click_gain);
  r.read("chord_gain", c.chord_gain);
  r.read("noise_gain", c.noise_gain);
  r.finish();
  c.validate();
  return c;
}

TargetLayout load_layout(const std::filesystem::path& path) { return layout_from_json(read_json_file(path)); }

Trial load_trial(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ParseError("1:1", "empty trial file");
  return trial_from_json(parse(text));
}

Session load_session(const std::filesystem::path& path) { return session_from_json(read_json_file(path)); }

MappingConfig load_mapping_config(const std::filesystem::path& path) {
  return mapping_config_from_json(read_json_file(path));
}

SynthConfig load_synth_config(const std::filesystem::path& path) { return synth_config_from_json(read_json_file(path)); }

std::vector<Trial> read_trial_stream(std::istream& in) {
  std::vector<Trial> trials;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where, e.what());
    }
    try {
      trials.push_back(trial_from_json(j));
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.location(), e.what());
    }
  }
  return trials;
}

void write_trial_stream(std::ostream& out, const std::vector<Trial>& trials) {
  for (const auto& t : trials) out << to_json(t).dump() << '\n';
}

}  // namespace soniguide::io
