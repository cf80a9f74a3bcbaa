#ifndef SONIGUIDE_IO_HPP
#define SONIGUIDE_IO_HPP

#include "soniguide/agent.hpp"
#include "soniguide/mapping.hpp"
#include "soniguide/scene.hpp"
#include "soniguide/synth.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

// JSON documents for layouts, trials, sessions and configs. Lengths in cm,
// times in seconds. Schemas are described in docs/formats.md. Readers throw
// ParseError carrying "line:col" for syntax errors and a field path
// (e.g. "trials[4].samples[2]") for schema errors; semantic violations
// surface as ValidationError from the types' validate().
namespace soniguide::io {

using nlohmann::json;

// Parses text, mapping syntax errors to "line:col" locations.
json parse(std::string_view text);
json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

json to_json(const Vec3& v);
json to_json(const TargetLayout& layout);
json to_json(const Trial& trial);
json to_json(const Session& session);
json to_json(const MappingConfig& cfg);
json to_json(const SynthConfig& cfg);
json to_json(const SoniParams& params);
json to_json(const AgentPolicy& policy);

TargetLayout layout_from_json(const json& j);
Trial trial_from_json(const json& j, const std::string& path = "");
Session session_from_json(const json& j);
MappingConfig mapping_config_from_json(const json& j);
SynthConfig synth_config_from_json(const json& j);

// Layout targets must lie on the proxy within 1e-6 cm. Throws ValidationError.
void validate_layout(const TargetLayout& layout);

TargetLayout load_layout(const std::filesystem::path& path);
Trial load_trial(const std::filesystem::path& path);
Session load_session(const std::filesystem::path& path);
MappingConfig load_mapping_config(const std::filesystem::path& path);
SynthConfig load_synth_config(const std::filesystem::path& path);

void save(const std::filesystem::path& path, const json& document);

// JSON Lines: one trial object per line. Blank lines are skipped.
std::vector<Trial> read_trial_stream(std::istream& in);
void write_trial_stream(std::ostream& out, const std::vector<Trial>& trials);

}  // namespace soniguide::io

#endif  // SONIGUIDE_IO_HPP
