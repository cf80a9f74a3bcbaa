#include "doctest.h"

#include "soniguide/agent.hpp"
#include "soniguide/error.hpp"
#include "soniguide/io.hpp"

#include <sstream>

using namespace soniguide;

namespace {

Session sample_session() {
  const TargetLayout layout = default_layout();
  const SessionSpec spec{"io", GroupOrder::from_index(2), SkullProxy{}.apex(), 3};
  return synthesize_session(layout, target_path(layout), policy_preset("equal"), spec, MappingConfig{});
}

std::string parse_error_location(std::string_view text) {
  try {
    io::parse(text);
  } catch (const ParseError& e) {
    return e.location();
  }
  return "";
}

}  // namespace

TEST_CASE("syntax errors carry line:col") {
  CHECK(parse_error_location("{\n  \"a\": 1,\n  oops\n}") == "3:3");
  CHECK(parse_error_location("") == "1:1");
  CHECK(parse_error_location("[1, 2") != "");
}

TEST_CASE("session round-trip is bit-exact") {
  const Session s = sample_session();
  const Session back = io::session_from_json(io::parse(io::to_json(s).dump()));
  REQUIRE(back.trials.size() == s.trials.size());
  CHECK(back.participant_id == s.participant_id);
  CHECK(back.order == s.order);
  for (std::size_t i = 0; i < s.trials.size(); ++i) {
    CHECK(back.trials[i].click_pos == s.trials[i].click_pos);
    CHECK(back.trials[i].click_t == s.trials[i].click_t);
    REQUIRE(back.trials[i].samples.size() == s.trials[i].samples.size());
    for (std::size_t k = 0; k < s.trials[i].samples.size(); ++k) {
      CHECK(back.trials[i].samples[k].pos == s.trials[i].samples[k].pos);
      CHECK(back.trials[i].samples[k].t == s.trials[i].samples[k].t);
    }
  }
}

TEST_CASE("schema errors name the field path") {
  io::json j = io::to_json(sample_session());
  j["trials"][4]["samples"][2] = "bad";
  try {
    io::session_from_json(j);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.location() == "trials[4].samples[2]");
  }
  j = io::to_json(sample_session());
  j["trials"][3]["mode"] = j["trials"][3]["mode"] == "a" ? "v" : "a";
  CHECK_THROWS_AS(io::session_from_json(j), ValidationError);

  io::json m = io::to_json(MappingConfig{});
  m["surprise"] = 1;
  CHECK_THROWS_AS(io::mapping_config_from_json(m), ParseError);
}

TEST_CASE("configs round-trip and accept partial documents") {
  MappingConfig mc;
  mc.x_sat = 12.5;
  const MappingConfig mback = io::mapping_config_from_json(io::to_json(mc));
  CHECK(mback.x_sat == 12.5);
  CHECK(mback.deadzone == mc.deadzone);
  const SynthConfig sc = io::synth_config_from_json(io::parse(R"({"block_size": 256})"));
  CHECK(sc.block_size == 256);
  CHECK(sc.sample_rate == 44100.0);
  CHECK_THROWS_AS(io::synth_config_from_json(io::parse(R"({"f_hi": 10000})")), ValidationError);
}

TEST_CASE("layout validation requires targets on the surface") {
  io::json j = io::to_json(default_layout());
  CHECK_NOTHROW(io::layout_from_json(j));
  j["rings"][0]["targets"][0][1] = 100.0;
  CHECK_THROWS_AS(io::layout_from_json(j), ValidationError);
}

TEST_CASE("trial JSON Lines stream") {
  const Session s = sample_session();
  std::stringstream ss;
  io::write_trial_stream(ss, s.trials);
  ss << "\n";
  const auto back = io::read_trial_stream(ss);
  REQUIRE(back.size() == 30);
  CHECK(back[29].click_pos == s.trials[29].click_pos);
}
