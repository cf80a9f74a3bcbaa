// Loopback harness: pose -> audio-frame latency, PCM continuity, and a session
// recorded over the wire that the analyze command accepts.
#include "soniguide/cli.hpp"
#include "soniguide/io.hpp"
#include "soniguide/service.hpp"
#include "support/ws_client.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <deque>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>
#include <unistd.h>

using namespace soniguide;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using io::json;

namespace {

std::string pose(double t, const Vec3& p) {
  return json{{"type", "pose"}, {"t", t}, {"x", p.x()}, {"y", p.y()}, {"z", p.z()}}.dump();
}

struct Stream {
  testing::WsClient& ws;
  std::int64_t last_seq = -1;
  std::int64_t gaps = 0;
  std::int64_t binary = 0;

  // Reads one frame, tracking PCM sequence numbers. Throws on timeout.
  testing::Frame next() {
    auto f = ws.read(std::chrono::milliseconds(2000));
    if (!f) throw std::runtime_error("connection stalled: " + ws.last_error().message());
    if (f->binary) {
      const auto seq = static_cast<std::int64_t>(decode_pcm_sequence(f->payload));
      if (last_seq >= 0 && seq != last_seq + 1) ++gaps;
      last_seq = seq;
      ++binary;
    }
    return *f;
  }
};

bool latency_run(Server& server, double seconds) {
  testing::WsClient ws(server.port());
  Stream stream{ws};
  ws.send(R"({"type":"mode","value":"a"})");
  std::deque<Clock::time_point> sent;
  std::vector<double> latency_ms;
  bool awaiting_audio = false;
  Clock::time_point pending_send;

  const auto start = Clock::now();
  const auto period = std::chrono::microseconds(16667);
  auto next_send = start;
  int n = 0;
  while (Clock::now() - start < std::chrono::duration<double>(seconds)) {
    if (Clock::now() >= next_send) {
      const double t = n * 1.0 / 60.0;
      const Vec3 p(5.0 * std::sin(0.5 * t), 5.0 + 3.0 * std::cos(0.3 * t), 2.0 * std::sin(0.7 * t));
      sent.push_back(Clock::now());
      ws.send(pose(t, p));
      ++n;
      next_send += period;
    }
    const testing::Frame f = stream.next();
    if (!f.binary) {
      const json m = json::parse(f.payload);
      if (m["type"] == "params" && !sent.empty()) {
        pending_send = sent.front();
        sent.pop_front();
        awaiting_audio = true;
      }
    } else if (awaiting_audio) {
      latency_ms.push_back(std::chrono::duration<double, std::milli>(Clock::now() - pending_send).count());
      awaiting_audio = false;
    }
  }
  ws.close();

  if (latency_ms.empty()) {
    std::cout << "FAIL loopback latency: no params/audio pairs observed\n";
    return false;
  }
  std::sort(latency_ms.begin(), latency_ms.end());
  const double median = latency_ms[latency_ms.size() / 2];
  const double p95 = latency_ms[latency_ms.size() * 95 / 100];
  const bool ok = median < 100.0 && stream.gaps == 0 && stream.binary > 0;
  std::cout << (ok ? "PASS" : "FAIL") << " loopback latency: median " << median << " ms, p95 " << p95 << " ms over "
            << latency_ms.size() << " poses; " << stream.binary << " PCM frames, " << stream.gaps << " sequence gaps\n";
  return ok;
}

bool recorded_session(Server& server, const fs::path& dir) {
  testing::WsClient ws(server.port());
  Stream stream{ws};
  const auto read_until = [&](const std::string& type) {
    for (;;) {
      const testing::Frame f = stream.next();
      if (f.binary) continue;
      const json m = json::parse(f.payload);
      if (m["type"] == "error") throw std::runtime_error("server error: " + f.payload);
      if (m["type"] == type) return m;
    }
  };

  const ServiceContext& ctx = server.context();
  ws.send(R"({"type":"start_session","participant_id":"loopback","order":"a-v-av"})");
  read_until("trial_start");
  double t = 0.0;
  std::string file;
  for (int trial = 1; trial <= 30; ++trial) {
    const Vec3 target = ctx.layout.target(ctx.path[static_cast<std::size_t>(trial - 1)]);
    const Vec3 offset(3.0, -2.0, 1.5);
    for (int i = 0; i <= 12; ++i) {
      t += 0.01;
      ws.send(pose(t, target + offset * (1.0 - i / 12.0)));
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ws.send(R"({"type":"click"})");
    read_until("trial_done");
    if (trial < 30) {
      ws.send(R"({"type":"next_trial"})");
      read_until("trial_start");
    } else {
      file = read_until("session_done")["file"].get<std::string>();
    }
  }
  ws.close();

  // Session files are written off the network threads; wait for it to land.
  const fs::path saved = server.context().session_dir / file;
  for (int i = 0; i < 200 && !fs::exists(saved); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(10));

  std::ostringstream out, err;
  const std::string prefix = (dir / "wire_report").string();
  const std::string pattern = saved.string();
  const char* argv[] = {"soniguide", "analyze", pattern.c_str(), "--seed", "1", "--out", prefix.c_str()};
  const int code = run_cli(7, argv, out, err);
  const bool ok = code == kExitOk && fs::exists(prefix + ".csv");
  std::cout << (ok ? "PASS" : "FAIL") << " recorded session analyzed: " << fs::path(file).filename().string()
            << ", analyze exit " << code << '\n';
  if (!ok) std::cout << err.str();
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loopback latency harness"};
  double seconds = 60.0;
  app.add_option("--seconds", seconds, "Duration of the latency run")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const fs::path dir = fs::temp_directory_path() / ("soniguide_loopback_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  ServiceConfig cfg;
  cfg.listen = "127.0.0.1:0";
  cfg.session_dir = dir / "sessions";
  Server server(cfg);
  server.start();
  bool ok = false;
  try {
    ok = latency_run(server, seconds);
    ok = recorded_session(server, dir) && ok;
  } catch (const std::exception& e) {
    std::cout << "FAIL loopback: " << e.what() << '\n';
    ok = false;
  }
  server.stop();
  fs::remove_all(dir);
  return ok ? 0 : 1;
}
