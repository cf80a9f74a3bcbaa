#ifndef SONIGUIDE_SERVICE_HPP
#define SONIGUIDE_SERVICE_HPP

#include "soniguide/mapping.hpp"
#include "soniguide/param_mailbox.hpp"
#include "soniguide/scene.hpp"
#include "soniguide/synth.hpp"

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace soniguide {

enum class AudioTransport { PcmStream, ParamsOnly };

struct ServiceConfig {
  std::string listen = "127.0.0.1:8080";
  std::filesystem::path mapping_config;  // empty -> built-in defaults
  std::filesystem::path synth_config;
  std::filesystem::path layout;
  std::filesystem::path session_dir = "sessions";
  std::filesystem::path ui_dir;  // static bundle served at /
  AudioTransport transport = AudioTransport::PcmStream;
  std::uint64_t path_seed = kDefaultPathSeed;
  int threads = 2;
};

// Reads a service config document; relative paths resolve against the file's directory.
ServiceConfig load_service_config(const std::filesystem::path& path);

// Everything a connection needs, loaded and validated once.
struct ServiceContext {
  MappingConfig mapping;
  SynthConfig synth;
  TargetLayout layout;
  std::vector<int> path;
  AudioTransport transport = AudioTransport::PcmStream;
  std::filesystem::path session_dir;
  std::filesystem::path ui_dir;
  std::string config_hash;  // FNV-1a over the canonical config documents

  // Throws Error/ValidationError/ParseError if a referenced file is missing or invalid.
  static ServiceContext load(const ServiceConfig& cfg);
};

inline constexpr double kMaxPoseHz = 120.0;
inline constexpr std::size_t kPoseQueueCapacity = 2;

// Thrown for messages that violate the wire protocol; the connection is closed.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OutgoingFrame {
  bool binary = false;
  std::string payload;
};

// Binary audio frame: 8-byte little-endian sequence number + int16 LE samples.
std::string encode_pcm_frame(std::uint64_t sequence, const Eigen::ArrayXd& samples);
std::uint64_t decode_pcm_sequence(std::string_view frame);

// Per-connection protocol state machine, independent of the transport.
// Poses enter a bounded queue drained at most kMaxPoseHz; the renderer reads
// the newest parameter frame through a ParamMailbox at each block boundary.
class ConnectionEngine {
 public:
  ConnectionEngine(std::shared_ptr<const ServiceContext> context, std::uint64_t seed);

  // Handles one text frame received at wall-clock `now` (seconds). Throws ProtocolError.
  std::vector<OutgoingFrame> on_text(std::string_view text, double now);

  // Processes the oldest queued pose if the rate limit allows it at `now`.
  std::vector<OutgoingFrame> drain_poses(double now);

  // Renders one audio block if audio is audible in the current mode.
  std::optional<OutgoingFrame> render_block();

  // Persists an unfinished session as a partial file (if any).
  void on_close();

  // Session files are handed to `writer` (default: written synchronously).
  using Writer = std::function<void(std::filesystem::path, std::string)>;
  void set_writer(Writer writer) { writer_ = std::move(writer); }

  GuidanceMode mode() const { return mode_; }
  bool audio_active() const;
  bool in_session() const { return session_.has_value(); }
  std::uint64_t dropped_poses() const { return dropped_poses_; }
  std::uint64_t next_sequence() const { return sequence_; }
  std::optional<std::filesystem::path> last_saved() const { return last_saved_; }
  const ParamMailbox& mailbox() const { return mailbox_; }

 private:
  struct Pose {
    double t;
    Vec3 pos;
  };

  std::vector<OutgoingFrame> handle_pose(const Pose& pose);
  std::vector<OutgoingFrame> begin_trial();
  std::vector<OutgoingFrame> finish_trial();
  std::filesystem::path persist(const Session& session, bool complete);
  const Vec3& current_target() const;

  std::shared_ptr<const ServiceContext> ctx_;
  GuidanceMode mode_ = GuidanceMode::Audiovisual;
  std::optional<Session> session_;
  int trial_index_ = 1;  // 1-based position in the path
  bool trial_open_ = false;
  std::optional<double> trial_t0_;
  std::vector<ProbeSample> samples_;
  std::deque<Pose> pending_;
  double last_drain_ = -1e300;
  std::uint64_t dropped_poses_ = 0;
  std::uint64_t trial_dropped_ = 0;

  ParamMailbox mailbox_;
  SynthState synth_;
  std::vector<EventKind> pending_events_;
  bool heard_pose_ = false;
  bool target_announced_ = false;
  std::optional<Vec3> last_pos_;
  std::uint64_t sequence_ = 0;
  std::optional<std::filesystem::path> last_saved_;
  Writer writer_;
};

// Websocket endpoint /session, GET /healthz, static UI files at /.
class Server {
 public:
  explicit Server(const ServiceConfig& cfg);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and starts the worker threads; returns once listening.
  void start();
  void stop();
  // Blocks until stop() is called from another thread or a signal arrives.
  void wait();

  unsigned short port() const;
  const ServiceContext& context() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// start() + wait(), stopping on SIGINT/SIGTERM.
void serve(const ServiceConfig& cfg);

}  // namespace soniguide

#endif  // SONIGUIDE_SERVICE_HPP
