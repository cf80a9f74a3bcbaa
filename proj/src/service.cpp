#include "soniguide/service.hpp"

#include "soniguide/analysis.hpp"
#include "soniguide/error.hpp"
#include "soniguide/io.hpp"
#include "soniguide/wav.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <thread>

namespace soniguide {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using io::json;

namespace {

std::uint64_t fnv1a(std::string_view data, std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  if (value.empty()) return {};
  std::filesystem::path p(value);
  return p.is_absolute() ? p : base / p;
}

std::string sanitize(std::string_view id) {
  std::string out;
  for (char c : id) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out.empty() ? "session" : out;
}

OutgoingFrame text_frame(const json& j) { return {false, j.dump()}; }

OutgoingFrame error_frame(std::string_view message) {
  return text_frame({{"type", "error"}, {"message", std::string(message)}});
}

double finite_number(const json& msg, const char* key) {
  const auto it = msg.find(key);
  if (it == msg.end() || !it->is_number()) throw ProtocolError(std::string("field '") + key + "' must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ProtocolError(std::string("field '") + key + "' must be finite");
  return v;
}

std::string string_field(const json& msg, const char* key) {
  const auto it = msg.find(key);
  if (it == msg.end() || !it->is_string()) throw ProtocolError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

bool target_visible(GuidanceMode mode) { return mode != GuidanceMode::Auditory; }
bool sonified(GuidanceMode mode) { return mode != GuidanceMode::Visual; }

}  // namespace

ServiceConfig load_service_config(const std::filesystem::path& path) {
  const json j = io::read_json_file(path);
  if (!j.is_object()) throw ParseError("<root>", "service config must be an object");
  const std::filesystem::path base = path.parent_path();
  ServiceConfig cfg;
  for (const auto& [key, value] : j.items()) {
    const auto str = [&] {
      if (!value.is_string()) throw ParseError(key, "expected a string");
      return value.get<std::string>();
    };
    if (key == "listen") {
      cfg.listen = str();
    } else if (key == "mapping_config") {
      cfg.mapping_config = resolve(base, str());
    } else if (key == "synth_config") {
      cfg.synth_config = resolve(base, str());
    } else if (key == "layout") {
      cfg.layout = resolve(base, str());
    } else if (key == "session_dir") {
      cfg.session_dir = resolve(base, str());
    } else if (key == "ui_dir") {
      cfg.ui_dir = resolve(base, str());
    } else if (key == "audio_transport") {
      const std::string t = str();
      if (t == "pcm-stream") {
        cfg.transport = AudioTransport::PcmStream;
      } else if (t == "params-only") {
        cfg.transport = AudioTransport::ParamsOnly;
      } else {
        throw ParseError(key, "expected 'pcm-stream' or 'params-only'");
      }
    } else if (key == "path_seed") {
      if (!value.is_number_unsigned()) throw ParseError(key, "expected a non-negative integer");
      cfg.path_seed = value.get<std::uint64_t>();
    } else if (key == "threads") {
      if (!value.is_number_integer() || value.get<int>() < 1) throw ParseError(key, "expected a positive integer");
      cfg.threads = value.get<int>();
    } else {
      throw ParseError(key, "unknown service config field");
    }
  }
  return cfg;
}

ServiceContext ServiceContext::load(const ServiceConfig& cfg) {
  ServiceContext ctx;
  ctx.mapping = cfg.mapping_config.empty() ? MappingConfig{} : io::load_mapping_config(cfg.mapping_config);
  ctx.synth = cfg.synth_config.empty() ? SynthConfig{} : io::load_synth_config(cfg.synth_config);
  ctx.mapping.validate();
  ctx.synth.validate();
  if (ctx.mapping.mod_freq != ctx.synth.mod_freq) throw ValidationError("mapping and synth configs disagree on mod_freq");
  ctx.layout = cfg.layout.empty() ? default_layout() : io::load_layout(cfg.layout);
  ctx.path = target_path(ctx.layout, cfg.path_seed);
  ctx.transport = cfg.transport;
  ctx.session_dir = cfg.session_dir;
  std::filesystem::create_directories(ctx.session_dir);
  if (!cfg.ui_dir.empty() && !std::filesystem::is_directory(cfg.ui_dir)) {
    throw ValidationError("ui_dir '" + cfg.ui_dir.string() + "' does not exist");
  }
  ctx.ui_dir = cfg.ui_dir;

  std::uint64_t h = fnv1a(io::to_json(ctx.mapping).dump());
  h = fnv1a(io::to_json(ctx.synth).dump(), h);
  h = fnv1a(io::to_json(ctx.layout).dump(), h);
  h = fnv1a(cfg.transport == AudioTransport::PcmStream ? "pcm-stream" : "params-only", h);
  h = fnv1a(std::to_string(cfg.path_seed), h);
  ctx.config_hash = hex64(h);
  return ctx;
}

std::string encode_pcm_frame(std::uint64_t sequence, const Eigen::ArrayXd& samples) {
  std::string out;
  out.reserve(8 + 2 * static_cast<std::size_t>(samples.size()));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((sequence >> (8 * i)) & 0xff));
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    const auto v = static_cast<std::uint16_t>(to_pcm16(samples[i]));
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
  }
  return out;
}

std::uint64_t decode_pcm_sequence(std::string_view frame) {
  if (frame.size() < 8) throw ProtocolError("PCM frame shorter than its header");
  std::uint64_t seq = 0;
  for (int i = 7; i >= 0; --i) seq = (seq << 8) | static_cast<unsigned char>(frame[static_cast<std::size_t>(i)]);
  return seq;
}

// ---------------------------------------------------------------------------
// ConnectionEngine

ConnectionEngine::ConnectionEngine(std::shared_ptr<const ServiceContext> context, std::uint64_t seed)
    : ctx_(std::move(context)), synth_(init_state(ctx_->synth, seed)) {
  writer_ = [](std::filesystem::path path, std::string text) { io::write_text_file(path, text); };
}

bool ConnectionEngine::audio_active() const {
  return ctx_->transport == AudioTransport::PcmStream && sonified(mode_) && heard_pose_;
}

const Vec3& ConnectionEngine::current_target() const {
  const int slot = (trial_index_ - 1) % kTargetCount;
  return ctx_->layout.target(ctx_->path[static_cast<std::size_t>(slot)]);
}

std::vector<OutgoingFrame> ConnectionEngine::on_text(std::string_view text, double now) {
  json msg;
  try {
    msg = json::parse(text);
  } catch (const json::parse_error&) {
    throw ProtocolError("message is not valid JSON");
  }
  if (!msg.is_object()) throw ProtocolError("message must be a JSON object");
  const std::string type = string_field(msg, "type");

  if (type == "pose") {
    const Pose pose{finite_number(msg, "t"),
                    Vec3(finite_number(msg, "x"), finite_number(msg, "y"), finite_number(msg, "z"))};
    pending_.push_back(pose);
    while (pending_.size() > kPoseQueueCapacity) {
      pending_.pop_front();
      ++dropped_poses_;
      ++trial_dropped_;
    }
    return drain_poses(now);
  }
  if (type == "click") return finish_trial();
  if (type == "mode") {
    const GuidanceMode requested = [&] {
      try {
        return parse_mode(string_field(msg, "value"));
      } catch (const ValidationError& e) {
        throw ProtocolError(e.what());
      }
    }();
    if (session_) return {error_frame("mode is fixed by the group order during a session")};
    mode_ = requested;
    std::vector<OutgoingFrame> out{text_frame({{"type", "mode"}, {"value", std::string(to_string(mode_))}})};
    target_announced_ = false;
    if (target_visible(mode_)) {
      const Vec3& t = current_target();
      out.push_back(text_frame({{"type", "target"}, {"x", t.x()}, {"y", t.y()}, {"z", t.z()}, {"visible", true}}));
      target_announced_ = true;
    }
    return out;
  }
  if (type == "start_session") {
    const std::string id = string_field(msg, "participant_id");
    if (id.empty()) throw ProtocolError("participant_id must not be empty");
    GroupOrder order;
    try {
      order = GroupOrder::parse(string_field(msg, "order"));
    } catch (const ValidationError& e) {
      throw ProtocolError(e.what());
    }
    if (session_ && !session_->trials.empty()) persist(*session_, false);
    session_ = Session{id, order, {}};
    trial_index_ = 1;
    return begin_trial();
  }
  if (type == "next_trial") {
    if (trial_open_) return {error_frame("current trial has not been clicked yet")};
    trial_index_ = session_ ? trial_index_ + 1 : trial_index_ % kTargetCount + 1;
    return begin_trial();
  }
  throw ProtocolError("unknown message type '" + type + "'");
}

std::vector<OutgoingFrame> ConnectionEngine::begin_trial() {
  if (session_) mode_ = session_->order.mode_for_trial(trial_index_);
  trial_open_ = true;
  trial_t0_.reset();
  samples_.clear();
  trial_dropped_ = 0;
  std::vector<OutgoingFrame> out{text_frame(
      {{"type", "trial_start"}, {"index", trial_index_}, {"mode", std::string(to_string(mode_))}, {"session", session_.has_value()}})};
  target_announced_ = false;
  if (target_visible(mode_)) {
    const Vec3& t = current_target();
    out.push_back(text_frame({{"type", "target"}, {"x", t.x()}, {"y", t.y()}, {"z", t.z()}, {"visible", true}}));
    target_announced_ = true;
  }
  return out;
}

std::vector<OutgoingFrame> ConnectionEngine::drain_poses(double now) {
  std::vector<OutgoingFrame> out;
  if (!pending_.empty() && now - last_drain_ >= 1.0 / kMaxPoseHz - 1e-4) {
    const Pose pose = pending_.front();
    pending_.pop_front();
    last_drain_ = now;
    out = handle_pose(pose);
  }
  return out;
}

std::vector<OutgoingFrame> ConnectionEngine::handle_pose(const Pose& pose) {
  std::vector<OutgoingFrame> out;
  const Vec3& target = current_target();
  if (!target_announced_ && target_visible(mode_)) {
    out.push_back(text_frame({{"type", "target"}, {"x", target.x()}, {"y", target.y()}, {"z", target.z()}, {"visible", true}}));
    target_announced_ = true;
  }

  if (trial_open_) {
    if (!trial_t0_) trial_t0_ = pose.t;
    double t = std::max(0.0, pose.t - *trial_t0_);
    if (!samples_.empty()) t = std::max(t, samples_.back().t);
    samples_.push_back({t, pose.pos});
  }

  if (last_pos_) {
    const CrossingEvents crossing = detect_crossings(*last_pos_, pose.pos, target);
    if (crossing.height_crossed) pending_events_.push_back(EventKind::Click);
    if (crossing.depth_crossed) pending_events_.push_back(EventKind::Chord);
  }
  last_pos_ = pose.pos;

  const SoniParams params = map_displacement(displacement(pose.pos, target), ctx_->mapping);
  mailbox_.publish(params);
  heard_pose_ = true;
  if (sonified(mode_)) {
    json frame = io::to_json(params);
    frame["type"] = "params";
    out.push_back(text_frame(frame));
  }
  return out;
}

std::vector<OutgoingFrame> ConnectionEngine::finish_trial() {
  std::vector<OutgoingFrame> out;
  while (!pending_.empty()) {
    auto frames = handle_pose(pending_.front());
    pending_.pop_front();
    out.insert(out.end(), frames.begin(), frames.end());
  }
  if (!trial_open_) {
    out.push_back(error_frame("no trial is open; send next_trial first"));
    return out;
  }
  if (samples_.empty()) {
    out.push_back(error_frame("no pose recorded in this trial"));
    return out;
  }

  Trial trial;
  trial.index = trial_index_;
  trial.target = current_target();
  trial.mode = mode_;
  trial.samples = samples_;
  trial.click_pos = samples_.back().pos;
  trial.click_t = samples_.back().t;
  trial_open_ = false;

  const Precision p = precision(trial);
  out.push_back(text_frame({{"type", "trial_done"},
                            {"index", trial.index},
                            {"mode", std::string(to_string(trial.mode))},
                            {"time", trial.click_t},
                            {"length", path_length(trial)},
                            {"prec", p.prec},
                            {"prec_x", p.x},
                            {"prec_y", p.y},
                            {"prec_z", p.z},
                            {"dropped_poses", trial_dropped_}}));

  if (session_) {
    session_->trials.push_back(std::move(trial));
    if (static_cast<int>(session_->trials.size()) == kTrialsPerSession) {
      const auto file = persist(*session_, true);
      out.push_back(text_frame({{"type", "session_done"}, {"file", file.filename().string()}}));
      session_.reset();
      trial_index_ = 1;
    }
  }
  return out;
}

std::filesystem::path ConnectionEngine::persist(const Session& session, bool complete) {
  if (complete) session.validate();
  const std::string stem = sanitize(session.participant_id);
  const std::string suffix = complete ? ".json" : ".partial.json";
  std::filesystem::path path = ctx_->session_dir / (stem + suffix);
  for (int n = 1; std::filesystem::exists(path); ++n) {
    path = ctx_->session_dir / (stem + "-" + std::to_string(n) + suffix);
  }
  json doc = io::to_json(session);
  if (!complete) doc["complete"] = false;
  writer_(path, doc.dump(2) + "\n");
  last_saved_ = path;
  return path;
}

std::optional<OutgoingFrame> ConnectionEngine::render_block() {
  if (!audio_active()) {
    pending_events_.clear();
    return std::nullopt;
  }
  const auto snapshot = mailbox_.read();
  for (EventKind kind : pending_events_) trigger_event(synth_, kind);
  pending_events_.clear();
  const PcmBlock block = soniguide::render_block(synth_, snapshot.params, ctx_->synth);
  return OutgoingFrame{true, encode_pcm_frame(sequence_++, block.samples)};
}

void ConnectionEngine::on_close() {
  if (session_ && !session_->trials.empty()) persist(*session_, false);
  session_.reset();
}

// ---------------------------------------------------------------------------
// Transport

namespace {

using Clock = std::chrono::steady_clock;

std::string mime_type(const std::filesystem::path& p) {
  const std::string ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".wasm") return "application/wasm";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  return "application/octet-stream";
}

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket&& socket, std::shared_ptr<const ServiceContext> ctx, std::uint64_t seed, net::thread_pool& io_pool)
      : ws_(std::move(socket)),
        engine_(ctx, seed),
        block_timer_(ws_.get_executor()),
        pose_timer_(ws_.get_executor()),
        period_(std::chrono::duration_cast<Clock::duration>(
            std::chrono::duration<double>(ctx->synth.block_size / ctx->synth.sample_rate))),
        start_(Clock::now()) {
    engine_.set_writer([&io_pool](std::filesystem::path path, std::string text) {
      net::post(io_pool, [path = std::move(path), text = std::move(text)] {
        try {
          io::write_text_file(path, text);
        } catch (const std::exception& e) {
          std::cerr << "session write failed: " << e.what() << '\n';
        }
      });
    });
  }

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
  }

 private:
  double now() const { return std::chrono::duration<double>(Clock::now() - start_).count(); }

  void on_accept(beast::error_code ec) {
    if (ec) return;
    next_block_ = Clock::now() + period_;
    schedule_block();
    schedule_pose();
    do_read();
  }

  void do_read() { ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this())); }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      shutdown();
      return;
    }
    if (!ws_.got_text()) {
      fail("binary frames are not accepted from clients");
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    try {
      for (auto& frame : engine_.on_text(text, now())) enqueue(std::move(frame));
    } catch (const ProtocolError& e) {
      fail(e.what());
      return;
    } catch (const std::exception& e) {
      fail(std::string("internal error: ") + e.what());
      return;
    }
    do_read();
  }

  void fail(std::string_view message) {
    closing_ = true;
    enqueue(error_frame(message));
  }

  void schedule_block() {
    block_timer_.expires_at(next_block_);
    block_timer_.async_wait(beast::bind_front_handler(&WsSession::on_block, shared_from_this()));
  }

  void on_block(beast::error_code ec) {
    if (ec || closed_) return;
    if (!closing_) {
      if (auto frame = engine_.render_block()) enqueue(std::move(*frame));
    }
    next_block_ += period_;
    const auto t = Clock::now();
    if (t - next_block_ > 2 * period_ || next_block_ - t > 2 * period_) next_block_ = t + period_;
    schedule_block();
  }

  void schedule_pose() {
    pose_timer_.expires_after(std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / kMaxPoseHz)));
    pose_timer_.async_wait(beast::bind_front_handler(&WsSession::on_pose_tick, shared_from_this()));
  }

  void on_pose_tick(beast::error_code ec) {
    if (ec || closed_) return;
    if (!closing_) {
      for (auto& frame : engine_.drain_poses(now())) enqueue(std::move(frame));
    }
    schedule_pose();
  }

  void enqueue(OutgoingFrame frame) {
    if (closed_) return;
    outbox_.push_back(std::move(frame));
    if (!writing_) do_write();
  }

  void do_write() {
    writing_ = true;
    ws_.binary(outbox_.front().binary);
    ws_.async_write(net::buffer(outbox_.front().payload),
                    beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      shutdown();
      return;
    }
    outbox_.pop_front();
    if (!outbox_.empty()) {
      do_write();
      return;
    }
    writing_ = false;
    if (closing_ && !closed_) {
      closed_ = true;
      cancel_timers();
      engine_.on_close();
      ws_.async_close(websocket::close_code::policy_error, [self = shared_from_this()](beast::error_code) {});
    }
  }

  void cancel_timers() {
    block_timer_.cancel();
    pose_timer_.cancel();
  }

  void shutdown() {
    if (closed_) return;
    closed_ = true;
    cancel_timers();
    engine_.on_close();
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  ConnectionEngine engine_;
  net::steady_timer block_timer_;
  net::steady_timer pose_timer_;
  Clock::duration period_;
  Clock::time_point start_;
  Clock::time_point next_block_;
  std::deque<OutgoingFrame> outbox_;
  bool writing_ = false;
  bool closing_ = false;
  bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket&& socket, std::shared_ptr<const ServiceContext> ctx, std::atomic<std::uint64_t>& counter,
              net::thread_pool& io_pool)
      : stream_(std::move(socket)), ctx_(std::move(ctx)), counter_(counter), io_pool_(io_pool) {}

  void run() {
    net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
  }

 private:
  void do_read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec == http::error::end_of_stream) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    if (ec) return;

    if (websocket::is_upgrade(req_)) {
      if (req_.target() == "/session") {
        stream_.expires_never();
        const std::uint64_t seed = ctx_->config_hash.size() + counter_.fetch_add(1);
        std::make_shared<WsSession>(stream_.release_socket(), ctx_, seed, io_pool_)->run(std::move(req_));
        return;
      }
    }
    send(handle());
  }

  http::response<http::string_body> respond(http::status status, std::string body, std::string type) const {
    http::response<http::string_body> res{status, req_.version()};
    res.set(http::field::server, "soniguide/" SONIGUIDE_VERSION);
    res.set(http::field::content_type, type);
    res.keep_alive(req_.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
  }

  http::response<http::string_body> handle() const {
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      return respond(http::status::bad_request, "unsupported method\n", "text/plain");
    }
    const std::string target(req_.target());
    if (target == "/healthz") {
      const json body = {{"status", "ok"}, {"build", "soniguide " SONIGUIDE_VERSION}, {"config_hash", ctx_->config_hash}};
      return respond(http::status::ok, body.dump() + "\n", "application/json");
    }
    if (target == "/session") return respond(http::status::upgrade_required, "websocket endpoint\n", "text/plain");
    if (ctx_->ui_dir.empty()) return respond(http::status::not_found, "UI bundle not installed\n", "text/plain");
    std::string rel = target.substr(0, target.find('?'));
    if (rel.find("..") != std::string::npos) return respond(http::status::bad_request, "bad path\n", "text/plain");
    if (rel == "/" || rel.empty()) rel = "/index.html";
    const std::filesystem::path file = ctx_->ui_dir / rel.substr(1);
    if (!std::filesystem::is_regular_file(file)) return respond(http::status::not_found, "not found\n", "text/plain");
    return respond(http::status::ok, io::read_text_file(file), mime_type(file));
  }

  void send(http::response<http::string_body> res) {
    auto sp = std::make_shared<http::response<http::string_body>>(std::move(res));
    http::async_write(stream_, *sp, [self = shared_from_this(), sp](beast::error_code ec, std::size_t) {
      if (ec) return;
      if (!sp->keep_alive()) {
        self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
        return;
      }
      self->do_read();
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<const ServiceContext> ctx_;
  std::atomic<std::uint64_t>& counter_;
  net::thread_pool& io_pool_;
};

std::pair<std::string, unsigned short> split_listen(const std::string& listen) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) throw ValidationError("listen address must be host:port, got '" + listen + "'");
  const std::string host = listen.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(listen.substr(colon + 1));
  } catch (const std::exception&) {
    throw ValidationError("invalid port in listen address '" + listen + "'");
  }
  if (port < 0 || port > 65535) throw ValidationError("invalid port in listen address '" + listen + "'");
  return {host, static_cast<unsigned short>(port)};
}

}  // namespace

struct Server::Impl {
  ServiceConfig cfg;
  std::shared_ptr<const ServiceContext> ctx;
  net::io_context ioc;
  net::thread_pool io_pool{1};
  tcp::acceptor acceptor{ioc};
  std::vector<std::thread> threads;
  std::atomic<std::uint64_t> counter{0};
  std::mutex mutex;
  std::condition_variable stopped_cv;
  bool stopped = false;

  void do_accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      beast::error_code ignored;
      socket.set_option(tcp::no_delay(true), ignored);
      std::make_shared<HttpSession>(std::move(socket), ctx, counter, io_pool)->run();
      do_accept();
    });
  }
};

Server::Server(const ServiceConfig& cfg) : impl_(std::make_unique<Impl>()) {
  impl_->cfg = cfg;
  impl_->ctx = std::make_shared<const ServiceContext>(ServiceContext::load(cfg));
}

Server::~Server() { stop(); }

void Server::start() {
  const auto [host, port] = split_listen(impl_->cfg.listen);
  const tcp::endpoint endpoint(net::ip::make_address(host), port);
  impl_->acceptor.open(endpoint.protocol());
  impl_->acceptor.set_option(net::socket_base::reuse_address(true));
  impl_->acceptor.bind(endpoint);
  impl_->acceptor.listen(net::socket_base::max_listen_connections);
  impl_->do_accept();
  for (int i = 0; i < std::max(1, impl_->cfg.threads); ++i) impl_->threads.emplace_back([this] { impl_->ioc.run(); });
}

void Server::stop() {
  if (!impl_) return;
  impl_->ioc.stop();
  for (auto& t : impl_->threads) {
    if (t.joinable()) t.join();
  }
  impl_->threads.clear();
  impl_->io_pool.join();
  {
    std::lock_guard lock(impl_->mutex);
    impl_->stopped = true;
  }
  impl_->stopped_cv.notify_all();
}

void Server::wait() {
  std::unique_lock lock(impl_->mutex);
  impl_->stopped_cv.wait(lock, [this] { return impl_->stopped; });
}

unsigned short Server::port() const { return impl_->acceptor.local_endpoint().port(); }

const ServiceContext& Server::context() const { return *impl_->ctx; }

void serve(const ServiceConfig& cfg) {
  Server server(cfg);
  server.start();
  std::cerr << "soniguide listening on " << cfg.listen.substr(0, cfg.listen.rfind(':')) << ":" << server.port()
            << " (websocket /session, health /healthz)\n";
  net::io_context signals_ctx;
  net::signal_set signals(signals_ctx, SIGINT, SIGTERM);
  signals.async_wait([&](beast::error_code, int) { server.stop(); });
  signals_ctx.run();
}

}  // namespace soniguide
