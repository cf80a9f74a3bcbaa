#include "soniguide/synth.hpp"

#include "soniguide/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace soniguide {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kAmDepth = 0.25;  // gain swings between 0.5 and 1

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(std::string("synth config: ") + what);
}

double ramp(double from, double to, double frac) { return from + (to - from) * frac; }

double wrap_phase(double phase) {
  if (phase >= kTwoPi) phase -= kTwoPi;
  return phase;
}

std::int64_t event_length(EventKind kind, double sample_rate) {
  const double seconds = kind == EventKind::Click ? kClickSeconds : kChordLengthSeconds;
  return static_cast<std::int64_t>(std::llround(seconds * sample_rate));
}

void check_state(const SynthState& state, const SynthConfig& cfg) {
  if (state.sample_rate != cfg.sample_rate || state.block_size != cfg.block_size || state.f_lo != cfg.f_lo ||
      state.f_hi != cfg.f_hi || static_cast<int>(state.partial_logf.size()) != cfg.n_partials()) {
    throw ContractError("synth state was initialised with a different config");
  }
}

}  // namespace

int SynthConfig::n_partials() const { return static_cast<int>(std::lround(std::log2(f_hi / f_lo))); }

void SynthConfig::validate() const {
  require(std::isfinite(sample_rate) && sample_rate > 0.0, "sample_rate must be > 0");
  require(block_size > 0, "block_size must be > 0");
  require(std::isfinite(f_lo) && std::isfinite(f_hi) && f_lo > 0.0 && f_lo < f_hi, "need 0 < f_lo < f_hi");
  require(f_hi < sample_rate / 2.0, "f_hi must be below Nyquist");
  const double octaves = std::log2(f_hi / f_lo);
  require(std::abs(octaves - std::round(octaves)) < 1e-12, "f_hi / f_lo must be an exact power of two");
  require(std::isfinite(env_center), "env_center must be finite");
  require(std::isfinite(env_sigma) && env_sigma > 0.0, "env_sigma must be > 0");
  require(std::isfinite(edge_taper) && edge_taper >= 0.0 && 2.0 * edge_taper <= octaves,
          "edge_taper must be in [0, half the band]");
  require(std::isfinite(mod_freq) && mod_freq > 0.0, "mod_freq must be > 0");
  require(std::isfinite(shepard_rms) && shepard_rms >= 0.0, "shepard_rms must be >= 0");
  for (double g : {master_gain, shepard_gain, click_gain, chord_gain, noise_gain}) {
    require(std::isfinite(g) && g >= 0.0, "gains must be finite and >= 0");
  }
}

double envelope_weight(double logf, double center, double sigma, const SynthConfig& cfg) {
  const double z = (logf - center) / sigma;
  double w = std::exp(-0.5 * z * z);
  if (cfg.edge_taper > 0.0) {
    const double edge = std::min(logf - std::log2(cfg.f_lo), std::log2(cfg.f_hi) - logf);
    if (edge < cfg.edge_taper) {
      const double s = std::sin(0.5 * std::numbers::pi * std::max(edge, 0.0) / cfg.edge_taper);
      w *= s * s;
    }
  }
  return w;
}

SynthState init_state(const SynthConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  SynthState state;
  const int n = cfg.n_partials();
  const double lo = std::log2(cfg.f_lo);
  state.partial_logf.resize(static_cast<std::size_t>(n));
  state.partial_phase.assign(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) state.partial_logf[static_cast<std::size_t>(k)] = lo + k;
  state.rng = Rng(seed);
  state.seed = seed;
  state.sample_rate = cfg.sample_rate;
  state.block_size = cfg.block_size;
  state.f_lo = cfg.f_lo;
  state.f_hi = cfg.f_hi;
  return state;
}

void trigger_event(SynthState& state, EventKind kind) { state.active_events.push_back({kind, 0}); }

PcmBlock render_block(SynthState& state, const SoniParams& params, const SynthConfig& cfg) {
  check_state(state, cfg);
  if (!params.is_consistent()) throw ContractError("inconsistent sonification parameter frame");

  const int n = cfg.block_size;
  const double sr = cfg.sample_rate;
  const double lo = std::log2(cfg.f_lo);
  const double hi = std::log2(cfg.f_hi);
  const double band = hi - lo;
  const double chroma_step = params.chroma_rate / sr;
  const double fm_step = kTwoPi * cfg.mod_freq / sr;
  const double amp_scale = std::numbers::sqrt2 * cfg.shepard_rms;
  const std::int64_t click_len = event_length(EventKind::Click, sr);
  const std::int64_t chord_len = event_length(EventKind::Chord, sr);
  const double chord_freqs[3] = {kChordRootHz, kChordRootHz * 5.0 / 4.0, kChordRootHz * 3.0 / 2.0};

  if (params.am_freq > 0.0) state.am_freq = params.am_freq;
  const double am_step = kTwoPi * state.am_freq / sr;

  const double depth0 = state.am_depth;
  const double depth1 = params.am_freq > 0.0 ? kAmDepth : 0.0;
  const double beta0 = state.fm_index;
  const double beta1 = params.fm_index;
  const double shift0 = state.env_shift;
  const double shift1 = params.brightness_shift;
  const double width0 = state.env_width;
  const double width1 = params.fullness;
  const double noise0 = state.noise_level;
  const double noise1 = params.proximity_noise ? 1.0 : 0.0;

  const std::size_t partials = state.partial_logf.size();
  std::vector<double> weights(partials);

  PcmBlock block;
  block.samples.resize(n);
  for (int i = 0; i < n; ++i) {
    const double frac = static_cast<double>(i + 1) / n;
    const double depth = ramp(depth0, depth1, frac);
    const double beta = ramp(beta0, beta1, frac);
    const double center = cfg.env_center + ramp(shift0, shift1, frac);
    const double sigma = cfg.env_sigma * ramp(width0, width1, frac);

    // Shepard layer, power-normalised so narrowing or shifting the envelope
    // raises the remaining partials instead of losing loudness.
    double power = 0.0;
    for (std::size_t k = 0; k < partials; ++k) {
      weights[k] = envelope_weight(state.partial_logf[k], center, sigma, cfg);
      power += weights[k] * weights[k];
    }
    const double norm = power > 0.0 ? amp_scale / std::sqrt(power) : 0.0;
    const double phase_offset = beta * std::sin(state.fm_phase);
    double shepard = 0.0;
    for (std::size_t k = 0; k < partials; ++k) {
      shepard += weights[k] * std::sin(state.partial_phase[k] + phase_offset);
    }
    const double gain = 1.0 - depth + depth * std::sin(state.am_phase);
    shepard *= norm * gain * cfg.shepard_gain;

    const double white = state.rng.uniform(-1.0, 1.0);
    const double pink = state.noise.next(white) * cfg.noise_gain * ramp(noise0, noise1, frac);

    double events = 0.0;
    for (auto& ev : state.active_events) {
      if (ev.kind == EventKind::Click) {
        const double window = 0.5 * (1.0 - std::cos(kTwoPi * static_cast<double>(ev.age) / click_len));
        events += cfg.click_gain * window * state.rng.uniform(-1.0, 1.0);
      } else {
        const double t = static_cast<double>(ev.age) / sr;
        const double env = std::exp(-t / kChordDecaySeconds);
        double tones = 0.0;
        for (double f : chord_freqs) tones += std::sin(kTwoPi * f * t);
        events += cfg.chord_gain * env * tones;
      }
      ++ev.age;
    }
    std::erase_if(state.active_events, [&](const ActiveEvent& ev) {
      return ev.age >= (ev.kind == EventKind::Click ? click_len : chord_len);
    });

    double out = cfg.master_gain * (shepard + pink + events);
    if (out > 1.0 || out < -1.0) {
      out = std::clamp(out, -1.0, 1.0);
      ++state.clip_count;
    }
    block.samples[i] = out;

    for (std::size_t k = 0; k < partials; ++k) {
      double& logf = state.partial_logf[k];
      state.partial_phase[k] = wrap_phase(state.partial_phase[k] + kTwoPi * std::exp2(logf) / sr);
      logf += chroma_step;
      if (logf >= hi) logf -= band;
      if (logf < lo) logf += band;
    }
    state.fm_phase = wrap_phase(state.fm_phase + fm_step);
    if (depth > 0.0 || depth1 > 0.0) state.am_phase = wrap_phase(state.am_phase + am_step);
  }

  state.am_depth = depth1;
  state.fm_index = beta1;
  state.env_shift = shift1;
  state.env_width = width1;
  state.noise_level = noise1;
  state.samples_rendered += n;
  return block;
}

TrajectoryRender render_trajectory(const Trial& trial, const Vec3& target, const MappingConfig& mcfg,
                                   const SynthConfig& scfg, std::uint64_t seed) {
  if (trial.samples.empty()) throw ValidationError("trial has no probe samples");
  const auto& samples = trial.samples;
  if (!(samples.back().t > samples.front().t)) throw ValidationError("trial samples span no time");
  mcfg.validate();
  if (mcfg.mod_freq != scfg.mod_freq) throw ContractError("mapping and synth configs disagree on mod_freq");

  SynthState state = init_state(scfg, seed);
  const double block_seconds = scfg.block_size / scfg.sample_rate;
  const auto blocks = static_cast<std::int64_t>(std::ceil(samples.back().t / block_seconds)) + 1;

  TrajectoryRender out;
  out.pcm.resize(blocks * scfg.block_size);
  out.block_params.reserve(static_cast<std::size_t>(blocks));
  out.block_positions.reserve(static_cast<std::size_t>(blocks));

  std::size_t current = 0;
  for (std::int64_t b = 0; b < blocks; ++b) {
    const double t = static_cast<double>(b) * block_seconds;
    while (current + 1 < samples.size() && samples[current + 1].t <= t) {
      const auto crossing = detect_crossings(samples[current].pos, samples[current + 1].pos, target);
      if (crossing.height_crossed) {
        trigger_event(state, EventKind::Click);
        out.events.push_back({b, EventKind::Click});
      }
      if (crossing.depth_crossed) {
        trigger_event(state, EventKind::Chord);
        out.events.push_back({b, EventKind::Chord});
      }
      ++current;
    }
    const Vec3& pos = samples[current].pos;
    const SoniParams params = map_displacement(displacement(pos, target), mcfg);
    out.block_params.push_back(params);
    out.block_positions.push_back(pos);
    out.pcm.segment(b * scfg.block_size, scfg.block_size) = render_block(state, params, scfg).samples;
  }
  return out;
}

}  // namespace soniguide
