#ifndef SONIGUIDE_SYNTH_HPP
#define SONIGUIDE_SYNTH_HPP

#include "soniguide/mapping.hpp"
#include "soniguide/random.hpp"
#include "soniguide/scene.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <vector>

namespace soniguide {

struct SynthConfig {
  double sample_rate = 44100.0;
  int block_size = 512;
  double f_lo = 40.0;     // partial wrap band, Hz; f_hi / f_lo must be a power of two
  double f_hi = 10240.0;
  double env_center = std::log2(640.0);  // log2 Hz
  double env_sigma = 1.5;                // octaves
  double edge_taper = 1.0;               // octaves of raised-cosine fade at each band edge
  double mod_freq = 80.0;                // FM modulator, Hz
  double shepard_rms = 0.15;             // RMS of the Shepard layer at steady loudness
  double master_gain = 1.0;
  double shepard_gain = 1.0;
  double click_gain = 0.2;
  double chord_gain = 0.06;  // per chord tone
  double noise_gain = 0.15;

  int n_partials() const;  // one per octave of the band
  void validate() const;   // throws ValidationError
};

enum class EventKind { Click, Chord };

inline constexpr double kChordRootHz = 523.25;
inline constexpr double kChordDecaySeconds = 0.3;   // exponential time constant
inline constexpr double kChordLengthSeconds = 1.5;  // 5 time constants
inline constexpr double kClickSeconds = 0.001;

struct ActiveEvent {
  EventKind kind;
  std::int64_t age = 0;  // samples rendered so far

  friend bool operator==(const ActiveEvent&, const ActiveEvent&) = default;
};

// Three-pole filtered-white approximation of a -3 dB/octave spectrum.
struct PinkNoise {
  double b0 = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;

  double next(double white) {
    b0 = 0.99765 * b0 + white * 0.0990460;
    b1 = 0.96300 * b1 + white * 0.2965164;
    b2 = 0.57000 * b2 + white * 1.0526913;
    return (b0 + b1 + b2 + white * 0.1848) * 0.2;
  }

  friend bool operator==(const PinkNoise&, const PinkNoise&) = default;
};

// Everything the renderer carries between blocks. Parameters that shape the
// waveform (AM depth, FM index, envelope, noise level) are ramped linearly
// across each block from the values reached at the end of the previous one.
struct SynthState {
  std::vector<double> partial_logf;   // log2 Hz, kept in [log2 f_lo, log2 f_hi)
  std::vector<double> partial_phase;  // radians in [0, 2pi)
  double am_phase = 0.0;
  double fm_phase = 0.0;
  double am_freq = 0.0;  // last commanded non-zero fluctuation rate
  double am_depth = 0.0;
  double fm_index = 0.0;
  double env_shift = 0.0;
  double env_width = 1.0;  // fullness
  double noise_level = 0.0;
  std::vector<ActiveEvent> active_events;
  PinkNoise noise;
  Rng rng;
  std::uint64_t seed = 0;
  std::int64_t samples_rendered = 0;
  std::int64_t clip_count = 0;  // samples the safety guard had to clamp

  // Identity of the config the state was built for.
  double sample_rate = 0.0;
  int block_size = 0;
  double f_lo = 0.0;
  double f_hi = 0.0;

  friend bool operator==(const SynthState&, const SynthState&) = default;
};

struct PcmBlock {
  Eigen::ArrayXd samples;
};

// Partials at f_lo * 2^k, zero phases, neutral parameters.
SynthState init_state(const SynthConfig& cfg, std::uint64_t seed);

// Renders cfg.block_size samples and advances `state`. Throws ContractError
// if `state` was initialised with a different config or `params` is inconsistent.
PcmBlock render_block(SynthState& state, const SoniParams& params, const SynthConfig& cfg);

// Queues a click (1 ms raised-cosine noise burst) or a major chord
// (4:5:6 on 523.25 Hz, exponential decay) that starts with the next sample.
void trigger_event(SynthState& state, EventKind kind);

// Unnormalised spectral envelope weight of a partial at `logf`.
double envelope_weight(double logf, double center, double sigma, const SynthConfig& cfg);

struct TriggeredEvent {
  std::int64_t block = 0;
  EventKind kind = EventKind::Click;
};

struct TrajectoryRender {
  Eigen::ArrayXd pcm;
  std::vector<SoniParams> block_params;
  std::vector<Vec3> block_positions;
  std::vector<TriggeredEvent> events;
};

// Offline sonification of a recorded trial. Probe positions are held
// (zero-order) at block starts; every consecutive pair of raw samples is
// checked for plane crossings, and the resulting events are queued at the
// first block starting at or after the later sample. Throws ValidationError
// for an empty trial or one spanning no time.
TrajectoryRender render_trajectory(const Trial& trial, const Vec3& target, const MappingConfig& mcfg,
                                   const SynthConfig& scfg, std::uint64_t seed);

}  // namespace soniguide

#endif  // SONIGUIDE_SYNTH_HPP
