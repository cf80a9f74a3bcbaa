#ifndef SONIGUIDE_WAV_HPP
#define SONIGUIDE_WAV_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace soniguide {

// float sample in [-1, 1] -> int16, scaled by 32767 and rounded half away from zero.
std::int16_t to_pcm16(double sample);

// RIFF/WAVE, PCM, 16-bit signed little-endian, mono.
std::vector<std::uint8_t> encode_wav(const Eigen::ArrayXd& samples, std::uint32_t sample_rate = 44100);
void write_wav(const std::filesystem::path& path, const Eigen::ArrayXd& samples, std::uint32_t sample_rate = 44100);

struct WavData {
  std::uint32_t sample_rate = 0;
  std::vector<std::int16_t> samples;
};

// Reads the subset written by encode_wav. Throws ParseError otherwise.
WavData decode_wav(const std::vector<std::uint8_t>& bytes);

}  // namespace soniguide

#endif  // SONIGUIDE_WAV_HPP
