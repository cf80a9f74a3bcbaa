#include "soniguide/wav.hpp"

#include "soniguide/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace soniguide {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | in[at + static_cast<std::size_t>(i)];
  return v;
}

std::uint16_t get_u16(const std::vector<std::uint8_t>& in, std::size_t at) {
  return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

bool tag_is(const std::vector<std::uint8_t>& in, std::size_t at, const char* tag) {
  return std::memcmp(in.data() + at, tag, 4) == 0;
}

}  // namespace

std::int16_t to_pcm16(double sample) {
  const double scaled = std::round(std::clamp(sample, -1.0, 1.0) * 32767.0);
  return static_cast<std::int16_t>(scaled);
}

std::vector<std::uint8_t> encode_wav(const Eigen::ArrayXd& samples, std::uint32_t sample_rate) {
  const auto data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, sample_rate);
  put_u32(out, sample_rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (Eigen::Index i = 0; i < samples.size(); ++i) put_u16(out, static_cast<std::uint16_t>(to_pcm16(samples[i])));
  return out;
}

void write_wav(const std::filesystem::path& path, const Eigen::ArrayXd& samples, std::uint32_t sample_rate) {
  const auto bytes = encode_wav(samples, sample_rate);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot open '" + path.string() + "' for writing");
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw Error("failed writing '" + path.string() + "'");
}

WavData decode_wav(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 44 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE") || !tag_is(bytes, 12, "fmt ")) {
    throw ParseError("header", "not a RIFF/WAVE file");
  }
  if (get_u16(bytes, 20) != 1 || get_u16(bytes, 22) != 1 || get_u16(bytes, 34) != 16) {
    throw ParseError("fmt", "expected 16-bit mono PCM");
  }
  if (!tag_is(bytes, 36, "data")) throw ParseError("data", "missing data chunk");
  const std::uint32_t size = get_u32(bytes, 40);
  if (44 + static_cast<std::size_t>(size) > bytes.size() || size % 2 != 0) throw ParseError("data", "truncated");
  WavData wav;
  wav.sample_rate = get_u32(bytes, 24);
  wav.samples.resize(size / 2);
  for (std::size_t i = 0; i < wav.samples.size(); ++i) {
    wav.samples[i] = static_cast<std::int16_t>(get_u16(bytes, 44 + 2 * i));
  }
  return wav;
}

}  // namespace soniguide
