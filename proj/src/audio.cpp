// eslu/audio.cpp

// Copyright 2026 The eslu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "eslu/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "eslu/error.hpp"

namespace eslu {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

}  // namespace

void validate_waveform(const Waveform& w) {
  if (w.samples.empty()) throw ValidationError("waveform has no samples");
  if (w.sample_rate != kSampleRate) {
    throw ValidationError("waveform sample rate " + std::to_string(w.sample_rate) +
                          " Hz, expected 16000 Hz");
  }
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    if (!std::isfinite(w.samples[i])) {
      throw ValidationError("non-finite sample at index " + std::to_string(i));
    }
  }
}

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  const std::string where = path.string() + ": ";

  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 ||
      std::memcmp(data + 8, "WAVE", 4) != 0) {
    throw ValidationError(where + "not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const std::uint32_t chunk_size = le32(data + pos + 4);
    const unsigned char* body = data + pos + 8;
    const std::size_t body_end = pos + 8 + chunk_size;
    if (body_end > size) throw ValidationError(where + "truncated chunk");

    if (std::memcmp(data + pos, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw ValidationError(where + "fmt chunk too short");
      std::uint16_t format = le16(body);
      const std::uint16_t channels = le16(body + 2);
      const std::uint32_t rate = le32(body + 4);
      const std::uint16_t bits = le16(body + 14);
      if (format == kFormatExtensible && chunk_size >= 26) format = le16(body + 24);
      if (format != kFormatPcm) {
        throw ValidationError(where + "unsupported encoding (format tag " +
                              std::to_string(format) + "), need 16-bit PCM");
      }
      if (bits != 16) {
        throw ValidationError(where + "unsupported encoding (" + std::to_string(bits) +
                              "-bit), need 16-bit PCM");
      }
      if (channels != 1) {
        throw ValidationError(where + "expected 1 channel, found " +
                              std::to_string(channels));
      }
      if (rate != static_cast<std::uint32_t>(kSampleRate)) {
        throw ValidationError(where + "sample rate " + std::to_string(rate) +
                              " Hz, expected 16000 Hz");
      }
      have_fmt = true;
    } else if (std::memcmp(data + pos, "data", 4) == 0) {
      if (!have_fmt) throw ValidationError(where + "data chunk before fmt chunk");
      if (chunk_size % 2 != 0) throw ValidationError(where + "odd data chunk size");
      Waveform w;
      w.samples.resize(chunk_size / 2);
      for (std::size_t i = 0; i < w.samples.size(); ++i) {
        w.samples[i] = dequantize_sample(static_cast<std::int16_t>(le16(body + 2 * i)));
      }
      if (w.samples.empty()) throw ValidationError(where + "empty data chunk");
      return w;
    }
    // Chunks are word aligned.
    pos = body_end + (chunk_size & 1u);
  }
  throw ValidationError(where + (have_fmt ? "missing data chunk" : "missing fmt chunk"));
}

std::int16_t quantize_sample(double s) {
  const double scaled = std::round(s * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

void write_wav(const Waveform& w, const std::filesystem::path& path) {
  if (w.sample_rate <= 0) throw ValidationError("invalid sample rate");
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const double s = w.samples[i];
    if (!std::isfinite(s) || std::abs(s) > 1.0001) {
      throw ValidationError("sample " + std::to_string(i) + " out of range: " +
                            std::to_string(s));
    }
  }
  const auto data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(w.sample_rate));
  put32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  out += "data";
  put32(out, data_bytes);
  for (double s : w.samples) put16(out, static_cast<std::uint16_t>(quantize_sample(s)));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot write " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

double signal_power(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

double peak_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace eslu
