#include "speechstd/audio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "speechstd/error.hpp"
#include "speechstd/io.hpp"
#include "speechstd/kernels.hpp"

namespace speechstd {

AudioSignal::AudioSignal(std::vector<double> samples, int sample_rate, std::string source_id)
    : length_(static_cast<std::int64_t>(samples.size())),
      sample_rate_(sample_rate),
      source_id_(std::move(source_id)) {
  if (sample_rate <= 0) throw Error(ErrorKind::InvalidParams, "sample rate must be positive");
  storage_ = std::make_shared<const std::vector<double>>(std::move(samples));
}

AudioSignal AudioSignal::slice(std::int64_t offset, std::int64_t length) const {
  if (offset < 0 || length < 0 || offset + length > length_) {
    throw Error(ErrorKind::InvalidParams, "slice out of range");
  }
  AudioSignal out = *this;
  out.offset_ = offset_ + offset;
  out.length_ = length;
  return out;
}

AudioSignal AudioSignal::with_source_id(std::string id) const {
  AudioSignal out = *this;
  out.source_id_ = std::move(id);
  return out;
}

bool operator==(const AudioSignal& a, const AudioSignal& b) {
  if (a.sample_rate_ != b.sample_rate_ || a.length_ != b.length_ || a.source_id_ != b.source_id_) {
    return false;
  }
  const auto sa = a.samples();
  const auto sb = b.samples();
  return sa.data() == sb.data() || std::equal(sa.begin(), sa.end(), sb.begin());
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

struct WavLayout {
  WavInfo info;
  int block_align = 0;
  std::uint64_t data_offset = 0;
  std::uint64_t data_size = 0;
};

// Walks the RIFF chunk list up to the data chunk. `stream_size` is the
// total number of bytes available.
WavLayout parse_layout(std::istream& in, std::uint64_t stream_size, const std::string& what) {
  auto malformed = [&](const std::string& msg) {
    return Error(ErrorKind::MalformedContainer, what + ": " + msg);
  };
  std::array<std::uint8_t, 12> riff{};
  if (!in.read(reinterpret_cast<char*>(riff.data()), riff.size())) throw malformed("too short for RIFF header");
  if (std::memcmp(riff.data(), "RIFF", 4) != 0 || std::memcmp(riff.data() + 8, "WAVE", 4) != 0) {
    throw malformed("not a RIFF/WAVE container");
  }

  WavLayout layout;
  bool have_fmt = false;
  std::uint16_t format = 0;
  std::uint64_t pos = 12;
  while (true) {
    std::array<std::uint8_t, 8> hdr{};
    if (pos + 8 > stream_size || !in.read(reinterpret_cast<char*>(hdr.data()), hdr.size())) {
      throw malformed("missing data chunk");
    }
    pos += 8;
    const std::uint32_t size = le32(hdr.data() + 4);
    if (std::memcmp(hdr.data(), "fmt ", 4) == 0) {
      if (size < 16 || pos + size > stream_size) throw malformed("bad fmt chunk");
      std::vector<std::uint8_t> body(size);
      if (!in.read(reinterpret_cast<char*>(body.data()), size)) throw malformed("truncated fmt chunk");
      format = le16(body.data());
      layout.info.channels = le16(body.data() + 2);
      layout.info.sample_rate = static_cast<int>(le32(body.data() + 4));
      layout.block_align = le16(body.data() + 12);
      layout.info.bits_per_sample = le16(body.data() + 14);
      if (format == kFormatExtensible) {
        if (size < 40) throw malformed("bad extensible fmt chunk");
        format = le16(body.data() + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
      pos += size + (size & 1u);
      if (size & 1u) in.ignore(1);
    } else if (std::memcmp(hdr.data(), "data", 4) == 0) {
      if (!have_fmt) throw malformed("data chunk before fmt chunk");
      if (pos + size > stream_size) throw malformed("truncated data chunk");
      layout.data_offset = pos;
      layout.data_size = size;
      break;
    } else {
      pos += size + (size & 1u);
      if (pos > stream_size) throw malformed("truncated chunk");
      in.seekg(static_cast<std::streamoff>(pos));
    }
  }

  WavInfo& info = layout.info;
  if (format == kFormatPcm) {
    const int b = info.bits_per_sample;
    if (b != 8 && b != 16 && b != 24 && b != 32) {
      throw Error(ErrorKind::UnsupportedEncoding, what + ": " + std::to_string(b) + "-bit integer PCM");
    }
  } else if (format == kFormatFloat) {
    if (info.bits_per_sample != 32) {
      throw Error(ErrorKind::UnsupportedEncoding,
                  what + ": " + std::to_string(info.bits_per_sample) + "-bit float PCM");
    }
    info.is_float = true;
  } else {
    throw Error(ErrorKind::UnsupportedEncoding, what + ": format tag " + std::to_string(format));
  }
  if (info.channels <= 0 || info.sample_rate <= 0) throw malformed("zero channels or sample rate");
  if (layout.block_align != info.channels * info.bits_per_sample / 8) throw malformed("inconsistent block align");
  if (layout.data_size % static_cast<std::uint64_t>(layout.block_align) != 0) {
    throw malformed("data chunk ends mid-frame");
  }
  info.frames = static_cast<std::int64_t>(layout.data_size / static_cast<std::uint64_t>(layout.block_align));
  return layout;
}

double decode_sample(const std::uint8_t* p, const WavInfo& info) {
  if (info.is_float) {
    float f;
    std::uint32_t bits = le32(p);
    std::memcpy(&f, &bits, sizeof f);
    if (!std::isfinite(f)) return 0.0;
    return std::clamp(static_cast<double>(f), -1.0, 1.0);
  }
  switch (info.bits_per_sample) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(le16(p)) / 32768.0;
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v |= ~0xFFFFFF;
      return v / 8388608.0;
    }
    default:
      return static_cast<std::int32_t>(le32(p)) / 2147483648.0;
  }
}

AudioSignal decode_stream(std::istream& in, std::uint64_t stream_size, std::string source_id) {
  const WavLayout layout = parse_layout(in, stream_size, source_id.empty() ? "wav" : source_id);
  if (layout.info.frames == 0) throw Error(ErrorKind::EmptyAudio, source_id + ": zero frames");
  in.seekg(static_cast<std::streamoff>(layout.data_offset));
  std::vector<std::uint8_t> data(layout.data_size);
  if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()))) {
    throw Error(ErrorKind::MalformedContainer, source_id + ": truncated data chunk");
  }
  const int channels = layout.info.channels;
  const int width = layout.info.bits_per_sample / 8;
  std::vector<double> interleaved(static_cast<std::size_t>(layout.info.frames) * channels);
  for (std::size_t i = 0; i < interleaved.size(); ++i) {
    interleaved[i] = decode_sample(data.data() + i * width, layout.info);
  }
  return AudioSignal(downmix(interleaved, channels), layout.info.sample_rate, std::move(source_id));
}

std::uint64_t file_size_of(const std::filesystem::path& path) {
  std::error_code ec;
  const auto n = std::filesystem::file_size(path, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot stat " + path.string());
  return n;
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

}  // namespace

WavInfo read_wav_info(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  return parse_layout(in, file_size_of(path), path.string()).info;
}

AudioSignal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  return decode_stream(in, file_size_of(path), path.string());
}

AudioSignal decode_wav(std::span<const std::uint8_t> bytes, std::string source_id) {
  std::istringstream in(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  return decode_stream(in, bytes.size(), std::move(source_id));
}

std::vector<double> downmix(std::span<const double> interleaved, int channels) {
  if (channels <= 1) return {interleaved.begin(), interleaved.end()};
  const std::size_t frames = interleaved.size() / static_cast<std::size_t>(channels);
  std::vector<double> mono(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double sum = 0.0;
    for (int c = 0; c < channels; ++c) sum += interleaved[f * channels + c];
    mono[f] = sum / channels;
  }
  return mono;
}

std::int16_t quantize_pcm16(double x) {
  if (!std::isfinite(x)) return 0;
  const double scaled = std::nearbyint(std::clamp(x, -1.0, 1.0) * 32768.0);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

std::vector<std::uint8_t> to_pcm16le(std::span<const double> samples) {
  std::vector<std::uint8_t> out;
  out.reserve(samples.size() * 2);
  for (double x : samples) put16(out, static_cast<std::uint16_t>(quantize_pcm16(x)));
  return out;
}

std::vector<double> from_pcm16le(std::span<const std::uint8_t> bytes) {
  std::vector<double> out(bytes.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::int16_t>(le16(bytes.data() + 2 * i)) / 32768.0;
  }
  return out;
}

std::vector<std::uint8_t> encode_wav(const AudioSignal& sig) {
  if (sig.sample_rate() != kCorpusSampleRate) {
    throw Error(ErrorKind::NotStandardized,
                "refusing to write " + std::to_string(sig.sample_rate()) + " Hz audio; expected 16000");
  }
  const std::vector<std::uint8_t> pcm = to_pcm16le(sig.samples());
  std::vector<std::uint8_t> out;
  out.reserve(44 + pcm.size());
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, static_cast<std::uint32_t>(36 + pcm.size()));
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, kCorpusSampleRate);
  put32(out, kCorpusSampleRate * 2);
  put16(out, 2);
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, static_cast<std::uint32_t>(pcm.size()));
  out.insert(out.end(), pcm.begin(), pcm.end());
  return out;
}

void write_wav(const AudioSignal& sig, const std::filesystem::path& path) {
  const auto bytes = encode_wav(sig);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

AudioSignal standardize(const AudioSignal& sig) {
  if (sig.empty()) throw Error(ErrorKind::EmptyAudio, sig.source_id() + ": nothing to standardize");
  if (sig.sample_rate() == kCorpusSampleRate) {
    const auto s = sig.samples();
    const bool in_range = std::all_of(s.begin(), s.end(), [](double x) { return x >= -1.0 && x <= 1.0; });
    if (in_range) return sig;
    std::vector<double> clipped(s.begin(), s.end());
    for (double& x : clipped) x = std::isfinite(x) ? std::clamp(x, -1.0, 1.0) : 0.0;
    return AudioSignal(std::move(clipped), kCorpusSampleRate, sig.source_id());
  }
  std::vector<double> out = kernels::resample(sig.samples(), sig.sample_rate(), kCorpusSampleRate);
  for (double& x : out) x = std::clamp(x, -1.0, 1.0);
  return AudioSignal(std::move(out), kCorpusSampleRate, sig.source_id());
}

}  // namespace speechstd
