#include <cstring>
#include <fstream>

#include <omp.h>

#include "doctest.h"
#include "speechstd/audio.hpp"
#include "speechstd/error.hpp"
#include "speechstd/kernels.hpp"
#include "support.hpp"

using namespace speechstd;
using testutil::TempDir;

namespace {

// Hand-built RIFF so decoder tests do not depend on encode_wav.
std::vector<std::uint8_t> riff(std::uint16_t format, int channels, int rate, int bits,
                               const std::vector<std::uint8_t>& data, bool extra_chunk = false) {
  std::vector<std::uint8_t> out;
  auto put = [&](std::uint32_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  };
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  tag("RIFF");
  put(0, 4);
  tag("WAVE");
  if (extra_chunk) {
    tag("LIST");
    put(3, 4);
    out.insert(out.end(), {'a', 'b', 'c', 0});  // odd size plus pad byte
  }
  tag("fmt ");
  put(16, 4);
  put(format, 2);
  put(static_cast<std::uint32_t>(channels), 2);
  put(static_cast<std::uint32_t>(rate), 4);
  put(static_cast<std::uint32_t>(rate * channels * bits / 8), 4);
  put(static_cast<std::uint32_t>(channels * bits / 8), 2);
  put(static_cast<std::uint32_t>(bits), 2);
  tag("data");
  put(static_cast<std::uint32_t>(data.size()), 4);
  out.insert(out.end(), data.begin(), data.end());
  const auto riff_size = static_cast<std::uint32_t>(out.size() - 8);
  std::memcpy(out.data() + 4, &riff_size, 4);
  return out;
}

double dft_magnitude(std::span<const double> x, double freq, int rate) {
  double re = 0.0, im = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    const double a = 2.0 * std::numbers::pi * freq * static_cast<double>(n) / rate;
    re += x[n] * std::cos(a);
    im -= x[n] * std::sin(a);
  }
  return std::hypot(re, im);
}

double rms(std::span<const double> x) { return std::sqrt(testutil::energy(x) / static_cast<double>(x.size())); }

}  // namespace

TEST_CASE("pcm16 round trip stays within one quantization step") {
  std::vector<double> ramp(16000);
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = -1.0 + 2.0 * static_cast<double>(i) / 15999.0;
  TempDir dir;
  const AudioSignal sig(ramp, 16000, "ramp");
  write_wav(sig, dir / "ramp.wav");
  const AudioSignal back = read_wav(dir / "ramp.wav");
  REQUIRE(back.size() == sig.size());
  CHECK(back.sample_rate() == 16000);
  CHECK(testutil::max_abs_diff(back.samples(), sig.samples()) <= 1.0 / 32768.0);
}

TEST_CASE("quantization clips instead of wrapping") {
  CHECK(quantize_pcm16(1.0) == 32767);
  CHECK(quantize_pcm16(1.7) == 32767);
  CHECK(quantize_pcm16(-1.0) == -32768);
  CHECK(quantize_pcm16(-3.0) == -32768);
  CHECK(quantize_pcm16(0.0) == 0);
  const auto bytes = to_pcm16le(std::vector<double>{1.0});
  CHECK(bytes == std::vector<std::uint8_t>{0xFF, 0x7F});
}

TEST_CASE("encoded header is 16-bit mono PCM at 16 kHz") {
  const auto bytes = encode_wav(AudioSignal(std::vector<double>(10, 0.25), 16000));
  REQUIRE(bytes.size() == 44 + 20);
  CHECK(std::memcmp(bytes.data(), "RIFF", 4) == 0);
  CHECK(bytes[20] == 1);   // format tag
  CHECK(bytes[22] == 1);   // channels
  CHECK(bytes[24] == 0x80);
  CHECK(bytes[25] == 0x3E);  // 16000
  CHECK(bytes[34] == 16);
}

TEST_CASE("writing a non-16 kHz signal is rejected") {
  TempDir dir;
  CHECK_THROWS_AS(write_wav(AudioSignal(std::vector<double>(480, 0.0), 48000), dir / "x.wav"), Error);
  try {
    write_wav(AudioSignal(std::vector<double>(480, 0.0), 48000), dir / "x.wav");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotStandardized);
  }
  CHECK_FALSE(std::filesystem::exists(dir / "x.wav"));
}

TEST_CASE("decoder handles integer widths, float and extra chunks") {
  SUBCASE("8-bit unsigned") {
    const auto s = decode_wav(riff(1, 1, 8000, 8, {0, 128, 255}));
    REQUIRE(s.size() == 3);
    CHECK(s.samples()[0] == doctest::Approx(-1.0));
    CHECK(s.samples()[1] == 0.0);
    CHECK(s.samples()[2] == doctest::Approx(127.0 / 128.0));
  }
  SUBCASE("24-bit signed") {
    const auto s = decode_wav(riff(1, 1, 16000, 24, {0x00, 0x00, 0x80, 0xFF, 0xFF, 0x7F}));
    REQUIRE(s.size() == 2);
    CHECK(s.samples()[0] == -1.0);
    CHECK(s.samples()[1] == doctest::Approx(8388607.0 / 8388608.0));
  }
  SUBCASE("32-bit float with NaN and overrange") {
    std::vector<std::uint8_t> data;
    for (float f : {0.5f, std::nanf(""), 2.0f}) {
      std::uint8_t b[4];
      std::memcpy(b, &f, 4);
      data.insert(data.end(), b, b + 4);
    }
    const auto s = decode_wav(riff(3, 1, 16000, 32, data));
    REQUIRE(s.size() == 3);
    CHECK(s.samples()[0] == 0.5);
    CHECK(s.samples()[1] == 0.0);
    CHECK(s.samples()[2] == 1.0);
  }
  SUBCASE("stereo downmix by mean, unknown chunk skipped") {
    // L = 16384, R = -8192 -> mean 4096
    const auto s = decode_wav(riff(1, 2, 16000, 16, {0x00, 0x40, 0x00, 0xE0}, true));
    REQUIRE(s.size() == 1);
    CHECK(s.samples()[0] == doctest::Approx(4096.0 / 32768.0));
  }
}

TEST_CASE("decoder errors are classified") {
  auto kind_of = [](const std::vector<std::uint8_t>& bytes) {
    try {
      decode_wav(bytes, "t");
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Usage;
  };
  CHECK(kind_of({'R', 'I', 'F', 'F'}) == ErrorKind::MalformedContainer);
  CHECK(kind_of(riff(2, 1, 16000, 4, {1, 2})) == ErrorKind::UnsupportedEncoding);
  CHECK(kind_of(riff(3, 1, 16000, 64, std::vector<std::uint8_t>(8))) == ErrorKind::UnsupportedEncoding);
  CHECK(kind_of(riff(1, 1, 16000, 16, {})) == ErrorKind::EmptyAudio);
  CHECK(kind_of(riff(1, 1, 16000, 16, {1, 2, 3})) == ErrorKind::MalformedContainer);
  auto truncated = riff(1, 1, 16000, 16, {1, 2, 3, 4});
  truncated.resize(truncated.size() - 2);
  CHECK(kind_of(truncated) == ErrorKind::MalformedContainer);
  CHECK_THROWS_AS(read_wav("/nonexistent/x.wav"), Error);
}

TEST_CASE("header probe reports frames without decoding") {
  TempDir dir;
  const auto bytes = riff(1, 2, 44100, 16, std::vector<std::uint8_t>(4 * 441));
  {
    std::ofstream f(dir / "p.wav", std::ios::binary);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  const WavInfo info = read_wav_info(dir / "p.wav");
  CHECK(info.sample_rate == 44100);
  CHECK(info.channels == 2);
  CHECK(info.frames == 441);
  CHECK(info.duration_seconds() == doctest::Approx(0.01));
}

TEST_CASE("downmix is linear in a common gain") {
  const auto lr = testutil::gaussian_noise(2000, 0.3, 5);
  const auto base = downmix(lr, 2);
  for (double a : {0.0, 0.25, -0.5, 1.0}) {
    std::vector<double> scaled(lr);
    for (auto& v : scaled) v *= a;
    const auto out = downmix(scaled, 2);
    for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == doctest::Approx(a * base[i]).epsilon(1e-12));
  }
}

TEST_CASE("resampled 1 kHz tone keeps its frequency and level") {
  const int in_rate = 32000;
  const auto x = testutil::sine(1000.0, 0.5, static_cast<std::size_t>(in_rate) * 2, in_rate);
  const AudioSignal out = standardize(AudioSignal(x, in_rate));
  CHECK(out.sample_rate() == 16000);
  CHECK(out.size() == 32000);
  // one second from the interior gives 1 Hz bins
  const auto mid = out.samples().subspan(8000, 16000);
  double best_f = 0.0, best = 0.0;
  for (double f = 990.0; f <= 1010.0; f += 1.0) {
    const double m = dft_magnitude(mid, f, 16000);
    if (m > best) best = m, best_f = f;
  }
  CHECK(std::abs(best_f - 1000.0) <= 1.0);
  CHECK(std::abs(rms(mid) - 0.5 / std::sqrt(2.0)) <= 0.02 * 0.5 / std::sqrt(2.0));
}

TEST_CASE("tones above the output band are suppressed") {
  const auto x = testutil::sine(10000.0, 0.5, 32000, 32000);
  const AudioSignal out = standardize(AudioSignal(x, 32000));
  CHECK(rms(out.samples().subspan(1000, 14000)) < 1e-3);
}

TEST_CASE("resampling preserves duration") {
  for (int rate : {8000, 11025, 22050, 44100, 48000, 96000}) {
    for (std::size_t n : {1u, 7u, 441u, 12345u, 48001u}) {
      const AudioSignal out = standardize(AudioSignal(std::vector<double>(n, 0.1), rate));
      const double diff = std::abs(static_cast<double>(out.size()) / 16000.0 - static_cast<double>(n) / rate);
      CHECK(diff <= 1.0 / 16000.0);
    }
  }
}

TEST_CASE("standardize is idempotent and keeps 16 kHz storage") {
  const AudioSignal s44(testutil::gaussian_noise(44100, 0.6, 9), 44100);
  const AudioSignal once = standardize(s44);
  const AudioSignal twice = standardize(once);
  CHECK(once == twice);
  for (double v : once.samples()) CHECK(std::abs(v) <= 1.0);
  const AudioSignal s16(std::vector<double>{0.1, -0.2}, 16000);
  CHECK(standardize(s16).samples().data() == s16.samples().data());
  CHECK_THROWS_AS(standardize(AudioSignal(std::vector<double>{}, 16000)), Error);
}

TEST_CASE("slices share storage") {
  const AudioSignal s(testutil::gaussian_noise(100, 1.0, 1), 16000, "r");
  const AudioSignal v = s.slice(10, 20);
  CHECK(v.size() == 20);
  CHECK(v.samples().data() == s.samples().data() + 10);
  CHECK(v.slice(5, 5).samples().data() == s.samples().data() + 15);
}

TEST_CASE("parallel resampler matches the serial reference") {
  for (int rate : {8000, 22050, 44100, 48000}) {
    const auto x = testutil::gaussian_noise(static_cast<std::size_t>(rate) / 2 + 17, 0.3, static_cast<std::uint64_t>(rate));
    const auto fast = kernels::resample(x, rate, 16000);
    const auto ref = reference::resample(x, rate, 16000);
    REQUIRE(fast.size() == ref.size());
    CHECK(testutil::max_abs_diff(fast, ref) <= 1e-9);
  }
}

TEST_CASE("parallel resampler is bit-identical across thread counts") {
  const auto x = testutil::gaussian_noise(44100, 0.3, 3);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = kernels::resample(x, 44100, 16000);
  omp_set_num_threads(8);
  const auto eight = kernels::resample(x, 44100, 16000);
  omp_set_num_threads(saved);
  CHECK(one == eight);
}
