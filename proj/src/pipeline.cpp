#include "speechstd/pipeline.hpp"

#include <atomic>
#include <charconv>
#include <thread>

#include <spdlog/spdlog.h>

#include "speechstd/error.hpp"
#include "speechstd/io.hpp"
#include "speechstd/kernels.hpp"
#include "speechstd/mock_backends.hpp"
#include "speechstd/text.hpp"

namespace speechstd {

void PipelineConfig::validate() const {
  if (!(window_s > 0.0)) throw Error(ErrorKind::InvalidParams, "window_s must be > 0");
  window_samples(window_s);
  gate.validate();
  if (max_in_flight < 1) throw Error(ErrorKind::InvalidParams, "max_in_flight must be >= 1");
  if (jobs < 0) throw Error(ErrorKind::InvalidParams, "jobs must be >= 0");
  if (call.retries < 0) throw Error(ErrorKind::InvalidParams, "retries must be >= 0");
  if (!(call.timeout_s > 0.0)) throw Error(ErrorKind::InvalidParams, "timeout_s must be > 0");
}

int PipelineConfig::effective_jobs() const {
  if (jobs > 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

PipelineConfig pipeline_config_from(const KeyValueConfig& kv, PipelineConfig cfg) {
  if (auto v = kv.get_double("window_s")) cfg.window_s = *v;
  if (auto v = kv.get_string("output_dir")) cfg.output_dir = *v;
  if (auto v = kv.get_int("jobs")) cfg.jobs = static_cast<int>(*v);
  if (auto v = kv.get_string("mock_dir")) cfg.mock_dir = *v;
  if (auto v = kv.get_bool("join_text_before_tts")) cfg.join_text_before_tts = *v;

  if (auto v = kv.get_bool("denoise.enabled")) cfg.denoise = *v;
  if (auto v = kv.get_int("denoise.fft_size")) cfg.gate.fft_size = static_cast<std::size_t>(*v);
  if (auto v = kv.get_int("denoise.hop")) cfg.gate.hop = static_cast<std::size_t>(*v);
  if (auto v = kv.get_double("denoise.n_std_thresh")) cfg.gate.n_std_thresh = *v;
  if (auto v = kv.get_double("denoise.prop_decrease")) cfg.gate.prop_decrease = *v;
  if (auto v = kv.get_int("denoise.smoothing_bins")) cfg.gate.smoothing_bins = static_cast<std::size_t>(*v);
  if (auto v = kv.get_int("denoise.smoothing_frames")) cfg.gate.smoothing_frames = static_cast<std::size_t>(*v);

  if (auto v = kv.get_string("endpoints.asr")) cfg.endpoints.asr = *v;
  if (auto v = kv.get_string("endpoints.mt")) cfg.endpoints.mt = *v;
  if (auto v = kv.get_string("endpoints.tts")) cfg.endpoints.tts = *v;

  if (auto v = kv.get_double("http.timeout_s")) cfg.call.timeout_s = *v;
  if (auto v = kv.get_int("http.retries")) cfg.call.retries = static_cast<int>(*v);
  if (auto v = kv.get_double("http.backoff_base_s")) cfg.call.backoff_base_s = *v;
  if (auto v = kv.get_double("http.backoff_factor")) cfg.call.backoff_factor = *v;
  if (auto v = kv.get_double("http.jitter")) cfg.call.jitter = *v;
  if (auto v = kv.get_int("http.max_in_flight")) cfg.max_in_flight = static_cast<int>(*v);
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  PipelineConfig cfg = pipeline_config_from(KeyValueConfig::load(path));
  // mock_dir is relative to the config file, like manifest audio paths.
  if (!cfg.mock_dir.empty() && cfg.mock_dir.is_relative()) cfg.mock_dir = path.parent_path() / cfg.mock_dir;
  return cfg;
}

Backends make_backends(const PipelineConfig& cfg) {
  if (!cfg.mock_dir.empty()) {
    auto suite = std::make_shared<const MockSuite>(MockSuite::from_dir(cfg.mock_dir));
    return Backends{std::make_shared<MockBackend>(suite, Stage::Asr), std::make_shared<MockBackend>(suite, Stage::Mt),
                    std::make_shared<MockBackend>(suite, Stage::Tts)};
  }
  if (!cfg.endpoints.complete()) {
    throw Error(ErrorKind::NoBackends, "need asr, mt and tts endpoints or a mock directory");
  }
  return Backends{std::make_shared<HttpStageBackend>(cfg.endpoints.asr, cfg.call, cfg.max_in_flight),
                  std::make_shared<HttpStageBackend>(cfg.endpoints.mt, cfg.call, cfg.max_in_flight),
                  std::make_shared<HttpStageBackend>(cfg.endpoints.tts, cfg.call, cfg.max_in_flight)};
}

PreparedRecording prepare_recording(const std::string& id, const std::filesystem::path& audio_path,
                                    const PipelineConfig& cfg, std::vector<SegmentWarning>* warnings) {
  AudioSignal audio = standardize(read_wav(audio_path)).with_source_id(id);
  if (cfg.denoise) audio = denoise(audio, cfg.gate).with_source_id(id);
  auto segments = split_audio(audio, cfg.window_s, warnings);
  return PreparedRecording{id, std::move(audio), std::move(segments)};
}

CorpusManifest manifest_for_audio(const std::filesystem::path& wav) {
  CorpusManifest m;
  m.base_dir = wav.parent_path();
  UtteranceRecord r;
  r.id = wav.stem().string();
  r.audio_path = wav.filename().string();
  m.records.push_back(std::move(r));
  return m;
}

namespace {

struct ChunkJob {
  std::size_t recording = 0;  // index into the batch
  std::string id;
  std::string parent_id;
  std::int64_t index_k = 0;
  AudioSignal audio;
};

struct ChunkOutcome {
  std::optional<ResultRow> row;
  std::optional<FailureRow> failure;
  std::optional<AudioSignal> speech;
};

// One stage call; a failure of any shape becomes a FailureRow.
std::optional<StageResponse> call_guarded(StageBackend& backend, const StageRequest& req, FailureRow& failure) {
  failure = FailureRow{req.id, std::string(to_string(req.stage)), "", ""};
  try {
    StageResponse resp = backend.call(req);
    if (resp.error) {
      failure.code = resp.error->code;
      failure.message = resp.error->message;
      return std::nullopt;
    }
    if (resp.id != req.id) {
      failure.code = std::string(to_string(ErrorKind::IdMismatch));
      failure.message = "sent '" + req.id + "', got '" + resp.id + "'";
      return std::nullopt;
    }
    const bool wants_audio = req.stage == Stage::Tts;
    if (wants_audio ? !resp.audio_b64 : !resp.text) {
      failure.code = "invalid_response";
      failure.message = wants_audio ? "no audio_b64 in response" : "no text in response";
      return std::nullopt;
    }
    return resp;
  } catch (const StageCallError& e) {
    failure.code = e.remote() ? e.remote()->code : std::string(to_string(e.kind()));
    failure.message = e.what();
  } catch (const Error& e) {
    failure.code = std::string(to_string(e.kind()));
    failure.message = e.what();
  } catch (const std::exception& e) {
    failure.code = error_code::kInternal;
    failure.message = e.what();
  }
  return std::nullopt;
}

std::optional<AudioSignal> decode_speech(const StageResponse& resp, FailureRow& failure) {
  try {
    AudioSignal a = response_audio(resp);
    if (a.empty()) return a;
    return standardize(a);
  } catch (const std::exception& e) {
    failure.code = "invalid_response";
    failure.message = e.what();
    return std::nullopt;
  }
}

ChunkOutcome process_chunk(const ChunkJob& job, const Backends& b, bool tts_per_chunk) {
  ChunkOutcome out;
  FailureRow failure;
  auto asr = call_guarded(*b.asr, make_asr_request(job.id, job.audio), failure);
  if (!asr) {
    out.failure = failure;
    return out;
  }
  auto mt = call_guarded(*b.mt, make_text_request(Stage::Mt, job.id, *asr->text), failure);
  if (!mt) {
    out.failure = failure;
    return out;
  }
  if (tts_per_chunk) {
    auto tts = call_guarded(*b.tts, make_text_request(Stage::Tts, job.id, *mt->text), failure);
    if (tts) out.speech = decode_speech(*tts, failure);
    if (!out.speech) {
      out.failure = failure;
      return out;
    }
  }
  out.row = ResultRow{job.id, job.parent_id, job.index_k, *asr->text, *mt->text};
  return out;
}

AudioSignal concatenate(const std::vector<AudioSignal>& parts, const std::string& id) {
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  std::vector<double> samples;
  samples.reserve(total);
  for (const auto& p : parts) samples.insert(samples.end(), p.samples().begin(), p.samples().end());
  return AudioSignal(std::move(samples), kCorpusSampleRate, id);
}

// Keeps batches big enough to feed the pool without holding a whole corpus
// of audio in memory.
constexpr std::size_t kBatchChunks = 512;

class Runner {
 public:
  Runner(const PipelineConfig& cfg, const Backends& backends, PipelineResult& result)
      : cfg_(cfg), backends_(backends), result_(result) {}

  void add(PreparedRecording rec) {
    for (const auto& seg : rec.segments) {
      jobs_.push_back(ChunkJob{batch_.size(), chunk_id(rec.id, seg.index_k), rec.id, seg.index_k, seg.audio});
    }
    batch_.push_back(std::move(rec));
    if (jobs_.size() >= kBatchChunks) flush();
  }

  void flush() {
    if (batch_.empty()) return;
    std::vector<ChunkOutcome> outcomes(jobs_.size());
    const bool per_chunk = !cfg_.join_text_before_tts;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < jobs_.size(); i = next++) {
        outcomes[i] = process_chunk(jobs_[i], backends_, per_chunk);
      }
    };
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg_.effective_jobs()), jobs_.size());
    if (n_threads <= 1) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }

    // Single ordered writer: jobs are already in (recording, index) order.
    std::vector<std::vector<AudioSignal>> speech(batch_.size());
    std::vector<std::vector<std::string>> joined_text(batch_.size());
    for (std::size_t i = 0; i < jobs_.size(); ++i) {
      auto& o = outcomes[i];
      if (o.failure) {
        result_.failures.push_back(std::move(*o.failure));
        continue;
      }
      if (o.speech) speech[jobs_[i].recording].push_back(std::move(*o.speech));
      if (!o.row->standard_text.empty()) joined_text[jobs_[i].recording].push_back(o.row->standard_text);
      result_.rows.push_back(std::move(*o.row));
    }
    for (std::size_t r = 0; r < batch_.size(); ++r) {
      const std::string& id = batch_[r].id;
      if (cfg_.join_text_before_tts && !joined_text[r].empty()) {
        FailureRow failure;
        const std::string joined_id = id + ":joined";
        auto tts = call_guarded(*backends_.tts, make_text_request(Stage::Tts, joined_id, text::join(joined_text[r])),
                                failure);
        std::optional<AudioSignal> audio;
        if (tts) audio = decode_speech(*tts, failure);
        if (audio) {
          speech[r].push_back(std::move(*audio));
        } else {
          result_.failures.push_back(std::move(failure));
        }
      }
      if (speech[r].empty()) {
        spdlog::warn("{}: no synthesized speech, skipping {}.standard.wav", id, id);
        continue;
      }
      const auto path = cfg_.output_dir / (id + ".standard.wav");
      write_wav(concatenate(speech[r], id), path);
      result_.output_audio.push_back(path);
    }
    batch_.clear();
    jobs_.clear();
  }

 private:
  const PipelineConfig& cfg_;
  const Backends& backends_;
  PipelineResult& result_;
  std::vector<PreparedRecording> batch_;
  std::vector<ChunkJob> jobs_;
};

std::int64_t parse_index(std::string_view id) {
  const auto colon = id.rfind(':');
  if (colon == std::string_view::npos) return 0;
  std::int64_t k = 0;
  const auto tail = id.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), k);
  if (ec != std::errc() || ptr != tail.data() + tail.size()) return 0;
  return k;
}

}  // namespace

PipelineResult run_pipeline(const CorpusManifest& input, const PipelineConfig& cfg, const Backends& backends) {
  cfg.validate();
  if (!backends.asr || !backends.mt || !backends.tts) throw Error(ErrorKind::NoBackends, "a stage backend is missing");
  for (const auto& b : {backends.asr, backends.mt, backends.tts}) {
    if (!b->healthy()) throw Error(ErrorKind::NoBackends, b->describe() + " failed its health check");
  }

  PipelineResult result;
  if (input.records.empty()) {
    spdlog::warn("empty manifest: nothing to run");
  }
  std::filesystem::create_directories(cfg.output_dir);
  Runner runner(cfg, backends, result);
  for (const auto& record : input.records) {
    PreparedRecording rec = prepare_recording(record.id, input.resolve_audio(record), cfg, &result.warnings);
    result.total_chunks += static_cast<std::int64_t>(rec.segments.size());
    runner.add(std::move(rec));
  }
  runner.flush();

  write_result_files(result, cfg.output_dir);
  spdlog::info("{} chunks: {} complete, {} failed", result.total_chunks, result.rows.size(), result.failures.size());
  if (result.total_chunks > 0 && result.rows.empty()) {
    throw Error(ErrorKind::AllChunksFailed,
                "all " + std::to_string(result.total_chunks) + " chunks failed; see failures.jsonl");
  }
  return result;
}

PipelineResult run_pipeline(const CorpusManifest& input, const PipelineConfig& cfg) {
  return run_pipeline(input, cfg, make_backends(cfg));
}

void write_result_files(const PipelineResult& result, const std::filesystem::path& dir) {
  std::string rows;
  for (const auto& r : result.rows) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["dialect_text"] = r.dialect_text;
    j["standard_text"] = r.standard_text;
    rows += j.dump() + "\n";
  }
  std::string failures;
  for (const auto& f : result.failures) {
    nlohmann::ordered_json j;
    j["id"] = f.id;
    j["stage"] = f.stage;
    j["error"] = {{"code", f.code}, {"message", f.message}};
    failures += j.dump() + "\n";
  }
  write_file_atomic(dir / "results.jsonl", rows);
  write_file_atomic(dir / "failures.jsonl", failures);
}

std::vector<ResultRow> load_result_rows(const std::filesystem::path& results_jsonl) {
  const std::string content = read_file(results_jsonl);
  std::vector<ResultRow> rows;
  std::size_t start = 0, line_no = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    ++line_no;
    const std::string line = content.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      ResultRow r;
      r.id = j.at("id").get<std::string>();
      r.dialect_text = j.at("dialect_text").get<std::string>();
      r.standard_text = j.at("standard_text").get<std::string>();
      r.parent_id = parent_of(r.id);
      r.index_k = parse_index(r.id);
      rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error(ErrorKind::SchemaViolation, results_jsonl.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

std::map<std::string, ChunkAnnotation> chunk_references(const CorpusManifest& refs, double window_s) {
  std::map<std::string, ChunkAnnotation> out;
  const std::int64_t window_len = window_samples(window_s);
  for (const auto& r : refs.records) {
    if (parent_of(r.id) != r.id) {
      out[r.id] = ChunkAnnotation{r.dialect_text, r.standard_text};
      continue;
    }
    std::int64_t n = 0;
    if (r.explicit_chunks) {
      n = static_cast<std::int64_t>(r.explicit_chunks->size());
    } else {
      try {
        const WavInfo info = read_wav_info(refs.resolve_audio(r));
        const std::int64_t len = info.sample_rate == kCorpusSampleRate
                                     ? info.frames
                                     : ResamplerDesign::make(info.sample_rate, kCorpusSampleRate).output_length(info.frames);
        n = segment_count(len, window_len);
      } catch (const Error& e) {
        spdlog::warn("{}: cannot size reference chunks: {}", r.id, e.what());
        continue;
      }
    }
    for (const auto& c : align_text(r, n)) {
      out[chunk_id(r.id, c.index_k)] = ChunkAnnotation{text::join(c.dialect_tokens), text::join(c.standard_tokens)};
    }
  }
  return out;
}

EvaluationReports evaluate(const std::vector<ResultRow>& rows, const CorpusManifest& refs, double window_s,
                           CerUnit unit) {
  const auto by_id = chunk_references(refs, window_s);
  std::vector<TextPair> asr, mt;
  std::vector<std::string> missing;
  for (const auto& row : rows) {
    auto it = by_id.find(row.id);
    if (it == by_id.end()) {
      missing.push_back(row.id);
      continue;
    }
    asr.push_back(TextPair{it->second.dialect_text, row.dialect_text});
    mt.push_back(TextPair{it->second.standard_text, row.standard_text});
  }
  if (!missing.empty()) {
    throw Error(ErrorKind::MissingReference, "no reference for " + text::join(missing, ", "));
  }
  return EvaluationReports{evaluate_corpus(asr, Task::Asr, unit), evaluate_corpus(mt, Task::Mt, unit)};
}

void build_mock_fixtures(const CorpusManifest& m, const PipelineConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::string asr_lines;
  std::map<std::uint64_t, std::string> seen_hash;
  nlohmann::json dict = nlohmann::json::object();
  for (const auto& record : m.records) {
    const PreparedRecording rec = prepare_recording(record.id, m.resolve_audio(record), cfg);
    const auto chunks = align_text(record, static_cast<std::int64_t>(rec.segments.size()));
    for (std::size_t i = 0; i < rec.segments.size(); ++i) {
      const std::string dialect = text::join(chunks[i].dialect_tokens);
      const std::string standard = text::join(chunks[i].standard_tokens);
      const std::uint64_t h = fnv1a64(to_pcm16le(rec.segments[i].audio.samples()));
      auto [it, inserted] = seen_hash.emplace(h, dialect);
      if (!inserted) {
        if (it->second != dialect) {
          spdlog::warn("{}: audio identical to an earlier chunk with different text; keeping the first",
                       chunk_id(record.id, chunks[i].index_k));
        }
      } else {
        nlohmann::ordered_json row;
        row["fnv1a64"] = hex64(h);
        row["text"] = dialect;
        asr_lines += row.dump() + "\n";
      }
      if (dialect.empty()) continue;
      if (dict.contains(dialect) && dict[dialect].get<std::string>() != standard) {
        spdlog::warn("{}: dialect text already mapped to a different translation; keeping the first",
                     chunk_id(record.id, chunks[i].index_k));
        continue;
      }
      dict[dialect] = standard;
    }
  }
  std::filesystem::create_directories(out_dir);
  write_file_atomic(out_dir / kAsrFixturesFile, asr_lines);
  write_file_atomic(out_dir / kMtDictFile, dict.dump(2) + "\n");
}

}  // namespace speechstd
