#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "speechstd/config.hpp"
#include "speechstd/corpus.hpp"
#include "speechstd/denoise.hpp"
#include "speechstd/metrics.hpp"
#include "speechstd/protocol.hpp"
#include "speechstd/segmenter.hpp"
#include "speechstd/stage_http.hpp"

namespace speechstd {

struct EndpointConfig {
  std::string asr;
  std::string mt;
  std::string tts;
  bool complete() const { return !asr.empty() && !mt.empty() && !tts.empty(); }
};

struct PipelineConfig {
  double window_s = kDefaultWindowSeconds;
  bool denoise = true;
  GateParams gate;
  EndpointConfig endpoints;
  std::filesystem::path mock_dir;  // in-process mocks when set
  CallOptions call;
  int max_in_flight = 4;
  int jobs = 0;  // 0 = hardware concurrency
  std::filesystem::path output_dir = "out";
  bool join_text_before_tts = false;

  void validate() const;  // throws InvalidParams
  int effective_jobs() const;
};

// Reads a key/value config file (see KeyValueConfig) over the defaults.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
PipelineConfig pipeline_config_from(const KeyValueConfig& kv, PipelineConfig base = {});

struct ResultRow {
  std::string id;
  std::string parent_id;
  std::int64_t index_k = 0;
  std::string dialect_text;
  std::string standard_text;
};

struct FailureRow {
  std::string id;
  std::string stage;
  std::string code;
  std::string message;
};

struct PipelineResult {
  std::vector<ResultRow> rows;          // ordered by (parent_id, index_k)
  std::vector<FailureRow> failures;     // same order
  std::vector<std::filesystem::path> output_audio;
  std::vector<SegmentWarning> warnings;
  std::int64_t total_chunks = 0;
};

struct Backends {
  std::shared_ptr<StageBackend> asr;
  std::shared_ptr<StageBackend> mt;
  std::shared_ptr<StageBackend> tts;
};

// In-process mocks when cfg.mock_dir is set, otherwise HTTP backends.
// Throws NoBackends.
Backends make_backends(const PipelineConfig& cfg);

// Standardize, optionally denoise, then split into windows.
struct PreparedRecording {
  std::string id;
  AudioSignal audio;
  std::vector<Segment> segments;
};
PreparedRecording prepare_recording(const std::string& id, const std::filesystem::path& audio_path,
                                    const PipelineConfig& cfg,
                                    std::vector<SegmentWarning>* warnings = nullptr);

// Wraps a single audio file as a one-record manifest (id = file stem).
CorpusManifest manifest_for_audio(const std::filesystem::path& wav);

// Runs every chunk ASR -> MT -> TTS over `backends`, writes
// results.jsonl, failures.jsonl and <rec>.standard.wav into
// cfg.output_dir. Health-checks backends first (NoBackends). Throws
// AllChunksFailed when there were chunks and none succeeded; outputs are
// written before throwing.
PipelineResult run_pipeline(const CorpusManifest& input, const PipelineConfig& cfg,
                            const Backends& backends);
PipelineResult run_pipeline(const CorpusManifest& input, const PipelineConfig& cfg);

void write_result_files(const PipelineResult& result, const std::filesystem::path& dir);
std::vector<ResultRow> load_result_rows(const std::filesystem::path& results_jsonl);

struct EvaluationReports {
  MetricReport asr;
  MetricReport mt;
};

// Chunk-level reference texts by "rec:k" id. Chunk-level manifests are used
// as-is; recording-level ones are aligned with the segment count from their
// audio headers (or explicit chunk annotations).
std::map<std::string, ChunkAnnotation> chunk_references(const CorpusManifest& refs,
                                                        double window_s = kDefaultWindowSeconds);

// Throws MissingReference naming every row id without a reference.
EvaluationReports evaluate(const std::vector<ResultRow>& rows, const CorpusManifest& refs,
                           double window_s = kDefaultWindowSeconds,
                           CerUnit unit = CerUnit::Scalar);

// Writes asr_fixtures.jsonl and mt_dict.json so the mocks reproduce the
// manifest's chunk texts for audio prepared with `cfg`.
void build_mock_fixtures(const CorpusManifest& m, const PipelineConfig& cfg,
                         const std::filesystem::path& out_dir);

}  // namespace speechstd
