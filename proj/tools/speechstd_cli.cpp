// speechstd: batch entry point for every module.
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 backend.

#include <csignal>
#include <cstdio>
#include <iostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "speechstd/audio.hpp"
#include "speechstd/corpus.hpp"
#include "speechstd/denoise.hpp"
#include "speechstd/error.hpp"
#include "speechstd/io.hpp"
#include "speechstd/metrics.hpp"
#include "speechstd/pipeline.hpp"
#include "speechstd/segmenter.hpp"
#include "speechstd/stage_http.hpp"
#include "speechstd/text.hpp"

namespace fs = std::filesystem;
using namespace speechstd;

namespace {

std::vector<std::string> read_lines(const fs::path& path) {
  const std::string content = read_file(path);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string line = content.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

bool is_jsonl(const fs::path& p) { return p.extension() == ".jsonl"; }

std::set<std::string> split_ids(const std::string& csv) {
  std::set<std::string> ids;
  std::size_t start = 0;
  while (start <= csv.size() && !csv.empty()) {
    auto comma = csv.find(',', start);
    if (comma == std::string::npos) comma = csv.size();
    if (comma > start) ids.insert(csv.substr(start, comma - start));
    start = comma + 1;
  }
  return ids;
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << std::endl; }

// ---- preprocess ------------------------------------------------------------

struct PreprocessArgs {
  fs::path in, out;
  bool no_denoise = false;
  GateParams gate;
};

int cmd_preprocess(const PreprocessArgs& a) {
  a.gate.validate();
  if (!fs::is_directory(a.in)) throw Error(ErrorKind::IoFailure, a.in.string() + " is not a directory");
  std::vector<fs::path> inputs;
  for (const auto& e : fs::directory_iterator(a.in)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") inputs.push_back(e.path());
  }
  std::sort(inputs.begin(), inputs.end());
  nlohmann::json report = nlohmann::json::array();
  int failed = 0;
  for (const auto& p : inputs) {
    try {
      AudioSignal sig = standardize(read_wav(p));
      if (!a.no_denoise) sig = denoise(sig, a.gate);
      write_wav(sig, a.out / p.filename());
      report.push_back({{"file", p.filename().string()}, {"duration_s", sig.duration_seconds()}});
    } catch (const Error& e) {
      ++failed;
      spdlog::error("{}: {}", p.string(), e.what());
      report.push_back({{"file", p.filename().string()}, {"error", e.what()}});
    }
  }
  print_json(report);
  return failed ? static_cast<int>(ErrorClass::Data) : 0;
}

// ---- segment ---------------------------------------------------------------

int cmd_segment(const fs::path& manifest_path, const fs::path& out, double window_s, bool with_denoise) {
  const CorpusManifest m = load_manifest(manifest_path);
  const fs::path chunk_dir = out.parent_path() / (out.stem().string() + "_chunks");
  CorpusManifest chunks;
  chunks.base_dir = out.parent_path();
  std::int64_t total = 0;
  for (const auto& record : m.records) {
    AudioSignal sig = standardize(read_wav(m.resolve_audio(record))).with_source_id(record.id);
    if (with_denoise) sig = denoise(sig).with_source_id(record.id);
    for (auto& c : align(record, sig, window_s)) {
      const std::string name = record.id + "_" + std::to_string(c.segment.index_k) + ".wav";
      write_wav(c.segment.audio, chunk_dir / name);
      UtteranceRecord r;
      r.id = c.id();
      r.audio_path = (fs::path(chunk_dir.filename()) / name).generic_string();
      r.dialect_text = text::join(c.text.dialect_tokens);
      r.standard_text = text::join(c.text.standard_tokens);
      r.speaker = record.speaker;
      chunks.records.push_back(std::move(r));
      ++total;
    }
  }
  save_manifest(chunks, out);
  print_json({{"recordings", m.records.size()}, {"chunks", total}, {"manifest", out.string()}});
  return 0;
}

// ---- corpus ----------------------------------------------------------------

int cmd_corpus_stats(const fs::path& manifest_path, double window_s, bool text_only) {
  const CorpusManifest m = load_manifest(manifest_path);
  const CorpusStats s = text_only ? compute_text_stats(m) : compute_stats(m, window_s);
  print_json(to_json(s));
  return 0;
}

int cmd_corpus_split(const fs::path& manifest_path, const SplitCounts& counts, std::uint64_t seed, fs::path out,
                     bool by_recording) {
  const CorpusManifest m = assign_splits(load_manifest(manifest_path), counts, seed, by_recording);
  if (out.empty()) out = manifest_path.parent_path() / (manifest_path.stem().string() + ".split.jsonl");
  save_split_sidecar(m, out);
  std::map<std::string, std::int64_t> sizes{{"train", 0}, {"val", 0}, {"test", 0}};
  for (const auto& [id, s] : m.split) ++sizes[std::string(to_string(s))];
  print_json({{"train", sizes["train"]}, {"val", sizes["val"]}, {"test", sizes["test"]},
              {"seed", seed}, {"sidecar", out.string()}});
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string task;
  fs::path ref, hyp;
  bool per_sentence = false;
  bool grapheme = false;
  double window_s = kDefaultWindowSeconds;
};

void print_table(const MetricReport& r, std::string_view task) {
  std::fprintf(stderr, "%-6s %10s %10s %10s %8s\n", "task", "CER%", "WER%", "BLEU%", "pairs");
  std::string bleu = r.bleu_percent ? std::to_string(*r.bleu_percent) : "-";
  std::fprintf(stderr, "%-6.*s %10.3f %10.3f %10.10s %8lld\n", static_cast<int>(task.size()), task.data(),
               r.cer_percent, r.wer_percent, bleu.c_str(), static_cast<long long>(r.pair_count));
}

nlohmann::ordered_json per_sentence_rows(const std::vector<TextPair>& pairs, Task task, CerUnit unit) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    nlohmann::ordered_json row;
    row["index"] = i;
    try {
      row["cer_percent"] = cer(pairs[i].ref, pairs[i].hyp, unit);
    } catch (const Error&) {
      row["cer_percent"] = nullptr;
    }
    try {
      row["wer_percent"] = wer(pairs[i].ref, pairs[i].hyp);
    } catch (const Error&) {
      row["wer_percent"] = nullptr;
    }
    if (task == Task::Mt) {
      row["sentence_bleu_percent"] = sentence_bleu(text::tokenize(pairs[i].ref), text::tokenize(pairs[i].hyp));
    }
    rows.push_back(row);
  }
  return rows;
}

int cmd_eval(const EvalArgs& a) {
  const Task task = a.task == "mt" ? Task::Mt : Task::Asr;
  const CerUnit unit = a.grapheme ? CerUnit::Grapheme : CerUnit::Scalar;
  std::vector<TextPair> pairs;
  if (is_jsonl(a.ref) && is_jsonl(a.hyp)) {
    // Manifest of references against pipeline result rows.
    const auto rows = load_result_rows(a.hyp);
    const auto refs = chunk_references(load_manifest(a.ref), a.window_s);
    std::vector<std::string> missing;
    for (const auto& row : rows) {
      auto it = refs.find(row.id);
      if (it == refs.end()) {
        missing.push_back(row.id);
        continue;
      }
      pairs.push_back(task == Task::Mt ? TextPair{it->second.standard_text, row.standard_text}
                                       : TextPair{it->second.dialect_text, row.dialect_text});
    }
    if (!missing.empty()) throw Error(ErrorKind::MissingReference, "no reference for " + text::join(missing, ", "));
  } else {
    const auto refs = read_lines(a.ref);
    const auto hyps = read_lines(a.hyp);
    if (refs.size() != hyps.size()) {
      throw Error(ErrorKind::LengthMismatch, std::to_string(refs.size()) + " reference lines vs " +
                                                 std::to_string(hyps.size()) + " hypothesis lines");
    }
    for (std::size_t i = 0; i < refs.size(); ++i) pairs.push_back(TextPair{refs[i], hyps[i]});
  }
  const MetricReport report = evaluate_corpus(pairs, task, unit);
  nlohmann::json out = to_json(report);
  if (a.per_sentence) out["sentences"] = per_sentence_rows(pairs, task, unit);
  print_json(out);
  print_table(report, a.task);
  return 0;
}

// ---- run -------------------------------------------------------------------

struct RunArgs {
  fs::path input, config, mock_dir, out;
  std::string asr_url, mt_url, tts_url;
  int jobs = -1;
  double window_s = 0.0;
  bool join_text = false;
  bool no_denoise = false;
};

int cmd_run(const RunArgs& a) {
  PipelineConfig cfg = a.config.empty() ? PipelineConfig{} : load_pipeline_config(a.config);
  if (!a.asr_url.empty()) cfg.endpoints.asr = a.asr_url;
  if (!a.mt_url.empty()) cfg.endpoints.mt = a.mt_url;
  if (!a.tts_url.empty()) cfg.endpoints.tts = a.tts_url;
  if (!a.asr_url.empty() || !a.mt_url.empty() || !a.tts_url.empty()) cfg.mock_dir.clear();
  if (!a.mock_dir.empty()) cfg.mock_dir = a.mock_dir;
  if (!a.out.empty()) cfg.output_dir = a.out;
  if (a.jobs >= 0) cfg.jobs = a.jobs;
  if (a.window_s > 0) cfg.window_s = a.window_s;
  if (a.join_text) cfg.join_text_before_tts = true;
  if (a.no_denoise) cfg.denoise = false;

  const CorpusManifest m = is_jsonl(a.input) ? load_manifest(a.input) : manifest_for_audio(a.input);
  const PipelineResult r = run_pipeline(m, cfg);
  nlohmann::json audio = nlohmann::json::array();
  for (const auto& p : r.output_audio) audio.push_back(p.string());
  print_json({{"total_chunks", r.total_chunks},
              {"rows", r.rows.size()},
              {"failures", r.failures.size()},
              {"results", (cfg.output_dir / "results.jsonl").string()},
              {"audio", audio}});
  return 0;
}

// ---- mock-server / mock-fixtures ---------------------------------------------

struct MockServerArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  fs::path asr_fixtures, mt_dict;
  std::string fail_asr, fail_mt, fail_tts;
};

int cmd_mock_server(const MockServerArgs& a) {
  auto suite = std::make_shared<const MockSuite>(MockSuite::from_files(a.asr_fixtures, a.mt_dict));
  MockServerOptions opts;
  opts.host = a.host;
  opts.port = a.port;
  opts.fail_asr_ids = split_ids(a.fail_asr);
  opts.fail_mt_ids = split_ids(a.fail_mt);
  opts.fail_tts_ids = split_ids(a.fail_tts);

  // Wait for SIGINT/SIGTERM on this thread; server threads inherit the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  MockServer server(suite, opts);
  server.start();
  print_json({{"url", server.url()}, {"asr_fixtures", suite->asr.size()}, {"mt_phrases", suite->mt.size()}});
  spdlog::info("serving mocks on {}", server.url());
  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("signal {}, stopping after {} requests", sig, server.request_count());
  server.stop();
  return 0;
}

int cmd_mock_fixtures(const fs::path& manifest_path, const fs::path& out, const fs::path& config, double window_s,
                      bool no_denoise) {
  PipelineConfig cfg = config.empty() ? PipelineConfig{} : load_pipeline_config(config);
  if (window_s > 0) cfg.window_s = window_s;
  if (no_denoise) cfg.denoise = false;
  build_mock_fixtures(load_manifest(manifest_path), cfg, out);
  print_json({{"asr_fixtures", (out / kAsrFixturesFile).string()}, {"mt_dict", (out / kMtDictFile).string()}});
  return 0;
}

void add_gate_options(CLI::App* cmd, GateParams& gate) {
  cmd->add_option("--fft-size", gate.fft_size, "STFT size (power of two)");
  cmd->add_option("--hop", gate.hop, "STFT hop");
  cmd->add_option("--n-std", gate.n_std_thresh, "threshold in noise standard deviations");
  cmd->add_option("--prop-decrease", gate.prop_decrease, "attenuation strength in [0, 1]");
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("speechstd");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"Dialect speech standardization toolkit"};
  app.require_subcommand(1);
  bool version = false, verbose = false, quiet = false;
  app.add_flag("--version", version, "print version and protocol version");
  app.add_flag("-v,--verbose", verbose, "debug logging");
  app.add_flag("-q,--quiet", quiet, "warnings and errors only");

  PreprocessArgs pre;
  auto* preprocess = app.add_subcommand("preprocess", "standardize and denoise every WAV in a directory");
  preprocess->add_option("--in", pre.in, "input directory")->required();
  preprocess->add_option("--out", pre.out, "output directory")->required();
  preprocess->add_flag("--no-denoise", pre.no_denoise, "standardize only");
  add_gate_options(preprocess, pre.gate);

  fs::path seg_manifest, seg_out;
  double seg_window = kDefaultWindowSeconds;
  bool seg_denoise = false;
  auto* segment = app.add_subcommand("segment", "write a chunk-level manifest and chunk WAVs");
  segment->add_option("--manifest", seg_manifest, "recording-level manifest")->required();
  segment->add_option("--out", seg_out, "chunk-level manifest to write")->required();
  segment->add_option("--window", seg_window, "window length in seconds");
  segment->add_flag("--denoise", seg_denoise, "denoise before splitting");

  auto* corpus = app.add_subcommand("corpus", "corpus statistics and splits");
  corpus->require_subcommand(1);
  fs::path stats_manifest;
  double stats_window = kDefaultWindowSeconds;
  bool stats_text_only = false;
  auto* stats = corpus->add_subcommand("stats", "vocabulary, duration and chunk counts");
  stats->add_option("--manifest", stats_manifest)->required();
  stats->add_option("--window", stats_window, "window length in seconds");
  stats->add_flag("--text-only", stats_text_only, "skip audio headers");

  fs::path split_manifest, split_out;
  SplitCounts counts;
  std::uint64_t seed = 0;
  bool by_recording = false;
  auto* split = corpus->add_subcommand("split", "seeded train/val/test assignment");
  split->add_option("--manifest", split_manifest)->required();
  split->add_option("--train", counts.train)->required()->check(CLI::NonNegativeNumber);
  split->add_option("--val", counts.val)->required()->check(CLI::NonNegativeNumber);
  split->add_option("--test", counts.test)->required()->check(CLI::NonNegativeNumber);
  split->add_option("--seed", seed)->required();
  split->add_option("--out", split_out, "sidecar path (default <manifest>.split.jsonl)");
  split->add_flag("--by-recording", by_recording, "keep chunks of one recording together");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "CER/WER (and BLEU for mt) against references");
  eval->add_option("--task", ev.task)->required()->check(CLI::IsMember({"asr", "mt"}));
  eval->add_option("--ref", ev.ref, "reference lines, or a manifest (.jsonl)")->required();
  eval->add_option("--hyp", ev.hyp, "hypothesis lines, or results.jsonl")->required();
  eval->add_flag("--per-sentence", ev.per_sentence, "add per-sentence scores");
  eval->add_flag("--grapheme-cer", ev.grapheme, "count CER over grapheme clusters");
  eval->add_option("--window", ev.window_s, "window used to chunk recording-level references");

  RunArgs run;
  auto* runc = app.add_subcommand("run", "denoise, segment, then ASR, MT and TTS per chunk");
  runc->add_option("--input", run.input, "manifest (.jsonl) or a single WAV")->required();
  runc->add_option("--config", run.config, "key/value config file");
  auto* asr_opt = runc->add_option("--asr-url", run.asr_url);
  auto* mt_opt = runc->add_option("--mt-url", run.mt_url);
  auto* tts_opt = runc->add_option("--tts-url", run.tts_url);
  auto* mock_opt = runc->add_option("--mock-dir", run.mock_dir, "in-process mocks from fixture directory");
  mock_opt->excludes(asr_opt)->excludes(mt_opt)->excludes(tts_opt);
  runc->add_option("--jobs", run.jobs, "chunk workers (default: logical cores)")->check(CLI::NonNegativeNumber);
  runc->add_option("--out", run.out, "output directory");
  runc->add_option("--window", run.window_s, "window length in seconds");
  runc->add_flag("--join-text-before-tts", run.join_text, "one TTS call per recording");
  runc->add_flag("--no-denoise", run.no_denoise, "skip spectral gating");

  MockServerArgs ms;
  auto* mock_server = app.add_subcommand("mock-server", "serve /v1/asr, /v1/mt, /v1/tts mocks");
  mock_server->add_option("--host", ms.host);
  mock_server->add_option("--port", ms.port, "0 picks a free port")->check(CLI::Range(0, 65535));
  mock_server->add_option("--asr-fixtures", ms.asr_fixtures)->check(CLI::ExistingFile);
  mock_server->add_option("--mt-dict", ms.mt_dict)->check(CLI::ExistingFile);
  mock_server->add_option("--fail-asr", ms.fail_asr, "comma-separated chunk ids that answer 503");
  mock_server->add_option("--fail-mt", ms.fail_mt, "comma-separated chunk ids that answer 503");
  mock_server->add_option("--fail-tts", ms.fail_tts, "comma-separated chunk ids that answer 503");

  fs::path fx_manifest, fx_out, fx_config;
  double fx_window = 0.0;
  bool fx_no_denoise = false;
  auto* fixtures = app.add_subcommand("mock-fixtures", "derive mock fixtures from a manifest");
  fixtures->add_option("--manifest", fx_manifest)->required();
  fixtures->add_option("--out", fx_out, "directory for asr_fixtures.jsonl and mt_dict.json")->required();
  fixtures->add_option("--config", fx_config, "pipeline config used to prepare audio");
  fixtures->add_option("--window", fx_window, "window length in seconds");
  fixtures->add_flag("--no-denoise", fx_no_denoise, "prepare audio without denoising");

  // --version works without a subcommand.
  for (int i = 1; i < argc; ++i) {
    if (std::string_view(argv[i]) == "--version") {
      std::cout << "speechstd " << SPEECHSTD_VERSION << " (protocol " << kProtocolVersion << ")" << std::endl;
      return 0;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    std::cerr << "\n" << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().back()->help());
    return static_cast<int>(ErrorClass::Usage);
  }
  if (verbose) spdlog::set_level(spdlog::level::debug);
  if (quiet) spdlog::set_level(spdlog::level::warn);

  try {
    if (*preprocess) return cmd_preprocess(pre);
    if (*segment) return cmd_segment(seg_manifest, seg_out, seg_window, seg_denoise);
    if (*stats) return cmd_corpus_stats(stats_manifest, stats_window, stats_text_only);
    if (*split) return cmd_corpus_split(split_manifest, counts, seed, split_out, by_recording);
    if (*eval) return cmd_eval(ev);
    if (*runc) return cmd_run(run);
    if (*mock_server) return cmd_mock_server(ms);
    if (*fixtures) return cmd_mock_fixtures(fx_manifest, fx_out, fx_config, fx_window, fx_no_denoise);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(classify(e.kind()));
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(ErrorClass::Data);
  }
  return static_cast<int>(ErrorClass::Usage);
}
