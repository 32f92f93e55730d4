#include "speechstd/metrics.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "speechstd/error.hpp"
#include "speechstd/kernels.hpp"
#include "speechstd/text.hpp"

namespace speechstd {

std::pair<std::u32string, std::u32string> cer_units(std::string_view ref, std::string_view hyp, CerUnit unit) {
  if (unit == CerUnit::Scalar) return {text::collapse_whitespace(ref), text::collapse_whitespace(hyp)};

  // Grapheme ids start in a plane no scalar can occupy.
  std::map<std::string, char32_t> ids;
  auto encode = [&](std::string_view s) {
    std::u32string out;
    for (const auto& g : text::graphemes(text::to_utf8(text::collapse_whitespace(s)))) {
      auto [it, inserted] = ids.try_emplace(g, static_cast<char32_t>(0x110000 + ids.size()));
      out.push_back(it->second);
    }
    return out;
  };
  std::u32string r = encode(ref);
  std::u32string h = encode(hyp);
  return {std::move(r), std::move(h)};
}

EditOps cer_ops(std::string_view ref, std::string_view hyp, CerUnit unit) {
  const auto [r, h] = cer_units(ref, hyp, unit);
  return edit_ops(r, h);
}

EditOps wer_ops(std::string_view ref, std::string_view hyp) {
  return edit_ops(text::tokenize(ref), text::tokenize(hyp));
}

namespace {

double percent(const EditOps& ops, const char* what) {
  if (ops.ref_len == 0) throw Error(ErrorKind::DivisionByEmptyReference, std::string(what) + " reference is empty");
  return 100.0 * static_cast<double>(ops.total()) / static_cast<double>(ops.ref_len);
}

using NgramCounts = std::unordered_map<std::string, std::int64_t>;

// n-grams keyed by their tokens joined with U+001F.
NgramCounts count_ngrams(const Tokens& tokens, int n) {
  NgramCounts counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int k = 1; k < n; ++k) {
      key += '\x1f';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

double cer(std::string_view ref, std::string_view hyp, CerUnit unit) { return percent(cer_ops(ref, hyp, unit), "CER"); }

double wer(std::string_view ref, std::string_view hyp) { return percent(wer_ops(ref, hyp), "WER"); }

double BleuStats::precision(int order) const {
  const auto i = static_cast<std::size_t>(order - 1);
  return totals[i] == 0 ? 0.0 : static_cast<double>(matches[i]) / static_cast<double>(totals[i]);
}

double BleuStats::brevity_penalty() const {
  if (hyp_len == 0) return 0.0;
  if (hyp_len > ref_len) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
}

BleuStats bleu_stats(std::span<const Tokens> refs, std::span<const Tokens> hyps, int max_n) {
  if (refs.size() != hyps.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(refs.size()) + " references vs " +
                                               std::to_string(hyps.size()) + " hypotheses");
  }
  if (refs.empty()) throw Error(ErrorKind::EmptyCorpus, "BLEU needs at least one segment");
  BleuStats s;
  s.matches.assign(static_cast<std::size_t>(max_n), 0);
  s.totals.assign(static_cast<std::size_t>(max_n), 0);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    s.hyp_len += static_cast<std::int64_t>(hyps[i].size());
    s.ref_len += static_cast<std::int64_t>(refs[i].size());
    for (int n = 1; n <= max_n; ++n) {
      const NgramCounts h = count_ngrams(hyps[i], n);
      const NgramCounts r = count_ngrams(refs[i], n);
      for (const auto& [gram, count] : h) {
        s.totals[n - 1] += count;
        if (auto it = r.find(gram); it != r.end()) s.matches[n - 1] += std::min(count, it->second);
      }
    }
  }
  return s;
}

double bleu(std::span<const Tokens> refs, std::span<const Tokens> hyps, int max_n) {
  const BleuStats s = bleu_stats(refs, hyps, max_n);
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const double p = s.precision(n);
    if (p == 0.0) return 0.0;
    log_sum += std::log(p);
  }
  return 100.0 * s.brevity_penalty() * std::exp(log_sum / max_n);
}

double sentence_bleu(const Tokens& ref, const Tokens& hyp, int max_n) {
  const Tokens refs[] = {ref};
  const Tokens hyps[] = {hyp};
  const BleuStats s = bleu_stats(refs, hyps, max_n);
  if (s.hyp_len == 0) return 0.0;
  constexpr double kEpsilon = 1e-9;
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto i = static_cast<std::size_t>(n - 1);
    const double num = s.matches[i] == 0 ? kEpsilon : static_cast<double>(s.matches[i]);
    const double den = s.totals[i] == 0 ? 1.0 : static_cast<double>(s.totals[i]);
    log_sum += std::log(num / den);
  }
  return 100.0 * s.brevity_penalty() * std::exp(log_sum / max_n);
}

MetricReport evaluate_corpus(std::span<const TextPair> pairs, Task task, CerUnit unit) {
  if (pairs.empty()) throw Error(ErrorKind::EmptyCorpus, "no (reference, hypothesis) pairs");
  std::vector<std::u32string> ref_units(pairs.size()), hyp_units(pairs.size());
  std::vector<Tokens> ref_tokens(pairs.size()), hyp_tokens(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    auto [r, h] = cer_units(pairs[i].ref, pairs[i].hyp, unit);
    ref_units[i] = std::move(r);
    hyp_units[i] = std::move(h);
    ref_tokens[i] = text::tokenize(pairs[i].ref);
    hyp_tokens[i] = text::tokenize(pairs[i].hyp);
  }

  MetricReport report;
  report.pair_count = static_cast<std::int64_t>(pairs.size());
  report.char_ops = kernels::corpus_edit_ops(ref_units, hyp_units);
  report.word_ops = kernels::corpus_edit_ops(ref_tokens, hyp_tokens);
  report.total_ref_chars = report.char_ops.ref_len;
  report.total_ref_words = report.word_ops.ref_len;
  report.cer_percent = percent(report.char_ops, "CER");
  report.wer_percent = percent(report.word_ops, "WER");
  if (task == Task::Mt) report.bleu_percent = bleu(ref_tokens, hyp_tokens);
  return report;
}

nlohmann::json to_json(const MetricReport& report) {
  nlohmann::json j;
  j["cer_percent"] = report.cer_percent;
  j["wer_percent"] = report.wer_percent;
  if (report.bleu_percent) j["bleu_percent"] = *report.bleu_percent;
  j["pair_count"] = report.pair_count;
  j["total_ref_chars"] = report.total_ref_chars;
  j["total_ref_words"] = report.total_ref_words;
  auto ops = [](const EditOps& o) {
    return nlohmann::json{{"substitutions", o.substitutions}, {"deletions", o.deletions}, {"insertions", o.insertions}};
  };
  j["char_ops"] = ops(report.char_ops);
  j["word_ops"] = ops(report.word_ops);
  return j;
}

}  // namespace speechstd
