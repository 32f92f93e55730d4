#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace speechstd {

struct EditOps {
  std::int64_t substitutions = 0;
  std::int64_t deletions = 0;
  std::int64_t insertions = 0;
  std::int64_t ref_len = 0;

  std::int64_t total() const { return substitutions + deletions + insertions; }
  EditOps& operator+=(const EditOps& o) {
    substitutions += o.substitutions;
    deletions += o.deletions;
    insertions += o.insertions;
    ref_len += o.ref_len;
    return *this;
  }
  friend bool operator==(const EditOps&, const EditOps&) = default;
};

// Minimal unit-cost Levenshtein alignment of `ref` into `hyp`. Backtrace
// ties prefer the diagonal (match/substitution), then deletion, then
// insertion.
template <class T>
EditOps edit_ops(std::span<const T> ref, std::span<const T> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t w = m + 1;
  std::vector<std::uint32_t> dp((n + 1) * w);
  for (std::size_t j = 0; j <= m; ++j) dp[j] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    std::uint32_t* row = dp.data() + i * w;
    const std::uint32_t* prev = row - w;
    row[0] = static_cast<std::uint32_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t diag = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0u : 1u);
      const std::uint32_t del = prev[j] + 1;
      const std::uint32_t ins = row[j - 1] + 1;
      row[j] = std::min(diag, std::min(del, ins));
    }
  }

  EditOps ops;
  ops.ref_len = static_cast<std::int64_t>(n);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::uint32_t here = dp[i * w + j];
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (here == dp[(i - 1) * w + (j - 1)] + (same ? 0u : 1u)) {
        if (!same) ++ops.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && here == dp[(i - 1) * w + j] + 1) {
      ++ops.deletions;
      --i;
    } else {
      ++ops.insertions;
      --j;
    }
  }
  return ops;
}

inline EditOps edit_ops(std::u32string_view ref, std::u32string_view hyp) {
  return edit_ops<char32_t>(std::span<const char32_t>(ref.data(), ref.size()),
                            std::span<const char32_t>(hyp.data(), hyp.size()));
}

inline EditOps edit_ops(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  return edit_ops<std::string>(std::span<const std::string>(ref), std::span<const std::string>(hyp));
}

enum class CerUnit { Scalar, Grapheme };

// CER units for a (ref, hyp) pair after NFC and whitespace collapsing. In
// grapheme mode each distinct extended grapheme cluster is mapped to a
// private id shared by both strings.
std::pair<std::u32string, std::u32string> cer_units(std::string_view ref, std::string_view hyp,
                                                    CerUnit unit = CerUnit::Scalar);

EditOps cer_ops(std::string_view ref, std::string_view hyp, CerUnit unit = CerUnit::Scalar);
EditOps wer_ops(std::string_view ref, std::string_view hyp);

// Percentages; unbounded above. Throw DivisionByEmptyReference.
double cer(std::string_view ref, std::string_view hyp, CerUnit unit = CerUnit::Scalar);
double wer(std::string_view ref, std::string_view hyp);

struct BleuStats {
  std::vector<std::int64_t> matches;  // clipped, per order
  std::vector<std::int64_t> totals;   // hypothesis n-grams, per order
  std::int64_t hyp_len = 0;
  std::int64_t ref_len = 0;

  double precision(int order) const;
  double brevity_penalty() const;
};

using Tokens = std::vector<std::string>;

BleuStats bleu_stats(std::span<const Tokens> refs, std::span<const Tokens> hyps, int max_n = 4);

// Corpus BLEU in percent, no smoothing. Throws LengthMismatch, EmptyCorpus.
double bleu(std::span<const Tokens> refs, std::span<const Tokens> hyps, int max_n = 4);

// Diagnostic single-sentence BLEU; zero match counts replaced by 1e-9.
double sentence_bleu(const Tokens& ref, const Tokens& hyp, int max_n = 4);

enum class Task { Asr, Mt };

struct TextPair {
  std::string ref;
  std::string hyp;
};

struct MetricReport {
  double cer_percent = 0.0;
  double wer_percent = 0.0;
  std::optional<double> bleu_percent;
  std::int64_t pair_count = 0;
  std::int64_t total_ref_chars = 0;
  std::int64_t total_ref_words = 0;
  EditOps char_ops;
  EditOps word_ops;
};

// Micro-averaged CER/WER over all pairs; BLEU for the MT task only.
// Throws EmptyCorpus, DivisionByEmptyReference.
MetricReport evaluate_corpus(std::span<const TextPair> pairs, Task task,
                             CerUnit unit = CerUnit::Scalar);

nlohmann::json to_json(const MetricReport& report);

}  // namespace speechstd
