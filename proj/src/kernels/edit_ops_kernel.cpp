#include "speechstd/error.hpp"
#include "speechstd/kernels.hpp"

namespace speechstd::kernels {

namespace {

// Integer totals make the reduction order-independent.
template <class Seq>
EditOps reduce(std::span<const Seq> refs, std::span<const Seq> hyps) {
  if (refs.size() != hyps.size()) throw Error(ErrorKind::LengthMismatch, "reference/hypothesis count differs");
  const auto n = static_cast<std::int64_t>(refs.size());
  std::int64_t s = 0, d = 0, ins = 0, len = 0;
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : s, d, ins, len)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& r = refs[static_cast<std::size_t>(i)];
    const auto& h = hyps[static_cast<std::size_t>(i)];
    using T = typename Seq::value_type;
    const EditOps ops = edit_ops<T>(std::span<const T>(r.data(), r.size()), std::span<const T>(h.data(), h.size()));
    s += ops.substitutions;
    d += ops.deletions;
    ins += ops.insertions;
    len += ops.ref_len;
  }
  return EditOps{s, d, ins, len};
}

}  // namespace

EditOps corpus_edit_ops(std::span<const std::u32string> refs, std::span<const std::u32string> hyps) {
  return reduce(refs, hyps);
}

EditOps corpus_edit_ops(std::span<const std::vector<std::string>> refs,
                        std::span<const std::vector<std::string>> hyps) {
  return reduce(refs, hyps);
}

}  // namespace speechstd::kernels
