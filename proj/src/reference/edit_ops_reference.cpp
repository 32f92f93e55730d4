#include "speechstd/error.hpp"
#include "speechstd/kernels.hpp"

namespace speechstd::reference {

EditOps corpus_edit_ops(std::span<const std::u32string> refs, std::span<const std::u32string> hyps) {
  if (refs.size() != hyps.size()) throw Error(ErrorKind::LengthMismatch, "reference/hypothesis count differs");
  EditOps total;
  for (std::size_t i = 0; i < refs.size(); ++i) total += edit_ops(refs[i], hyps[i]);
  return total;
}

}  // namespace speechstd::reference
