#include "enseq/types.hpp"

#include <algorithm>

namespace enseq {

void Vocab::validate() const {
  if (size_k < 2) throw std::invalid_argument("Vocab: size_k must be >= 2");
  if (eos_id != 0) throw std::invalid_argument("Vocab: eos_id is fixed to 0");
  if (source_size_v < 1) throw std::invalid_argument("Vocab: source_size_v must be positive");
}

TokenSeq terminated_seq(std::vector<Token> tokens) {
  TokenSeq y{std::move(tokens), true};
  require_terminated(y);
  return y;
}

void require_terminated(const TokenSeq& y) {
  if (!y.terminated) throw std::invalid_argument("sequence is not terminated");
  if (y.tokens.empty() || y.tokens.back() != 0)
    throw std::invalid_argument("terminated sequence must end with EOS");
  if (std::count(y.tokens.begin(), y.tokens.end(), Token{0}) != 1)
    throw std::invalid_argument("terminated sequence must contain EOS exactly once");
}

}  // namespace enseq
