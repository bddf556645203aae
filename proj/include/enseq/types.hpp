#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace enseq {

/// Guard violations and malformed/missing data (CLI exit code 2).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem failures; message carries the offending path.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Token = std::int32_t;

/// Target vocabulary. EOS is an ordinary vocabulary member with id 0;
/// `source_size_v` sizes the input-side vocabulary.
struct Vocab {
  int size_k = 2;
  Token eos_id = 0;
  int source_size_v = 2;

  void validate() const;
};

/// Token sequence. A terminated sequence ends with EOS, contains EOS exactly
/// once, and its length counts all tokens including EOS.
struct TokenSeq {
  std::vector<Token> tokens;
  bool terminated = false;

  std::size_t length() const { return tokens.size(); }
};

TokenSeq terminated_seq(std::vector<Token> tokens);

/// Throws std::invalid_argument unless `y` is a well-formed terminated sequence.
void require_terminated(const TokenSeq& y);

}  // namespace enseq
