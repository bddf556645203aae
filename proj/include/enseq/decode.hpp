#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "enseq/posterior.hpp"

namespace enseq::decode {

struct Hypothesis {
  TokenSeq y;
  double log_post = 0.0;       // under the ensemble's decoding combination
  post::LogProbMatrix per_model;  // (|y|, M)
  int rank = 0;
};

struct Beam {
  std::vector<Hypothesis> hypotheses;  // sorted by descending ranking score
  int width_b = 0;
};

/**
 * Standard beam search over the ensemble's token posterior. Each step keeps
 * the top width_b unfinished extensions by cumulative log-probability (ties:
 * smaller token id, then lexicographic prefix); finished hypotheses go to a
 * side pool and the search stops once the pool holds width_b of them or the
 * forced-EOS horizon is reached. Final ranking uses log_post / L when
 * rank_length_norm is set, raw log_post otherwise.
 */
Beam beam_search(const post::Ensemble& ens, const TokenSeq& x, int width_b,
                 bool rank_length_norm = true);

/// First min(b, size) hypotheses of an already-ranked beam.
Beam truncated(const Beam& beam, int b);

/// S i.i.d. ancestral draws from the ensemble's token posterior. Each draw
/// has its own counter-based stream keyed by (seed, draw index), so results
/// do not depend on evaluation order.
std::vector<Hypothesis> ancestral_sample(const post::Ensemble& ens, const TokenSeq& x, int s,
                                         std::uint64_t seed);

/// Per draw: pick a member uniformly, then sample a sequence from that member
/// alone. Returns (member_index, hypothesis) pairs.
std::vector<std::pair<int, Hypothesis>> sample_per_member(const post::Ensemble& ens,
                                                          const TokenSeq& x, int s,
                                                          std::uint64_t seed);

struct SupportEntry {
  TokenSeq y;
  double log_post_prex = 0.0;
  double log_post_expr = 0.0;
  post::LogProbMatrix per_model;
};

/// Every terminated sequence of length <= max_len, in lexicographic token
/// order. Guarded: throws DataError when K^max_len exceeds 1e7.
std::vector<SupportEntry> enumerate_support(const post::Ensemble& ens, const TokenSeq& x);

/// Number of terminated sequences of length <= max_len for vocabulary size K.
std::uint64_t support_size(int size_k, int max_len);

void check_support_guard(int size_k, int max_len);

}  // namespace enseq::decode
