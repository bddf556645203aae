#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "enseq/types.hpp"

namespace enseq::toy {

/**
 * Parameters of a synthetic autoregressive model family.
 *
 * Conditional distributions are softmaxes over seeded pseudo-random logits:
 * a shared component scaled by `sharpness_tau` (controls data uncertainty)
 * plus additive per-member noise scaled by `disagreement_sigma_id` or
 * `disagreement_sigma_ood` depending on the input's domain (controls
 * knowledge uncertainty). At context length `max_len - 1` the distribution
 * is a one-hot on EOS, so the support is finite and exactly enumerable.
 */
struct ToyModelSpec {
  Vocab vocab;
  int context_order_c = 1;  // Markov order over the target history
  int max_len = 4;          // forced-EOS horizon; lengths count EOS
  double sharpness_tau = 1.0;
  double disagreement_sigma_id = 0.0;
  double disagreement_sigma_ood = 0.0;
  std::uint64_t base_seed = 0;

  void validate() const;
};

/// One ensemble member; a pure function of (spec, member_index).
struct ConditionalModel {
  ToyModelSpec spec;
  int member_index = 0;
};

enum class Domain { InDomain, OutOfDomain };

struct DatasetSpec {
  int n_inputs = 0;
  int input_len_min = 1;
  int input_len_max = 1;
  Domain domain_label = Domain::InDomain;
  std::uint64_t seed = 0;

  void validate() const;
};

ConditionalModel build_member(const ToyModelSpec& spec, int member_index);

/// First source token of the reserved out-of-domain sub-range (upper half of
/// the source vocabulary). In-domain inputs draw tokens below it, OOD inputs
/// from it upward.
Token ood_source_start(const Vocab& vocab);

/// An input is out-of-domain when any source token lies in the reserved range.
bool is_ood(const Vocab& vocab, const TokenSeq& x);

/// Natural-log conditional distribution over the K target tokens given the
/// input and a target-side context (a prefix of the sequence being generated).
std::vector<double> log_cond_dist(const ConditionalModel& model, const TokenSeq& x,
                                  std::span<const Token> context);

std::vector<double> cond_dist(const ConditionalModel& model, const TokenSeq& x,
                              std::span<const Token> context);

/// Sum of per-token log conditionals along a terminated sequence.
double seq_log_prob(const ConditionalModel& model, const TokenSeq& x, const TokenSeq& y);

std::vector<TokenSeq> generate_dataset(const DatasetSpec& dspec, const Vocab& vocab);

}  // namespace enseq::toy
