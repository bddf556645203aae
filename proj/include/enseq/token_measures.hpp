#pragma once

#include <optional>
#include <span>
#include <vector>

#include "enseq/posterior.hpp"

namespace enseq::measures {

/**
 * One conditional step: the M member distributions over the K target tokens,
 * the combined posteriors, and optionally the realized token. Probabilities
 * and their natural logs are kept side by side so measures never round-trip
 * through exp/log.
 */
struct TokenStep {
  std::vector<std::vector<double>> member_dists;      // M x K probabilities
  std::vector<double> posterior_pe;                   // K
  std::optional<std::vector<double>> posterior_ep;    // K
  std::optional<Token> realized_token;

  std::vector<std::vector<double>> member_log_dists;  // M x K
  std::vector<double> log_posterior_pe;
  std::optional<std::vector<double>> log_posterior_ep;

  int members() const { return static_cast<int>(member_dists.size()); }
  int k() const { return static_cast<int>(posterior_pe.size()); }
};

/// Build a step from an ensemble at (x, context). The EP posterior needs the
/// members' prefix log-probabilities; the context-only overload computes them.
TokenStep make_token_step(const post::Ensemble& ens, const TokenSeq& x,
                          std::span<const Token> context,
                          std::optional<Token> realized = std::nullopt);
TokenStep make_token_step_from(std::vector<std::vector<double>> member_log_rows,
                               std::span<const double> member_prefix_logp,
                               std::optional<Token> realized = std::nullopt);

/// Build a step from raw member probability vectors (posterior_pe = mean;
/// no EP posterior). Intended for tests and detached computations.
TokenStep make_token_step_from_probs(std::vector<std::vector<double>> member_dists,
                                     std::optional<Token> realized = std::nullopt);

/// Selects which posterior a measure is evaluated against: PrEx reads
/// posterior_pe, ExPr reads posterior_ep.
using post::Combination;

/// Entropy of the selected posterior, in nats; within [0, ln K].
double tok_entropy(const TokenStep& step, Combination which = Combination::PrEx);

/// Token mutual information: posterior entropy minus mean member entropy.
double tok_mi(const TokenStep& step, Combination which = Combination::PrEx);

/// Expected pairwise KL between members, 1/M^2-normalized with self-pairs.
/// Saturates at kSaturated (flag set) when one member assigns zero mass
/// where another does not.
double tok_epkl(const TokenStep& step, bool* saturated = nullptr);

/// Reverse mutual information: mean KL from the selected posterior to each
/// member. Equals tok_epkl - tok_mi under the PrEx posterior.
double tok_rmi(const TokenStep& step, Combination which = Combination::PrEx,
               bool* saturated = nullptr);

/// Negative log posterior probability of the realized token.
double tok_score(const TokenStep& step, Combination which = Combination::PrEx,
                 bool* saturated = nullptr);

/// Mean negative pointwise mutual information at the realized token.
double tok_npmi(const TokenStep& step, Combination which = Combination::PrEx,
                bool* saturated = nullptr);

}  // namespace enseq::measures
