#pragma once

#include <span>
#include <string>
#include <vector>

#include "enseq/toy.hpp"
#include "enseq/types.hpp"

namespace enseq::post {

/// Ensemble combination: PrEx multiplies per-step member means
/// (token-level model averaging), ExPr averages whole-sequence
/// probabilities (sequence-level model averaging).
enum class Combination { PrEx, ExPr };

std::string to_string(Combination c);
Combination combination_from_string(const std::string& s);

struct Ensemble {
  std::vector<toy::ConditionalModel> members;
  Combination combination = Combination::PrEx;

  int size() const { return static_cast<int>(members.size()); }
  const Vocab& vocab() const { return members.front().spec.vocab; }
  int max_len() const { return members.front().spec.max_len; }

  void validate() const;
};

Ensemble make_ensemble(const toy::ToyModelSpec& spec, int m_members, Combination combination,
                       int first_member_index = 0);

/// Token log-probabilities along a sequence: rows = positions, cols = members.
struct LogProbMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  LogProbMatrix() = default;
  LogProbMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  /// Per-member sequence log-probabilities.
  std::vector<double> column_sums() const;
};

/// Log conditional rows of every member at a context: M rows of K entries.
std::vector<std::vector<double>> member_log_dists(const Ensemble& ens, const TokenSeq& x,
                                                  std::span<const Token> context);

/// Product-of-expectations token posterior: the per-entry mean over members.
std::vector<double> token_posterior_pe(const Ensemble& ens, const TokenSeq& x,
                                       std::span<const Token> context);
std::vector<double> log_token_posterior_pe(const Ensemble& ens, const TokenSeq& x,
                                           std::span<const Token> context);

/// Expectation-of-products token posterior: ratio of mean joint to mean
/// prefix probability, evaluated with log-sum-exp. Throws DataError
/// ("impossible context") when every member assigns the prefix zero mass.
std::vector<double> token_posterior_ep(const Ensemble& ens, const TokenSeq& x,
                                       std::span<const Token> context);
std::vector<double> log_token_posterior_ep(const Ensemble& ens, const TokenSeq& x,
                                           std::span<const Token> context);

/// EP posterior from precomputed member log rows and member prefix
/// log-probabilities (used by incremental decoders and the oracle).
std::vector<double> log_token_posterior_ep_from(std::span<const std::vector<double>> member_rows,
                                                std::span<const double> member_prefix_logp);
std::vector<double> log_token_posterior_pe_from(std::span<const std::vector<double>> member_rows);

LogProbMatrix per_model_token_logprobs(const Ensemble& ens, const TokenSeq& x, const TokenSeq& y);

/// Combined sequence log-probability from a per-model matrix.
double log_posterior_from_matrix(const LogProbMatrix& m, Combination combination);

double seq_log_posterior(const Ensemble& ens, const TokenSeq& x, const TokenSeq& y,
                         Combination combination);
inline double seq_log_posterior(const Ensemble& ens, const TokenSeq& x, const TokenSeq& y) {
  return seq_log_posterior(ens, x, y, ens.combination);
}

}  // namespace enseq::post
