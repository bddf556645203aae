#include "enseq/posterior.hpp"

#include <cmath>

#include "enseq/numeric.hpp"

namespace enseq::post {

std::string to_string(Combination c) { return c == Combination::PrEx ? "PrEx" : "ExPr"; }

Combination combination_from_string(const std::string& s) {
  if (s == "PrEx") return Combination::PrEx;
  if (s == "ExPr") return Combination::ExPr;
  throw DataError("unknown combination '" + s + "' (expected PrEx or ExPr)");
}

void Ensemble::validate() const {
  if (members.empty()) throw std::invalid_argument("Ensemble: needs at least one member");
  const auto& first = members.front().spec;
  first.validate();
  for (const auto& m : members) {
    if (m.spec.vocab.size_k != first.vocab.size_k ||
        m.spec.vocab.source_size_v != first.vocab.source_size_v ||
        m.spec.max_len != first.max_len)
      throw std::invalid_argument("Ensemble: members must share vocab and max_len");
  }
}

Ensemble make_ensemble(const toy::ToyModelSpec& spec, int m_members, Combination combination,
                       int first_member_index) {
  if (m_members < 1) throw std::invalid_argument("make_ensemble: m_members must be >= 1");
  Ensemble ens;
  ens.combination = combination;
  ens.members.reserve(static_cast<std::size_t>(m_members));
  for (int m = 0; m < m_members; ++m)
    ens.members.push_back(toy::build_member(spec, first_member_index + m));
  ens.validate();
  return ens;
}

std::vector<double> LogProbMatrix::column_sums() const {
  std::vector<double> sums(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) sums[c] += at(r, c);
  return sums;
}

std::vector<std::vector<double>> member_log_dists(const Ensemble& ens, const TokenSeq& x,
                                                  std::span<const Token> context) {
  ens.validate();
  std::vector<std::vector<double>> rows;
  rows.reserve(ens.members.size());
  for (const auto& m : ens.members) rows.push_back(toy::log_cond_dist(m, x, context));
  return rows;
}

std::vector<double> log_token_posterior_pe_from(std::span<const std::vector<double>> member_rows) {
  const std::size_t K = member_rows.front().size();
  const std::size_t M = member_rows.size();
  std::vector<double> out(K);
  std::vector<double> col(M);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t m = 0; m < M; ++m) col[m] = member_rows[m][k];
    out[k] = log_mean_exp(col);
  }
  return out;
}

std::vector<double> log_token_posterior_ep_from(std::span<const std::vector<double>> member_rows,
                                                std::span<const double> member_prefix_logp) {
  const std::size_t K = member_rows.front().size();
  const std::size_t M = member_rows.size();
  const double prefix_lse = logsumexp(member_prefix_logp);
  if (prefix_lse == kNegInf) throw DataError("impossible context");
  std::vector<double> out(K);
  std::vector<double> joint(M);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t m = 0; m < M; ++m) joint[m] = member_prefix_logp[m] + member_rows[m][k];
    out[k] = logsumexp(joint) - prefix_lse;
  }
  return out;
}

std::vector<double> log_token_posterior_pe(const Ensemble& ens, const TokenSeq& x,
                                           std::span<const Token> context) {
  return log_token_posterior_pe_from(member_log_dists(ens, x, context));
}

std::vector<double> token_posterior_pe(const Ensemble& ens, const TokenSeq& x,
                                       std::span<const Token> context) {
  // Materialized in linear space so the result is the exact arithmetic mean.
  const auto rows = member_log_dists(ens, x, context);
  const std::size_t K = rows.front().size();
  std::vector<double> p(K, 0.0);
  for (const auto& row : rows)
    for (std::size_t k = 0; k < K; ++k) p[k] += std::exp(row[k]);
  for (double& v : p) v /= static_cast<double>(rows.size());
  return p;
}

std::vector<double> log_token_posterior_ep(const Ensemble& ens, const TokenSeq& x,
                                           std::span<const Token> context) {
  ens.validate();
  const std::size_t M = ens.members.size();
  std::vector<double> prefix(M, 0.0);
  for (std::size_t l = 0; l < context.size(); ++l) {
    for (std::size_t m = 0; m < M; ++m) {
      const auto row = toy::log_cond_dist(ens.members[m], x, context.subspan(0, l));
      prefix[m] += row[static_cast<std::size_t>(context[l])];
    }
  }
  return log_token_posterior_ep_from(member_log_dists(ens, x, context), prefix);
}

std::vector<double> token_posterior_ep(const Ensemble& ens, const TokenSeq& x,
                                       std::span<const Token> context) {
  return exp_all(log_token_posterior_ep(ens, x, context));
}

LogProbMatrix per_model_token_logprobs(const Ensemble& ens, const TokenSeq& x, const TokenSeq& y) {
  ens.validate();
  require_terminated(y);
  const std::size_t L = y.tokens.size();
  const std::size_t M = ens.members.size();
  LogProbMatrix mat(L, M);
  for (std::size_t l = 0; l < L; ++l) {
    const auto rows = member_log_dists(ens, x, std::span<const Token>(y.tokens.data(), l));
    for (std::size_t m = 0; m < M; ++m)
      mat.at(l, m) = rows[m][static_cast<std::size_t>(y.tokens[l])];
  }
  return mat;
}

double log_posterior_from_matrix(const LogProbMatrix& m, Combination combination) {
  if (combination == Combination::ExPr) return log_mean_exp(m.column_sums());
  double total = 0.0;
  std::vector<double> row(m.cols);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) row[c] = m.at(r, c);
    total += log_mean_exp(row);
  }
  return total;
}

double seq_log_posterior(const Ensemble& ens, const TokenSeq& x, const TokenSeq& y,
                         Combination combination) {
  return log_posterior_from_matrix(per_model_token_logprobs(ens, x, y), combination);
}

}  // namespace enseq::post
