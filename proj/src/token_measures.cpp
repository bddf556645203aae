#include "enseq/token_measures.hpp"

#include <cmath>

#include "enseq/numeric.hpp"

namespace enseq::measures {

namespace {

// Accumulation noise on genuinely zero measures; anything inside is clamped
// to exact zero so degenerate-ensemble checks read 0, while real (possibly
// negative under the EP posterior) values pass through.
constexpr double kZeroClamp = 1e-9;

double clamp_tiny(double v) { return (v < 0.0 && v > -kZeroClamp) ? 0.0 : v; }

void set_flag(bool* saturated) {
  if (saturated) *saturated = true;
}

const std::vector<double>& posterior(const TokenStep& step, Combination which) {
  if (which == Combination::PrEx) return step.posterior_pe;
  if (!step.posterior_ep) throw std::invalid_argument("TokenStep has no EP posterior");
  return *step.posterior_ep;
}

const std::vector<double>& log_posterior(const TokenStep& step, Combination which) {
  if (which == Combination::PrEx) return step.log_posterior_pe;
  if (!step.log_posterior_ep) throw std::invalid_argument("TokenStep has no EP posterior");
  return *step.log_posterior_ep;
}

void require_valid(const TokenStep& step) {
  if (step.member_dists.empty()) throw std::invalid_argument("TokenStep: no member distributions");
  if (step.posterior_pe.empty()) throw std::invalid_argument("TokenStep: missing posterior");
}

Token require_realized(const TokenStep& step) {
  if (!step.realized_token) throw std::invalid_argument("TokenStep: realized_token not set");
  return *step.realized_token;
}

}  // namespace

TokenStep make_token_step_from(std::vector<std::vector<double>> member_log_rows,
                               std::span<const double> member_prefix_logp,
                               std::optional<Token> realized) {
  TokenStep step;
  step.member_log_dists = std::move(member_log_rows);
  step.member_dists.reserve(step.member_log_dists.size());
  for (const auto& row : step.member_log_dists) step.member_dists.push_back(exp_all(row));

  const std::size_t K = step.member_dists.front().size();
  step.posterior_pe.assign(K, 0.0);
  for (const auto& p : step.member_dists)
    for (std::size_t k = 0; k < K; ++k) step.posterior_pe[k] += p[k];
  for (double& v : step.posterior_pe) v /= static_cast<double>(step.member_dists.size());
  step.log_posterior_pe = post::log_token_posterior_pe_from(step.member_log_dists);

  step.log_posterior_ep =
      post::log_token_posterior_ep_from(step.member_log_dists, member_prefix_logp);
  step.posterior_ep = exp_all(*step.log_posterior_ep);
  step.realized_token = realized;
  return step;
}

TokenStep make_token_step(const post::Ensemble& ens, const TokenSeq& x,
                          std::span<const Token> context, std::optional<Token> realized) {
  ens.validate();
  const std::size_t M = ens.members.size();
  std::vector<double> prefix(M, 0.0);
  for (std::size_t l = 0; l < context.size(); ++l) {
    for (std::size_t m = 0; m < M; ++m) {
      const auto row = toy::log_cond_dist(ens.members[m], x, context.subspan(0, l));
      prefix[m] += row[static_cast<std::size_t>(context[l])];
    }
  }
  return make_token_step_from(post::member_log_dists(ens, x, context), prefix, realized);
}

TokenStep make_token_step_from_probs(std::vector<std::vector<double>> member_dists,
                                     std::optional<Token> realized) {
  TokenStep step;
  step.member_dists = std::move(member_dists);
  if (step.member_dists.empty()) throw std::invalid_argument("no member distributions");
  const std::size_t K = step.member_dists.front().size();

  step.member_log_dists.reserve(step.member_dists.size());
  for (const auto& p : step.member_dists) {
    std::vector<double> logs(K);
    for (std::size_t k = 0; k < K; ++k) logs[k] = p[k] > 0.0 ? std::log(p[k]) : kNegInf;
    step.member_log_dists.push_back(std::move(logs));
  }

  step.posterior_pe.assign(K, 0.0);
  for (const auto& p : step.member_dists)
    for (std::size_t k = 0; k < K; ++k) step.posterior_pe[k] += p[k];
  for (double& v : step.posterior_pe) v /= static_cast<double>(step.member_dists.size());

  step.log_posterior_pe.assign(K, kNegInf);
  for (std::size_t k = 0; k < K; ++k)
    if (step.posterior_pe[k] > 0.0) step.log_posterior_pe[k] = std::log(step.posterior_pe[k]);

  step.realized_token = realized;
  return step;
}

double tok_entropy(const TokenStep& step, Combination which) {
  require_valid(step);
  return entropy_nats(posterior(step, which), log_posterior(step, which));
}

double tok_mi(const TokenStep& step, Combination which) {
  require_valid(step);
  double mean_member_h = 0.0;
  for (std::size_t m = 0; m < step.member_dists.size(); ++m)
    mean_member_h += entropy_nats(step.member_dists[m], step.member_log_dists[m]);
  mean_member_h /= static_cast<double>(step.member_dists.size());
  return clamp_tiny(tok_entropy(step, which) - mean_member_h);
}

double tok_epkl(const TokenStep& step, bool* saturated) {
  require_valid(step);
  const std::size_t M = step.member_dists.size();
  const std::size_t K = step.member_dists.front().size();
  double total = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    for (std::size_t n = 0; n < M; ++n) {
      for (std::size_t k = 0; k < K; ++k) {
        const double p = step.member_dists[m][k];
        if (p <= 0.0) continue;
        const double lq = step.member_log_dists[n][k];
        if (lq == kNegInf) {
          set_flag(saturated);
          return kSaturated;
        }
        total += p * (step.member_log_dists[m][k] - lq);
      }
    }
  }
  return clamp_tiny(total / (static_cast<double>(M) * static_cast<double>(M)));
}

double tok_rmi(const TokenStep& step, Combination which, bool* saturated) {
  require_valid(step);
  const auto& p = posterior(step, which);
  const auto& lp = log_posterior(step, which);
  const std::size_t M = step.member_dists.size();
  double cross = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] <= 0.0) continue;
    double mean_neg_log = 0.0;
    for (std::size_t m = 0; m < M; ++m) {
      const double lm = step.member_log_dists[m][k];
      if (lm == kNegInf) {
        set_flag(saturated);
        return kSaturated;
      }
      mean_neg_log -= lm;
    }
    cross += p[k] * (mean_neg_log / static_cast<double>(M));
  }
  return clamp_tiny(cross - entropy_nats(p, lp));
}

double tok_score(const TokenStep& step, Combination which, bool* saturated) {
  require_valid(step);
  const auto t = static_cast<std::size_t>(require_realized(step));
  const double lp = log_posterior(step, which)[t];
  if (lp == kNegInf) {
    set_flag(saturated);
    return kSaturated;
  }
  return std::max(0.0, -lp);
}

double tok_npmi(const TokenStep& step, Combination which, bool* saturated) {
  require_valid(step);
  const auto t = static_cast<std::size_t>(require_realized(step));
  const double lp = log_posterior(step, which)[t];
  double total = 0.0;
  for (const auto& row : step.member_log_dists) {
    const double lm = row[t];
    if (lm == kNegInf || lp == kNegInf) {
      set_flag(saturated);
      return kSaturated;
    }
    total += lp - lm;
  }
  return total / static_cast<double>(step.member_log_dists.size());
}

}  // namespace enseq::measures
