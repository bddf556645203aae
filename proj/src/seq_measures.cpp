#include "enseq/seq_measures.hpp"

#include <cmath>
#include <functional>

#include "enseq/numeric.hpp"
#include "enseq/rng.hpp"

namespace enseq::estimators {

namespace {

void require_nonempty(std::size_t n) {
  if (n == 0) throw std::invalid_argument("estimator: empty hypothesis set");
}

double norm_factor(const decode::Hypothesis& h, const EstimatorConfig& cfg) {
  return cfg.length_normalize ? 1.0 / static_cast<double>(h.y.tokens.size()) : 1.0;
}

double saturate(double v) { return std::isfinite(v) ? v : kSaturated; }

/// Weighted fold of a per-hypothesis statistic; saturates instead of
/// propagating infinities.
double fold(HypothesisList hyps, std::span<const double> weights,
            const std::function<double(const decode::Hypothesis&)>& f) {
  double total = 0.0;
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    const double v = f(hyps[i]);
    if (!std::isfinite(v) || v >= kSaturated) return kSaturated;
    total += weights[i] * v;
  }
  return saturate(total);
}

std::vector<double> uniform_weights(std::size_t n) {
  return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

// Token steps along a hypothesis, with member prefix log-probs accumulated
// from its per-model matrix.
std::vector<measures::TokenStep> steps_along(const post::Ensemble& ens, const TokenSeq& x,
                                             const decode::Hypothesis& h) {
  const std::size_t L = h.y.tokens.size();
  const std::size_t M = h.per_model.cols;
  std::vector<measures::TokenStep> steps;
  steps.reserve(L);
  std::vector<double> prefix(M, 0.0);
  for (std::size_t l = 0; l < L; ++l) {
    const auto ctx = std::span<const Token>(h.y.tokens.data(), l);
    steps.push_back(measures::make_token_step_from(post::member_log_dists(ens, x, ctx), prefix,
                                                   h.y.tokens[l]));
    for (std::size_t m = 0; m < M; ++m) prefix[m] += h.per_model.at(l, m);
  }
  return steps;
}

double chain_sum(const post::Ensemble& ens, const TokenSeq& x, const decode::Hypothesis& h,
                 const EstimatorConfig& cfg,
                 const std::function<double(const measures::TokenStep&)>& tok) {
  double total = 0.0;
  for (const auto& step : steps_along(ens, x, h)) {
    const double v = tok(step);
    if (v >= kSaturated) return kSaturated;
    total += v;
  }
  return norm_factor(h, cfg) * total;
}

double joint_neg_logpost(const decode::Hypothesis& h, const EstimatorConfig& cfg) {
  return -norm_factor(h, cfg) * post::log_posterior_from_matrix(h.per_model, cfg.posterior_choice);
}

double joint_rmi(const decode::Hypothesis& h, const EstimatorConfig& cfg) {
  const double log_post = post::log_posterior_from_matrix(h.per_model, cfg.posterior_choice);
  const auto member_logp = h.per_model.column_sums();
  double total = 0.0;
  for (double lm : member_logp) total += log_post - lm;
  return norm_factor(h, cfg) * total / static_cast<double>(member_logp.size());
}

using PerHyp = std::function<double(const decode::Hypothesis&)>;

double run(const post::Ensemble& ens, HypothesisList hyps, std::span<const double> weights,
           const PerHyp& f) {
  ens.validate();
  require_nonempty(hyps.size());
  return fold(hyps, weights, f);
}

Estimate run_stats(const post::Ensemble& ens, HypothesisList hyps, const PerHyp& f) {
  ens.validate();
  require_nonempty(hyps.size());
  const auto n = static_cast<double>(hyps.size());
  double mean = 0.0;
  std::vector<double> values;
  values.reserve(hyps.size());
  for (const auto& h : hyps) {
    const double v = f(h);
    values.push_back(v);
    mean += v;
  }
  mean /= n;
  if (!std::isfinite(mean)) return {kSaturated, 0.0};
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var = hyps.size() > 1 ? var / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

PerHyp entropy_joint_fn(const EstimatorConfig& cfg) {
  return [cfg](const decode::Hypothesis& h) { return joint_neg_logpost(h, cfg); };
}

PerHyp rmi_joint_fn(const EstimatorConfig& cfg) {
  return [cfg](const decode::Hypothesis& h) { return joint_rmi(h, cfg); };
}

PerHyp chain_fn(const post::Ensemble& ens, const TokenSeq& x, const EstimatorConfig& cfg,
                std::function<double(const measures::TokenStep&)> tok) {
  return [&ens, &x, cfg, tok = std::move(tok)](const decode::Hypothesis& h) {
    return chain_sum(ens, x, h, cfg, tok);
  };
}

std::function<double(const measures::TokenStep&)> tok_entropy_fn(const EstimatorConfig& cfg) {
  return [cfg](const measures::TokenStep& s) { return measures::tok_entropy(s, cfg.posterior_choice); };
}
std::function<double(const measures::TokenStep&)> tok_mi_fn(const EstimatorConfig& cfg) {
  return [cfg](const measures::TokenStep& s) { return measures::tok_mi(s, cfg.posterior_choice); };
}
std::function<double(const measures::TokenStep&)> tok_epkl_fn() {
  return [](const measures::TokenStep& s) { return measures::tok_epkl(s); };
}
std::function<double(const measures::TokenStep&)> tok_rmi_fn(const EstimatorConfig& cfg) {
  return [cfg](const measures::TokenStep& s) { return measures::tok_rmi(s, cfg.posterior_choice); };
}

struct MemberDraws {
  std::vector<decode::Hypothesis> hyps;
  std::vector<int> members;
  std::vector<int> second_members;
};

constexpr std::uint64_t kTagSecondMember = 0x64;

MemberDraws member_draws(const post::Ensemble& ens, const TokenSeq& x, int s,
                         std::uint64_t seed) {
  MemberDraws d;
  auto pairs = decode::sample_per_member(ens, x, s, seed);
  d.hyps.reserve(pairs.size());
  d.members.reserve(pairs.size());
  d.second_members.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    d.members.push_back(pairs[i].first);
    d.hyps.push_back(std::move(pairs[i].second));
    d.second_members.push_back(static_cast<int>(rng::uniform_index(
        rng::Key().with(seed).with(i).with(kTagSecondMember), ens.members.size())));
  }
  return d;
}

std::vector<double> mi_exact_values(const MemberDraws& d, const EstimatorConfig& cfg) {
  std::vector<double> values;
  values.reserve(d.hyps.size());
  for (std::size_t i = 0; i < d.hyps.size(); ++i) {
    const auto& h = d.hyps[i];
    const auto member_logp = h.per_model.column_sums();
    const double log_post = post::log_posterior_from_matrix(h.per_model, cfg.posterior_choice);
    values.push_back(norm_factor(h, cfg) *
                     (member_logp[static_cast<std::size_t>(d.members[i])] - log_post));
  }
  return values;
}

std::vector<double> epkl_exact_values(const MemberDraws& d, const EstimatorConfig& cfg) {
  std::vector<double> values;
  values.reserve(d.hyps.size());
  for (std::size_t i = 0; i < d.hyps.size(); ++i) {
    const auto& h = d.hyps[i];
    const auto member_logp = h.per_model.column_sums();
    const double first = member_logp[static_cast<std::size_t>(d.members[i])];
    const double second = member_logp[static_cast<std::size_t>(d.second_members[i])];
    values.push_back(norm_factor(h, cfg) * (first - second));
  }
  return values;
}

Estimate stats_of(std::span<const double> values) {
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  if (!std::isfinite(mean)) return {kSaturated, 0.0};
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var = values.size() > 1 ? var / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

}  // namespace

void EstimatorConfig::validate() const {
  if (!(temperature_t > 0.0))
    throw std::invalid_argument("EstimatorConfig: temperature_t must be > 0");
}

std::vector<double> importance_weights(const decode::Beam& beam, double t,
                                       post::Combination which) {
  if (!(t > 0.0)) throw std::invalid_argument("importance_weights: t must be > 0");
  require_nonempty(beam.hypotheses.size());
  std::vector<double> scaled;
  scaled.reserve(beam.hypotheses.size());
  double max_lp = kNegInf;
  std::vector<double> lp;
  for (const auto& h : beam.hypotheses) {
    lp.push_back(post::log_posterior_from_matrix(h.per_model, which));
    max_lp = std::max(max_lp, lp.back());
  }
  double sum = 0.0;
  for (double v : lp) {
    scaled.push_back(std::exp((v - max_lp) / t));
    sum += scaled.back();
  }
  for (double& w : scaled) w /= sum;
  return scaled;
}

#define ENSEQ_DEFINE_ESTIMATOR(NAME, FN_EXPR)                                              \
  double NAME(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples,       \
              const EstimatorConfig& cfg) {                                                \
    (void)x;                                                                               \
    cfg.validate();                                                                        \
    return run(ens, samples, uniform_weights(samples.size()), FN_EXPR);                    \
  }                                                                                        \
  double NAME(const post::Ensemble& ens, const TokenSeq& x, const decode::Beam& beam,     \
              const EstimatorConfig& cfg) {                                                \
    (void)x;                                                                               \
    cfg.validate();                                                                        \
    const auto w = importance_weights(beam, cfg.temperature_t, cfg.posterior_choice);      \
    return run(ens, beam.hypotheses, w, FN_EXPR);                                          \
  }                                                                                        \
  Estimate NAME##_stats(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples, \
                        const EstimatorConfig& cfg) {                                      \
    (void)x;                                                                               \
    cfg.validate();                                                                        \
    return run_stats(ens, samples, FN_EXPR);                                               \
  }

ENSEQ_DEFINE_ESTIMATOR(entropy_joint, entropy_joint_fn(cfg))
ENSEQ_DEFINE_ESTIMATOR(rmi_joint, rmi_joint_fn(cfg))
ENSEQ_DEFINE_ESTIMATOR(entropy_chain, chain_fn(ens, x, cfg, tok_entropy_fn(cfg)))
ENSEQ_DEFINE_ESTIMATOR(mi_chain, chain_fn(ens, x, cfg, tok_mi_fn(cfg)))
ENSEQ_DEFINE_ESTIMATOR(epkl_chain, chain_fn(ens, x, cfg, tok_epkl_fn()))
ENSEQ_DEFINE_ESTIMATOR(rmi_chain, chain_fn(ens, x, cfg, tok_rmi_fn(cfg)))

#undef ENSEQ_DEFINE_ESTIMATOR

double mi_exact_mc(const post::Ensemble& ens, const TokenSeq& x, int s, std::uint64_t seed,
                   const EstimatorConfig& cfg) {
  return mi_exact_mc_stats(ens, x, s, seed, cfg).value;
}

double epkl_exact_mc(const post::Ensemble& ens, const TokenSeq& x, int s, std::uint64_t seed,
                     const EstimatorConfig& cfg) {
  return epkl_exact_mc_stats(ens, x, s, seed, cfg).value;
}

Estimate mi_exact_mc_stats(const post::Ensemble& ens, const TokenSeq& x, int s,
                           std::uint64_t seed, const EstimatorConfig& cfg) {
  cfg.validate();
  return stats_of(mi_exact_values(member_draws(ens, x, s, seed), cfg));
}

Estimate epkl_exact_mc_stats(const post::Ensemble& ens, const TokenSeq& x, int s,
                             std::uint64_t seed, const EstimatorConfig& cfg) {
  cfg.validate();
  return stats_of(epkl_exact_values(member_draws(ens, x, s, seed), cfg));
}

SeqUncertainty score_sequence(const post::Ensemble& ens, const TokenSeq& x,
                              const decode::Beam& beam, const EstimatorConfig& cfg,
                              std::optional<ExactMcParams> mc) {
  SeqUncertainty u;
  u.tu_chain = entropy_chain(ens, x, beam, cfg);
  u.tu_joint = entropy_joint(ens, x, beam, cfg);
  u.ku_mi_chain = mi_chain(ens, x, beam, cfg);
  u.ku_epkl_chain = epkl_chain(ens, x, beam, cfg);
  u.ku_rmi_chain = rmi_chain(ens, x, beam, cfg);
  u.ku_rmi_joint = rmi_joint(ens, x, beam, cfg);
  u.du_chain = u.tu_chain - u.ku_mi_chain;
  if (mc) {
    u.ku_mi_exact_mc = mi_exact_mc(ens, x, mc->s, mc->seed, cfg);
    u.ku_epkl_exact_mc = epkl_exact_mc(ens, x, mc->s, mc->seed, cfg);
  }
  for (double v : {u.tu_chain, u.tu_joint, u.ku_mi_chain, u.ku_epkl_chain, u.ku_rmi_chain,
                   u.ku_rmi_joint})
    if (v >= kSaturated) u.saturated = true;
  return u;
}

}  // namespace enseq::estimators
