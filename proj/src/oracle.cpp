#include "enseq/oracle.hpp"

#include <cmath>

#include "enseq/numeric.hpp"

namespace enseq::oracle {

namespace {

struct Accum {
  double entropy = 0.0;
  double expected_data_entropy = 0.0;
  double mi = 0.0;
  double epkl = 0.0;
  double rmi = 0.0;
  double chain_entropy = 0.0;
  double chain_mi = 0.0;
  double chain_epkl = 0.0;
  double chain_rmi = 0.0;
  bool saturated = false;
};

class Enumerator {
 public:
  Enumerator(const post::Ensemble& ens, const TokenSeq& x,
             const estimators::EstimatorConfig& cfg)
      : ens_(ens), x_(x), cfg_(cfg), m_(ens.members.size()) {}

  Accum run() {
    std::vector<double> cums(m_, 0.0);
    visit(cums, 0.0);
    return acc_;
  }

 private:
  // Returns W(prefix): the n(y)-weighted posterior mass of all terminated
  // sequences extending the current prefix; used to weight the prefix's
  // token-level measures in the chain targets.
  double visit(const std::vector<double>& cums, double pe_cum) {
    const auto ctx = std::span<const Token>(prefix_.data(), prefix_.size());
    const auto rows = post::member_log_dists(ens_, x_, ctx);
    const auto step = measures::make_token_step_from(rows, cums);
    const auto& log_post_row = cfg_.posterior_choice == post::Combination::PrEx
                                   ? step.log_posterior_pe
                                   : *step.log_posterior_ep;

    const Token eos = ens_.vocab().eos_id;
    const std::size_t len = prefix_.size() + 1;  // terminated child's length
    const double n_weight = cfg_.length_normalize ? 1.0 / static_cast<double>(len) : 1.0;

    double w = 0.0;
    {
      // Terminated child: prefix + EOS.
      std::vector<double> member_logp(m_);
      for (std::size_t m = 0; m < m_; ++m)
        member_logp[m] = cums[m] + rows[m][static_cast<std::size_t>(eos)];
      const double log_post = cfg_.posterior_choice == post::Combination::PrEx
                                  ? pe_cum + log_post_row[static_cast<std::size_t>(eos)]
                                  : log_mean_exp(member_logp);
      w += accumulate_sequence(member_logp, log_post, n_weight);
    }

    if (static_cast<int>(prefix_.size()) + 1 < ens_.max_len()) {
      const int K = ens_.vocab().size_k;
      for (Token t = 1; t < static_cast<Token>(K); ++t) {
        std::vector<double> child_cums(m_);
        double best = kNegInf;
        for (std::size_t m = 0; m < m_; ++m) {
          child_cums[m] = cums[m] + rows[m][static_cast<std::size_t>(t)];
          best = std::max(best, child_cums[m]);
        }
        if (best == kNegInf) continue;  // zero mass under every member
        prefix_.push_back(t);
        w += visit(child_cums, pe_cum + log_post_row[static_cast<std::size_t>(t)]);
        prefix_.pop_back();
      }
    }

    // Chain targets: this prefix appears once in every extending sequence.
    bool sat = false;
    acc_.chain_entropy += w * measures::tok_entropy(step, cfg_.posterior_choice);
    acc_.chain_mi += w * measures::tok_mi(step, cfg_.posterior_choice);
    acc_.chain_epkl += w * measures::tok_epkl(step, &sat);
    acc_.chain_rmi += w * measures::tok_rmi(step, cfg_.posterior_choice, &sat);
    if (sat && w > 0.0) acc_.saturated = true;
    return w;
  }

  double accumulate_sequence(const std::vector<double>& member_logp, double log_post,
                             double n_weight) {
    const double p_post = std::exp(log_post);

    double mean_logp = 0.0;
    double mean_p_logp = 0.0;  // (1/M) sum_m P_m ln P_m
    double mean_p = 0.0;
    for (double lm : member_logp) {
      const double pm = std::exp(lm);
      mean_p += pm;
      if (pm > 0.0) mean_p_logp += pm * lm;
      mean_logp += lm;
    }
    mean_p /= static_cast<double>(m_);
    mean_p_logp /= static_cast<double>(m_);
    mean_logp /= static_cast<double>(m_);

    if (p_post > 0.0) acc_.entropy -= n_weight * p_post * log_post;
    acc_.expected_data_entropy -= n_weight * mean_p_logp;

    // mi: (1/M) sum_m P_m (ln P_m - ln P_D)
    if (mean_p > 0.0) {
      if (log_post == kNegInf) {
        acc_.saturated = true;
        acc_.mi = kSaturated;
      } else if (acc_.mi < kSaturated) {
        acc_.mi += n_weight * (mean_p_logp - mean_p * log_post);
      }
    }

    // epkl: (1/M^2) sum_{m,n} P_m (ln P_m - ln P_n)
    if (mean_p > 0.0) {
      if (mean_logp == kNegInf) {
        acc_.saturated = true;
        acc_.epkl = kSaturated;
      } else if (acc_.epkl < kSaturated) {
        acc_.epkl += n_weight * (mean_p_logp - mean_p * mean_logp);
      }
    }

    // rmi: (1/M) sum_m P_D (ln P_D - ln P_m)
    if (p_post > 0.0) {
      if (mean_logp == kNegInf) {
        acc_.saturated = true;
        acc_.rmi = kSaturated;
      } else if (acc_.rmi < kSaturated) {
        acc_.rmi += n_weight * p_post * (log_post - mean_logp);
      }
    }

    return p_post * n_weight;
  }

  const post::Ensemble& ens_;
  const TokenSeq& x_;
  const estimators::EstimatorConfig& cfg_;
  const std::size_t m_;
  std::vector<Token> prefix_;
  Accum acc_;
};

}  // namespace

ExactQuantities exact_all(const post::Ensemble& ens, const TokenSeq& x,
                          const estimators::EstimatorConfig& cfg) {
  ens.validate();
  cfg.validate();
  decode::check_support_guard(ens.vocab().size_k, ens.max_len());

  const Accum acc = Enumerator(ens, x, cfg).run();
  ExactQuantities q;
  q.entropy_rate = acc.entropy;
  q.expected_data_entropy_rate = acc.expected_data_entropy;
  q.mi_rate = acc.mi;
  q.epkl_rate = acc.epkl;
  q.rmi_rate = acc.rmi;
  q.entropy_chain_target = acc.chain_entropy;
  q.mi_chain_target = acc.chain_mi;
  q.epkl_chain_target = acc.chain_epkl;
  q.rmi_chain_target = acc.chain_rmi;
  q.saturated = acc.saturated;
  return q;
}

ChainDecomposition exact_token_chain_decomposition(const post::Ensemble& ens, const TokenSeq& x,
                                                   const estimators::EstimatorConfig& cfg) {
  estimators::EstimatorConfig unnormalized = cfg;
  unnormalized.length_normalize = false;
  const ExactQuantities q = exact_all(ens, x, unnormalized);
  return {q.entropy_rate, q.expected_data_entropy_rate,
          q.entropy_rate - q.expected_data_entropy_rate};
}

}  // namespace enseq::oracle
