#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "enseq/decode.hpp"
#include "enseq/token_measures.hpp"

namespace enseq::estimators {

struct EstimatorConfig {
  double temperature_t = 1.0;   // importance-weight temperature
  bool length_normalize = true;
  post::Combination posterior_choice = post::Combination::PrEx;

  void validate() const;
};

/// Per-input bundle of every sequence-level measure.
struct SeqUncertainty {
  double tu_chain = 0.0;
  double tu_joint = 0.0;
  double du_chain = 0.0;
  double ku_mi_chain = 0.0;
  double ku_epkl_chain = 0.0;
  double ku_rmi_chain = 0.0;
  double ku_rmi_joint = 0.0;
  std::optional<double> ku_mi_exact_mc;
  std::optional<double> ku_epkl_exact_mc;
  bool saturated = false;
};

/// Sample-mean estimate with the standard error derived from the estimator's
/// own per-draw variance.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Softmax over hypotheses of log-posterior / t under `which`; the weights
/// beam-based estimators use.
std::vector<double> importance_weights(const decode::Beam& beam, double t,
                                       post::Combination which);

using HypothesisList = std::span<const decode::Hypothesis>;

// Sample-based forms weight hypotheses uniformly (duplicates counted); the
// beam overloads weight by importance_weights(beam, cfg.temperature_t, ...).

double entropy_joint(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples,
                     const EstimatorConfig& cfg);
double entropy_joint(const post::Ensemble& ens, const TokenSeq& x, const decode::Beam& beam,
                     const EstimatorConfig& cfg);

double entropy_chain(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples,
                     const EstimatorConfig& cfg);
double entropy_chain(const post::Ensemble& ens, const TokenSeq& x, const decode::Beam& beam,
                     const EstimatorConfig& cfg);

double mi_chain(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples,
                const EstimatorConfig& cfg);
double mi_chain(const post::Ensemble& ens, const TokenSeq& x, const decode::Beam& beam,
                const EstimatorConfig& cfg);

double epkl_chain(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples,
                  const EstimatorConfig& cfg);
double epkl_chain(const post::Ensemble& ens, const TokenSeq& x, const decode::Beam& beam,
                  const EstimatorConfig& cfg);

double rmi_chain(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples,
                 const EstimatorConfig& cfg);
double rmi_chain(const post::Ensemble& ens, const TokenSeq& x, const decode::Beam& beam,
                 const EstimatorConfig& cfg);

double rmi_joint(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples,
                 const EstimatorConfig& cfg);
double rmi_joint(const post::Ensemble& ens, const TokenSeq& x, const decode::Beam& beam,
                 const EstimatorConfig& cfg);

/// Asymptotically exact MI: samples (member, sequence) pairs via
/// sample_per_member and averages the per-draw log-ratio.
double mi_exact_mc(const post::Ensemble& ens, const TokenSeq& x, int s, std::uint64_t seed,
                   const EstimatorConfig& cfg);

/// Asymptotically exact EPKL: as mi_exact_mc with an independent second
/// member draw per sample.
double epkl_exact_mc(const post::Ensemble& ens, const TokenSeq& x, int s, std::uint64_t seed,
                     const EstimatorConfig& cfg);

// Stats variants for sample-based estimation (value == the plain op's value).
Estimate entropy_joint_stats(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples,
                             const EstimatorConfig& cfg);
Estimate entropy_chain_stats(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples,
                             const EstimatorConfig& cfg);
Estimate mi_chain_stats(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples,
                        const EstimatorConfig& cfg);
Estimate epkl_chain_stats(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples,
                          const EstimatorConfig& cfg);
Estimate rmi_chain_stats(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples,
                         const EstimatorConfig& cfg);
Estimate rmi_joint_stats(const post::Ensemble& ens, const TokenSeq& x, HypothesisList samples,
                         const EstimatorConfig& cfg);
Estimate mi_exact_mc_stats(const post::Ensemble& ens, const TokenSeq& x, int s,
                           std::uint64_t seed, const EstimatorConfig& cfg);
Estimate epkl_exact_mc_stats(const post::Ensemble& ens, const TokenSeq& x, int s,
                             std::uint64_t seed, const EstimatorConfig& cfg);

struct ExactMcParams {
  int s = 0;
  std::uint64_t seed = 0;
};

/// Fills every SeqUncertainty field by invoking the individual estimators,
/// so fields match standalone calls bit-exactly. The exact-MC fields are
/// computed only when `mc` is provided.
SeqUncertainty score_sequence(const post::Ensemble& ens, const TokenSeq& x,
                              const decode::Beam& beam, const EstimatorConfig& cfg,
                              std::optional<ExactMcParams> mc = std::nullopt);

}  // namespace enseq::estimators
