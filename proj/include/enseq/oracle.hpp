#pragma once

#include "enseq/seq_measures.hpp"

namespace enseq::oracle {

/**
 * Exact sequence-level quantities from exhaustive enumeration of the finite
 * support. "Rates" apply the per-sequence 1/L weight inside the expectation
 * when cfg.length_normalize is set, so every field is literally the S->inf
 * limit of the corresponding estimator. The chain targets weight token-level
 * measures by the posterior prefix marginals; mi/epkl chain targets differ
 * from the exact rates (the chain estimators' documented bias), while the
 * entropy/rmi chain targets coincide with the exact rates in unnormalized
 * mode.
 */
struct ExactQuantities {
  double entropy_rate = 0.0;
  double mi_rate = 0.0;
  double epkl_rate = 0.0;
  double rmi_rate = 0.0;
  double mi_chain_target = 0.0;
  double epkl_chain_target = 0.0;
  double expected_data_entropy_rate = 0.0;
  double entropy_chain_target = 0.0;
  double rmi_chain_target = 0.0;
  bool saturated = false;
};

ExactQuantities exact_all(const post::Ensemble& ens, const TokenSeq& x,
                          const estimators::EstimatorConfig& cfg);

struct ChainDecomposition {
  double tu = 0.0;
  double du = 0.0;
  double ku = 0.0;
};

/// Exact (total, data, knowledge) split in unnormalized mode: tu and du by
/// enumeration, ku = tu - du; ku equals the unnormalized exact MI.
ChainDecomposition exact_token_chain_decomposition(const post::Ensemble& ens, const TokenSeq& x,
                                                   const estimators::EstimatorConfig& cfg);

}  // namespace enseq::oracle
