#pragma once

#include <span>
#include <utility>
#include <vector>

#include "enseq/decode.hpp"

namespace enseq::eval {

/**
 * Oracle-replacement rejection curve. Items are rejected in order of
 * decreasing uncertainty (ties by input index); a rejected item's error is
 * replaced by 0. Areas against the linear random baseline are trapezoidal
 * on the N+1 grid; prr = ar_uns / ar_orc, reported as 0 with `degenerate`
 * set when the oracle area vanishes.
 */
struct RejectionCurve {
  std::vector<std::pair<double, double>> points;  // (fraction_rejected, mean_error)
  double ar_uns = 0.0;
  double ar_orc = 0.0;
  double prr = 0.0;
  bool degenerate = false;
};

RejectionCurve rejection_prr(std::span<const double> uncertainties,
                             std::span<const double> errors);

struct LabeledScores {
  std::vector<double> scores;
  std::vector<int> labels;  // 0 or 1
};

/// Rank statistic: probability a positive outranks a negative, ties 1/2.
double roc_auc(const LabeledScores& data);

/// Average precision over a descending-score sweep with tied scores grouped.
double aupr(const LabeledScores& data);

enum class EditOp { Match, Substitution, Insertion, Deletion };

struct AlignedOp {
  EditOp op;
  int ref_index = -1;
  int hyp_index = -1;
};

struct Alignment {
  std::vector<AlignedOp> ops;
  int edit_cost = 0;
  int ref_len = 0;  // EOS-stripped lengths
  int hyp_len = 0;
};

/// Levenshtein alignment with unit costs; EOS stripped first. Backtrace tie
/// order: match > substitution > deletion > insertion.
Alignment align(const TokenSeq& ref, const TokenSeq& hyp);

/// One {0,1} label per hypothesis token: substitutions and insertions are 1,
/// matches 0; deletions yield no hypothesis-token label.
std::vector<int> token_error_labels(const Alignment& alignment);

/// Edit cost over max(1, reference length), EOS stripped.
double wer(const TokenSeq& ref, const TokenSeq& hyp);

/// Sentence BLEU in [0, 100]: modified n-gram precisions up to max_order,
/// add-one smoothing for orders > 1, brevity penalty. EOS stripped.
double sentence_bleu(const TokenSeq& ref, const TokenSeq& hyp, int max_order = 4);

/// Ensemble-diversity baselines: population variance across members of the
/// per-hypothesis sequence probability (optionally exponent-normalized) or
/// log-probability (optionally rate-normalized), importance-weight-averaged
/// across the beam.
enum class VarianceVariant { P, PNorm, LogP, LogPNorm };

double heuristic_variance(const decode::Beam& beam, VarianceVariant variant,
                          std::span<const double> weights);

/// Mean squared pairwise WER between per-member 1-best decodes; the first
/// argument of each WER call is the reference side.
double cross_wer(std::span<const TokenSeq> member_one_best);

/// Mean squared pairwise (100 - sentence BLEU) between per-member decodes.
double cross_bleu(std::span<const TokenSeq> member_one_best);

}  // namespace enseq::eval
