#include "enseq/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace enseq::eval {

namespace {

std::vector<Token> strip_eos(const TokenSeq& s) {
  std::vector<Token> out;
  out.reserve(s.tokens.size());
  for (Token t : s.tokens)
    if (t != 0) out.push_back(t);
  return out;
}

std::vector<std::size_t> order_desc(std::span<const double> values) {
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  });
  return idx;
}

// Mean residual error after zeroing the first k items of `order`, for k=0..N.
std::vector<double> rejection_levels(std::span<const double> errors,
                                     const std::vector<std::size_t>& order) {
  const auto n = static_cast<double>(errors.size());
  double residual = 0.0;
  for (double e : errors) residual += e;
  std::vector<double> levels;
  levels.reserve(errors.size() + 1);
  levels.push_back(residual / n);
  for (std::size_t k = 0; k < order.size(); ++k) {
    residual -= errors[order[k]];
    levels.push_back(residual / n);
  }
  levels.back() = 0.0;  // guard accumulated rounding at full rejection
  return levels;
}

double area_vs_random(const std::vector<double>& levels) {
  const std::size_t n = levels.size() - 1;
  const double base = levels.front();
  double area = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r0 = base * (1.0 - static_cast<double>(k) / static_cast<double>(n));
    const double r1 = base * (1.0 - static_cast<double>(k + 1) / static_cast<double>(n));
    area += 0.5 * ((r0 - levels[k]) + (r1 - levels[k + 1])) / static_cast<double>(n);
  }
  return area;
}

struct NgramCounts {
  std::map<std::vector<Token>, int> counts;
  int total = 0;
};

NgramCounts ngrams(const std::vector<Token>& tokens, int n) {
  NgramCounts c;
  if (static_cast<int>(tokens.size()) < n) return c;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    ++c.counts[std::vector<Token>(tokens.begin() + static_cast<long>(i),
                                  tokens.begin() + static_cast<long>(i) + n)];
    ++c.total;
  }
  return c;
}

}  // namespace

RejectionCurve rejection_prr(std::span<const double> uncertainties,
                             std::span<const double> errors) {
  if (uncertainties.size() != errors.size())
    throw std::invalid_argument("rejection_prr: length mismatch");
  if (errors.size() < 2) throw std::invalid_argument("rejection_prr: need at least 2 items");
  for (double e : errors)
    if (e < 0.0) throw std::invalid_argument("rejection_prr: errors must be non-negative");

  const auto n = errors.size();
  const auto uns_levels = rejection_levels(errors, order_desc(uncertainties));
  const auto orc_levels = rejection_levels(errors, order_desc(errors));

  RejectionCurve curve;
  curve.points.reserve(n + 1);
  for (std::size_t k = 0; k <= n; ++k)
    curve.points.emplace_back(static_cast<double>(k) / static_cast<double>(n), uns_levels[k]);
  curve.ar_uns = area_vs_random(uns_levels);
  curve.ar_orc = area_vs_random(orc_levels);
  if (curve.ar_orc > 0.0) {
    curve.prr = curve.ar_uns / curve.ar_orc;
  } else {
    curve.prr = 0.0;
    curve.degenerate = true;
  }
  return curve;
}

double roc_auc(const LabeledScores& data) {
  if (data.scores.size() != data.labels.size())
    throw std::invalid_argument("roc_auc: length mismatch");
  const std::size_t n = data.scores.size();
  std::size_t positives = 0;
  for (int label : data.labels) positives += static_cast<std::size_t>(label != 0);
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0)
    throw std::invalid_argument("roc_auc: both classes must be present");

  // Mann-Whitney U via midranks over tie groups.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return data.scores[a] < data.scores[b]; });
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && data.scores[idx[j]] == data.scores[idx[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t t = i; t < j; ++t)
      if (data.labels[idx[t]] != 0) rank_sum_pos += midrank;
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double u = rank_sum_pos - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(negatives));
}

double aupr(const LabeledScores& data) {
  if (data.scores.size() != data.labels.size())
    throw std::invalid_argument("aupr: length mismatch");
  std::size_t positives = 0;
  for (int label : data.labels) positives += static_cast<std::size_t>(label != 0);
  if (positives == 0) throw std::invalid_argument("aupr: needs at least one positive");

  const auto idx = order_desc(data.scores);
  const std::size_t n = idx.size();
  double ap = 0.0;
  std::size_t tp = 0, seen = 0, i = 0;
  while (i < n) {
    std::size_t j = i;
    std::size_t group_tp = 0;
    while (j < n && data.scores[idx[j]] == data.scores[idx[i]]) {
      group_tp += static_cast<std::size_t>(data.labels[idx[j]] != 0);
      ++j;
    }
    tp += group_tp;
    seen = j;
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += static_cast<double>(group_tp) * precision;
    i = j;
  }
  return ap / static_cast<double>(positives);
}

Alignment align(const TokenSeq& ref, const TokenSeq& hyp) {
  const auto r = strip_eos(ref);
  const auto h = strip_eos(hyp);
  const std::size_t R = r.size(), H = h.size();

  std::vector<std::vector<int>> d(R + 1, std::vector<int>(H + 1, 0));
  for (std::size_t i = 0; i <= R; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= H; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= R; ++i) {
    for (std::size_t j = 1; j <= H; ++j) {
      const int sub = d[i - 1][j - 1] + (r[i - 1] == h[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }

  Alignment a;
  a.edit_cost = d[R][H];
  a.ref_len = static_cast<int>(R);
  a.hyp_len = static_cast<int>(H);
  std::size_t i = R, j = H;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && r[i - 1] == h[j - 1] && d[i][j] == d[i - 1][j - 1]) {
      a.ops.push_back({EditOp::Match, static_cast<int>(i - 1), static_cast<int>(j - 1)});
      --i, --j;
    } else if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1) {
      a.ops.push_back({EditOp::Substitution, static_cast<int>(i - 1), static_cast<int>(j - 1)});
      --i, --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      a.ops.push_back({EditOp::Deletion, static_cast<int>(i - 1), -1});
      --i;
    } else {
      a.ops.push_back({EditOp::Insertion, -1, static_cast<int>(j - 1)});
      --j;
    }
  }
  std::reverse(a.ops.begin(), a.ops.end());
  return a;
}

std::vector<int> token_error_labels(const Alignment& alignment) {
  std::vector<int> labels(static_cast<std::size_t>(alignment.hyp_len), 0);
  for (const auto& op : alignment.ops) {
    if (op.op == EditOp::Substitution || op.op == EditOp::Insertion)
      labels[static_cast<std::size_t>(op.hyp_index)] = 1;
  }
  return labels;
}

double wer(const TokenSeq& ref, const TokenSeq& hyp) {
  const Alignment a = align(ref, hyp);
  return static_cast<double>(a.edit_cost) / std::max(1.0, static_cast<double>(a.ref_len));
}

double sentence_bleu(const TokenSeq& ref, const TokenSeq& hyp, int max_order) {
  if (max_order < 1) throw std::invalid_argument("sentence_bleu: max_order must be >= 1");
  const auto r = strip_eos(ref);
  const auto h = strip_eos(hyp);
  if (h.empty()) return 0.0;

  double log_precision_sum = 0.0;
  for (int n = 1; n <= max_order; ++n) {
    const auto rn = ngrams(r, n);
    const auto hn = ngrams(h, n);
    int clipped = 0;
    for (const auto& [gram, count] : hn.counts) {
      const auto it = rn.counts.find(gram);
      if (it != rn.counts.end()) clipped += std::min(count, it->second);
    }
    double precision;
    if (n == 1) {
      precision = static_cast<double>(clipped) / static_cast<double>(hn.total);
      if (precision == 0.0) return 0.0;
    } else {
      precision = (static_cast<double>(clipped) + 1.0) / (static_cast<double>(hn.total) + 1.0);
    }
    log_precision_sum += std::log(precision);
  }

  const auto c = static_cast<double>(h.size());
  const auto rl = static_cast<double>(r.size());
  const double bp = c >= rl ? 1.0 : std::exp(1.0 - rl / c);
  return 100.0 * bp * std::exp(log_precision_sum / static_cast<double>(max_order));
}

double heuristic_variance(const decode::Beam& beam, VarianceVariant variant,
                          std::span<const double> weights) {
  if (beam.hypotheses.empty()) throw std::invalid_argument("heuristic_variance: empty beam");
  if (weights.size() != beam.hypotheses.size())
    throw std::invalid_argument("heuristic_variance: weight count mismatch");

  double total = 0.0;
  for (std::size_t b = 0; b < beam.hypotheses.size(); ++b) {
    const auto& h = beam.hypotheses[b];
    const auto member_logp = h.per_model.column_sums();
    const double inv_len = 1.0 / static_cast<double>(h.y.tokens.size());
    std::vector<double> v(member_logp.size());
    for (std::size_t m = 0; m < member_logp.size(); ++m) {
      switch (variant) {
        case VarianceVariant::P: v[m] = std::exp(member_logp[m]); break;
        case VarianceVariant::PNorm: v[m] = std::exp(member_logp[m] * inv_len); break;
        case VarianceVariant::LogP: v[m] = member_logp[m]; break;
        case VarianceVariant::LogPNorm: v[m] = member_logp[m] * inv_len; break;
      }
    }
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= static_cast<double>(v.size());  // population variance
    total += weights[b] * var;
  }
  return total;
}

double cross_wer(std::span<const TokenSeq> member_one_best) {
  const std::size_t m = member_one_best.size();
  if (m < 2) throw std::invalid_argument("cross_wer: needs M >= 2 decodes");
  double total = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (a == b) continue;
      const double w = wer(member_one_best[a], member_one_best[b]);
      total += w * w;
    }
  }
  return total / (static_cast<double>(m) * static_cast<double>(m - 1));
}

double cross_bleu(std::span<const TokenSeq> member_one_best) {
  const std::size_t m = member_one_best.size();
  if (m < 2) throw std::invalid_argument("cross_bleu: needs M >= 2 decodes");
  double total = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = 0; b < m; ++b) {
      if (a == b) continue;
      const double gap = 100.0 - sentence_bleu(member_one_best[a], member_one_best[b]);
      total += gap * gap;
    }
  }
  return total / (static_cast<double>(m) * static_cast<double>(m - 1));
}

}  // namespace enseq::eval
