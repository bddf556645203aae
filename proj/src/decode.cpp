#include "enseq/decode.hpp"

#include <algorithm>
#include <cmath>

#include "enseq/numeric.hpp"
#include "enseq/rng.hpp"

namespace enseq::decode {

namespace {

constexpr std::uint64_t kTagAncestral = 0x61;
constexpr std::uint64_t kTagMemberPick = 0x62;
constexpr std::uint64_t kTagMemberWalk = 0x63;

Hypothesis finish(const post::Ensemble& ens, const TokenSeq& x, std::vector<Token> tokens,
                  int rank = 0) {
  Hypothesis h;
  h.y = terminated_seq(std::move(tokens));
  h.per_model = post::per_model_token_logprobs(ens, x, h.y);
  h.log_post = post::log_posterior_from_matrix(h.per_model, ens.combination);
  h.rank = rank;
  return h;
}

std::vector<double> step_log_posterior(const post::Ensemble& ens,
                                       const std::vector<std::vector<double>>& rows,
                                       const std::vector<double>& member_cum) {
  if (ens.combination == post::Combination::PrEx) return post::log_token_posterior_pe_from(rows);
  return post::log_token_posterior_ep_from(rows, member_cum);
}

Token pick_token(const std::vector<double>& log_row, double u) {
  double cum = 0.0;
  Token last_positive = -1;
  for (std::size_t k = 0; k < log_row.size(); ++k) {
    const double p = std::exp(log_row[k]);
    if (p <= 0.0) continue;
    last_positive = static_cast<Token>(k);
    cum += p;
    if (u < cum) return last_positive;
  }
  return last_positive;  // rounding left u just above the final cumulative
}

Hypothesis sample_walk(const post::Ensemble& ens, const TokenSeq& x, rng::Key draw_key,
                       bool single_member, int member, int rank) {
  const Token eos = ens.vocab().eos_id;
  std::vector<Token> tokens;
  std::vector<double> cum(ens.members.size(), 0.0);
  for (int pos = 0; pos < ens.max_len(); ++pos) {
    const auto ctx = std::span<const Token>(tokens.data(), tokens.size());
    std::vector<double> log_row;
    std::vector<std::vector<double>> rows;
    if (single_member) {
      log_row = toy::log_cond_dist(ens.members[static_cast<std::size_t>(member)], x, ctx);
    } else {
      rows = post::member_log_dists(ens, x, ctx);
      log_row = step_log_posterior(ens, rows, cum);
    }
    const Token t = pick_token(log_row, rng::u01(draw_key.with(static_cast<std::uint64_t>(pos))));
    tokens.push_back(t);
    if (!single_member)
      for (std::size_t m = 0; m < rows.size(); ++m) cum[m] += rows[m][static_cast<std::size_t>(t)];
    if (t == eos) break;
  }
  return finish(ens, x, std::move(tokens), rank);
}

}  // namespace

Beam beam_search(const post::Ensemble& ens, const TokenSeq& x, int width_b,
                 bool rank_length_norm) {
  ens.validate();
  if (width_b < 1) throw std::invalid_argument("beam_search: width_b must be >= 1");
  const Token eos = ens.vocab().eos_id;
  const int K = ens.vocab().size_k;
  const std::size_t M = ens.members.size();

  struct Item {
    std::vector<Token> prefix;
    std::vector<double> member_cum;
    double post_cum = 0.0;
    Token last = -1;
  };

  std::vector<Item> alive{Item{{}, std::vector<double>(M, 0.0), 0.0, -1}};
  std::vector<std::vector<Token>> finished;

  for (int pos = 0; pos < ens.max_len() && !alive.empty(); ++pos) {
    std::vector<Item> candidates;
    for (const Item& item : alive) {
      const auto ctx = std::span<const Token>(item.prefix.data(), item.prefix.size());
      const auto rows = post::member_log_dists(ens, x, ctx);
      const auto step = step_log_posterior(ens, rows, item.member_cum);
      for (int k = 0; k < K; ++k) {
        const double lp = step[static_cast<std::size_t>(k)];
        if (lp == kNegInf) continue;
        if (k == eos) {
          auto y = item.prefix;
          y.push_back(eos);
          finished.push_back(std::move(y));
          continue;
        }
        Item next;
        next.prefix = item.prefix;
        next.prefix.push_back(static_cast<Token>(k));
        next.member_cum = item.member_cum;
        for (std::size_t m = 0; m < M; ++m)
          next.member_cum[m] += rows[m][static_cast<std::size_t>(k)];
        next.post_cum = item.post_cum + lp;
        next.last = static_cast<Token>(k);
        candidates.push_back(std::move(next));
      }
    }
    if (static_cast<int>(finished.size()) >= width_b) break;
    std::sort(candidates.begin(), candidates.end(), [](const Item& a, const Item& b) {
      if (a.post_cum != b.post_cum) return a.post_cum > b.post_cum;
      if (a.last != b.last) return a.last < b.last;
      return a.prefix < b.prefix;
    });
    if (static_cast<int>(candidates.size()) > width_b)
      candidates.resize(static_cast<std::size_t>(width_b));
    alive = std::move(candidates);
  }

  Beam beam;
  beam.width_b = width_b;
  beam.hypotheses.reserve(finished.size());
  for (auto& tokens : finished) beam.hypotheses.push_back(finish(ens, x, std::move(tokens)));

  auto score = [rank_length_norm](const Hypothesis& h) {
    return rank_length_norm ? h.log_post / static_cast<double>(h.y.tokens.size()) : h.log_post;
  };
  std::sort(beam.hypotheses.begin(), beam.hypotheses.end(),
            [&](const Hypothesis& a, const Hypothesis& b) {
              const double sa = score(a), sb = score(b);
              if (sa != sb) return sa > sb;
              return a.y.tokens < b.y.tokens;
            });
  if (static_cast<int>(beam.hypotheses.size()) > width_b)
    beam.hypotheses.resize(static_cast<std::size_t>(width_b));
  for (std::size_t i = 0; i < beam.hypotheses.size(); ++i)
    beam.hypotheses[i].rank = static_cast<int>(i);
  return beam;
}

Beam truncated(const Beam& beam, int b) {
  if (b < 1) throw std::invalid_argument("truncated: b must be >= 1");
  Beam out;
  out.width_b = b;
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(b), beam.hypotheses.size());
  out.hypotheses.assign(beam.hypotheses.begin(), beam.hypotheses.begin() + static_cast<long>(n));
  return out;
}

std::vector<Hypothesis> ancestral_sample(const post::Ensemble& ens, const TokenSeq& x, int s,
                                         std::uint64_t seed) {
  ens.validate();
  if (s < 1) throw std::invalid_argument("ancestral_sample: s must be >= 1");
  std::vector<Hypothesis> out;
  out.reserve(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) {
    const rng::Key key =
        rng::Key().with(seed).with(kTagAncestral).with(static_cast<std::uint64_t>(i));
    out.push_back(sample_walk(ens, x, key, /*single_member=*/false, 0, i));
  }
  return out;
}

std::vector<std::pair<int, Hypothesis>> sample_per_member(const post::Ensemble& ens,
                                                          const TokenSeq& x, int s,
                                                          std::uint64_t seed) {
  ens.validate();
  if (s < 1) throw std::invalid_argument("sample_per_member: s must be >= 1");
  std::vector<std::pair<int, Hypothesis>> out;
  out.reserve(static_cast<std::size_t>(s));
  for (int i = 0; i < s; ++i) {
    const rng::Key base = rng::Key().with(seed).with(static_cast<std::uint64_t>(i));
    const int m = static_cast<int>(
        rng::uniform_index(base.with(kTagMemberPick), ens.members.size()));
    out.emplace_back(m, sample_walk(ens, x, base.with(kTagMemberWalk),
                                    /*single_member=*/true, m, i));
  }
  return out;
}

std::uint64_t support_size(int size_k, int max_len) {
  std::uint64_t total = 0, pow = 1;
  for (int j = 0; j < max_len; ++j) {
    total += pow;
    pow *= static_cast<std::uint64_t>(size_k - 1);
  }
  return total;
}

void check_support_guard(int size_k, int max_len) {
  double p = 1.0;
  for (int i = 0; i < max_len; ++i) p *= static_cast<double>(size_k);
  if (p > 1e7)
    throw DataError("support too large: K^max_len = " + std::to_string(p) +
                    " exceeds 1e7; reduce size_k or max_len");
}

std::vector<SupportEntry> enumerate_support(const post::Ensemble& ens, const TokenSeq& x) {
  ens.validate();
  check_support_guard(ens.vocab().size_k, ens.max_len());
  const int K = ens.vocab().size_k;
  const Token eos = ens.vocab().eos_id;

  std::vector<SupportEntry> entries;
  entries.reserve(support_size(K, ens.max_len()));
  std::vector<Token> prefix;

  auto visit = [&](auto&& self) -> void {
    {
      auto tokens = prefix;
      tokens.push_back(eos);
      SupportEntry e;
      e.y = terminated_seq(std::move(tokens));
      e.per_model = post::per_model_token_logprobs(ens, x, e.y);
      e.log_post_prex = post::log_posterior_from_matrix(e.per_model, post::Combination::PrEx);
      e.log_post_expr = post::log_posterior_from_matrix(e.per_model, post::Combination::ExPr);
      entries.push_back(std::move(e));
    }
    if (static_cast<int>(prefix.size()) + 1 >= ens.max_len()) return;
    for (Token t = 1; t < static_cast<Token>(K); ++t) {
      prefix.push_back(t);
      self(self);
      prefix.pop_back();
    }
  };
  visit(visit);
  return entries;
}

}  // namespace enseq::decode
