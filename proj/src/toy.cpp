#include "enseq/toy.hpp"

#include <algorithm>
#include <cmath>

#include "enseq/numeric.hpp"
#include "enseq/rng.hpp"

namespace enseq::toy {

namespace {

// Stream tags keep the independent random components on disjoint hash streams.
constexpr std::uint64_t kTagSharedLogit = 0x51;
constexpr std::uint64_t kTagMemberNoise = 0x52;
constexpr std::uint64_t kTagDatasetLen = 0x53;
constexpr std::uint64_t kTagDatasetTok = 0x54;

rng::Key input_key(std::uint64_t base_seed, const TokenSeq& x) {
  rng::Key k = rng::Key().with(base_seed).with(x.tokens.size());
  for (Token t : x.tokens) k = k.with(static_cast<std::uint64_t>(t));
  return k;
}

rng::Key context_key(rng::Key k, std::span<const Token> context, int order) {
  const std::size_t window =
      std::min(context.size(), static_cast<std::size_t>(std::max(order, 0)));
  k = k.with(window);
  for (std::size_t i = context.size() - window; i < context.size(); ++i)
    k = k.with(static_cast<std::uint64_t>(context[i]));
  return k;
}

}  // namespace

void ToyModelSpec::validate() const {
  vocab.validate();
  if (context_order_c < 0) throw std::invalid_argument("ToyModelSpec: context_order_c < 0");
  if (max_len < 1) throw std::invalid_argument("ToyModelSpec: max_len must be >= 1");
  if (!(sharpness_tau > 0.0)) throw std::invalid_argument("ToyModelSpec: sharpness_tau must be > 0");
  if (disagreement_sigma_id < 0.0 || disagreement_sigma_ood < 0.0)
    throw std::invalid_argument("ToyModelSpec: disagreement sigmas must be >= 0");
}

void DatasetSpec::validate() const {
  if (n_inputs < 0) throw std::invalid_argument("DatasetSpec: n_inputs < 0");
  if (input_len_min < 1 || input_len_min > input_len_max)
    throw std::invalid_argument("DatasetSpec: need 1 <= input_len_min <= input_len_max");
}

ConditionalModel build_member(const ToyModelSpec& spec, int member_index) {
  spec.validate();
  if (member_index < 0) throw std::invalid_argument("build_member: member_index < 0");
  return ConditionalModel{spec, member_index};
}

Token ood_source_start(const Vocab& vocab) {
  return static_cast<Token>((vocab.source_size_v + 1) / 2);
}

bool is_ood(const Vocab& vocab, const TokenSeq& x) {
  const Token start = ood_source_start(vocab);
  return std::any_of(x.tokens.begin(), x.tokens.end(), [&](Token t) { return t >= start; });
}

std::vector<double> log_cond_dist(const ConditionalModel& model, const TokenSeq& x,
                                  std::span<const Token> context) {
  const ToyModelSpec& spec = model.spec;
  const int K = spec.vocab.size_k;
  if (static_cast<int>(context.size()) >= spec.max_len)
    throw std::invalid_argument("log_cond_dist: context length must be < max_len");

  std::vector<double> logp(static_cast<std::size_t>(K), kNegInf);
  if (static_cast<int>(context.size()) == spec.max_len - 1) {
    logp[static_cast<std::size_t>(spec.vocab.eos_id)] = 0.0;  // forced termination
    return logp;
  }

  const double sigma = is_ood(spec.vocab, x) ? spec.disagreement_sigma_ood
                                             : spec.disagreement_sigma_id;
  const rng::Key base =
      context_key(input_key(spec.base_seed, x), context, spec.context_order_c)
          .with(context.size());

  std::vector<double> logits(static_cast<std::size_t>(K));
  for (int k = 0; k < K; ++k) {
    const double shared = rng::normal(base.with(kTagSharedLogit).with(static_cast<std::uint64_t>(k)));
    const double noise = rng::normal(base.with(kTagMemberNoise)
                                         .with(static_cast<std::uint64_t>(model.member_index))
                                         .with(static_cast<std::uint64_t>(k)));
    logits[static_cast<std::size_t>(k)] = spec.sharpness_tau * shared + sigma * noise;
  }

  const double lse = logsumexp(logits);
  for (int k = 0; k < K; ++k) logp[static_cast<std::size_t>(k)] = logits[static_cast<std::size_t>(k)] - lse;
  return logp;
}

std::vector<double> cond_dist(const ConditionalModel& model, const TokenSeq& x,
                              std::span<const Token> context) {
  return exp_all(log_cond_dist(model, x, context));
}

double seq_log_prob(const ConditionalModel& model, const TokenSeq& x, const TokenSeq& y) {
  require_terminated(y);
  if (static_cast<int>(y.tokens.size()) > model.spec.max_len)
    throw std::invalid_argument("seq_log_prob: sequence longer than max_len");
  double total = 0.0;
  for (std::size_t l = 0; l < y.tokens.size(); ++l) {
    const auto row = log_cond_dist(model, x, std::span<const Token>(y.tokens.data(), l));
    total += row[static_cast<std::size_t>(y.tokens[l])];
  }
  return total;
}

std::vector<TokenSeq> generate_dataset(const DatasetSpec& dspec, const Vocab& vocab) {
  dspec.validate();
  vocab.validate();
  const Token start = ood_source_start(vocab);
  Token lo = 0, hi = start;  // in-domain range
  if (dspec.domain_label == Domain::OutOfDomain) {
    lo = start;
    hi = static_cast<Token>(vocab.source_size_v);
    if (lo >= hi)
      throw DataError("generate_dataset: source vocabulary too small for an OOD sub-range");
  }

  std::vector<TokenSeq> inputs;
  inputs.reserve(static_cast<std::size_t>(dspec.n_inputs));
  const rng::Key base = rng::Key().with(dspec.seed);
  for (int i = 0; i < dspec.n_inputs; ++i) {
    const rng::Key ki = base.with(static_cast<std::uint64_t>(i));
    const auto span = static_cast<std::uint64_t>(dspec.input_len_max - dspec.input_len_min + 1);
    const int len = dspec.input_len_min +
                    static_cast<int>(rng::uniform_index(ki.with(kTagDatasetLen), span));
    TokenSeq x;
    x.tokens.reserve(static_cast<std::size_t>(len));
    for (int j = 0; j < len; ++j) {
      const auto range = static_cast<std::uint64_t>(hi - lo);
      x.tokens.push_back(lo + static_cast<Token>(rng::uniform_index(
                                  ki.with(kTagDatasetTok).with(static_cast<std::uint64_t>(j)), range)));
    }
    inputs.push_back(std::move(x));
  }
  return inputs;
}

}  // namespace enseq::toy
