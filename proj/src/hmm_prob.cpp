#include "evhmm/hmm_prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace evhmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kRowTolerance = 1e-9;

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

std::vector<double> log_table(const std::vector<double>& probs) {
  std::vector<double> out(probs.size());
  std::transform(probs.begin(), probs.end(), out.begin(), safe_log);
  return out;
}

void check_rows(const std::vector<double>& table, std::size_t row_len, const char* what) {
  if (row_len == 0 || table.size() % row_len != 0) {
    throw std::invalid_argument(std::string(what) + " table has the wrong size");
  }
  for (std::size_t r = 0; r < table.size() / row_len; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < row_len; ++c) {
      double v = table[r * row_len + c];
      if (!(v >= 0.0)) throw std::invalid_argument(std::string(what) + " has a negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowTolerance) {
      throw std::invalid_argument(std::string(what) + " row " + std::to_string(r) +
                                  " sums to " + std::to_string(sum));
    }
  }
}

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

double log_sum_exp(std::span<const double> values) {
  double top = kNegInf;
  for (double v : values) top = std::max(top, v);
  if (top == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - top);
  return top + std::log(sum);
}

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] == kUnknownToken) throw std::invalid_argument("vocabulary must not list <UNK>");
    if (!index_.emplace(words_[i], static_cast<TokenId>(i)).second) {
      throw std::invalid_argument("duplicate vocabulary entry: " + words_[i]);
    }
  }
}

TokenId Vocabulary::encode(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? unk() : it->second;
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> words) const {
  std::vector<TokenId> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(encode(w));
  return out;
}

const std::string& Vocabulary::word(TokenId id) const {
  return id == unk() ? kUnknownToken : words_.at(id);
}

// ---------------------------------------------------------------------------
// Hmm1

Hmm1::Hmm1(std::vector<std::string> tags, Vocabulary vocab, std::vector<double> initial,
           std::vector<double> transitions, std::vector<double> emissions)
    : tags_(std::move(tags)),
      vocab_(std::move(vocab)),
      initial_(std::move(initial)),
      trans_(std::move(transitions)),
      emit_(std::move(emissions)) {
  const std::size_t n = tags_.size();
  if (n == 0) throw std::invalid_argument("HMM needs at least one tag");
  if (initial_.size() != n) throw std::invalid_argument("initial distribution has the wrong size");
  if (trans_.size() != n * n) throw std::invalid_argument("transition table has the wrong size");
  if (emit_.size() != n * vocab_.num_symbols()) {
    throw std::invalid_argument("emission table has the wrong size");
  }
  check_rows(initial_, n, "initial distribution");
  check_rows(trans_, n, "transition");
  check_rows(emit_, vocab_.num_symbols(), "emission");
  log_initial_ = log_table(initial_);
  log_trans_ = log_table(trans_);
  log_emit_ = log_table(emit_);
}

std::vector<double> Hmm1::emission_column(TokenId o) const {
  std::vector<double> col(num_tags());
  for (TagId j = 0; j < num_tags(); ++j) col[j] = emission(j, o);
  return col;
}

Hmm1 estimate_hmm1(const CorpusCounts& counts, double add_k) {
  const std::size_t n = counts.num_tags();
  if (n == 0 || counts.total_tokens == 0) throw EmptyCounts();
  if (add_k < 0.0) throw std::invalid_argument("add_k must be non-negative");

  std::vector<std::string> words;
  for (const auto& [key, c] : counts.emissions) {
    if (key.second != kUnknownToken) words.push_back(key.second);
  }
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  Vocabulary vocab(std::move(words));
  const std::size_t m = vocab.num_symbols();
  const double dn = static_cast<double>(n);

  // A row with no observations and no smoothing falls back to uniform.
  auto smooth_row = [&](std::vector<double>& row, double width) {
    double total = 0.0;
    for (double c : row) total += c;
    double den = total + add_k * width;
    for (double& c : row) c = den > 0.0 ? (c + add_k) / den : 1.0 / width;
  };

  std::vector<double> initial(n, 0.0);
  for (const auto& [tag, c] : counts.initial_tags) initial[tag] = static_cast<double>(c);
  smooth_row(initial, dn);

  std::vector<double> trans(n * n, 0.0);
  for (const auto& [key, c] : counts.tag_bigrams) trans[key[0] * n + key[1]] = static_cast<double>(c);
  std::vector<double> emit(n * m, 0.0);
  for (const auto& [key, c] : counts.emissions) {
    emit[key.first * m + vocab.encode(key.second)] = static_cast<double>(c);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(trans.begin() + i * n, trans.begin() + (i + 1) * n);
    smooth_row(row, dn);
    std::copy(row.begin(), row.end(), trans.begin() + i * n);

    std::vector<double> erow(emit.begin() + i * m, emit.begin() + (i + 1) * m);
    smooth_row(erow, static_cast<double>(m));
    std::copy(erow.begin(), erow.end(), emit.begin() + i * m);
  }
  return Hmm1(counts.tags, std::move(vocab), std::move(initial), std::move(trans), std::move(emit));
}

// ---------------------------------------------------------------------------
// Interpolation weights

std::string_view to_string(LambdaMode mode) {
  return mode == LambdaMode::brants ? "brants" : "thede";
}

LambdaMode parse_lambda_mode(std::string_view text) {
  if (text == "brants") return LambdaMode::brants;
  if (text == "thede" || text == "thede_harper") return LambdaMode::thede_harper;
  throw std::invalid_argument("unknown lambda mode: " + std::string(text));
}

Lambdas lambdas_thede_harper(Count bigram_count, Count trigram_count) {
  auto weight = [](Count c) {
    double l = std::log10(static_cast<double>(c) + 1.0);
    return (l + 1.0) / (l + 2.0);
  };
  double k2 = weight(bigram_count);
  double k3 = weight(trigram_count);
  return {k3, (1.0 - k3) * k2, (1.0 - k3) * (1.0 - k2)};
}

Lambdas lambdas_thede_harper(const CorpusCounts& counts, TagId i, TagId j, TagId k) {
  return lambdas_thede_harper(counts.bigram(j, k), counts.trigram(i, j, k));
}

Lambdas lambdas_brants(const CorpusCounts& counts) {
  if (counts.tag_trigrams.empty()) throw NoTrigrams();
  const double total = static_cast<double>(counts.total_tokens);
  auto deleted = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };

  double acc[3] = {0.0, 0.0, 0.0};  // trigram, bigram, unigram
  for (const auto& [key, c] : counts.tag_trigrams) {
    const auto [i, j, k] = key;
    double tri = deleted(static_cast<double>(c) - 1.0, static_cast<double>(counts.bigram(i, j)) - 1.0);
    double bi = deleted(static_cast<double>(counts.bigram(j, k)) - 1.0,
                        static_cast<double>(counts.unigram(j)) - 1.0);
    double uni = deleted(static_cast<double>(counts.unigram(k)) - 1.0, total - 1.0);
    // Ties go to the lower-order estimate.
    if (uni >= bi && uni >= tri) {
      acc[2] += static_cast<double>(c);
    } else if (bi >= tri) {
      acc[1] += static_cast<double>(c);
    } else {
      acc[0] += static_cast<double>(c);
    }
  }
  double sum = acc[0] + acc[1] + acc[2];
  Lambdas out{acc[0] / sum, acc[1] / sum, 0.0};
  out.unigram = std::max(0.0, 1.0 - out.trigram - out.bigram);
  return out;
}

double interpolated_trigram(const CorpusCounts& counts, const Lambdas& lambdas, TagId i, TagId j,
                            TagId k) {
  // Maximum-likelihood estimates use continuation counts as denominators so
  // that each estimate is a distribution over k for any seen context.
  Count ctx3 = 0, ctx2 = 0;
  for (TagId x = 0; x < counts.num_tags(); ++x) {
    ctx3 += counts.trigram(i, j, x);
    ctx2 += counts.bigram(j, x);
  }
  double p3 = ratio(static_cast<double>(counts.trigram(i, j, k)), static_cast<double>(ctx3));
  double p2 = ratio(static_cast<double>(counts.bigram(j, k)), static_cast<double>(ctx2));
  double p1 = ratio(static_cast<double>(counts.unigram(k)), static_cast<double>(counts.total_tokens));
  return lambdas.trigram * p3 + lambdas.bigram * p2 + lambdas.unigram * p1;
}

// ---------------------------------------------------------------------------
// Pair emissions

PairEmissions::PairEmissions(std::size_t num_tags, std::size_t num_symbols, double add_k,
                             Count min_count,
                             const std::map<std::tuple<TagId, TagId, TokenId>, Count>& counts)
    : num_tags_(num_tags),
      num_symbols_(num_symbols),
      add_k_(add_k),
      context_total_(num_tags * num_tags, 0.0) {
  for (const auto& [key, c] : counts) {
    const auto [prev, tag, o] = key;
    context_total_[prev * num_tags_ + tag] += static_cast<double>(c);
    counts_[(static_cast<std::uint64_t>(prev) * num_tags_ + tag) * num_symbols_ + o] += c;
  }
  for (double& total : context_total_) {
    bool seen_enough = total > 0.0 && total >= static_cast<double>(std::max<Count>(min_count, 1));
    if (!seen_enough) total = -1.0;
  }
}

bool PairEmissions::active(TagId prev, TagId tag) const {
  return !context_total_.empty() && context_total_[prev * num_tags_ + tag] > 0.0;
}

double PairEmissions::probability(TagId prev, TagId tag, TokenId o) const {
  double total = context_total_[prev * num_tags_ + tag];
  auto it = counts_.find((static_cast<std::uint64_t>(prev) * num_tags_ + tag) * num_symbols_ + o);
  double c = it == counts_.end() ? 0.0 : static_cast<double>(it->second);
  return (c + add_k_) / (total + add_k_ * static_cast<double>(num_symbols_));
}

// ---------------------------------------------------------------------------
// Hmm2

Hmm2::Hmm2(Hmm1 base, std::vector<double> trigram, PairEmissions pair_emissions, LambdaMode mode,
           Lambdas brants_lambdas)
    : base_(std::move(base)),
      trigram_(std::move(trigram)),
      pair_(std::move(pair_emissions)),
      mode_(mode),
      brants_(brants_lambdas) {
  const std::size_t n = base_.num_tags();
  if (trigram_.size() != n * n * n) throw std::invalid_argument("trigram table has the wrong size");
  for (double v : trigram_) {
    if (!(v >= 0.0)) throw std::invalid_argument("trigram table has a negative entry");
  }
  log_trigram_ = log_table(trigram_);
}

double Hmm2::emission2(TagId k, TagId j, TokenId o) const {
  return pair_.active(j, k) ? pair_.probability(j, k, o) : base_.emission(k, o);
}

double Hmm2::log_emission2(TagId k, TagId j, TokenId o) const {
  return pair_.active(j, k) ? safe_log(pair_.probability(j, k, o)) : base_.log_emission(k, o);
}

Hmm2 estimate_hmm2(const CorpusCounts& counts, const Hmm2Options& options) {
  Hmm1 base = estimate_hmm1(counts, options.add_k);
  const std::size_t n = counts.num_tags();

  Lambdas global{};
  if (!options.fixed_lambdas && options.lambda_mode == LambdaMode::brants) {
    global = lambdas_brants(counts);
  }
  std::vector<double> tri(n * n * n, 0.0), bi(n * n, 0.0), uni(n, 0.0);
  std::vector<double> ctx3(n * n, 0.0), ctx2(n, 0.0);
  for (const auto& [key, c] : counts.tag_trigrams) {
    tri[(key[0] * n + key[1]) * n + key[2]] = static_cast<double>(c);
    ctx3[key[0] * n + key[1]] += static_cast<double>(c);
  }
  for (const auto& [key, c] : counts.tag_bigrams) {
    bi[key[0] * n + key[1]] = static_cast<double>(c);
    ctx2[key[0]] += static_cast<double>(c);
  }
  for (const auto& [tag, c] : counts.tag_unigrams) uni[tag] = static_cast<double>(c);
  const double total = static_cast<double>(counts.total_tokens);

  std::vector<double> trigram(n * n * n);
  for (TagId i = 0; i < n; ++i) {
    for (TagId j = 0; j < n; ++j) {
      for (TagId k = 0; k < n; ++k) {
        const std::size_t ijk = (i * n + j) * n + k;
        Lambdas l = options.fixed_lambdas ? *options.fixed_lambdas
                    : options.lambda_mode == LambdaMode::thede_harper
                        ? lambdas_thede_harper(static_cast<Count>(bi[j * n + k]),
                                               static_cast<Count>(tri[ijk]))
                        : global;
        trigram[ijk] = l.trigram * ratio(tri[ijk], ctx3[i * n + j]) +
                       l.bigram * ratio(bi[j * n + k], ctx2[j]) + l.unigram * ratio(uni[k], total);
      }
    }
  }

  PairEmissions pair;
  if (options.pair_emissions) {
    std::map<std::tuple<TagId, TagId, TokenId>, Count> pc;
    for (const auto& [key, c] : counts.emissions2) {
      const auto& [prev, tag, token] = key;
      pc[{prev, tag, base.vocab().encode(token)}] += c;
    }
    pair = PairEmissions(n, base.vocab().num_symbols(), options.add_k,
                         options.pair_emission_min_count, pc);
  }
  LambdaMode mode = options.fixed_lambdas ? LambdaMode::brants : options.lambda_mode;
  if (options.fixed_lambdas) global = *options.fixed_lambdas;
  return Hmm2(std::move(base), std::move(trigram), std::move(pair), mode, global);
}

// ---------------------------------------------------------------------------
// Decoders

namespace {

void check_obs(std::span<const TokenId> obs, const Vocabulary& vocab) {
  if (obs.empty()) throw EmptyObservation();
  for (TokenId o : obs) {
    if (o >= vocab.num_symbols()) throw std::out_of_range("token id outside the vocabulary");
  }
}

ProbTrellis make_trellis(std::size_t order, std::size_t length, std::size_t states) {
  ProbTrellis tr;
  tr.order = order;
  tr.length = length;
  tr.states = states;
  tr.alpha.assign(length * states, kNegInf);
  tr.delta.assign(length * states, kNegInf);
  tr.psi.assign(length * states, -1);
  return tr;
}

// Index of the first maximal element.
std::size_t first_argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t s = 1; s < v.size(); ++s) {
    if (v[s] > v[best]) best = s;
  }
  return best;
}

}  // namespace

ForwardResult forward1(const Hmm1& hmm, std::span<const TokenId> obs) {
  check_obs(obs, hmm.vocab());
  const std::size_t n = hmm.num_tags();
  ProbTrellis tr = make_trellis(1, obs.size(), n);
  std::vector<double> terms(n);

  for (TagId j = 0; j < n; ++j) {
    tr.alpha[j] = hmm.log_initial(j) + hmm.log_emission(j, obs[0]);
  }
  for (std::size_t t = 1; t < obs.size(); ++t) {
    const double* prev = &tr.alpha[(t - 1) * n];
    for (TagId j = 0; j < n; ++j) {
      for (TagId i = 0; i < n; ++i) terms[i] = prev[i] + hmm.log_transition(i, j);
      tr.alpha[t * n + j] = log_sum_exp(terms) + hmm.log_emission(j, obs[t]);
    }
  }
  double ll = log_sum_exp(std::span<const double>(tr.alpha).subspan((obs.size() - 1) * n, n));
  return {std::move(tr), ll};
}

ViterbiResult viterbi1(const Hmm1& hmm, std::span<const TokenId> obs) {
  check_obs(obs, hmm.vocab());
  const std::size_t n = hmm.num_tags();
  const std::size_t len = obs.size();
  ProbTrellis tr = make_trellis(1, len, n);

  for (TagId j = 0; j < n; ++j) {
    tr.delta[j] = hmm.log_initial(j) + hmm.log_emission(j, obs[0]);
  }
  for (std::size_t t = 1; t < len; ++t) {
    const double* prev = &tr.delta[(t - 1) * n];
    for (TagId j = 0; j < n; ++j) {
      double best = kNegInf;
      std::int32_t arg = 0;
      for (TagId i = 0; i < n; ++i) {
        double v = prev[i] + hmm.log_transition(i, j);
        if (v > best) {
          best = v;
          arg = static_cast<std::int32_t>(i);
        }
      }
      tr.delta[t * n + j] = best + hmm.log_emission(j, obs[t]);
      tr.psi[t * n + j] = arg;
    }
  }

  ViterbiResult out;
  out.path.resize(len);
  auto last = std::span<const double>(tr.delta).subspan((len - 1) * n, n);
  std::size_t state = first_argmax(last);
  out.log_score = last[state];
  for (std::size_t t = len; t-- > 0;) {
    out.path[t] = static_cast<TagId>(state);
    if (t > 0) state = static_cast<std::size_t>(tr.psi[t * n + state]);
  }
  out.trellis = std::move(tr);
  return out;
}

ForwardResult forward2(const Hmm2& hmm, std::span<const TokenId> obs) {
  const Hmm1& base = hmm.first_order();
  check_obs(obs, base.vocab());
  const std::size_t n = hmm.num_tags();
  const std::size_t len = obs.size();
  ProbTrellis tr = make_trellis(2, len, n * n);

  for (TagId j = 0; j < n; ++j) tr.alpha[j] = base.log_initial(j) + base.log_emission(j, obs[0]);
  if (len >= 2) {
    for (TagId j = 0; j < n; ++j) {
      for (TagId k = 0; k < n; ++k) {
        tr.alpha[n * n + j * n + k] =
            tr.alpha[j] + base.log_transition(j, k) + base.log_emission(k, obs[1]);
      }
    }
  }
  std::vector<double> terms(n);
  for (std::size_t t = 2; t < len; ++t) {
    const double* prev = &tr.alpha[(t - 1) * n * n];
    for (TagId j = 0; j < n; ++j) {
      for (TagId k = 0; k < n; ++k) {
        for (TagId i = 0; i < n; ++i) terms[i] = prev[i * n + j] + hmm.log_trigram_prob(i, j, k);
        tr.alpha[t * n * n + j * n + k] = log_sum_exp(terms) + hmm.log_emission2(k, j, obs[t]);
      }
    }
  }
  auto last = std::span<const double>(tr.alpha).subspan((len - 1) * n * n, len == 1 ? n : n * n);
  double ll = log_sum_exp(last);
  return {std::move(tr), ll};
}

ViterbiResult viterbi2(const Hmm2& hmm, std::span<const TokenId> obs) {
  const Hmm1& base = hmm.first_order();
  check_obs(obs, base.vocab());
  const std::size_t n = hmm.num_tags();
  const std::size_t len = obs.size();
  const std::size_t nn = n * n;
  ProbTrellis tr = make_trellis(2, len, nn);

  for (TagId j = 0; j < n; ++j) tr.delta[j] = base.log_initial(j) + base.log_emission(j, obs[0]);
  ViterbiResult out;
  out.path.resize(len);
  if (len == 1) {
    auto first = std::span<const double>(tr.delta).subspan(0, n);
    std::size_t best = first_argmax(first);
    out.path[0] = static_cast<TagId>(best);
    out.log_score = first[best];
    out.trellis = std::move(tr);
    return out;
  }

  for (TagId j = 0; j < n; ++j) {
    for (TagId k = 0; k < n; ++k) {
      tr.delta[nn + j * n + k] = tr.delta[j] + base.log_transition(j, k) + base.log_emission(k, obs[1]);
      tr.psi[nn + j * n + k] = static_cast<std::int32_t>(j);
    }
  }
  for (std::size_t t = 2; t < len; ++t) {
    const double* prev = &tr.delta[(t - 1) * nn];
    for (TagId j = 0; j < n; ++j) {
      for (TagId k = 0; k < n; ++k) {
        double best = kNegInf;
        std::int32_t arg = 0;
        for (TagId i = 0; i < n; ++i) {
          double v = prev[i * n + j] + hmm.log_trigram_prob(i, j, k);
          if (v > best) {
            best = v;
            arg = static_cast<std::int32_t>(i);
          }
        }
        tr.delta[t * nn + j * n + k] = best + hmm.log_emission2(k, j, obs[t]);
        tr.psi[t * nn + j * n + k] = arg;
      }
    }
  }

  // psi at step t holds the tag at t - 2 for pair state (t-1, t).
  auto last = std::span<const double>(tr.delta).subspan((len - 1) * nn, nn);
  std::size_t state = first_argmax(last);
  out.log_score = last[state];
  out.path[len - 1] = static_cast<TagId>(state % n);
  out.path[len - 2] = static_cast<TagId>(state / n);
  for (std::size_t t = len - 1; t >= 2; --t) {
    auto before = static_cast<TagId>(tr.psi[t * nn + out.path[t - 1] * n + out.path[t]]);
    out.path[t - 2] = before;
  }
  out.trellis = std::move(tr);
  return out;
}

}  // namespace evhmm
