#pragma once

// First- and second-order probabilistic HMMs estimated from corpus counts.
// All recursions run in log space; -infinity encodes an impossible path.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evhmm/corpus.hpp"

namespace evhmm {

using TokenId = std::uint32_t;

/// Known word types plus the reserved unknown symbol, which always has the
/// last id.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  std::size_t num_known() const { return words_.size(); }
  std::size_t num_symbols() const { return words_.size() + 1; }
  TokenId unk() const { return static_cast<TokenId>(words_.size()); }

  bool contains(std::string_view word) const { return index_.contains(std::string(word)); }
  TokenId encode(std::string_view word) const;
  std::vector<TokenId> encode(std::span<const std::string> words) const;
  const std::string& word(TokenId id) const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
};

/// First-order HMM: initial distribution, transition rows a_ij and emission
/// rows b_j(o) over the vocabulary symbols (unknown symbol included).
class Hmm1 {
 public:
  /// Tables are row-major: transitions N x N, emissions N x num_symbols.
  /// Every row must sum to 1 within 1e-9.
  Hmm1(std::vector<std::string> tags, Vocabulary vocab, std::vector<double> initial,
       std::vector<double> transitions, std::vector<double> emissions);

  std::size_t num_tags() const { return tags_.size(); }
  const std::vector<std::string>& tags() const { return tags_; }
  const Vocabulary& vocab() const { return vocab_; }

  double initial(TagId j) const { return initial_[j]; }
  double transition(TagId i, TagId j) const { return trans_[i * num_tags() + j]; }
  double emission(TagId j, TokenId o) const { return emit_[j * vocab_.num_symbols() + o]; }

  double log_initial(TagId j) const { return log_initial_[j]; }
  double log_transition(TagId i, TagId j) const { return log_trans_[i * num_tags() + j]; }
  double log_emission(TagId j, TokenId o) const {
    return log_emit_[j * vocab_.num_symbols() + o];
  }

  std::span<const double> initial_distribution() const { return initial_; }
  std::span<const double> transition_row(TagId i) const {
    return std::span<const double>(trans_).subspan(i * num_tags(), num_tags());
  }
  /// b_j(o) for every tag j.
  std::vector<double> emission_column(TokenId o) const;

 private:
  std::vector<std::string> tags_;
  Vocabulary vocab_;
  std::vector<double> initial_, trans_, emit_;
  std::vector<double> log_initial_, log_trans_, log_emit_;
};

/// a_ij = (C(i,j) + k) / (sum_j' C(i,j') + k N); emissions and the initial
/// distribution are smoothed the same way. Rows with no data are uniform.
Hmm1 estimate_hmm1(const CorpusCounts& counts, double add_k);

// ---------------------------------------------------------------------------
// Trigram interpolation

enum class LambdaMode { brants, thede_harper };

std::string_view to_string(LambdaMode mode);
LambdaMode parse_lambda_mode(std::string_view text);

struct Lambdas {
  double trigram = 0.0;
  double bigram = 0.0;
  double unigram = 0.0;
  double sum() const { return trigram + bigram + unigram; }
};

/// Weights from the bigram count C(j,k) and trigram count C(i,j,k), using
/// base-10 logarithms.
Lambdas lambdas_thede_harper(Count bigram_count, Count trigram_count);
Lambdas lambdas_thede_harper(const CorpusCounts& counts, TagId i, TagId j, TagId k);

/// Deleted interpolation over all trigram types. Throws NoTrigrams.
Lambdas lambdas_brants(const CorpusCounts& counts);

/// Relative-frequency emissions conditioned on (previous tag, tag). Contexts
/// seen fewer than `min_count` times back off to the first-order emission.
class PairEmissions {
 public:
  PairEmissions() = default;
  PairEmissions(std::size_t num_tags, std::size_t num_symbols, double add_k, Count min_count,
                const std::map<std::tuple<TagId, TagId, TokenId>, Count>& counts);

  bool active(TagId prev, TagId tag) const;
  /// Only meaningful when active(prev, tag).
  double probability(TagId prev, TagId tag, TokenId o) const;

 private:
  std::size_t num_tags_ = 0;
  std::size_t num_symbols_ = 0;
  double add_k_ = 0.0;
  std::vector<double> context_total_;  // < 0 for backed-off contexts
  std::unordered_map<std::uint64_t, Count> counts_;
};

struct Hmm2Options {
  LambdaMode lambda_mode = LambdaMode::brants;
  /// Replaces the configured mode with constant weights.
  std::optional<Lambdas> fixed_lambdas;
  double add_k = 0.001;
  bool pair_emissions = true;
  Count pair_emission_min_count = 5;
};

/// Second-order HMM. The first-order part supplies the initial distribution,
/// the bigram transitions used at t = 2, and the backoff emissions.
class Hmm2 {
 public:
  /// `trigram` is the N x N x N table of interpolated a_ijk, indexed
  /// (i * N + j) * N + k. In thede_harper mode its rows need not sum to 1.
  Hmm2(Hmm1 base, std::vector<double> trigram, PairEmissions pair_emissions = {},
       LambdaMode mode = LambdaMode::brants, Lambdas brants_lambdas = {});

  const Hmm1& first_order() const { return base_; }
  std::size_t num_tags() const { return base_.num_tags(); }
  LambdaMode lambda_mode() const { return mode_; }
  const Lambdas& brants_lambdas() const { return brants_; }
  /// False when trigram rows are interpolation scores rather than distributions.
  bool normalized() const { return mode_ == LambdaMode::brants; }

  double trigram_prob(TagId i, TagId j, TagId k) const { return trigram_[index(i, j, k)]; }
  double log_trigram_prob(TagId i, TagId j, TagId k) const { return log_trigram_[index(i, j, k)]; }
  std::span<const double> trigram_row(TagId i, TagId j) const {
    return std::span<const double>(trigram_).subspan(index(i, j, 0), num_tags());
  }

  /// b_k(o) conditioned on the previous tag j, or the first-order b_k(o) when
  /// the (j, k) context backs off.
  double emission2(TagId k, TagId j, TokenId o) const;
  double log_emission2(TagId k, TagId j, TokenId o) const;

 private:
  std::size_t index(TagId i, TagId j, TagId k) const { return (i * num_tags() + j) * num_tags() + k; }

  Hmm1 base_;
  std::vector<double> trigram_, log_trigram_;
  PairEmissions pair_;
  LambdaMode mode_;
  Lambdas brants_;
};

Hmm2 estimate_hmm2(const CorpusCounts& counts, const Hmm2Options& options);

/// Interpolated a_ijk from maximum-likelihood estimates. Unseen contexts give
/// zero for the corresponding estimate.
double interpolated_trigram(const CorpusCounts& counts, const Lambdas& lambdas, TagId i, TagId j,
                            TagId k);

// ---------------------------------------------------------------------------
// Decoding

/// Log-space trellis. Order-1 states are tags; order-2 states are pairs
/// (previous, current) indexed previous * N + current, and step 0 stores the
/// single-tag values in its first N entries.
struct ProbTrellis {
  std::size_t order = 1;
  std::size_t length = 0;
  std::size_t states = 0;
  bool log_space = true;
  std::vector<double> alpha;
  std::vector<double> delta;
  std::vector<std::int32_t> psi;

  double alpha_at(std::size_t t, std::size_t state) const { return alpha[t * states + state]; }
  double delta_at(std::size_t t, std::size_t state) const { return delta[t * states + state]; }
};

struct ForwardResult {
  ProbTrellis trellis;
  /// log P(O). In thede_harper mode this is a log score, not a likelihood.
  double log_likelihood = 0.0;
};

struct ViterbiResult {
  std::vector<TagId> path;
  double log_score = 0.0;
  ProbTrellis trellis;
};

ForwardResult forward1(const Hmm1& hmm, std::span<const TokenId> obs);
ViterbiResult viterbi1(const Hmm1& hmm, std::span<const TokenId> obs);
ForwardResult forward2(const Hmm2& hmm, std::span<const TokenId> obs);
ViterbiResult viterbi2(const Hmm2& hmm, std::span<const TokenId> obs);

double log_sum_exp(std::span<const double> values);

}  // namespace evhmm
