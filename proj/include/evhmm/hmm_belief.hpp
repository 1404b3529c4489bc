#pragma once

// Belief HMMs: transition, initial and observation parameters are mass
// functions on the tag frame. Forward propagation mixes the conditional bbas
// of every focal element of the previous step (disjunctive extension for
// non-singleton focal sets) and combines the result conjunctively with the
// observation, all in the commonality domain. The credal Viterbi decoder
// decides one tag per step from conflict-weighted pignistic probabilities and
// restricts the next step to the decided tags.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "evhmm/belief.hpp"
#include "evhmm/hmm_prob.hpp"

namespace evhmm {

enum class BbaMode { bayesian, consonant, gbt };

std::string_view to_string(BbaMode mode);
BbaMode parse_bba_mode(std::string_view text);

/// Turns a non-negative score row into a bba: bayesian and consonant modes
/// normalize the row first, gbt rescales it by its maximum. Throws
/// AllZeroLikelihoods on an all-zero row.
MassFunction bba_from_scores(const FramePtr& frame, std::span<const double> scores, BbaMode mode);

/// Builds m_b[o] from the emission column b_j(o) of a probabilistic model.
class ObservationBbaStrategy {
 public:
  ObservationBbaStrategy(BbaMode mode, const Hmm1& source);

  BbaMode mode() const { return mode_; }
  std::size_t num_symbols() const { return num_symbols_; }
  /// b_j(o) for every tag j.
  std::vector<double> likelihoods(TokenId o) const;
  MassFunction bba(const FramePtr& frame, TokenId o) const;

 private:
  BbaMode mode_;
  std::size_t num_tags_;
  std::size_t num_symbols_;
  std::vector<double> emissions_;  // N x num_symbols
};

/// A conditional bba together with its dense mass, commonality and
/// implicability tables.
struct ConditionalTables {
  explicit ConditionalTables(MassFunction m);
  MassFunction bba;
  std::vector<double> mass;
  std::vector<double> commonality;
  std::vector<double> implicability;
};

class BeliefHmm1 {
 public:
  BeliefHmm1(FramePtr frame, MassFunction initial, std::vector<MassFunction> transitions,
             ObservationBbaStrategy observations);

  const FramePtr& frame() const { return frame_; }
  std::size_t num_tags() const { return frame_->size(); }
  const MassFunction& initial_bba() const { return initial_; }
  /// m_a[s_i], the bba on the next state given the singleton s_i.
  const MassFunction& transition_bba(TagId i) const { return transitions_[i].bba; }
  const ConditionalTables& transition_tables(TagId i) const { return transitions_[i]; }
  const ObservationBbaStrategy& observations() const { return observations_; }

 private:
  FramePtr frame_;
  MassFunction initial_;
  std::vector<ConditionalTables> transitions_;
  ObservationBbaStrategy observations_;
};

/// How the two single-step transition bbas of a pair history are combined.
enum class PairRule { conjunctive, disjunctive };

/// Second-order belief HMM. The bba conditioned on the history (s_i, s_j) is
/// the combination of the trigram evidence m_a[s_i -> s_j] (what s_i says
/// about the next state once the chain has passed through s_j) with the
/// first-order bba m_a[s_j].
class BeliefHmm2 {
 public:
  /// `trigram_evidence` holds N x N bbas indexed i * N + j.
  BeliefHmm2(BeliefHmm1 first_order, std::vector<MassFunction> trigram_evidence,
             PairRule rule = PairRule::conjunctive);

  const BeliefHmm1& first_order() const { return first_; }
  const FramePtr& frame() const { return first_.frame(); }
  std::size_t num_tags() const { return first_.num_tags(); }
  PairRule rule() const { return rule_; }
  const MassFunction& trigram_evidence(TagId i, TagId j) const {
    return trigram_evidence_[i * num_tags() + j];
  }

  /// Combined bba conditioned on (s_i, s_j); computed once per pair and cached.
  /// Safe to call concurrently.
  std::shared_ptr<const ConditionalTables> pair_tables(TagId i, TagId j) const;

 private:
  struct Cache;

  BeliefHmm1 first_;
  std::vector<MassFunction> trigram_evidence_;
  PairRule rule_;
  std::shared_ptr<Cache> cache_;
};

MassFunction pair_transition_bba(const BeliefHmm2& bh, TagId i, TagId j);

BeliefHmm1 from_prob_hmm(const Hmm1& hmm, BbaMode mode);
BeliefHmm2 from_prob_hmm(const Hmm2& hmm, BbaMode mode, PairRule rule = PairRule::conjunctive);

MassFunction observation_bba(const BeliefHmm1& bh, TokenId o);

// ---------------------------------------------------------------------------
// Credal trellis and decoders

struct CandidateConflict {
  /// Focal set of the previous step the candidate is conditioned on (0 for
  /// the initial step).
  SubsetMask condition = 0;
  /// Share of the candidate's mass that ends on the empty set.
  double conflict = 0.0;
  TagId decision = 0;
  double score = 0.0;
};

/// One time step. Masses are kept rescaled so that the non-empty part sums to
/// one; `log_scale` restores true values and `conflict` is the true m(empty).
struct CredalColumn {
  std::vector<double> scaled_commonality;  // entry 0 unused
  double log_scale = 0.0;
  double conflict = 0.0;
  std::optional<TagId> decision;
  SubsetMask admitted = 0;
  std::vector<CandidateConflict> candidates;

  /// True q(A); q(empty) is the total mass.
  double commonality(SubsetMask subset) const;
  /// Dense true masses (Moebius inversion of the commonality).
  std::vector<double> masses() const;
};

struct CredalTrellis {
  std::vector<CredalColumn> columns;
};

struct CredalResult {
  std::vector<TagId> path;
  CredalTrellis trellis;
};

CredalTrellis credal_forward1(const BeliefHmm1& bh, std::span<const TokenId> obs);
CredalTrellis credal_forward2(const BeliefHmm2& bh, std::span<const TokenId> obs);
/// Throw EmptyObservation, or TotalConflict when every candidate of a step
/// is in total conflict.
CredalResult credal_viterbi1(const BeliefHmm1& bh, std::span<const TokenId> obs);
CredalResult credal_viterbi2(const BeliefHmm2& bh, std::span<const TokenId> obs);

}  // namespace evhmm
