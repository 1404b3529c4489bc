#include "evhmm/hmm_belief.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace evhmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kBreakTolerance = 1e-6;

void check_obs(std::span<const TokenId> obs, std::size_t num_symbols) {
  if (obs.empty()) throw EmptyObservation();
  for (TokenId o : obs) {
    if (o >= num_symbols) throw std::out_of_range("token id outside the vocabulary");
  }
}

std::vector<double> dense_commonality(const MassFunction& m) {
  auto q = m.dense();
  lattice::superset_sum(q);
  return q;
}

// Moebius inversion of a propagated commonality table with round-off clamping.
std::vector<double> invert_commonality(std::vector<double> q) {
  lattice::superset_difference(q);
  for (double& v : q) {
    if (v < -kBreakTolerance) throw NotAMass("propagated commonality is not a mass function");
    if (v < 0.0) v = 0.0;
  }
  return q;
}

// Rescales the non-empty part of `raw` (given in units of exp(log_scale)) to
// sum to one, folding raw[0] into the true conflict.
void absorb(std::vector<double>& raw, double& log_scale, double& conflict) {
  if (log_scale != kNegInf) conflict += raw[0] * std::exp(log_scale);
  raw[0] = 0.0;
  double total = 0.0;
  for (double v : raw) total += v;
  if (total > 0.0) {
    for (double& v : raw) v /= total;
    log_scale += std::log(total);
  } else {
    log_scale = kNegInf;
  }
  conflict = std::clamp(conflict, 0.0, 1.0);
}

CredalColumn make_column(std::vector<double> scaled_masses, double log_scale, double conflict) {
  CredalColumn col;
  scaled_masses[0] = 0.0;
  lattice::superset_sum(scaled_masses);
  col.scaled_commonality = std::move(scaled_masses);
  col.log_scale = log_scale;
  col.conflict = conflict;
  return col;
}

// Unnormalized conditioning: mass of B moves to B & A.
std::vector<double> restrict_to(const std::vector<double>& m, SubsetMask admitted) {
  std::vector<double> out(m.size(), 0.0);
  for (std::size_t b = 0; b < m.size(); ++b) out[b & admitted] += m[b];
  return out;
}

// Commonality of the disjunctive combination of several conditional bbas.
std::vector<double> disjunction_commonality(const std::vector<const ConditionalTables*>& parts) {
  if (parts.size() == 1) return parts.front()->commonality;
  std::vector<double> b = parts.front()->implicability;
  for (std::size_t p = 1; p < parts.size(); ++p) {
    for (std::size_t a = 0; a < b.size(); ++a) b[a] *= parts[p]->implicability[a];
  }
  lattice::subset_difference(b);
  lattice::superset_sum(b);
  return b;
}

std::vector<TagId> members(SubsetMask s) {
  std::vector<TagId> out;
  for (; s; s &= s - 1) out.push_back(static_cast<TagId>(std::countr_zero(s)));
  return out;
}

// Conditional commonalities for first-order histories (a focal set) and
// second-order histories (a pair of focal sets), memoized per decoding call.
class ConditionalCache {
 public:
  ConditionalCache(const BeliefHmm1& first, const BeliefHmm2* second)
      : first_(first), second_(second) {}

  const std::vector<double>& given(SubsetMask s) {
    if (std::popcount(s) == 1) return first_.transition_tables(members(s)[0]).commonality;
    auto it = single_.find(s);
    if (it != single_.end()) return it->second;
    std::vector<const ConditionalTables*> parts;
    for (TagId j : members(s)) parts.push_back(&first_.transition_tables(j));
    return single_.emplace(s, disjunction_commonality(parts)).first->second;
  }

  const std::vector<double>& given(SubsetMask history, SubsetMask s) {
    auto key = (static_cast<std::uint64_t>(history) << 32) | s;
    auto it = pair_.find(key);
    if (it != pair_.end()) return it->second;
    std::vector<std::shared_ptr<const ConditionalTables>> owned;
    std::vector<const ConditionalTables*> parts;
    for (TagId i : members(history)) {
      for (TagId j : members(s)) {
        owned.push_back(second_->pair_tables(i, j));
        parts.push_back(owned.back().get());
      }
    }
    return pair_.emplace(key, disjunction_commonality(parts)).first->second;
  }

 private:
  const BeliefHmm1& first_;
  const BeliefHmm2* second_;
  std::unordered_map<SubsetMask, std::vector<double>> single_;
  std::unordered_map<std::uint64_t, std::vector<double>> pair_;
};

std::size_t first_argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t s = 1; s < v.size(); ++s) {
    if (v[s] > v[best]) best = s;
  }
  return best;
}

}  // namespace

// ---------------------------------------------------------------------------
// Modes and bba construction

std::string_view to_string(BbaMode mode) {
  switch (mode) {
    case BbaMode::bayesian:
      return "bayesian";
    case BbaMode::consonant:
      return "consonant";
    case BbaMode::gbt:
      return "gbt";
  }
  return "?";
}

BbaMode parse_bba_mode(std::string_view text) {
  if (text == "bayesian") return BbaMode::bayesian;
  if (text == "consonant") return BbaMode::consonant;
  if (text == "gbt") return BbaMode::gbt;
  throw std::invalid_argument("unknown bba mode: " + std::string(text));
}

MassFunction bba_from_scores(const FramePtr& frame, std::span<const double> scores, BbaMode mode) {
  if (scores.size() != frame->size()) throw std::invalid_argument("score row size mismatch");
  if (mode == BbaMode::gbt) return gbt_bba_from_likelihoods(frame, scores);

  double total = 0.0;
  for (double s : scores) {
    if (!(s >= 0.0)) throw std::invalid_argument("scores must be non-negative");
    total += s;
  }
  if (total <= 0.0) throw AllZeroLikelihoods();
  std::vector<double> p(scores.begin(), scores.end());
  for (double& v : p) v /= total;
  PignisticDistribution dist(frame, std::move(p));
  return mode == BbaMode::bayesian ? bayesian_bba(dist) : inverse_pignistic_consonant(dist);
}

ObservationBbaStrategy::ObservationBbaStrategy(BbaMode mode, const Hmm1& source)
    : mode_(mode), num_tags_(source.num_tags()), num_symbols_(source.vocab().num_symbols()) {
  emissions_.resize(num_tags_ * num_symbols_);
  for (TagId j = 0; j < num_tags_; ++j) {
    for (TokenId o = 0; o < num_symbols_; ++o) emissions_[j * num_symbols_ + o] = source.emission(j, o);
  }
}

std::vector<double> ObservationBbaStrategy::likelihoods(TokenId o) const {
  std::vector<double> col(num_tags_);
  for (TagId j = 0; j < num_tags_; ++j) col[j] = emissions_.at(j * num_symbols_ + o);
  return col;
}

MassFunction ObservationBbaStrategy::bba(const FramePtr& frame, TokenId o) const {
  return bba_from_scores(frame, likelihoods(o), mode_);
}

ConditionalTables::ConditionalTables(MassFunction m)
    : bba(std::move(m)), mass(bba.dense()), commonality(mass), implicability(mass) {
  lattice::superset_sum(commonality);
  lattice::subset_sum(implicability);
}

// ---------------------------------------------------------------------------
// Models

BeliefHmm1::BeliefHmm1(FramePtr frame, MassFunction initial, std::vector<MassFunction> transitions,
                       ObservationBbaStrategy observations)
    : frame_(std::move(frame)), initial_(std::move(initial)), observations_(std::move(observations)) {
  if (transitions.size() != frame_->size()) {
    throw std::invalid_argument("one transition bba per state is required");
  }
  if (!(initial_.frame() == *frame_)) throw FrameMismatch();
  for (auto& m : transitions) {
    if (!(m.frame() == *frame_)) throw FrameMismatch();
    transitions_.emplace_back(std::move(m));
  }
}

struct BeliefHmm2::Cache {
  std::mutex mutex;
  std::vector<std::shared_ptr<const ConditionalTables>> pairs;
};

BeliefHmm2::BeliefHmm2(BeliefHmm1 first_order, std::vector<MassFunction> trigram_evidence, PairRule rule)
    : first_(std::move(first_order)),
      trigram_evidence_(std::move(trigram_evidence)),
      rule_(rule),
      cache_(std::make_shared<Cache>()) {
  const std::size_t n = first_.num_tags();
  if (trigram_evidence_.size() != n * n) throw std::invalid_argument("need N x N trigram bbas");
  for (const auto& m : trigram_evidence_) {
    if (!(m.frame() == *first_.frame())) throw FrameMismatch();
  }
  cache_->pairs.resize(n * n);
}

std::shared_ptr<const ConditionalTables> BeliefHmm2::pair_tables(TagId i, TagId j) const {
  const std::size_t key = i * num_tags() + j;
  {
    std::lock_guard lock(cache_->mutex);
    if (cache_->pairs.at(key)) return cache_->pairs[key];
  }
  const MassFunction& evidence = trigram_evidence(i, j);
  const MassFunction& step = first_.transition_bba(j);
  auto tables = std::make_shared<const ConditionalTables>(
      rule_ == PairRule::conjunctive ? conjunctive_combine(evidence, step)
                                     : disjunctive_combine(evidence, step));
  std::lock_guard lock(cache_->mutex);
  if (!cache_->pairs[key]) cache_->pairs[key] = std::move(tables);
  return cache_->pairs[key];
}

MassFunction pair_transition_bba(const BeliefHmm2& bh, TagId i, TagId j) {
  return bh.pair_tables(i, j)->bba;
}

BeliefHmm1 from_prob_hmm(const Hmm1& hmm, BbaMode mode) {
  FramePtr frame = make_frame(hmm.tags());
  MassFunction initial = bba_from_scores(frame, hmm.initial_distribution(), mode);
  std::vector<MassFunction> transitions;
  for (TagId i = 0; i < hmm.num_tags(); ++i) {
    transitions.push_back(bba_from_scores(frame, hmm.transition_row(i), mode));
  }
  return BeliefHmm1(frame, std::move(initial), std::move(transitions), ObservationBbaStrategy(mode, hmm));
}

BeliefHmm2 from_prob_hmm(const Hmm2& hmm, BbaMode mode, PairRule rule) {
  BeliefHmm1 first = from_prob_hmm(hmm.first_order(), mode);
  const FramePtr& frame = first.frame();
  std::vector<MassFunction> evidence;
  for (TagId i = 0; i < hmm.num_tags(); ++i) {
    for (TagId j = 0; j < hmm.num_tags(); ++j) {
      auto row = hmm.trigram_row(i, j);
      bool any = std::any_of(row.begin(), row.end(), [](double v) { return v > 0.0; });
      // A context without any trigram evidence says nothing about the next state.
      evidence.push_back(any ? bba_from_scores(frame, row, mode) : MassFunction::vacuous(frame));
    }
  }
  return BeliefHmm2(std::move(first), std::move(evidence), rule);
}

MassFunction observation_bba(const BeliefHmm1& bh, TokenId o) {
  return bh.observations().bba(bh.frame(), o);
}

// ---------------------------------------------------------------------------
// Trellis columns

double CredalColumn::commonality(SubsetMask subset) const {
  double scale = log_scale == kNegInf ? 0.0 : std::exp(log_scale);
  if (subset == 0) return conflict + scale * scaled_commonality[0];
  return scale * scaled_commonality[subset];
}

std::vector<double> CredalColumn::masses() const {
  std::vector<double> m = scaled_commonality;
  lattice::superset_difference(m);
  double scale = log_scale == kNegInf ? 0.0 : std::exp(log_scale);
  for (double& v : m) v = std::max(v, 0.0) * scale;
  m[0] = conflict;
  return m;
}

// ---------------------------------------------------------------------------
// Forward propagation

CredalTrellis credal_forward1(const BeliefHmm1& bh, std::span<const TokenId> obs) {
  check_obs(obs, bh.observations().num_symbols());
  const FramePtr& frame = bh.frame();
  const std::size_t size = frame->power_set_size();
  ConditionalCache cond(bh, nullptr);
  CredalTrellis trellis;

  std::vector<double> state = conjunctive_combine(bh.initial_bba(), observation_bba(bh, obs[0])).dense();
  double log_scale = 0.0, conflict = 0.0;
  absorb(state, log_scale, conflict);
  trellis.columns.push_back(make_column(state, log_scale, conflict));

  for (std::size_t t = 1; t < obs.size(); ++t) {
    auto qb = dense_commonality(observation_bba(bh, obs[t]));
    std::vector<double> q(size, 0.0);
    for (SubsetMask s = 1; s < size; ++s) {
      double w = state[s];
      if (w <= 0.0) continue;
      const auto& qa = cond.given(s);
      q[0] += w;
      for (std::size_t a = 1; a < size; ++a) q[a] += w * qa[a];
    }
    for (std::size_t a = 1; a < size; ++a) q[a] *= qb[a];
    state = invert_commonality(std::move(q));
    absorb(state, log_scale, conflict);
    trellis.columns.push_back(make_column(state, log_scale, conflict));
  }
  return trellis;
}

CredalTrellis credal_forward2(const BeliefHmm2& bh, std::span<const TokenId> obs) {
  const BeliefHmm1& first = bh.first_order();
  check_obs(obs, first.observations().num_symbols());
  const std::size_t size = bh.frame()->power_set_size();
  ConditionalCache cond(first, &bh);
  CredalTrellis trellis;

  // Components keyed by the focal set of the previous step (0 before t = 2);
  // each holds scaled masses on the current step.
  std::map<SubsetMask, std::vector<double>> components;
  std::vector<double> initial =
      conjunctive_combine(first.initial_bba(), observation_bba(first, obs[0])).dense();
  double log_scale = 0.0, conflict = 0.0;
  absorb(initial, log_scale, conflict);
  trellis.columns.push_back(make_column(initial, log_scale, conflict));
  components.emplace(0, std::move(initial));

  for (std::size_t t = 1; t < obs.size(); ++t) {
    auto qb = dense_commonality(observation_bba(first, obs[t]));
    std::map<SubsetMask, std::vector<double>> next;
    for (const auto& [history, masses] : components) {
      for (SubsetMask s = 1; s < size; ++s) {
        double w = masses[s];
        if (w <= 0.0) continue;
        const auto& qa = history == 0 ? cond.given(s) : cond.given(history, s);
        auto& q = next.try_emplace(s, size, 0.0).first->second;
        q[0] += w;
        for (std::size_t a = 1; a < size; ++a) q[a] += w * qa[a] * qb[a];
      }
    }

    double new_conflict = 0.0, total = 0.0;
    std::vector<double> aggregate(size, 0.0);
    for (auto& [key, q] : next) {
      q = invert_commonality(std::move(q));
      new_conflict += q[0];
      q[0] = 0.0;
      for (std::size_t a = 1; a < size; ++a) total += q[a];
    }
    if (log_scale != kNegInf) conflict = std::clamp(conflict + new_conflict * std::exp(log_scale), 0.0, 1.0);
    if (total > 0.0) {
      log_scale += std::log(total);
    } else {
      log_scale = kNegInf;
    }
    for (auto& [key, q] : next) {
      for (std::size_t a = 1; a < size; ++a) {
        q[a] = total > 0.0 ? q[a] / total : 0.0;
        aggregate[a] += q[a];
      }
    }
    trellis.columns.push_back(make_column(std::move(aggregate), log_scale, conflict));
    components = std::move(next);
  }
  return trellis;
}

// ---------------------------------------------------------------------------
// Credal Viterbi

namespace {

CredalResult credal_viterbi(const BeliefHmm1& first, const BeliefHmm2* second,
                            std::span<const TokenId> obs) {
  check_obs(obs, first.observations().num_symbols());
  const FramePtr& frame = first.frame();
  const std::size_t n = frame->size();
  const std::size_t size = frame->power_set_size();
  ConditionalCache cond(first, second);
  CredalResult result;

  // t = 1: pignistic decision on the initial bba combined with the observation.
  MassFunction initial = conjunctive_combine(first.initial_bba(), observation_bba(first, obs[0]));
  if (initial.conflict() >= 1.0 - 1e-12) {
    throw TotalConflict("step 1: initial state and observation are in total conflict");
  }
  PignisticDistribution betp = pignistic_transform(initial);
  auto decided = static_cast<TagId>(first_argmax(betp.probs()));

  CredalColumn col0 = make_column(initial.dense(), 0.0, initial.conflict());
  col0.decision = decided;
  col0.admitted = singleton(decided);
  col0.candidates.push_back({0, initial.conflict(), decided, (1.0 - initial.conflict()) * betp[decided]});
  result.trellis.columns.push_back(std::move(col0));
  result.path.push_back(decided);

  std::vector<double> state = restrict_to(initial.dense(), singleton(decided));
  double log_scale = 0.0, conflict = 0.0;
  absorb(state, log_scale, conflict);
  // History (focal set at t - 2) of every tag admitted at t - 1.
  std::vector<SubsetMask> history(n, 0);

  std::vector<double> scores(n);
  for (std::size_t t = 1; t < obs.size(); ++t) {
    auto qb = dense_commonality(observation_bba(first, obs[t]));
    std::vector<double> summed(size, 0.0);
    CredalColumn col;
    SubsetMask admitted = 0;
    std::vector<SubsetMask> next_history(n, 0);
    std::vector<double> best_for_tag(n, -1.0);
    std::optional<CandidateConflict> best;

    for (SubsetMask s = 1; s < size; ++s) {
      double w = state[s];
      if (w <= 0.0) continue;
      SubsetMask h = 0;
      if (second != nullptr && t >= 2) {
        for (TagId j : members(s)) h |= history[j];
      }
      const auto& qa = h != 0 ? cond.given(h, s) : cond.given(s);
      std::vector<double> term(size);
      term[0] = w;
      for (std::size_t a = 1; a < size; ++a) term[a] = w * qa[a] * qb[a];
      for (std::size_t a = 0; a < size; ++a) summed[a] += term[a];

      std::vector<double> m = invert_commonality(std::move(term));
      double kept = w - m[0];
      CandidateConflict cand{s, std::clamp(m[0] / w, 0.0, 1.0), 0, 0.0};
      if (kept <= w * 1e-12) {
        cand.conflict = 1.0;
        col.candidates.push_back(cand);
        continue;
      }
      // score(j) = (w - m(empty)) * BetP(j) = sum over A containing j of m(A) / |A|
      std::fill(scores.begin(), scores.end(), 0.0);
      for (std::size_t a = 1; a < size; ++a) {
        if (m[a] <= 0.0) continue;
        double share = m[a] / std::popcount(a);
        for (TagId j : members(static_cast<SubsetMask>(a))) scores[j] += share;
      }
      cand.decision = static_cast<TagId>(first_argmax(scores));
      cand.score = scores[cand.decision];
      col.candidates.push_back(cand);

      admitted |= singleton(cand.decision);
      if (cand.score > best_for_tag[cand.decision]) {
        best_for_tag[cand.decision] = cand.score;
        next_history[cand.decision] = s;
      }
      if (!best || cand.score > best->score) best = cand;
    }
    if (!best) {
      throw TotalConflict("step " + std::to_string(t + 1) + ": every candidate is in total conflict");
    }

    std::vector<double> m_delta = invert_commonality(std::move(summed));
    double col_scale = log_scale, col_conflict = conflict;
    std::vector<double> col_masses = m_delta;
    absorb(col_masses, col_scale, col_conflict);
    CredalColumn filled = make_column(std::move(col_masses), col_scale, col_conflict);
    filled.candidates = std::move(col.candidates);
    filled.decision = best->decision;
    filled.admitted = admitted;
    result.trellis.columns.push_back(std::move(filled));
    result.path.push_back(best->decision);

    state = restrict_to(m_delta, admitted);
    absorb(state, log_scale, conflict);
    history = std::move(next_history);
  }
  return result;
}

}  // namespace

CredalResult credal_viterbi1(const BeliefHmm1& bh, std::span<const TokenId> obs) {
  return credal_viterbi(bh, nullptr, obs);
}

CredalResult credal_viterbi2(const BeliefHmm2& bh, std::span<const TokenId> obs) {
  return credal_viterbi(bh.first_order(), &bh, obs);
}

}  // namespace evhmm
