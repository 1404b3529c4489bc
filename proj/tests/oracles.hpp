#pragma once

// Brute-force reference implementations and random model generators shared by
// the unit tests and the acceptance binary.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "evhmm/belief.hpp"
#include "evhmm/hmm_belief.hpp"
#include "evhmm/hmm_prob.hpp"

namespace oracle {

using namespace evhmm;

inline FramePtr frame_of_size(std::size_t n) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < n; ++i) labels.push_back("s" + std::to_string(i));
  return make_frame(labels);
}

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t n, double floor = 0.0) {
  std::vector<double> p(n);
  double total = 0.0;
  for (double& v : p) total += v = floor + uniform(rng);
  for (double& v : p) v /= total;
  return p;
}

/// Random bba with up to `max_focal` focal elements; the empty set is allowed
/// when `allow_empty`.
inline MassFunction random_mass(std::mt19937_64& rng, const FramePtr& frame, std::size_t max_focal = 6,
                                bool allow_empty = true) {
  const std::size_t size = frame->power_set_size();
  std::size_t k = 1 + rng() % max_focal;
  std::vector<FocalElement> focal;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    SubsetMask s = static_cast<SubsetMask>(rng() % size);
    if (s == 0 && !allow_empty) s = frame->full();
    double w = 0.05 + uniform(rng);
    focal.push_back({s, w});
    total += w;
  }
  for (auto& f : focal) f.mass /= total;
  return MassFunction(frame, focal);
}

inline std::vector<double> naive_commonality(const MassFunction& m) {
  const std::size_t size = m.frame().power_set_size();
  std::vector<double> q(size, 0.0);
  for (std::size_t a = 0; a < size; ++a) {
    for (std::size_t b = 0; b < size; ++b) {
      if ((b & a) == a) q[a] += m.mass(static_cast<SubsetMask>(b));
    }
  }
  return q;
}

inline std::vector<double> naive_conjunctive(const MassFunction& m1, const MassFunction& m2) {
  std::vector<double> out(m1.frame().power_set_size(), 0.0);
  for (std::size_t b = 0; b < out.size(); ++b) {
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[b & c] += m1.mass(static_cast<SubsetMask>(b)) * m2.mass(static_cast<SubsetMask>(c));
    }
  }
  return out;
}

inline std::vector<double> naive_disjunctive(const MassFunction& m1, const MassFunction& m2) {
  std::vector<double> out(m1.frame().power_set_size(), 0.0);
  for (std::size_t b = 0; b < out.size(); ++b) {
    for (std::size_t c = 0; c < out.size(); ++c) {
      out[b | c] += m1.mass(static_cast<SubsetMask>(b)) * m2.mass(static_cast<SubsetMask>(c));
    }
  }
  return out;
}

inline std::vector<double> naive_pignistic(const MassFunction& m) {
  const std::size_t n = m.frame().size();
  std::vector<double> p(n, 0.0);
  for (const auto& f : m.focal_elements()) {
    if (f.subset == 0) continue;
    int card = std::popcount(f.subset);
    for (std::size_t j = 0; j < n; ++j) {
      if (f.subset & singleton(j)) p[j] += f.mass / card;
    }
  }
  for (double& v : p) v /= 1.0 - m.conflict();
  return p;
}

// ---------------------------------------------------------------------------
// Random probabilistic models

inline Hmm1 random_hmm1(std::mt19937_64& rng, std::size_t n, std::size_t words, double floor = 0.05) {
  std::vector<std::string> tags, vocab;
  for (std::size_t i = 0; i < n; ++i) tags.push_back("t" + std::to_string(i));
  for (std::size_t w = 0; w < words; ++w) vocab.push_back("w" + std::to_string(w));
  std::vector<double> trans, emit;
  for (std::size_t i = 0; i < n; ++i) {
    auto row = random_distribution(rng, n, floor);
    trans.insert(trans.end(), row.begin(), row.end());
  }
  for (std::size_t i = 0; i < n; ++i) {
    auto row = random_distribution(rng, words + 1, floor);
    emit.insert(emit.end(), row.begin(), row.end());
  }
  return Hmm1(tags, Vocabulary(vocab), random_distribution(rng, n, floor), trans, emit);
}

inline std::vector<double> random_trigram(std::mt19937_64& rng, std::size_t n, double floor = 0.05) {
  std::vector<double> tri;
  for (std::size_t c = 0; c < n * n; ++c) {
    auto row = random_distribution(rng, n, floor);
    tri.insert(tri.end(), row.begin(), row.end());
  }
  return tri;
}

inline std::vector<TokenId> random_obs(std::mt19937_64& rng, const Hmm1& hmm, std::size_t length) {
  std::vector<TokenId> obs(length);
  for (auto& o : obs) o = static_cast<TokenId>(rng() % hmm.vocab().num_symbols());
  return obs;
}

// ---------------------------------------------------------------------------
// Exhaustive path enumeration

struct PathSummary {
  double total = 0.0;
  double best = -1.0;
  std::vector<TagId> best_path;
};

template <typename Score>
PathSummary enumerate_paths(std::size_t n, std::size_t length, Score&& score) {
  PathSummary out;
  std::vector<TagId> path(length, 0);
  while (true) {
    double p = score(path);
    out.total += p;
    if (p > out.best) {
      out.best = p;
      out.best_path = path;
    }
    std::size_t pos = length;
    while (pos > 0) {
      --pos;
      if (++path[pos] < n) break;
      path[pos] = 0;
      if (pos == 0) return out;
    }
  }
}

inline PathSummary enumerate_hmm1(const Hmm1& hmm, std::span<const TokenId> obs) {
  return enumerate_paths(hmm.num_tags(), obs.size(), [&](const std::vector<TagId>& s) {
    double p = hmm.initial(s[0]) * hmm.emission(s[0], obs[0]);
    for (std::size_t t = 1; t < obs.size(); ++t) p *= hmm.transition(s[t - 1], s[t]) * hmm.emission(s[t], obs[t]);
    return p;
  });
}

inline PathSummary enumerate_hmm2(const Hmm2& hmm, std::span<const TokenId> obs) {
  const Hmm1& base = hmm.first_order();
  return enumerate_paths(hmm.num_tags(), obs.size(), [&](const std::vector<TagId>& s) {
    double p = base.initial(s[0]) * base.emission(s[0], obs[0]);
    if (obs.size() > 1) p *= base.transition(s[0], s[1]) * base.emission(s[1], obs[1]);
    for (std::size_t t = 2; t < obs.size(); ++t) {
      p *= hmm.trigram_prob(s[t - 2], s[t - 1], s[t]) * hmm.emission2(s[t], s[t - 1], obs[t]);
    }
    return p;
  });
}

/// Forward probability of being in tag k at step t, summed over the previous tag.
inline double forward2_marginal(const ProbTrellis& trellis, std::size_t n, std::size_t t, TagId k) {
  if (t == 0) return std::exp(trellis.alpha_at(0, k));
  double total = 0.0;
  for (TagId j = 0; j < n; ++j) total += std::exp(trellis.alpha_at(t, j * n + k));
  return total;
}

/// Second-order model whose trigram scores are T_ijk * a_jk and which has no
/// pair emissions: the probabilistic counterpart of a Bayesian belief HMM
/// built from `hmm` with the conjunctive pair rule.
inline Hmm2 conjunctive_counterpart(const Hmm2& hmm) {
  const std::size_t n = hmm.num_tags();
  const Hmm1& base = hmm.first_order();
  std::vector<double> tri(n * n * n);
  for (TagId i = 0; i < n; ++i) {
    for (TagId j = 0; j < n; ++j) {
      for (TagId k = 0; k < n; ++k) tri[(i * n + j) * n + k] = hmm.trigram_prob(i, j, k) * base.transition(j, k);
    }
  }
  return Hmm2(base, tri, PairEmissions{}, LambdaMode::thede_harper);
}

/// Step-greedy reference decoder for Bayesian belief HMMs: each step keeps
/// only the decided tag and picks the argmax of the one-step product.
inline std::vector<TagId> greedy_decode(const Hmm1& hmm, const Hmm2* hmm2, std::span<const TokenId> obs) {
  const std::size_t n = hmm.num_tags();
  std::vector<TagId> path;
  for (std::size_t t = 0; t < obs.size(); ++t) {
    TagId best = 0;
    double best_score = -1.0;
    for (TagId k = 0; k < n; ++k) {
      double s = hmm.emission(k, obs[t]);
      if (t == 0) {
        s *= hmm.initial(k);
      } else {
        s *= hmm.transition(path[t - 1], k);
        if (hmm2 && t >= 2) s *= hmm2->trigram_prob(path[t - 2], path[t - 1], k);
      }
      if (s > best_score) {
        best_score = s;
        best = k;
      }
    }
    path.push_back(best);
  }
  return path;
}

inline bool close_relative(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1e-300, std::abs(a), std::abs(b)});
}

}  // namespace oracle
