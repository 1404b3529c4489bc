// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "evhmm/belief.hpp"
#include "evhmm/cli.hpp"
#include "evhmm/hmm_belief.hpp"
#include "evhmm/hmm_prob.hpp"
#include "evhmm/model_file.hpp"
#include "evhmm/synthetic.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace evhmm;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args, const std::string& input = "") {
  args.insert(args.begin(), "evhmm");
  std::istringstream in(input);
  std::ostringstream out, err;
  int code = run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string format(const char* fmt, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, a, b, c, d);
  return buf;
}

const std::filesystem::path& scratch() {
  static const std::filesystem::path dir = [] {
    auto p = std::filesystem::temp_directory_path() / ("evhmm-acceptance-" + std::to_string(::getpid()));
    std::filesystem::create_directories(p);
    return p;
  }();
  return dir;
}

std::vector<std::vector<TaggedSentence>> fixture_corpora() {
  std::vector<std::vector<TaggedSentence>> out;
  for (const char* name : {"deterministic.tsv", "second_order.tsv", "minimal.tsv"}) out.push_back(load_corpus(name));
  for (std::uint64_t seed = 1; seed <= 3; ++seed) out.push_back(generate_second_order_corpus(seed));
  return out;
}

// ---------------------------------------------------------------------------

Outcome ds_core_oracles() {
  Outcome r;
  auto start = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto frame = oracle::frame_of_size(2 + trial % 3);
    auto m1 = oracle::random_mass(rng, frame, 8);
    auto m2 = oracle::random_mass(rng, frame, 8);
    auto back = commonality_to_mass(mass_to_commonality(m1)).dense();
    auto conj = conjunctive_combine(m1, m2).dense();
    auto disj = disjunctive_combine(m1, m2).dense();
    auto m1d = m1.dense();
    auto naive_conj = oracle::naive_conjunctive(m1, m2);
    auto naive_disj = oracle::naive_disjunctive(m1, m2);
    for (std::size_t s = 0; s < m1d.size(); ++s) {
      worst = std::max({worst, std::abs(back[s] - m1d[s]), std::abs(conj[s] - naive_conj[s]),
                        std::abs(disj[s] - naive_disj[s])});
    }
  }
  double elapsed = seconds_since(start);
  if (worst > 1e-12) r.fail(format("max deviation %.3g", worst));
  if (elapsed >= 5.0) r.fail(format("took %.2f s", elapsed));
  if (r.pass) r.detail = format("1000 bbas, max deviation %.2g, %.3f s", worst, elapsed);
  return r;
}

Outcome pignistic_pair() {
  Outcome r;
  std::mt19937_64 rng(102);
  double worst_sum = 0.0, worst_roundtrip = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = 1 + trial % 6;
    auto frame = oracle::frame_of_size(n);
    PignisticDistribution p(frame, oracle::random_distribution(rng, n, 1e-3));
    auto back = pignistic_transform(inverse_pignistic_consonant(p));
    auto betp = pignistic_transform(oracle::random_mass(rng, frame, 8, false));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      worst_roundtrip = std::max(worst_roundtrip, std::abs(back[i] - p[i]));
      total += betp[i];
    }
    worst_sum = std::max(worst_sum, std::abs(total - 1.0));
  }
  if (worst_sum > 1e-9) r.fail(format("BetP sum off by %.3g", worst_sum));
  if (worst_roundtrip > 1e-9) r.fail(format("roundtrip off by %.3g", worst_roundtrip));
  if (r.pass) r.detail = format("sum error %.2g, roundtrip error %.2g", worst_sum, worst_roundtrip);
  return r;
}

Outcome decoder_oracles() {
  Outcome r;
  auto start = Clock::now();
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (int trial = 0; trial < 100 && r.pass; ++trial) {
    auto base = oracle::random_hmm1(rng, 3, 4);
    Hmm2 hmm2(base, oracle::random_trigram(rng, 3));
    auto obs = oracle::random_obs(rng, base, 5);
    auto truth1 = oracle::enumerate_hmm1(base, obs);
    auto truth2 = oracle::enumerate_hmm2(hmm2, obs);
    if (viterbi1(base, obs).path != truth1.best_path) r.fail("viterbi1 path differs on model " + std::to_string(trial));
    if (viterbi2(hmm2, obs).path != truth2.best_path) r.fail("viterbi2 path differs on model " + std::to_string(trial));
    double f1 = std::exp(forward1(base, obs).log_likelihood);
    double f2 = std::exp(forward2(hmm2, obs).log_likelihood);
    worst = std::max({worst, std::abs(f1 - truth1.total) / truth1.total, std::abs(f2 - truth2.total) / truth2.total});
  }
  double elapsed = seconds_since(start);
  if (worst > 1e-10) r.fail(format("forward relative error %.3g", worst));
  if (elapsed >= 30.0) r.fail(format("took %.2f s", elapsed));
  if (r.pass) r.detail = format("100 models, forward relative error %.2g, %.3f s", worst, elapsed);
  return r;
}

Outcome bayesian_reduction() {
  Outcome r;
  std::mt19937_64 rng(104);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    auto base = oracle::random_hmm1(rng, 3, 4);
    Hmm2 hmm2(base, oracle::random_trigram(rng, 3));
    auto obs = oracle::random_obs(rng, base, 6);
    auto alpha1 = forward1(base, obs).trellis;
    auto alpha2 = forward2(oracle::conjunctive_counterpart(hmm2), obs).trellis;
    auto credal1 = credal_forward1(from_prob_hmm(base, BbaMode::bayesian), obs);
    auto credal2 = credal_forward2(from_prob_hmm(hmm2, BbaMode::bayesian), obs);
    double scale = 1.0;
    for (std::size_t t = 0; t < obs.size(); ++t) {
      auto col = base.emission_column(obs[t]);
      double c = 0.0;
      for (double v : col) c += v;
      scale *= c;
      for (TagId k = 0; k < 3; ++k) {
        double a1 = std::exp(alpha1.alpha_at(t, k));
        double a2 = oracle::forward2_marginal(alpha2, 3, t, k);
        double q1 = credal1.columns[t].commonality(singleton(k)) * scale;
        double q2 = credal2.columns[t].commonality(singleton(k)) * scale;
        worst = std::max({worst, std::abs(q1 - a1) / a1, std::abs(q2 - a2) / a2});
      }
    }
  }
  if (worst > 1e-10) r.fail(format("relative error %.3g", worst));
  if (r.pass) r.detail = format("50 models, orders 1 and 2, relative error %.2g", worst);
  return r;
}

Outcome certainty_collapse() {
  Outcome r;
  std::string model = (scratch() / "deterministic.evhmm").string();
  auto trained =
      cli({"train", fixture("deterministic.tsv").string(), "--model", model, "--unk-threshold", "0", "--add-k", "0"});
  if (trained.code != 0) {
    r.fail("train failed: " + trained.err);
    return r;
  }
  std::string plain;
  for (const auto& sentence : load_corpus("deterministic.tsv")) {
    for (std::size_t k = 0; k < sentence.size(); ++k) plain += (k ? " " : "") + sentence[k].surface;
    plain += '\n';
  }
  std::string pred = (scratch() / "pred.tsv").string();
  for (const char* paradigm : {"prob", "belief"}) {
    for (const char* order : {"1", "2"}) {
      std::string name = std::string(paradigm) + "-" + order;
      auto tagged = cli({"tag", "-", "--model", model, "--order", order, "--paradigm", paradigm}, plain);
      if (tagged.code != 0) {
        r.fail(name + " failed: " + tagged.err);
        continue;
      }
      std::ofstream(pred, std::ios::binary) << tagged.out;
      auto eval = cli({"eval", fixture("deterministic.tsv").string(), pred, "--model", model});
      if (eval.out.find("accuracy\t1.0000\n") == std::string::npos) r.fail(name + " accuracy below 1: " + eval.out);
    }
  }
  if (r.pass) r.detail = "prob-1, prob-2, belief-1, belief-2 all 1.0000 via train | tag | eval";
  return r;
}

Outcome smoothing_arithmetic() {
  Outcome r;
  auto zero = lambdas_thede_harper(0, 0);
  if (!(zero.trigram == 0.5 && zero.bigram == 0.25 && zero.unigram == 0.25)) r.fail("thede-harper weights at zero counts");
  double worst_lambda = 0.0, worst_row = 0.0;
  std::size_t contexts = 0, corpora = 0;
  for (const auto& corpus : fixture_corpora()) {
    auto counts = accumulate_counts(corpus, 1);
    if (counts.tag_trigrams.empty()) continue;
    ++corpora;
    worst_lambda = std::max(worst_lambda, std::abs(lambdas_brants(counts).sum() - 1.0));
    auto hmm = estimate_hmm2(counts, {});
    const std::size_t n = counts.num_tags();
    for (TagId i = 0; i < n; ++i) {
      for (TagId j = 0; j < n; ++j) {
        Count continued = 0;
        for (TagId k = 0; k < n; ++k) continued += counts.trigram(i, j, k);
        if (continued == 0) continue;
        ++contexts;
        double total = 0.0;
        for (TagId k = 0; k < n; ++k) total += hmm.trigram_prob(i, j, k);
        worst_row = std::max(worst_row, std::abs(total - 1.0));
      }
    }
  }
  if (worst_lambda > 1e-12) r.fail(format("brants weights sum off by %.3g", worst_lambda));
  if (worst_row > 1e-9) r.fail(format("trigram row sum off by %.3g", worst_row));
  if (r.pass) {
    r.detail = format("(0.5, 0.25, 0.25) exact; %g corpora, %g contexts, row error %.2g", static_cast<double>(corpora),
                      static_cast<double>(contexts), worst_row);
  }
  return r;
}

Outcome order_two_advantage() {
  Outcome r;
  auto start = Clock::now();
  std::map<std::string, double> sums;
  const int seeds = 20;
  for (int seed = 1; seed <= seeds && r.pass; ++seed) {
    auto synth = cli({"synth", "-", "--seed", std::to_string(seed), "--sentences", "250"});
    auto corpus = parse_text(synth.out);
    std::vector<TaggedSentence> train(corpus.begin(), corpus.begin() + 200), test(corpus.begin() + 200, corpus.end());
    std::ostringstream train_text, test_text;
    write_tagged_corpus(train_text, train);
    write_tagged_corpus(test_text, test);
    std::string model = (scratch() / ("synthetic-" + std::to_string(seed) + ".evhmm")).string();
    if (cli({"train", "-", "--model", model}, train_text.str()).code != 0) r.fail("train failed for seed " + std::to_string(seed));
    auto table = cli({"compare", "-", "--model", model}, test_text.str());
    if (table.code != 0) r.fail("compare failed for seed " + std::to_string(seed));
    std::istringstream rows(table.out);
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
      std::istringstream fields(line);
      std::string name, accuracy;
      fields >> name >> accuracy;
      if (accuracy == "ERROR") r.fail(name + " failed for seed " + std::to_string(seed));
      else sums[name] += std::stod(accuracy);
    }
  }
  double elapsed = seconds_since(start);
  auto mean = [&](const std::string& name) { return sums[name] / seeds; };
  if (!(mean("prob-2") > mean("prob-1"))) r.fail("prob order 2 does not beat order 1");
  if (!(mean("belief-2") > mean("belief-1"))) r.fail("belief order 2 does not beat order 1");
  if (elapsed >= 60.0) r.fail(format("took %.2f s", elapsed));
  std::string means = format("prob %.4f -> %.4f, belief %.4f -> %.4f", mean("prob-1"), mean("prob-2"),
                             mean("belief-1"), mean("belief-2"));
  if (r.pass) r.detail = means + format(", %.2f s", elapsed);
  else r.detail += " (" + means + ")";
  return r;
}

Outcome persistence() {
  Outcome r;
  std::size_t n = 0;
  for (const auto& corpus : fixture_corpora()) {
    std::ostringstream text;
    write_tagged_corpus(text, corpus);
    if (parse_text(text.str()) != corpus) r.fail("corpus roundtrip differs for fixture " + std::to_string(n));
    for (Count threshold : {0u, 1u}) {
      Model model{accumulate_counts(corpus, threshold), {threshold, 1.0 / 3.0, LambdaMode::thede_harper}};
      auto path = scratch() / ("roundtrip-" + std::to_string(n) + ".evhmm");
      save_model(model, path);
      Model back = load_model(path);
      std::ostringstream again;
      write_model(again, back);
      if (!(back == model) || again.str() != slurp(path)) r.fail("model roundtrip differs for fixture " + std::to_string(n));
    }
    ++n;
  }
  std::ostringstream golden;
  write_model(golden, load_model(fixture("minimal.evhmm")));
  if (golden.str() != slurp(fixture("minimal.evhmm"))) r.fail("hand-written model does not reserialize identically");
  if (r.pass) r.detail = format("%g corpora, models at two UNK thresholds", static_cast<double>(n));
  return r;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {"belief-function oracle equivalence", ds_core_oracles},
      {"pignistic pair", pignistic_pair},
      {"decoder oracles", decoder_oracles},
      {"bayesian reduction", bayesian_reduction},
      {"certainty collapse", certainty_collapse},
      {"smoothing arithmetic", smoothing_arithmetic},
      {"order-2 advantage", order_two_advantage},
      {"persistence", persistence},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].check();
    } catch (const std::exception& e) {
      outcome.fail(std::string("exception: ") + e.what());
    }
    failures += !outcome.pass;
    std::cout << "criterion " << i + 1 << ": " << (outcome.pass ? "PASS" : "FAIL") << "  " << criteria[i].name << "  ("
              << outcome.detail << ")\n";
  }
  std::filesystem::remove_all(scratch());
  return failures == 0 ? 0 : 1;
}
