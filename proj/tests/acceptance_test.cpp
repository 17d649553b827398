// Copyright 2026 The lexcon Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "lexcon/lexcon.hpp"
#include "test_util.hpp"

namespace {

using namespace lexcon;
using testing::make_set;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  %-28s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
  std::fflush(stdout);
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Plain contiguous-substring check, one phrase at a time.
bool substring_scan(const TokenSeq& out, const ConstraintSet& set) {
  for (const auto& p : set.phrases()) {
    if (std::search(out.begin(), out.end(), p.begin(), p.end()) == out.end()) return false;
  }
  return true;
}

Outcome scaling() {
  const auto vocab = Vocabulary::synthetic(10001);  // |V_T| = 10,000
  const SyntheticScorer scorer(2024, vocab.size());
  BenchConfig cfg;
  cfg.constraint_counts = {1, 2, 4, 8, 12};
  cfg.decode.beam_size = 10;
  cfg.decode.gbs_base_beam = 10;
  cfg.decode.max_length = 30;
  cfg.sentences = 50;
  const auto recs = bench_run(scorer, vocab, cfg);
  double dmin = 1e300, dmax = 0, g1 = 0, g12 = 0;
  std::string cells;
  for (const auto& r : recs) {
    cells += " " + std::string(to_string(r.algorithm)) + "@" + std::to_string(r.constraint_tokens) +
             fmt("=%.4f", r.mean_s);
    if (r.algorithm == Algorithm::kDba) {
      dmin = std::min(dmin, r.mean_s);
      dmax = std::max(dmax, r.mean_s);
    } else if (r.constraint_tokens == 1) {
      g1 = r.mean_s;
    } else if (r.constraint_tokens == 12) {
      g12 = r.mean_s;
    }
  }
  const double dba_ratio = dmax / dmin;
  const double gbs_ratio = g12 / g1;
  return {dba_ratio <= 1.5 && gbs_ratio >= 3.0,
          fmt("dba max/min %.3f (<= 1.5), gbs C12/C1 %.2f (>= 3);", dba_ratio, gbs_ratio) + cells};
}

struct OracleInstance {
  testing::RandomLM model;
  ConstraintSet set;
  std::vector<TokenSeq> phrases;
  std::size_t max_len;
};

std::vector<OracleInstance> oracle_instances() {
  std::mt19937_64 rng(20240601);
  std::vector<OracleInstance> out;
  for (int i = 0; i < 200; ++i) {
    const std::size_t words = 1 + rng() % 3;  // |V_T| = words + 2 <= 5
    auto model = testing::random_lm(rng, words);
    const std::size_t c = 1 + rng() % std::min<std::size_t>(3, words);
    auto phrases = testing::random_phrases(rng, model.vocab, c, 2, true);
    const std::size_t n = std::max<std::size_t>(c + 1, 3 + rng() % 4);  // <= 6
    out.push_back({model, make_set(phrases), phrases, std::min<std::size_t>(n, 6)});
  }
  return out;
}

Outcome oracle_optimality(const std::vector<OracleInstance>& cases) {
  std::size_t agree = 0, feasible = 0;
  double worst = 0;
  for (const auto& inst : cases) {
    DecodeConfig cfg;
    cfg.beam_size = 10000;
    cfg.max_length = inst.max_len;
    cfg.prune_threshold = 0;
    const auto r = decode(inst.model.lm, inst.model.vocab, inst.set, cfg);
    const auto o = exhaustive_best(inst.model.lm, inst.model.vocab, inst.set, inst.max_len);
    if (!o.best_tokens) {
      if (!r.constraints_met) ++agree;
      continue;
    }
    ++feasible;
    const double gap = std::abs(r.normalized_score - o.best_normalized_score);
    worst = std::max(worst, gap);
    if (r.constraints_met && gap <= 1e-9) ++agree;
  }
  return {agree == cases.size(),
          fmt("%zu/%zu agree (%zu feasible), max gap %.2e", agree, cases.size(), feasible, worst)};
}

Outcome monotone(const std::vector<OracleInstance>& cases) {
  std::size_t violations = 0, pairs = 0;
  for (const auto& inst : cases) {
    const auto& v = inst.model.vocab;
    const auto none = exhaustive_best(inst.model.lm, v, ConstraintSet{}, inst.max_len);
    const auto full = exhaustive_best(inst.model.lm, v, inst.set, inst.max_len);
    if (full.best_normalized_score > none.best_normalized_score) ++violations;
    if (inst.phrases.size() >= 2) {
      ++pairs;
      std::vector<TokenSeq> first(inst.phrases.begin(), inst.phrases.begin() + 1);
      std::vector<TokenSeq> two(inst.phrases.begin(), inst.phrases.begin() + 2);
      const auto a = exhaustive_best(inst.model.lm, v, make_set(first), inst.max_len);
      const auto b = exhaustive_best(inst.model.lm, v, make_set(two), inst.max_len);
      if (b.best_normalized_score > a.best_normalized_score) ++violations;
    }
  }
  return {violations == 0, fmt("%zu instances, %zu second-constraint pairs, %zu violations",
                               cases.size(), pairs, violations)};
}

Outcome satisfaction() {
  std::mt19937_64 rng(77);
  std::size_t met = 0, scan_fail = 0, gating = 0, runs = 0;
  for (int i = 0; i < 1000; ++i) {
    auto model = testing::random_lm(rng, 10, 3, 20, 8);
    const std::size_t c = 1 + rng() % 8;
    auto set = make_set(testing::random_phrases(rng, model.vocab, c, 3, false));
    DecodeConfig cfg;
    cfg.beam_size = 10;
    cfg.max_length = 2 * c + 10;
    cfg.algorithm = i % 4 == 3 ? Algorithm::kGbs : Algorithm::kDba;
    cfg.gbs_base_beam = 3;
    auto observer = [&](int, const Beam& beam) {
      for (const auto& h : beam) {
        if (h.finished && !eos_allowed(h.cstate, set)) ++gating;
      }
    };
    try {
      const auto r = decode(model.lm, model.vocab, set, cfg, "", observer);
      ++runs;
      if (r.constraints_met) {
        ++met;
        if (!substring_scan(r.output_tokens, set)) ++scan_fail;
      }
    } catch (const InternalError&) {
      ++gating;
    }
  }
  return {scan_fail == 0 && gating == 0 && runs == 1000,
          fmt("%zu decodes, %zu met, %zu failed the scan, %zu EOS-gating violations", runs, met,
              scan_fail, gating)};
}

Outcome zero_constraint() {
  std::mt19937_64 rng(99);
  std::size_t same = 0;
  double worst = 0;
  const ConstraintSet none;
  for (int i = 0; i < 100; ++i) {
    DecodeConfig cfg;
    cfg.beam_size = 1 + rng() % 12;
    cfg.max_length = 5 + rng() % 20;
    DecodeResult a, b;
    auto both = [&](const auto& scorer, const Vocabulary& v) {
      cfg.algorithm = Algorithm::kBeam;
      a = decode(scorer, v, none, cfg);
      cfg.algorithm = Algorithm::kDba;
      b = decode(scorer, v, none, cfg);
    };
    if (i % 2) {
      auto model = testing::random_lm(rng, 4 + rng() % 8);
      both(model.lm, model.vocab);
    } else {
      auto v = Vocabulary::synthetic(20 + rng() % 200);
      both(SyntheticScorer(rng(), v.size()), v);
    }
    const double gap = std::abs(a.raw_score - b.raw_score);
    worst = std::max(worst, gap);
    if (a.output_tokens == b.output_tokens && gap <= 1e-12) ++same;
  }
  return {same == 100, fmt("%zu/100 identical, max raw gap %.2e", same, worst)};
}

Outcome allocation() {
  std::mt19937_64 rng(3);
  std::size_t bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const std::size_t k = 1 + rng() % 64;
    const std::size_t c = rng() % 16;
    std::vector<std::size_t> counts(c + 1);
    std::size_t total = 0;
    for (auto& n : counts) total += (n = rng() % 3 == 0 ? 0 : rng() % (2 * k + 1));
    const auto base = allocate_banks(k, c);
    const auto adj = adjust_allocation(base, counts);
    bool ok = base.total() == k && adj.total() == std::min(k, total) &&
              adj.slots_per_bank.size() == c + 1;
    for (std::size_t b = 0; b <= c; ++b) ok = ok && adj.slots_per_bank[b] <= counts[b];
    if (!ok) ++bad;
  }
  const bool fig = allocate_banks(5, 4).slots_per_bank == std::vector<std::size_t>{1, 1, 1, 1, 1};
  return {bad == 0 && fig, fmt("10000 triples, %zu invariant failures; k=5,C=4 one slot per bank: %s", bad,
                               fig ? "yes" : "no")};
}

Outcome unwinding() {
  auto v = testing::words({"a", "b", "c"});
  const TokenId a = v.lookup("a"), b = v.lookup("b"), c = v.lookup("c");
  auto ab = make_set({{a, b}});
  auto ab_c = make_set({{a, b}, {c}});
  int ok = 0;
  auto s1 = advance(ConstraintState::initial(ab), ab, a);
  ok += s1.met_prefix() == std::vector<std::size_t>{1} && s1.in_progress() == 0u && s1.num_met() == 1;
  auto s2 = advance(ConstraintState::from_prefixes(ab, {1}), ab, c);
  ok += s2.met_prefix() == std::vector<std::size_t>{0} && s2.num_met() == 0;
  auto s3 = advance(ConstraintState::from_prefixes(ab_c, {1, 0}), ab_c, c);
  ok += s3.met_prefix() == std::vector<std::size_t>{0, 1} && s3.num_met() == 1;

  testing::PhrasalAbortFixture fx;
  DecodeConfig cfg;
  cfg.beam_size = 5;
  cfg.max_length = 8;
  const auto r = decode(fx.scorer, fx.vocab, fx.constraints, cfg);
  std::vector<std::size_t> trace;
  auto st = ConstraintState::initial(fx.constraints);
  for (std::size_t i = 1; i + 1 < r.output_tokens.size(); ++i) {
    st = advance(st, fx.constraints, r.output_tokens[i]);
    trace.push_back(st.num_met());
  }
  const bool scripted = r.output_text == "x z x y" && r.constraints_met &&
                        trace == std::vector<std::size_t>{1, 0, 1, 2};
  return {ok == 3 && scripted, fmt("%d/3 transition examples; ", ok) + "abort decode -> \"" +
                                   r.output_text + "\"" + (scripted ? " with num_met 1,0,1,2" : "")};
}

Outcome garbage() {
  constexpr std::size_t N = 12;
  testing::GarbageFixture fx(N);
  DecodeConfig cfg;
  cfg.beam_size = 4;
  cfg.max_length = N;
  cfg.prune_threshold = 0;
  const int full = decode(fx.scorer, fx.vocab, fx.constraints, cfg).steps_used;
  cfg.prune_threshold = 20;
  const int pruned = decode(fx.scorer, fx.vocab, fx.constraints, cfg).steps_used;
  cfg.prune_threshold = 0;
  cfg.early_stopping = true;
  const int early = decode(fx.scorer, fx.vocab, fx.constraints, cfg).steps_used;
  // The constrained completion "a b </s>" finishes at step 3.
  return {full == static_cast<int>(N) && pruned < full && early == 3,
          fmt("steps: no pruning %d (N=12), prune=20 %d, early stop %d", full, pruned, early)};
}

Outcome pearson() {
  auto xy = [](std::vector<double> x, std::vector<double> y) {
    std::vector<PlacementPair> p;
    for (std::size_t i = 0; i < x.size(); ++i) p.push_back({x[i], y[i]});
    return pearson_r(p);
  };
  const double r1 = xy({0.0, 0.25, 0.5, 0.75}, {0.1, 0.3, 0.5, 0.7});
  const double r2 = xy({0.0, 0.25, 0.5, 0.75}, {0.7, 0.5, 0.3, 0.1});
  const double r3 = xy({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5});
  const bool ok = std::abs(r1 - 1.0) <= 1e-12 && std::abs(r2 + 1.0) <= 1e-12 &&
                  std::abs(r3 - 0.8) <= 1e-12;
  return {ok, fmt("r = %.15f, %.15f, %.15f", r1, r2, r3)};
}

}  // namespace

int main() {
  const auto cases = oracle_instances();
  report("oracle_optimality", [&] { return oracle_optimality(cases); });
  report("monotone_restriction", [&] { return monotone(cases); });
  report("constraint_satisfaction", satisfaction);
  report("zero_constraint_equivalence", zero_constraint);
  report("allocation_properties", allocation);
  report("unwinding_fixture", unwinding);
  report("garbage_generation", garbage);
  report("pearson_r", pearson);
  report("scaling_dba_vs_gbs", scaling);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
