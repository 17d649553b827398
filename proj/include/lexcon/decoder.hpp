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


#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexcon/constraints.hpp"
#include "lexcon/error.hpp"
#include "lexcon/score_matrix.hpp"
#include "lexcon/scorers.hpp"
#include "lexcon/vocab.hpp"

namespace lexcon {

enum class Algorithm { kBeam, kDba, kGbs };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kBeam: return "beam";
    case Algorithm::kDba: return "dba";
    case Algorithm::kGbs: return "gbs";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "beam") return Algorithm::kBeam;
  if (s == "dba") return Algorithm::kDba;
  if (s == "gbs") return Algorithm::kGbs;
  throw Error("unknown algorithm '" + std::string(s) + "'");
}

struct DecodeConfig {
  std::size_t beam_size = 10;
  std::size_t max_length = 50;
  double prune_threshold = 20.0;  // raw log-prob gap; 0 disables
  bool early_stopping = false;
  Algorithm algorithm = Algorithm::kDba;
  std::size_t gbs_base_beam = 10;

  void validate() const {
    if (beam_size < 1) throw Error("beam size must be >= 1");
    if (max_length < 1) throw Error("max length must be >= 1");
    if (!(prune_threshold >= 0.0)) throw Error("prune threshold must be >= 0");
    if (gbs_base_beam < 1) throw Error("GBS base beam must be >= 1");
  }

  // Beam capacity for a sentence with `c` constraint tokens.
  std::size_t capacity(std::size_t c) const {
    return algorithm == Algorithm::kGbs ? gbs_base_beam * (c + 1) : beam_size;
  }
};

struct Hypothesis {
  TokenSeq tokens;  // starts with BOS
  double raw_score = 0.0;
  ConstraintState cstate;
  bool finished = false;

  std::size_t bank() const { return cstate.num_met(); }
  std::size_t generated() const { return generated_length(tokens); }
  double normalized_score() const {
    return raw_score / static_cast<double>(generated());
  }
};

using Beam = std::vector<Hypothesis>;

// A proposed extension of beam[row] by `token`. Finished hypotheses are
// carried forward as inert candidates with `carried` set and their last token
// (EOS) in `token`.
struct Candidate {
  std::size_t row = 0;
  TokenId token = 0;
  ConstraintState new_cstate;
  double score = 0.0;
  bool carried = false;

  std::size_t bank() const { return new_cstate.num_met(); }
};

// Total order used for every selection: higher score, then lower beam row,
// then lower token id.
inline bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.row != b.row) return a.row < b.row;
  return a.token < b.token;
}

// Rows of the score matrix line up with the unfinished hypotheses, in beam
// order.
inline std::vector<std::size_t> active_rows(const Beam& beam) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < beam.size(); ++i) {
    if (!beam[i].finished) rows.push_back(i);
  }
  return rows;
}

namespace detail {

inline void check_matrix(const Beam& beam, const std::vector<std::size_t>& active,
                         const ScoreMatrix& scores) {
  if (scores.rows() != active.size()) {
    throw ContractViolation("score matrix has " + std::to_string(scores.rows()) +
                            " rows for " + std::to_string(active.size()) +
                            " active hypotheses");
  }
  (void)beam;
}

// Best `k` matrix cells, sorted. `eos_ok(row)` gates the EOS column.
template <class EosGate>
std::vector<Candidate> top_cells(const Beam& beam,
                                 const std::vector<std::size_t>& active,
                                 const ScoreMatrix& scores, std::size_t k,
                                 TokenId eos, EosGate eos_ok) {
  std::vector<Candidate> heap;
  if (k == 0) return heap;
  heap.reserve(k + 1);
  for (std::size_t r = 0; r < active.size(); ++r) {
    const std::size_t row = active[r];
    const double base = beam[row].raw_score;
    const bool allow_eos = eos_ok(row);
    auto cells = scores.row(r);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const double lp = cells[j];
      if (lp == kNegInf) continue;
      const auto tok = static_cast<TokenId>(j);
      if (tok == eos && !allow_eos) continue;
      Candidate c;
      c.row = row;
      c.token = tok;
      c.score = base + lp;
      if (heap.size() == k) {
        if (!ranks_before(c, heap.front())) continue;
        std::pop_heap(heap.begin(), heap.end(), ranks_before);
        heap.back() = std::move(c);
      } else {
        heap.push_back(std::move(c));
      }
      std::push_heap(heap.begin(), heap.end(), ranks_before);
    }
  }
  std::sort_heap(heap.begin(), heap.end(), ranks_before);
  return heap;
}

inline Candidate carry(const Beam& beam, std::size_t row) {
  Candidate c;
  c.row = row;
  c.token = beam[row].tokens.back();
  c.new_cstate = beam[row].cstate;
  c.score = beam[row].raw_score;
  c.carried = true;
  return c;
}

}  // namespace detail

inline Hypothesis materialize(const Beam& beam, const Candidate& c, TokenId eos) {
  const Hypothesis& parent = beam[c.row];
  if (c.carried) return parent;
  Hypothesis h;
  h.tokens.reserve(parent.tokens.size() + 1);
  h.tokens = parent.tokens;
  h.tokens.push_back(c.token);
  h.raw_score = c.score;
  h.cstate = c.new_cstate;
  h.finished = c.token == eos;
  return h;
}

// Plain top-k over the whole matrix plus carried finished hypotheses. EOS is
// never gated here.
inline Beam kbest_standard(const Beam& beam, const ScoreMatrix& scores,
                           std::size_t k, TokenId eos) {
  const auto active = active_rows(beam);
  detail::check_matrix(beam, active, scores);
  auto cands = detail::top_cells(beam, active, scores, k, eos,
                                 [](std::size_t) { return true; });
  for (std::size_t i = 0; i < beam.size(); ++i) {
    if (beam[i].finished) cands.push_back(detail::carry(beam, i));
  }
  for (auto& c : cands) {
    if (!c.carried) c.new_cstate = beam[c.row].cstate;
  }
  std::sort(cands.begin(), cands.end(), ranks_before);
  if (cands.size() > k) cands.resize(k);
  Beam next;
  next.reserve(cands.size());
  for (const auto& c : cands) next.push_back(materialize(beam, c, eos));
  return next;
}

// The candidate pool of one constrained step: the global top-k cells, every
// constraint-advancing token for every hypothesis, and each hypothesis's best
// single token. EOS is dropped wherever constraints are still unmet, as are
// zero-probability cells. Deduplicated on (row, token) and returned in
// (row, token) order with advanced constraint states.
inline std::vector<Candidate> generate_candidates(const Beam& beam,
                                                  const ScoreMatrix& scores,
                                                  const ConstraintSet& set,
                                                  std::size_t k, TokenId eos) {
  const auto active = active_rows(beam);
  detail::check_matrix(beam, active, scores);
  auto eos_ok = [&](std::size_t row) { return eos_allowed(beam[row].cstate, set); };

  std::vector<Candidate> cands = detail::top_cells(beam, active, scores, k, eos, eos_ok);

  for (std::size_t r = 0; r < active.size(); ++r) {
    const std::size_t row = active[r];
    const Hypothesis& h = beam[row];
    auto cells = scores.row(r);
    const bool allow_eos = eos_ok(row);

    for (TokenId tok : next_needed_tokens(h.cstate, set)) {
      const double lp = cells[static_cast<std::size_t>(tok)];
      if (lp == kNegInf) continue;
      if (tok == eos && !allow_eos) continue;
      cands.push_back({row, tok, {}, h.raw_score + lp, false});
    }

    std::size_t best = cells.size();
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (cells[j] == kNegInf) continue;
      if (static_cast<TokenId>(j) == eos && !allow_eos) continue;
      if (best == cells.size() || cells[j] > cells[best]) best = j;
    }
    if (best != cells.size()) {
      cands.push_back({row, static_cast<TokenId>(best), {}, h.raw_score + cells[best], false});
    }
  }
  for (std::size_t i = 0; i < beam.size(); ++i) {
    if (beam[i].finished) cands.push_back(detail::carry(beam, i));
  }

  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    return a.row != b.row ? a.row < b.row : a.token < b.token;
  });
  cands.erase(std::unique(cands.begin(), cands.end(),
                          [](const Candidate& a, const Candidate& b) {
                            return a.row == b.row && a.token == b.token;
                          }),
              cands.end());
  for (auto& c : cands) {
    if (!c.carried) c.new_cstate = advance(beam[c.row].cstate, set, c.token);
  }
  return cands;
}

struct BankAllocation {
  std::vector<std::size_t> slots_per_bank;  // C+1 entries

  std::size_t total() const {
    std::size_t n = 0;
    for (auto s : slots_per_bank) n += s;
    return n;
  }
  friend bool operator==(const BankAllocation&, const BankAllocation&) = default;
};

// floor(k / (C+1)) slots per bank; the remainder goes to the topmost bank C.
inline BankAllocation allocate_banks(std::size_t k, std::size_t c) {
  const std::size_t base = k / (c + 1);
  BankAllocation a{std::vector<std::size_t>(c + 1, base)};
  a.slots_per_bank[c] += k - (c + 1) * base;
  return a;
}

// Moves the surplus of every overfilled bank (more slots than candidates) to
// banks with unmet demand, nearest first. Overfilled banks are visited from C
// down to 0; between two neighbours at the same distance the higher bank is
// served first. Surplus nobody can use is dropped.
inline BankAllocation adjust_allocation(const BankAllocation& alloc,
                                        std::span<const std::size_t> counts) {
  auto slots = alloc.slots_per_bank;
  const std::size_t n = slots.size();
  if (counts.size() != n) throw InternalError("bank count mismatch");
  for (std::size_t i = n; i-- > 0;) {
    if (slots[i] <= counts[i]) continue;
    std::size_t surplus = slots[i] - counts[i];
    slots[i] = counts[i];
    for (std::size_t d = 1; surplus > 0 && d < n; ++d) {
      for (std::size_t j : {i + d, i - d}) {
        // i - d wraps around for d > i; the bound check rejects it.
        if (j >= n || surplus == 0) continue;
        if (counts[j] > slots[j]) {
          const std::size_t give = std::min(surplus, counts[j] - slots[j]);
          slots[j] += give;
          surplus -= give;
        }
      }
    }
  }
  return {std::move(slots)};
}

namespace detail {

inline std::vector<std::vector<Candidate>> group_by_bank(std::vector<Candidate> cands,
                                                         std::size_t c) {
  std::vector<std::vector<Candidate>> banks(c + 1);
  for (auto& cand : cands) {
    if (cand.bank() > c) throw InternalError("candidate bank exceeds C");
    banks[cand.bank()].push_back(std::move(cand));
  }
  for (auto& b : banks) std::sort(b.begin(), b.end(), ranks_before);
  return banks;
}

inline Beam fill(const Beam& beam, const std::vector<std::vector<Candidate>>& banks,
                 const std::vector<std::size_t>& slots, TokenId eos) {
  Beam next;
  for (std::size_t i = banks.size(); i-- > 0;) {
    const std::size_t take = std::min(slots[i], banks[i].size());
    for (std::size_t j = 0; j < take; ++j) next.push_back(materialize(beam, banks[i][j], eos));
  }
  return next;
}

}  // namespace detail

// Dynamic beam allocation: one beam of size k shared out across the C+1
// banks, re-balanced every step. Result is ordered by bank, then score.
inline Beam kbest_dba(const Beam& beam, const ScoreMatrix& scores,
                      const ConstraintSet& set, std::size_t k, TokenId eos,
                      BankAllocation* used = nullptr) {
  const std::size_t c = set.total_tokens();
  auto banks = detail::group_by_bank(generate_candidates(beam, scores, set, k, eos), c);
  std::vector<std::size_t> counts;
  counts.reserve(banks.size());
  for (const auto& b : banks) counts.push_back(b.size());
  auto alloc = adjust_allocation(allocate_banks(k, c), counts);
  if (used) *used = alloc;
  return detail::fill(beam, banks, alloc.slots_per_bank, eos);
}

// Grid beam search as simulated inside the DBA framework: b slots per bank,
// beam capacity b(C+1), no adjustment, so unreachable banks waste their slots.
inline Beam kbest_gbs(const Beam& beam, const ScoreMatrix& scores,
                      const ConstraintSet& set, std::size_t base_beam, TokenId eos) {
  const std::size_t c = set.total_tokens();
  const std::size_t capacity = base_beam * (c + 1);
  auto banks = detail::group_by_bank(generate_candidates(beam, scores, set, capacity, eos), c);
  return detail::fill(beam, banks, std::vector<std::size_t>(c + 1, base_beam), eos);
}

// Drops every hypothesis (finished or not) whose raw score is more than
// `threshold` below the best finished raw score. Threshold 0 disables.
inline Beam prune_beam(const Beam& beam, std::span<const Hypothesis> finished_pool,
                       double threshold) {
  if (threshold <= 0.0 || finished_pool.empty()) return beam;
  double best = kNegInf;
  for (const auto& h : finished_pool) best = std::max(best, h.raw_score);
  Beam kept;
  kept.reserve(beam.size());
  for (const auto& h : beam) {
    if (!(h.raw_score < best - threshold)) kept.push_back(h);
  }
  return kept;
}

// Finished hypotheses compare by normalized score, then earlier finish, then
// lexicographically smaller tokens.
inline bool finished_ranks_before(const Hypothesis& a, const Hypothesis& b) {
  const double na = a.normalized_score();
  const double nb = b.normalized_score();
  if (na != nb) return na > nb;
  if (a.tokens.size() != b.tokens.size()) return a.tokens.size() < b.tokens.size();
  return a.tokens < b.tokens;
}

inline DecodeResult finalize(std::span<const Hypothesis> finished_pool,
                             const Beam& beam, const Vocabulary& vocab,
                             const ConstraintSet& set) {
  const Hypothesis* best = nullptr;
  for (const auto& h : finished_pool) {
    if (!eos_allowed(h.cstate, set)) continue;
    if (!best || finished_ranks_before(h, *best)) best = &h;
  }
  if (!best) {
    // Nothing finished: best-effort pick by bank, then raw score, then beam
    // position.
    for (const auto& h : beam) {
      if (!best || h.bank() > best->bank() ||
          (h.bank() == best->bank() && h.raw_score > best->raw_score)) {
        best = &h;
      }
    }
  }
  if (!best) throw InternalError("finalize called with no hypotheses");
  DecodeResult r;
  r.output_tokens = best->tokens;
  r.output_text = detokenize(best->tokens, vocab);
  r.raw_score = best->raw_score;
  r.normalized_score = best->normalized_score();
  r.finished = best->finished;
  r.constraints_met = eos_allowed(best->cstate, set);
  return r;
}

using StepObserver = std::function<void(int step, const Beam& beam)>;

// Runs constrained (or plain) beam search to completion: score the active
// hypotheses, pick the next beam, prune, and stop once every hypothesis on the
// beam is finished, the length limit is hit, or, with early stopping, the
// first hypothesis finishes.
template <NextTokenScorer Scorer>
DecodeResult decode(const Scorer& scorer, const Vocabulary& vocab,
                    const ConstraintSet& constraints, const DecodeConfig& config,
                    std::string_view source = {},
                    const StepObserver& observer = nullptr) {
  config.validate();
  if (scorer.vocab_size() != vocab.size()) {
    throw ContractViolation("scorer vocabulary size " +
                            std::to_string(scorer.vocab_size()) +
                            " does not match vocabulary size " +
                            std::to_string(vocab.size()));
  }
  for (const auto& p : constraints.phrases()) {
    for (TokenId t : p) {
      if (!vocab.contains(t)) throw InvalidConstraint("constraint token outside vocabulary");
    }
  }
  static const ConstraintSet kNone;
  const ConstraintSet& set =
      config.algorithm == Algorithm::kBeam ? kNone : constraints;
  const TokenId eos = vocab.eos_id();

  Beam beam{Hypothesis{{vocab.bos_id()}, 0.0, ConstraintState::initial(set), false}};
  std::vector<Hypothesis> pool;
  std::vector<TokenSeq> histories;
  int steps = 0;

  for (std::size_t t = 1; t <= config.max_length; ++t) {
    histories.clear();
    for (const auto& h : beam) {
      if (!h.finished) histories.push_back(h.tokens);
    }
    if (histories.empty()) break;
    const ScoreMatrix scores = scorer.step(histories, source);
    if (scores.cols() != vocab.size()) {
      throw ContractViolation("score matrix has " + std::to_string(scores.cols()) +
                              " columns, expected " + std::to_string(vocab.size()));
    }

    switch (config.algorithm) {
      case Algorithm::kBeam:
        beam = kbest_standard(beam, scores, config.beam_size, eos);
        break;
      case Algorithm::kDba:
        beam = kbest_dba(beam, scores, set, config.beam_size, eos);
        break;
      case Algorithm::kGbs:
        beam = kbest_gbs(beam, scores, set, config.gbs_base_beam, eos);
        break;
    }
    steps = static_cast<int>(t);

    for (const auto& h : beam) {
      if (h.tokens.back() == eos && !eos_allowed(h.cstate, set)) {
        throw InternalError("EOS generated with unmet constraints");
      }
      if (h.finished && h.generated() == t) pool.push_back(h);
    }
    beam = prune_beam(beam, pool, config.prune_threshold);
    if (observer) observer(steps, beam);

    if (beam.empty()) break;
    if (config.early_stopping && !pool.empty()) break;
    if (std::all_of(beam.begin(), beam.end(),
                    [](const Hypothesis& h) { return h.finished; })) {
      break;
    }
  }

  DecodeResult r = finalize(pool, beam, vocab, set);
  r.steps_used = steps;
  return r;
}

// Sum of per-step log-probabilities of tokens[1..] under `scorer`. EOS, if
// present, must be last.
template <NextTokenScorer Scorer>
double sequence_log_prob(const Scorer& scorer, std::span<const TokenId> tokens,
                         std::string_view source = {}) {
  double total = 0.0;
  std::vector<TokenSeq> history(1, TokenSeq{tokens.front()});
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    total += scorer.step(history, source)(0, static_cast<std::size_t>(tokens[i]));
    history[0].push_back(tokens[i]);
  }
  return total;
}

}  // namespace lexcon
