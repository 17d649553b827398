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

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lexcon/constraints.hpp"
#include "lexcon/error.hpp"
#include "lexcon/score_matrix.hpp"
#include "lexcon/scorers.hpp"
#include "lexcon/vocab.hpp"

namespace lexcon {

namespace detail {

inline bool place_phrases(std::span<const TokenId> body, const ConstraintSet& set,
                          const std::vector<std::size_t>& order, std::size_t next,
                          std::vector<bool>& used) {
  if (next == order.size()) return true;
  const std::size_t p = order[next];
  const TokenSeq& phrase = set.phrase(p);
  if (phrase.size() > body.size()) return false;
  const std::size_t last_start = set.anchored(p) ? 0 : body.size() - phrase.size();
  for (std::size_t s = 0; s <= last_start; ++s) {
    bool ok = true;
    for (std::size_t i = 0; i < phrase.size() && ok; ++i) {
      ok = !used[s + i] && body[s + i] == phrase[i];
    }
    if (!ok) continue;
    for (std::size_t i = 0; i < phrase.size(); ++i) used[s + i] = true;
    if (place_phrases(body, set, order, next + 1, used)) return true;
    for (std::size_t i = 0; i < phrase.size(); ++i) used[s + i] = false;
  }
  return false;
}

}  // namespace detail

// True when every phrase occurs contiguously in `body` (generated tokens,
// BOS and EOS stripped) with all occurrences pairwise disjoint, so duplicated
// phrases need separate occurrences. Anchored phrases must sit at position 0.
// Independent of the constraint state machine.
inline bool satisfies_constraints(std::span<const TokenId> body,
                                  const ConstraintSet& set) {
  std::vector<std::size_t> order(set.num_phrases());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Longest first prunes the search fastest.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return set.phrase(a).size() > set.phrase(b).size();
  });
  std::vector<bool> used(body.size(), false);
  return detail::place_phrases(body, set, order, 0, used);
}

// Same check on a full output sequence: leading BOS and trailing EOS removed.
inline bool output_satisfies(std::span<const TokenId> output, const Vocabulary& vocab,
                             const ConstraintSet& set) {
  std::size_t b = 0;
  std::size_t e = output.size();
  if (b < e && output[b] == vocab.bos_id()) ++b;
  if (e > b && output[e - 1] == vocab.eos_id()) --e;
  return satisfies_constraints(output.subspan(b, e - b), set);
}

struct OracleResult {
  std::optional<TokenSeq> best_tokens;  // BOS ... EOS
  double best_normalized_score = kNegInf;
  double best_raw_score = kNegInf;
  std::size_t num_sequences_scanned = 0;
};

inline constexpr double kOracleBudget = 1e7;

namespace detail {

template <NextTokenScorer Scorer>
void enumerate(const Scorer& scorer, const Vocabulary& vocab, const ConstraintSet& set,
               std::size_t max_len, TokenSeq& history, double acc, OracleResult& out) {
  const std::vector<TokenSeq> batch{history};
  const ScoreMatrix m = scorer.step(batch);
  const auto row = m.row(0);
  const std::size_t generated = history.size() - 1;
  const TokenId eos = vocab.eos_id();

  const double eos_lp = row[static_cast<std::size_t>(eos)];
  if (eos_lp != kNegInf) {
    ++out.num_sequences_scanned;
    std::span<const TokenId> body(history.data() + 1, generated);
    if (satisfies_constraints(body, set)) {
      const double raw = acc + eos_lp;
      const double norm = raw / static_cast<double>(generated + 1);
      TokenSeq seq = history;
      seq.push_back(eos);
      bool better = !out.best_tokens || norm > out.best_normalized_score;
      if (!better && norm == out.best_normalized_score) {
        better = seq.size() < out.best_tokens->size() ||
                 (seq.size() == out.best_tokens->size() && seq < *out.best_tokens);
      }
      if (better) {
        out.best_tokens = std::move(seq);
        out.best_normalized_score = norm;
        out.best_raw_score = raw;
      }
    }
  }
  if (generated + 1 >= max_len) return;
  for (std::size_t j = 0; j < row.size(); ++j) {
    const auto tok = static_cast<TokenId>(j);
    if (tok == eos || row[j] == kNegInf) continue;
    history.push_back(tok);
    enumerate(scorer, vocab, set, max_len, history, acc + row[j], out);
    history.pop_back();
  }
}

}  // namespace detail

// Scores every EOS-terminated sequence with at most `max_len` generated tokens
// and returns the best one that satisfies the constraints, by normalized
// score, then shorter, then lexicographically smaller.
template <NextTokenScorer Scorer>
OracleResult exhaustive_best(const Scorer& scorer, const Vocabulary& vocab,
                             const ConstraintSet& set, std::size_t max_len) {
  const double target = static_cast<double>(vocab.size() - 1);
  if (std::pow(target, static_cast<double>(max_len)) > kOracleBudget) {
    throw SearchTooLarge("exhaustive search over |V_T|^N = " +
                         std::to_string(vocab.size() - 1) + "^" +
                         std::to_string(max_len) + " exceeds 1e7");
  }
  OracleResult out;
  TokenSeq history{vocab.bos_id()};
  detail::enumerate(scorer, vocab, set, max_len, history, 0.0, out);
  return out;
}

}  // namespace lexcon
