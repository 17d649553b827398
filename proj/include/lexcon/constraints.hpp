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
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "lexcon/error.hpp"
#include "lexcon/vocab.hpp"

namespace lexcon {

// The immutable constraints of one sentence. Phrases keep their input order
// and duplicates are kept as separate entries; C counts tokens, not phrases.
class ConstraintSet {
 public:
  ConstraintSet() = default;

  const std::vector<TokenSeq>& phrases() const { return phrases_; }
  const TokenSeq& phrase(std::size_t i) const { return phrases_[i]; }
  std::size_t num_phrases() const { return phrases_.size(); }
  std::size_t total_tokens() const { return total_; }
  bool empty() const { return phrases_.empty(); }

  // An anchored phrase must begin at the first generated position. It comes
  // from a raw constraint whose first token was BOS.
  bool anchored(std::size_t i) const { return anchored_[i]; }

  std::size_t longest_phrase() const {
    std::size_t n = 0;
    for (const auto& p : phrases_) n = std::max(n, p.size());
    return n;
  }

 private:
  friend ConstraintSet build_constraint_set(std::span<const TokenSeq>,
                                            std::optional<TokenId>);

  std::vector<TokenSeq> phrases_;
  std::vector<bool> anchored_;
  std::size_t total_ = 0;
};

// When `bos` is given, a sequence starting with it becomes an anchored
// phrase with the BOS stripped.
inline ConstraintSet build_constraint_set(std::span<const TokenSeq> raw,
                                          std::optional<TokenId> bos = {}) {
  ConstraintSet set;
  for (const auto& seq : raw) {
    TokenSeq phrase = seq;
    bool anchored = false;
    if (bos && !phrase.empty() && phrase.front() == *bos) {
      phrase.erase(phrase.begin());
      anchored = true;
    }
    if (phrase.empty()) {
      throw InvalidConstraint(anchored ? "prefix constraint has no tokens after BOS"
                                       : "empty constraint");
    }
    set.total_ += phrase.size();
    set.phrases_.push_back(std::move(phrase));
    set.anchored_.push_back(anchored);
  }
  return set;
}

inline ConstraintSet build_constraint_set(std::initializer_list<TokenSeq> raw) {
  std::vector<TokenSeq> v(raw);
  return build_constraint_set(std::span<const TokenSeq>(v));
}

// Per-hypothesis progress through a ConstraintSet. Small value type, copied
// into every candidate.
class ConstraintState {
 public:
  ConstraintState() = default;

  static ConstraintState initial(const ConstraintSet& set) {
    ConstraintState s;
    s.met_prefix_.assign(set.num_phrases(), 0);
    return s;
  }

  const std::vector<std::size_t>& met_prefix() const { return met_prefix_; }
  std::optional<std::size_t> in_progress() const { return in_progress_; }
  std::size_t num_met() const { return num_met_; }
  bool at_start() const { return at_start_; }

  friend bool operator==(const ConstraintState&, const ConstraintState&) = default;

  // Direct construction for fixtures; in_progress is recomputed.
  static ConstraintState from_prefixes(const ConstraintSet& set,
                                       std::vector<std::size_t> met,
                                       bool at_start = false) {
    ConstraintState s;
    s.met_prefix_ = std::move(met);
    s.at_start_ = at_start;
    for (std::size_t i = 0; i < s.met_prefix_.size(); ++i) {
      s.num_met_ += s.met_prefix_[i];
      if (s.met_prefix_[i] > 0 && s.met_prefix_[i] < set.phrase(i).size()) {
        if (s.in_progress_) throw InvalidConstraint("two phrases in progress");
        s.in_progress_ = i;
      }
    }
    return s;
  }

 private:
  friend ConstraintState advance(const ConstraintState&, const ConstraintSet&,
                                 TokenId);

  std::vector<std::size_t> met_prefix_;
  std::optional<std::size_t> in_progress_;
  std::size_t num_met_ = 0;
  bool at_start_ = true;
};

// Consumes one generated token. Rules, in order:
//  1. an in-progress phrase whose next token matches is extended;
//  2. otherwise the in-progress phrase is unwound to zero and we fall through;
//  3. the lowest-index unstarted phrase whose first token matches is started
//     (anchored phrases only at the first position, and they go first there);
//  4. otherwise nothing changes.
// At most one phrase moves per token.
inline ConstraintState advance(const ConstraintState& state,
                               const ConstraintSet& set, TokenId token) {
  ConstraintState next = state;
  const bool was_start = state.at_start_;
  next.at_start_ = false;
  auto& met = next.met_prefix_;

  if (next.in_progress_) {
    const std::size_t p = *next.in_progress_;
    const TokenSeq& phrase = set.phrase(p);
    if (phrase[met[p]] == token) {
      ++met[p];
      ++next.num_met_;
      if (met[p] == phrase.size()) next.in_progress_.reset();
      return next;
    }
    next.num_met_ -= met[p];
    met[p] = 0;
    next.in_progress_.reset();
  }

  std::optional<std::size_t> start;
  if (was_start) {
    for (std::size_t i = 0; i < set.num_phrases() && !start; ++i) {
      if (set.anchored(i) && met[i] == 0 && set.phrase(i).front() == token) {
        start = i;
      }
    }
  }
  for (std::size_t i = 0; i < set.num_phrases() && !start; ++i) {
    if (met[i] == 0 && !set.anchored(i) && set.phrase(i).front() == token) {
      start = i;
    }
  }
  if (start) {
    met[*start] = 1;
    ++next.num_met_;
    if (set.phrase(*start).size() > 1) next.in_progress_ = *start;
  }
  return next;
}

// Tokens that make constraint progress from `state`: the continuation of the
// in-progress phrase plus the first token of every unstarted phrase. Sorted,
// no duplicates. Anchored phrases that missed the first position are dead and
// contribute nothing.
inline std::vector<TokenId> next_needed_tokens(const ConstraintState& state,
                                               const ConstraintSet& set) {
  std::vector<TokenId> out;
  const auto& met = state.met_prefix();
  if (auto p = state.in_progress()) out.push_back(set.phrase(*p)[met[*p]]);
  for (std::size_t i = 0; i < set.num_phrases(); ++i) {
    if (met[i] != 0) continue;
    if (set.anchored(i) && !state.at_start()) continue;
    out.push_back(set.phrase(i).front());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline bool eos_allowed(const ConstraintState& state, const ConstraintSet& set) {
  return state.num_met() == set.total_tokens();
}

}  // namespace lexcon
