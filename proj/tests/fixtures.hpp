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

#include <string>
#include <vector>

#include "lexcon/lexcon.hpp"
#include "test_util.hpp"

namespace lexcon::testing {

// A model that finishes "a b </s>" at step 3 with near-certainty while a
// garbage branch ("g" then any mix of g/h, never EOS, never "a") stays alive
// at low cost. Contexts are listed for every garbage history up to
// `max_len` generated tokens so the uniform fallback (which allows EOS) is
// never reached.
struct GarbageFixture {
  Vocabulary vocab = words({"a", "b", "g", "h"});
  TableScorer scorer;
  ConstraintSet constraints;

  explicit GarbageFixture(std::size_t max_len)
      : scorer(vocab, build_table(max_len)),
        constraints(make_set({{vocab.lookup("a")}})) {}

  static TableScorer::Table build_table(std::size_t max_len) {
    TableScorer::Table t;
    t["<s>"] = {{"a", 1.0 - 1e-8}, {"g", 1e-8}};
    t["<s> a"] = {{"b", 1.0}};
    t["<s> a b"] = {{"</s>", 1.0}};
    std::vector<std::string> frontier{"<s> g"};
    for (std::size_t len = 1; len < max_len; ++len) {
      std::vector<std::string> grown;
      for (const auto& ctx : frontier) {
        t[ctx] = {{"g", 0.5}, {"h", 0.5}};
        grown.push_back(ctx + " g");
        grown.push_back(ctx + " h");
      }
      frontier = std::move(grown);
    }
    return t;
  }
};

// The model wants "x z x y </s>" under the phrasal constraint "x y": the
// phrase is started at step 1, aborted by "z", and completed at steps 3-4.
struct PhrasalAbortFixture {
  Vocabulary vocab = words({"x", "y", "z"});
  TableScorer scorer{vocab,
                     {{"<s>", {{"x", 0.8}, {"z", 0.1}, {"y", 0.1}}},
                      {"<s> x", {{"z", 0.8}, {"y", 0.1}, {"</s>", 0.1}}},
                      {"<s> x z", {{"x", 0.8}, {"z", 0.1}, {"y", 0.1}}},
                      {"<s> x z x", {{"y", 0.8}, {"z", 0.1}, {"</s>", 0.1}}},
                      {"<s> x z x y", {{"</s>", 0.9}, {"z", 0.1}}}}};
  ConstraintSet constraints = make_set({{vocab.lookup("x"), vocab.lookup("y")}});
};

// One decoder step with k = 5 and C = 4 (the phrase "p q" plus words x and
// y), five hypotheses spread over banks 0-3, and a fixed score matrix, so
// every bank 0..4 has at least one candidate.
struct SingleStepFixture {
  Vocabulary vocab = words({"p", "q", "x", "y", "w1", "w2", "w3"});
  TokenId p = vocab.lookup("p"), q = vocab.lookup("q"), x = vocab.lookup("x"),
          y = vocab.lookup("y"), w1 = vocab.lookup("w1"), w2 = vocab.lookup("w2"),
          w3 = vocab.lookup("w3");
  ConstraintSet set = make_set({{p, q}, {x}, {y}});
  Beam beam;
  ScoreMatrix scores;

  SingleStepFixture() {
    const std::vector<std::pair<TokenSeq, double>> hyps{
        {{0, p, q, x}, -3.0},    // bank 3
        {{0, x, w1, y}, -2.5},   // bank 2
        {{0, w1, w2, x}, -1.5},  // bank 1
        {{0, w1, w2, p}, -2.0},  // bank 1, phrase in progress
        {{0, w1, w2, w3}, -1.0}, // bank 0
    };
    for (const auto& [tokens, raw] : hyps) {
      Hypothesis h;
      h.tokens = tokens;
      h.raw_score = raw;
      h.cstate = ConstraintState::initial(set);
      for (std::size_t i = 1; i < tokens.size(); ++i) h.cstate = advance(h.cstate, set, tokens[i]);
      beam.push_back(h);
    }
    // Fixed logits, distinct per cell, log-softmaxed per row.
    scores = ScoreMatrix(beam.size(), vocab.size());
    for (std::size_t r = 0; r < beam.size(); ++r) {
      auto row = scores.row(r);
      for (std::size_t j = 0; j < row.size(); ++j) {
        row[j] = static_cast<double>((r * 7 + j * 5) % 11) * 0.37;
      }
      row[0] = kNegInf;
      log_softmax(row);
    }
  }
};

}  // namespace lexcon::testing
