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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lexcon/lexcon.hpp"

namespace lexcon::testing {

// Vocabulary [<s>, </s>, <unk>, words...].
inline Vocabulary words(std::initializer_list<const char*> ws) {
  std::vector<std::string> v(ws.begin(), ws.end());
  return Vocabulary::with_words(v);
}

// Vocabulary [<s>, </s>, words..., <unk>]: keeps UNK out of the way of
// token-id tie-breaks in hand-worked fixtures.
inline Vocabulary words_unk_last(std::initializer_list<const char*> ws) {
  std::vector<std::string> v{"<s>", "</s>"};
  v.insert(v.end(), ws.begin(), ws.end());
  v.emplace_back("<unk>");
  return Vocabulary(v, 0, 1, static_cast<TokenId>(v.size() - 1));
}

struct RandomLM {
  Vocabulary vocab;
  NGramLM lm;
};

// A trigram model trained on a random corpus over `n_words` content words.
// Alpha is drawn from [0.05, 1] so that distributions are far from uniform but
// every token stays reachable.
inline RandomLM random_lm(std::mt19937_64& rng, std::size_t n_words, int order = 3,
                          std::size_t lines = 12, std::size_t max_line_len = 6) {
  std::vector<std::string> ws;
  for (std::size_t i = 0; i < n_words; ++i) ws.push_back(std::string(1, static_cast<char>('a' + i)));
  Vocabulary vocab = Vocabulary::with_words(ws);
  std::uniform_int_distribution<std::size_t> len(1, max_line_len);
  std::uniform_int_distribution<std::size_t> pick(0, n_words - 1);
  std::uniform_real_distribution<double> alpha(0.05, 1.0);
  std::vector<std::string> corpus;
  for (std::size_t l = 0; l < lines; ++l) {
    std::string line;
    for (std::size_t i = 0, n = len(rng); i < n; ++i) {
      if (i) line += ' ';
      line += ws[pick(rng)];
    }
    corpus.push_back(line);
  }
  NGramLM lm = NGramLM::train(corpus, order, alpha(rng), vocab);
  return {vocab, lm};
}

// Draws phrases over the content ids [3, vocab.size()). With `distinct`, no
// token appears twice across the whole set.
inline std::vector<TokenSeq> random_phrases(std::mt19937_64& rng, const Vocabulary& vocab,
                                            std::size_t total_tokens, std::size_t max_phrase_len,
                                            bool distinct) {
  std::vector<TokenId> pool;
  for (TokenId t = 3; t < static_cast<TokenId>(vocab.size()); ++t) pool.push_back(t);
  std::shuffle(pool.begin(), pool.end(), rng);
  std::uniform_int_distribution<TokenId> any(3, static_cast<TokenId>(vocab.size()) - 1);
  std::vector<TokenSeq> phrases;
  std::size_t used = 0;
  std::size_t next = 0;
  while (used < total_tokens) {
    std::uniform_int_distribution<std::size_t> len(1, std::min(max_phrase_len, total_tokens - used));
    TokenSeq p;
    for (std::size_t i = 0, n = len(rng); i < n; ++i) {
      p.push_back(distinct ? pool.at(next++) : any(rng));
    }
    used += p.size();
    phrases.push_back(std::move(p));
  }
  return phrases;
}

inline ConstraintSet make_set(const std::vector<TokenSeq>& raw) {
  return build_constraint_set(std::span<const TokenSeq>(raw));
}

}  // namespace lexcon::testing
