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
#include <cstdint>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lexcon/error.hpp"
#include "lexcon/score_matrix.hpp"
#include "lexcon/scorers.hpp"
#include "lexcon/vocab.hpp"

namespace lexcon {

// Add-alpha smoothed n-gram model over the target vocabulary without BOS:
//
//   P(w | ctx) = (count(ctx, w) + alpha) / (count(ctx) + alpha * |V_T|)
//
// Training pads each line with order-1 BOS tokens and terminates it with one
// EOS, so unseen contexts come out uniform.
class NGramLM {
 public:
  struct ContextCounts {
    std::uint64_t total = 0;
    std::map<TokenId, std::uint64_t> next;
  };

  NGramLM(const Vocabulary& vocab, int order, double alpha)
      : vocab_(vocab), order_(order), alpha_(alpha) {
    if (order < 1) throw ContractViolation("n-gram order must be >= 1");
    if (!(alpha > 0.0)) throw ContractViolation("n-gram alpha must be > 0");
  }

  static NGramLM train(std::span<const std::string> corpus, int order,
                       double alpha, const Vocabulary& vocab) {
    NGramLM lm(vocab, order, alpha);
    if (corpus.empty()) throw FormatError("empty training corpus");
    const auto pad = static_cast<std::size_t>(order - 1);
    for (const auto& line : corpus) {
      TokenSeq padded(pad, vocab.bos_id());
      for (TokenId t : tokenize(line, vocab)) padded.push_back(t);
      padded.push_back(vocab.eos_id());
      for (std::size_t i = pad; i < padded.size(); ++i) {
        TokenSeq ctx(padded.begin() + static_cast<std::ptrdiff_t>(i - pad),
                     padded.begin() + static_cast<std::ptrdiff_t>(i));
        auto& c = lm.counts_[ctx];
        ++c.total;
        ++c.next[padded[i]];
      }
    }
    return lm;
  }

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  const Vocabulary& vocab() const { return vocab_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  const std::map<TokenSeq, ContextCounts>& counts() const { return counts_; }

  // Number of predictable tokens: the whole vocabulary minus BOS.
  std::size_t target_size() const { return vocab_.size() - 1; }

  // The order-1 tokens preceding the next position, BOS-padded on the left.
  TokenSeq context_of(std::span<const TokenId> history) const {
    const auto want = static_cast<std::size_t>(order_ - 1);
    TokenSeq ctx;
    ctx.reserve(want);
    for (std::size_t i = history.size(); i < want; ++i) ctx.push_back(vocab_.bos_id());
    const std::size_t from = history.size() > want ? history.size() - want : 0;
    ctx.insert(ctx.end(), history.begin() + static_cast<std::ptrdiff_t>(from),
               history.end());
    return ctx;
  }

  double prob(std::span<const TokenId> context, TokenId token) const {
    if (token == vocab_.bos_id()) return 0.0;
    const double denom_extra = alpha_ * static_cast<double>(target_size());
    auto it = counts_.find(TokenSeq(context.begin(), context.end()));
    if (it == counts_.end()) return alpha_ / denom_extra;
    auto n = it->second.next.find(token);
    const double c = n == it->second.next.end() ? 0.0 : static_cast<double>(n->second);
    return (c + alpha_) / (static_cast<double>(it->second.total) + denom_extra);
  }

  ScoreMatrix step(std::span<const TokenSeq> histories,
                   std::string_view /*source*/ = {}) const {
    check_histories(histories, vocab_.bos_id(), vocab_.eos_id());
    const double denom_extra = alpha_ * static_cast<double>(target_size());
    ScoreMatrix m(histories.size(), vocab_.size());
    for (std::size_t r = 0; r < histories.size(); ++r) {
      auto it = counts_.find(context_of(histories[r]));
      const double total =
          it == counts_.end() ? 0.0 : static_cast<double>(it->second.total);
      const double denom = total + denom_extra;
      auto row = m.row(r);
      const double floor = std::log(alpha_ / denom);
      std::fill(row.begin(), row.end(), floor);
      if (it != counts_.end()) {
        for (const auto& [tok, c] : it->second.next) {
          row[static_cast<std::size_t>(tok)] =
              std::log((static_cast<double>(c) + alpha_) / denom);
        }
      }
      row[static_cast<std::size_t>(vocab_.bos_id())] = kNegInf;
    }
    return m;
  }

  nlohmann::json to_json() const {
    nlohmann::json contexts = nlohmann::json::array();
    for (const auto& [ctx, c] : counts_) {
      nlohmann::json next = nlohmann::json::array();
      for (const auto& [tok, n] : c.next) next.push_back({tok, n});
      contexts.push_back({{"context", ctx}, {"total", c.total}, {"next", next}});
    }
    return {{"format", "lexcon-ngram"},
            {"order", order_},
            {"alpha", alpha_},
            {"vocab", vocab_.tokens()},
            {"contexts", contexts}};
  }

  // Requires the stored vocabulary to match `vocab` entry for entry.
  static NGramLM from_json(const nlohmann::json& j, const Vocabulary& vocab) {
    try {
      if (j.at("format") != "lexcon-ngram") throw FormatError("not an n-gram model");
      if (j.at("vocab").get<std::vector<std::string>>() != vocab.tokens()) {
        throw FormatError("n-gram model was trained with a different vocabulary");
      }
      NGramLM lm(vocab, j.at("order").get<int>(), j.at("alpha").get<double>());
      for (const auto& e : j.at("contexts")) {
        auto ctx = e.at("context").get<TokenSeq>();
        if (ctx.size() != static_cast<std::size_t>(lm.order_ - 1)) {
          throw FormatError("n-gram context has the wrong length");
        }
        auto& c = lm.counts_[ctx];
        c.total = e.at("total").get<std::uint64_t>();
        for (const auto& pair : e.at("next")) {
          const auto tok = pair.at(0).get<TokenId>();
          if (!vocab.contains(tok)) throw FormatError("n-gram token id out of range");
          c.next[tok] = pair.at(1).get<std::uint64_t>();
        }
      }
      return lm;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("n-gram model: ") + e.what());
    }
  }

  void save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write n-gram model: " + path);
    out << to_json().dump() << '\n';
  }

  static NGramLM load_file(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open n-gram model: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("n-gram model " + path + ": " + e.what());
    }
    return from_json(j, vocab);
  }

 private:
  Vocabulary vocab_;
  int order_;
  double alpha_;
  std::map<TokenSeq, ContextCounts> counts_;
};

}  // namespace lexcon
