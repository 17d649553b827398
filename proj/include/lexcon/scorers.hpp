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
#include <concepts>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lexcon/error.hpp"
#include "lexcon/score_matrix.hpp"
#include "lexcon/vocab.hpp"

namespace lexcon {

// Anything that turns a batch of histories into one log-distribution per
// history. Rows must depend only on their own history (and the source), and
// identical inputs must give identical outputs.
template <class S>
concept NextTokenScorer =
    requires(const S& s, std::span<const TokenSeq> histories,
             std::string_view source) {
      { s.vocab_size() } -> std::convertible_to<std::size_t>;
      { s.step(histories, source) } -> std::same_as<ScoreMatrix>;
    };

// Histories must be non-empty, start with BOS and never contain EOS.
inline void check_histories(std::span<const TokenSeq> histories, TokenId bos,
                            TokenId eos) {
  if (histories.empty()) throw ContractViolation("no histories to score");
  for (std::size_t i = 0; i < histories.size(); ++i) {
    const auto& h = histories[i];
    if (h.empty() || h.front() != bos) {
      throw ContractViolation("history " + std::to_string(i) +
                              " does not start with BOS");
    }
    for (TokenId t : h) {
      if (t == eos) {
        throw ContractViolation("history " + std::to_string(i) +
                                " contains EOS");
      }
    }
  }
}

// Every token except the excluded ones (BOS by default) gets 1/|support|.
class UniformScorer {
 public:
  explicit UniformScorer(const Vocabulary& vocab,
                         std::vector<TokenId> also_excluded = {})
      : size_(vocab.size()), bos_(vocab.bos_id()), eos_(vocab.eos_id()) {
    row_.assign(size_, 0.0);
    row_[static_cast<std::size_t>(bos_)] = kNegInf;
    for (TokenId t : also_excluded) row_.at(static_cast<std::size_t>(t)) = kNegInf;
    log_softmax(row_);
  }

  std::size_t vocab_size() const { return size_; }

  ScoreMatrix step(std::span<const TokenSeq> histories,
                   std::string_view /*source*/ = {}) const {
    check_histories(histories, bos_, eos_);
    ScoreMatrix m(histories.size(), size_);
    for (std::size_t r = 0; r < histories.size(); ++r) {
      std::copy(row_.begin(), row_.end(), m.row(r).begin());
    }
    return m;
  }

 private:
  std::size_t size_;
  TokenId bos_;
  TokenId eos_;
  std::vector<double> row_;
};

// Looks up the whole history, rendered as space-joined surfaces with BOS
// included, in a table of next-token distributions. Unlisted tokens get zero
// probability; unlisted contexts fall back to uniform over non-BOS tokens.
class TableScorer {
 public:
  using Table = std::map<std::string, std::map<std::string, double>>;

  TableScorer(const Vocabulary& vocab, const Table& table)
      : vocab_(vocab), uniform_(vocab) {
    for (const auto& [context, dist] : table) {
      std::vector<double> row(vocab_.size(), kNegInf);
      double total = 0.0;
      for (const auto& [surface, p] : dist) {
        auto id = vocab_.find(surface);
        if (!id) {
          throw FormatError("table context '" + context +
                            "' names unknown token '" + surface + "'");
        }
        if (*id == vocab_.bos_id()) {
          throw FormatError("table context '" + context + "' predicts BOS");
        }
        if (!(p >= 0.0 && p <= 1.0)) {
          throw FormatError("table context '" + context +
                            "' has a probability outside [0, 1]");
        }
        row[static_cast<std::size_t>(*id)] = p > 0.0 ? std::log(p) : kNegInf;
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-6) {
        throw FormatError("table context '" + context +
                          "' does not sum to 1 (sum = " + std::to_string(total) +
                          ")");
      }
      rows_.emplace(context, std::move(row));
    }
  }

  static TableScorer from_json(const Vocabulary& vocab,
                               const nlohmann::json& j) {
    if (!j.is_object()) throw FormatError("table scorer JSON must be an object");
    Table table;
    for (const auto& [context, dist] : j.items()) {
      if (!dist.is_object()) {
        throw FormatError("table context '" + context + "' is not an object");
      }
      for (const auto& [surface, p] : dist.items()) {
        if (!p.is_number()) {
          throw FormatError("table context '" + context +
                            "' has a non-numeric probability");
        }
        table[context][surface] = p.get<double>();
      }
    }
    return TableScorer(vocab, table);
  }

  static TableScorer load_file(const Vocabulary& vocab, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open table file: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("table file " + path + ": " + e.what());
    }
    return from_json(vocab, j);
  }

  std::size_t vocab_size() const { return vocab_.size(); }

  std::string context_key(std::span<const TokenId> history) const {
    std::string key;
    for (TokenId t : history) {
      if (!key.empty()) key += ' ';
      key += vocab_.surface(t);
    }
    return key;
  }

  ScoreMatrix step(std::span<const TokenSeq> histories,
                   std::string_view source = {}) const {
    ScoreMatrix m = uniform_.step(histories, source);
    for (std::size_t r = 0; r < histories.size(); ++r) {
      auto it = rows_.find(context_key(histories[r]));
      if (it != rows_.end()) {
        std::copy(it->second.begin(), it->second.end(), m.row(r).begin());
      }
    }
    return m;
  }

 private:
  Vocabulary vocab_;
  UniformScorer uniform_;
  std::map<std::string, std::vector<double>> rows_;
};

// 64-bit finalizer of splitmix64 (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic pseudo-model for timing runs. Logit (i, j) is
// spread * u, with u in [0, 1) taken from the top 53 bits of
// mix64(row_hash(seed, history_i) ^ mix64(j)); rows are then log-softmaxed.
// Integer-only hashing keeps the logits identical across platforms.
class SyntheticScorer {
 public:
  SyntheticScorer(std::uint64_t seed, std::size_t vocab_size, TokenId bos = 0,
                  TokenId eos = 1, double spread = 10.0)
      : seed_(seed), size_(vocab_size), bos_(bos), eos_(eos), spread_(spread) {
    if (vocab_size < 4) throw ContractViolation("synthetic scorer needs |V| >= 4");
    column_salt_.resize(size_);
    for (std::size_t j = 0; j < size_; ++j) column_salt_[j] = mix64(j);
  }

  std::size_t vocab_size() const { return size_; }
  std::uint64_t seed() const { return seed_; }

  std::uint64_t row_hash(std::span<const TokenId> history) const {
    std::uint64_t h = mix64(seed_);
    for (TokenId t : history) h = mix64(h ^ static_cast<std::uint64_t>(t));
    return h;
  }

  ScoreMatrix step(std::span<const TokenSeq> histories,
                   std::string_view /*source*/ = {}) const {
    check_histories(histories, bos_, eos_);
    constexpr double kUnit = 1.0 / 9007199254740992.0;  // 2^-53
    ScoreMatrix m(histories.size(), size_);
    for (std::size_t r = 0; r < histories.size(); ++r) {
      const std::uint64_t h = row_hash(histories[r]);
      auto row = m.row(r);
      for (std::size_t j = 0; j < size_; ++j) {
        const double u =
            static_cast<double>(mix64(h ^ column_salt_[j]) >> 11) * kUnit;
        row[j] = spread_ * u;
      }
      row[static_cast<std::size_t>(bos_)] = kNegInf;
      log_softmax(row);
    }
    return m;
  }

 private:
  std::uint64_t seed_;
  std::size_t size_;
  TokenId bos_;
  TokenId eos_;
  double spread_;
  std::vector<std::uint64_t> column_salt_;
};

// Adapter for externally computed scores, e.g. a neural model in a host
// language. Called once per decoding step with the whole active batch; the
// returned rows are validated before the engine uses them.
class CallbackScorer {
 public:
  using Rows = std::vector<std::vector<double>>;
  using Callback =
      std::function<Rows(std::span<const TokenSeq>, std::string_view)>;

  CallbackScorer(const Vocabulary& vocab, Callback fn, double tol = 1e-4)
      : size_(vocab.size()),
        bos_(vocab.bos_id()),
        eos_(vocab.eos_id()),
        fn_(std::move(fn)),
        tol_(tol) {}

  std::size_t vocab_size() const { return size_; }

  ScoreMatrix step(std::span<const TokenSeq> histories,
                   std::string_view source = {}) const {
    check_histories(histories, bos_, eos_);
    Rows rows = fn_(histories, source);
    if (rows.size() != histories.size()) {
      throw ContractViolation("callback returned " + std::to_string(rows.size()) +
                              " rows for " + std::to_string(histories.size()) +
                              " histories");
    }
    ScoreMatrix m(rows.size(), size_);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != size_) {
        throw ContractViolation("callback row " + std::to_string(r) + " has " +
                                std::to_string(rows[r].size()) +
                                " columns, expected |V_T| = " +
                                std::to_string(size_));
      }
      std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
    }
    check_log_distributions(m, tol_);
    return m;
  }

 private:
  std::size_t size_;
  TokenId bos_;
  TokenId eos_;
  Callback fn_;
  double tol_;
};

}  // namespace lexcon
