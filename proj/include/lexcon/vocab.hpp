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

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lexcon/error.hpp"

namespace lexcon {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

inline constexpr std::string_view kDefaultBos = "<s>";
inline constexpr std::string_view kDefaultEos = "</s>";
inline constexpr std::string_view kDefaultUnk = "<unk>";

// Immutable bijection between surface strings and dense token ids. The three
// reserved ids (BOS, EOS, UNK) are ordinary entries in the table.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> tokens, TokenId bos_id, TokenId eos_id,
             TokenId unk_id)
      : tokens_(std::move(tokens)), bos_(bos_id), eos_(eos_id), unk_(unk_id) {
    const auto n = static_cast<TokenId>(tokens_.size());
    for (TokenId r : {bos_, eos_, unk_}) {
      if (r < 0 || r >= n) throw FormatError("reserved id out of range");
    }
    if (bos_ == eos_ || bos_ == unk_ || eos_ == unk_) {
      throw FormatError("reserved ids must be distinct");
    }
    index_.reserve(tokens_.size());
    for (TokenId id = 0; id < n; ++id) {
      auto [it, inserted] = index_.emplace(tokens_[id], id);
      if (!inserted) {
        throw FormatError("duplicate vocabulary entry '" + tokens_[id] + "'");
      }
    }
  }

  // Conventional layout: BOS, EOS, UNK at ids 0, 1, 2, followed by `words`.
  static Vocabulary with_words(const std::vector<std::string>& words) {
    std::vector<std::string> tokens{std::string(kDefaultBos),
                                    std::string(kDefaultEos),
                                    std::string(kDefaultUnk)};
    tokens.insert(tokens.end(), words.begin(), words.end());
    return Vocabulary(std::move(tokens), 0, 1, 2);
  }

  // `size` entries: the reserved three plus w3, w4, ...
  static Vocabulary synthetic(std::size_t size) {
    if (size < 4) throw FormatError("synthetic vocabulary needs >= 4 entries");
    std::vector<std::string> words;
    words.reserve(size - 3);
    for (std::size_t i = 3; i < size; ++i) words.push_back("w" + std::to_string(i));
    return with_words(words);
  }

  // One token per line, line number is the id; the first three lines are the
  // BOS, EOS and UNK surface forms.
  static Vocabulary load(std::istream& in) {
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      tokens.push_back(line);
    }
    if (tokens.size() < 3) {
      throw FormatError("vocabulary file needs BOS, EOS and UNK lines");
    }
    return Vocabulary(std::move(tokens), 0, 1, 2);
  }

  static Vocabulary load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open vocabulary file: " + path);
    return load(in);
  }

  void save(std::ostream& out) const {
    for (const auto& t : tokens_) out << t << '\n';
  }

  std::size_t size() const { return tokens_.size(); }
  TokenId bos_id() const { return bos_; }
  TokenId eos_id() const { return eos_; }
  TokenId unk_id() const { return unk_; }

  bool contains(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < tokens_.size();
  }

  TokenId lookup(std::string_view surface) const {
    auto it = index_.find(std::string(surface));
    return it == index_.end() ? unk_ : it->second;
  }

  std::optional<TokenId> find(std::string_view surface) const {
    auto it = index_.find(std::string(surface));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& surface(TokenId id) const {
    if (!contains(id)) {
      throw CorruptHypothesis("token id " + std::to_string(id) +
                              " outside vocabulary of size " +
                              std::to_string(tokens_.size()));
    }
    return tokens_[static_cast<std::size_t>(id)];
  }

  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId bos_;
  TokenId eos_;
  TokenId unk_;
};

inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
           c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

inline TokenSeq tokenize(std::string_view text, const Vocabulary& vocab) {
  TokenSeq ids;
  for (const auto& w : split_whitespace(text)) ids.push_back(vocab.lookup(w));
  return ids;
}

// Joins surfaces with single spaces, dropping BOS and EOS.
inline std::string detokenize(std::span<const TokenId> ids,
                              const Vocabulary& vocab) {
  std::string out;
  for (TokenId id : ids) {
    const auto& s = vocab.surface(id);
    if (id == vocab.bos_id() || id == vocab.eos_id()) continue;
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

struct DecodeRequest {
  std::string id;
  std::optional<std::string> text;
  std::vector<std::string> constraints;
};

struct DecodeResult {
  std::string id;
  TokenSeq output_tokens;  // BOS first; EOS last when the hypothesis finished
  std::string output_text;
  double raw_score = 0.0;
  double normalized_score = 0.0;
  bool constraints_met = false;
  bool finished = false;
  int steps_used = 0;
};

// Generated-token count used for length normalization: everything after BOS,
// EOS included, floored at one.
inline std::size_t generated_length(std::span<const TokenId> tokens) {
  return tokens.size() > 1 ? tokens.size() - 1 : 1;
}

}  // namespace lexcon
