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

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lexcon/constraints.hpp"
#include "lexcon/error.hpp"
#include "lexcon/vocab.hpp"

namespace lexcon {

// One decode request per JSONL line:
//   {"id": str?, "text": str?, "constraints": [str, ...]}
// `fallback_id` is used when the line has no id.
inline DecodeRequest parse_request(std::string_view line, const std::string& fallback_id) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("request is not a JSON object");
  DecodeRequest r;
  r.id = fallback_id;
  if (auto it = j.find("id"); it != j.end() && !it->is_null()) {
    r.id = it->is_string() ? it->get<std::string>() : it->dump();
  }
  if (auto it = j.find("text"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw FormatError("\"text\" must be a string");
    r.text = it->get<std::string>();
  }
  if (auto it = j.find("constraints"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw FormatError("\"constraints\" must be an array");
    for (const auto& c : *it) {
      if (!c.is_string()) throw FormatError("constraints must be strings");
      const auto s = c.get<std::string>();
      if (split_whitespace(s).empty()) throw InvalidConstraint("blank constraint string");
      r.constraints.push_back(s);
    }
  }
  return r;
}

using WarningSink = std::function<void(const std::string&)>;

// Tokenizes each constraint phrase. Unknown surfaces become UNK (and are
// reported to `warn`); a phrase starting with the BOS surface is a forced
// prefix.
inline ConstraintSet request_constraints(const DecodeRequest& req, const Vocabulary& vocab,
                                         const WarningSink& warn = nullptr) {
  std::vector<TokenSeq> raw;
  for (const auto& c : req.constraints) {
    TokenSeq seq;
    for (const auto& w : split_whitespace(c)) {
      auto id = vocab.find(w);
      if (!id) {
        if (warn) warn("unknown constraint token '" + w + "' mapped to UNK");
        id = vocab.unk_id();
      }
      seq.push_back(*id);
    }
    raw.push_back(std::move(seq));
  }
  return build_constraint_set(std::span<const TokenSeq>(raw), vocab.bos_id());
}

// {"id", "translation", "raw_score", "normalized_score", "constraints_met", "steps"}
inline nlohmann::json result_to_json(const DecodeResult& r) {
  return nlohmann::json{{"id", r.id},
                        {"translation", r.output_text},
                        {"raw_score", r.raw_score},
                        {"normalized_score", r.normalized_score},
                        {"constraints_met", r.constraints_met},
                        {"steps", r.steps_used}};
}

}  // namespace lexcon
