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
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lexcon/constraints.hpp"
#include "lexcon/decoder.hpp"
#include "lexcon/error.hpp"
#include "lexcon/scorers.hpp"
#include "lexcon/vocab.hpp"

namespace lexcon {

// Where the first token of a constraint lands, as a fraction of sentence
// length, in the reference and in the decoder output.
struct PlacementPair {
  double ref_pos = 0.0;
  double out_pos = 0.0;
};

struct PlacementReport {
  std::vector<PlacementPair> pairs;
  std::size_t skipped = 0;  // phrases missing from either sequence
};

template <class T>
std::optional<std::size_t> first_occurrence(std::span<const T> seq,
                                            std::span<const T> phrase) {
  if (phrase.empty() || phrase.size() > seq.size()) return std::nullopt;
  auto it = std::search(seq.begin(), seq.end(), phrase.begin(), phrase.end());
  if (it == seq.end()) return std::nullopt;
  return static_cast<std::size_t>(it - seq.begin());
}

template <class T>
PlacementReport placement_pairs(std::span<const std::vector<T>> phrases,
                                std::span<const T> reference,
                                std::span<const T> output) {
  PlacementReport report;
  for (const auto& phrase : phrases) {
    std::span<const T> p(phrase);
    auto r = first_occurrence(reference, p);
    auto o = first_occurrence(output, p);
    if (!r || !o) {
      ++report.skipped;
      continue;
    }
    report.pairs.push_back({static_cast<double>(*r) / static_cast<double>(reference.size()),
                            static_cast<double>(*o) / static_cast<double>(output.size())});
  }
  return report;
}

inline PlacementReport placement_pairs(const ConstraintSet& set,
                                       std::span<const TokenId> reference,
                                       std::span<const TokenId> output) {
  return placement_pairs<TokenId>(std::span<const TokenSeq>(set.phrases()),
                                  reference, output);
}

// Pearson product-moment correlation of (ref_pos, out_pos).
inline double pearson_r(std::span<const PlacementPair> pairs) {
  if (pairs.size() < 2) throw UndefinedCorrelation("need at least two pairs");
  double mx = 0.0;
  double my = 0.0;
  for (const auto& p : pairs) {
    mx += p.ref_pos;
    my += p.out_pos;
  }
  mx /= static_cast<double>(pairs.size());
  my /= static_cast<double>(pairs.size());
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (const auto& p : pairs) {
    const double dx = p.ref_pos - mx;
    const double dy = p.out_pos - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedCorrelation("zero variance on one axis");
  }
  return sxy / std::sqrt(sxx * syy);
}

struct BenchRecord {
  Algorithm algorithm = Algorithm::kDba;
  std::size_t constraint_tokens = 0;
  std::size_t beam = 0;  // k, or the base beam b for GBS
  double mean_s = 0.0;
  double median_s = 0.0;
  std::size_t n_sentences = 0;
};

struct BenchConfig {
  std::vector<std::size_t> constraint_counts{1, 2, 4, 8, 12};
  std::vector<Algorithm> algorithms{Algorithm::kDba, Algorithm::kGbs};
  DecodeConfig decode;
  std::size_t sentences = 50;
  std::size_t repetitions = 1;
  std::uint64_t seed = 1;
};

// C distinct single-token constraints for sentence `s`, drawn by hashing so
// every platform picks the same ones. Reserved ids are never drawn.
inline ConstraintSet bench_constraints(const Vocabulary& vocab, std::uint64_t seed,
                                       std::size_t sentence, std::size_t c) {
  const std::size_t lo = 3;
  const std::size_t range = vocab.size() - lo;
  if (c > range) throw Error("more constraints than drawable tokens");
  std::vector<TokenSeq> raw;
  std::uint64_t h = mix64(mix64(seed) ^ mix64(sentence * 1000003ULL + c));
  while (raw.size() < c) {
    h = mix64(h);
    auto tok = static_cast<TokenId>(lo + h % range);
    if (tok == vocab.bos_id() || tok == vocab.eos_id() || tok == vocab.unk_id()) continue;
    bool dup = std::any_of(raw.begin(), raw.end(),
                           [&](const TokenSeq& p) { return p.front() == tok; });
    if (!dup) raw.push_back({tok});
  }
  return build_constraint_set(std::span<const TokenSeq>(raw));
}

// Times decoding of the same sentence set for every (algorithm, C) pair,
// algorithms outermost. Each cell gets one untimed warm-up decode, then
// `repetitions` timed passes over all sentences. When `outputs` is given, the
// decoded token sequences of the last pass are appended to it in order.
template <NextTokenScorer Scorer>
std::vector<BenchRecord> bench_run(const Scorer& scorer, const Vocabulary& vocab,
                                   const BenchConfig& cfg,
                                   std::vector<TokenSeq>* outputs = nullptr) {
  if (cfg.repetitions == 0) throw Error("bench needs at least one repetition");
  if (cfg.sentences == 0) throw Error("bench needs at least one sentence");
  std::vector<BenchRecord> records;
  for (Algorithm algo : cfg.algorithms) {
    DecodeConfig dc = cfg.decode;
    dc.algorithm = algo;
    for (std::size_t c : cfg.constraint_counts) {
      std::vector<ConstraintSet> sets;
      for (std::size_t s = 0; s < cfg.sentences; ++s) {
        sets.push_back(bench_constraints(vocab, cfg.seed, s, c));
      }
      (void)decode(scorer, vocab, sets.front(), dc);

      std::vector<double> times;
      times.reserve(cfg.sentences * cfg.repetitions);
      for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        for (std::size_t s = 0; s < cfg.sentences; ++s) {
          const auto t0 = std::chrono::steady_clock::now();
          DecodeResult r = decode(scorer, vocab, sets[s], dc);
          const auto t1 = std::chrono::steady_clock::now();
          times.push_back(std::chrono::duration<double>(t1 - t0).count());
          if (outputs && rep + 1 == cfg.repetitions) {
            outputs->push_back(std::move(r.output_tokens));
          }
        }
      }
      BenchRecord rec;
      rec.algorithm = algo;
      rec.constraint_tokens = c;
      rec.beam = algo == Algorithm::kGbs ? dc.gbs_base_beam : dc.beam_size;
      rec.n_sentences = cfg.sentences;
      double sum = 0.0;
      for (double t : times) sum += t;
      rec.mean_s = sum / static_cast<double>(times.size());
      std::sort(times.begin(), times.end());
      const std::size_t n = times.size();
      rec.median_s = n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
      records.push_back(rec);
    }
  }
  return records;
}

inline void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records) {
  out << "algorithm,C,beam,mean_s,median_s,n_sentences\n";
  auto old = out.precision(9);
  for (const auto& r : records) {
    out << to_string(r.algorithm) << ',' << r.constraint_tokens << ',' << r.beam << ','
        << r.mean_s << ',' << r.median_s << ',' << r.n_sentences << '\n';
  }
  out.precision(old);
}

}  // namespace lexcon
