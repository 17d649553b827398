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


#include "cli.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "lexcon/lexcon.hpp"

namespace lexcon::cli {
namespace {

using AnyScorer = std::variant<UniformScorer, TableScorer, NGramLM, SyntheticScorer>;

struct DecodeArgs {
  std::string vocab_path;
  std::string scorer = "ngram";
  std::string model_path;
  std::uint64_t seed = 1;
  std::string input = "-";
  std::string output = "-";
  std::string algorithm = "dba";
  std::size_t beam_size = 10;
  double prune = 20.0;
  std::size_t max_length = 50;
  bool early_stopping = false;
  std::size_t gbs_base_beam = 10;
  std::size_t jobs = 1;
};

struct TrainArgs {
  std::string vocab_path;
  std::string corpus_path;
  std::string output;
  int order = 3;
  double alpha = 0.1;
  std::vector<std::string> queries;
};

struct BenchArgs {
  std::size_t vocab_size = 10000;
  std::vector<std::size_t> constraints{1, 2, 4, 8, 12};
  std::vector<std::string> algorithms{"dba", "gbs"};
  std::size_t beam_size = 10;
  std::size_t gbs_base_beam = 10;
  std::size_t max_length = 30;
  double prune = 20.0;
  std::size_t sentences = 50;
  std::size_t repetitions = 1;
  std::uint64_t seed = 1;
  std::string output = "-";
};

struct AnalyzeArgs {
  std::string input = "-";
};

// Opens `path` for reading, or falls back to `fallback` for "-".
class InputSource {
 public:
  InputSource(const std::string& path, std::istream& fallback) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ifstream>(path);
      if (!*file_) throw FormatError("cannot open input file: " + path);
      stream_ = file_.get();
    }
  }
  std::istream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
};

class OutputSink {
 public:
  OutputSink(const std::string& path, std::ostream& fallback) {
    if (path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw FormatError("cannot open output file: " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

AnyScorer load_scorer(const DecodeArgs& a, const Vocabulary& vocab) {
  if (a.scorer == "uniform") return UniformScorer(vocab);
  if (a.scorer == "synthetic") {
    return SyntheticScorer(a.seed, vocab.size(), vocab.bos_id(), vocab.eos_id());
  }
  if (a.model_path.empty()) throw Error("--model is required for the " + a.scorer + " scorer");
  if (a.scorer == "table") return TableScorer::load_file(vocab, a.model_path);
  if (a.scorer == "ngram") return NGramLM::load_file(a.model_path, vocab);
  throw Error("unknown scorer '" + a.scorer + "'");
}

struct LineOutcome {
  std::string json;
  std::vector<std::string> messages;
  bool error = false;
};

int run_decode(const DecodeArgs& a, std::istream& in, std::ostream& out, std::ostream& err) {
  DecodeConfig config;
  config.algorithm = parse_algorithm(a.algorithm);
  config.beam_size = a.beam_size;
  config.prune_threshold = a.prune;
  config.max_length = a.max_length;
  config.early_stopping = a.early_stopping;
  config.gbs_base_beam = a.gbs_base_beam;
  config.validate();

  const Vocabulary vocab = Vocabulary::load_file(a.vocab_path);
  const AnyScorer scorer = load_scorer(a, vocab);

  InputSource src(a.input, in);
  std::vector<std::string> lines;
  for (std::string line; std::getline(src.get(), line);) lines.push_back(line);

  std::vector<LineOutcome> outcomes(lines.size());
  auto work = [&](std::size_t i) {
    LineOutcome& o = outcomes[i];
    const std::string where = "line " + std::to_string(i + 1) + ": ";
    std::string id = std::to_string(i + 1);
    try {
      DecodeRequest req = parse_request(lines[i], id);
      id = req.id;
      ConstraintSet set = request_constraints(
          req, vocab, [&](const std::string& m) { o.messages.push_back(where + "warning: " + m); });
      DecodeResult r = std::visit(
          [&](const auto& s) {
            return decode(s, vocab, set, config, req.text.value_or(std::string()));
          },
          scorer);
      r.id = req.id;
      o.json = result_to_json(r).dump();
    } catch (const Error& e) {
      o.error = true;
      o.messages.push_back(where + "error: " + e.what());
      o.json = nlohmann::json{{"id", id}, {"error", e.what()}}.dump();
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, a.jobs);
  if (jobs == 1) {
    for (std::size_t i = 0; i < lines.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i; (i = next.fetch_add(1)) < lines.size();) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  OutputSink sink(a.output, out);
  bool failed = false;
  for (const auto& o : outcomes) {
    for (const auto& m : o.messages) err << m << '\n';
    sink.get() << o.json << '\n';
    failed = failed || o.error;
  }
  return failed ? 1 : 0;
}

int run_train(const TrainArgs& a, std::ostream& out) {
  const Vocabulary vocab = Vocabulary::load_file(a.vocab_path);
  std::ifstream corpus(a.corpus_path);
  if (!corpus) throw FormatError("cannot open corpus: " + a.corpus_path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(corpus, line);) {
    if (!split_whitespace(line).empty()) lines.push_back(line);
  }
  const NGramLM lm = NGramLM::train(lines, a.order, a.alpha, vocab);
  if (!a.output.empty()) lm.save_file(a.output);

  // Each query is "w1 ... wm token": the probability of the last word given
  // the words before it, with BOS prepended as a decoding history would.
  for (const auto& q : a.queries) {
    auto words = split_whitespace(q);
    if (words.empty()) throw Error("empty --query");
    TokenSeq history{vocab.bos_id()};
    for (std::size_t i = 0; i + 1 < words.size(); ++i) history.push_back(vocab.lookup(words[i]));
    const TokenId tok = vocab.lookup(words.back());
    const double p = lm.prob(lm.context_of(history), tok);
    std::string ctx;
    for (std::size_t i = 0; i + 1 < words.size(); ++i) ctx += (i ? " " : "") + words[i];
    out << "P(" << words.back() << " | " << ctx << ") = " << p << '\n';
  }
  return 0;
}

int run_bench(const BenchArgs& a, std::ostream& out) {
  const Vocabulary vocab = Vocabulary::synthetic(a.vocab_size);
  const SyntheticScorer scorer(a.seed, vocab.size(), vocab.bos_id(), vocab.eos_id());
  BenchConfig cfg;
  cfg.constraint_counts = a.constraints;
  cfg.algorithms.clear();
  for (const auto& s : a.algorithms) cfg.algorithms.push_back(parse_algorithm(s));
  cfg.decode.beam_size = a.beam_size;
  cfg.decode.gbs_base_beam = a.gbs_base_beam;
  cfg.decode.max_length = a.max_length;
  cfg.decode.prune_threshold = a.prune;
  cfg.decode.validate();
  cfg.sentences = a.sentences;
  cfg.repetitions = a.repetitions;
  cfg.seed = a.seed;
  const auto records = bench_run(scorer, vocab, cfg);
  OutputSink sink(a.output, out);
  write_bench_csv(sink.get(), records);
  return 0;
}

std::vector<std::string> json_words(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw FormatError(std::string("missing string field \"") + key + "\"");
  }
  return split_whitespace(it->get<std::string>());
}

int run_analyze(const AnalyzeArgs& a, std::istream& in, std::ostream& out) {
  InputSource src(a.input, in);
  PlacementReport total;
  std::size_t lineno = 0;
  for (std::string line; std::getline(src.get(), line);) {
    ++lineno;
    if (split_whitespace(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw FormatError("line " + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
    std::vector<std::vector<std::string>> phrases;
    for (const auto& c : j.at("constraints")) phrases.push_back(split_whitespace(c.get<std::string>()));
    const auto ref = json_words(j, "reference");
    const auto hyp = json_words(j, "output");
    if (ref.empty() || hyp.empty()) {
      throw FormatError("line " + std::to_string(lineno) + ": empty reference or output");
    }
    auto rep = placement_pairs<std::string>(phrases, ref, hyp);
    total.pairs.insert(total.pairs.end(), rep.pairs.begin(), rep.pairs.end());
    total.skipped += rep.skipped;
  }
  out << "pairs " << total.pairs.size() << '\n';
  out << "skipped " << total.skipped << '\n';
  const double r = pearson_r(total.pairs);
  out.precision(12);
  out << "pearson_r " << r << '\n';
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Lexically constrained beam search decoder"};
  app.require_subcommand(1);

  DecodeArgs d;
  auto* dec = app.add_subcommand("decode", "Decode JSONL requests");
  dec->add_option("--vocab", d.vocab_path, "Vocabulary file")->required();
  dec->add_option("--scorer", d.scorer, "uniform | table | ngram | synthetic")
      ->check(CLI::IsMember({"uniform", "table", "ngram", "synthetic"}));
  dec->add_option("--model", d.model_path, "Table or n-gram model file");
  dec->add_option("--seed", d.seed, "Seed for the synthetic scorer");
  dec->add_option("--input", d.input, "Request JSONL (- for stdin)");
  dec->add_option("--output", d.output, "Result JSONL (- for stdout)");
  dec->add_option("--algorithm", d.algorithm, "beam | dba | gbs")
      ->check(CLI::IsMember({"beam", "dba", "gbs"}));
  auto* beam_opt = dec->add_option("--beam-size", d.beam_size, "Beam size k (beam, dba)")
                       ->check(CLI::PositiveNumber);
  dec->add_option("--prune", d.prune, "Pruning threshold, 0 disables")
      ->check(CLI::NonNegativeNumber);
  dec->add_option("--max-length", d.max_length, "Maximum output length N")
      ->check(CLI::PositiveNumber);
  dec->add_flag("--early-stopping", d.early_stopping, "Stop at the first finished hypothesis");
  auto* base_opt = dec->add_option("--gbs-base-beam", d.gbs_base_beam, "GBS base beam b")
                       ->check(CLI::PositiveNumber);
  dec->add_option("--jobs", d.jobs, "Sentences decoded concurrently")->check(CLI::PositiveNumber);

  TrainArgs t;
  auto* train = app.add_subcommand("train-lm", "Train an add-alpha n-gram LM");
  train->add_option("--vocab", t.vocab_path, "Vocabulary file")->required();
  train->add_option("--corpus", t.corpus_path, "Training text, one sentence per line")->required();
  train->add_option("--output", t.output, "Where to write the model JSON");
  train->add_option("--order", t.order, "n-gram order")->check(CLI::PositiveNumber);
  train->add_option("--alpha", t.alpha, "Additive smoothing")->check(CLI::PositiveNumber);
  train->add_option("--query", t.queries, "Print P(last | preceding words)");

  BenchArgs b;
  auto* bench = app.add_subcommand("bench", "Time DBA and GBS against constraint count");
  bench->add_option("--vocab-size", b.vocab_size)->check(CLI::Range(4, 10000000));
  bench->add_option("--constraints", b.constraints, "Constraint counts")->delimiter(',');
  bench->add_option("--algorithms", b.algorithms, "Algorithms")->delimiter(',');
  bench->add_option("--beam-size", b.beam_size)->check(CLI::PositiveNumber);
  bench->add_option("--gbs-base-beam", b.gbs_base_beam)->check(CLI::PositiveNumber);
  bench->add_option("--max-length", b.max_length)->check(CLI::PositiveNumber);
  bench->add_option("--prune", b.prune)->check(CLI::NonNegativeNumber);
  bench->add_option("--sentences", b.sentences)->check(CLI::PositiveNumber);
  bench->add_option("--repetitions", b.repetitions);
  bench->add_option("--seed", b.seed);
  bench->add_option("--output", b.output, "CSV path (- for stdout)");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze-placement",
                                     "Correlate constraint positions in reference and output");
  analyze->add_option("--input", an.input, "JSONL of {constraints, reference, output}");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (dec->parsed()) {
      if (d.algorithm == "gbs" && beam_opt->count() > 0) {
        throw Error("--beam-size does not apply to --algorithm gbs; use --gbs-base-beam");
      }
      if (d.algorithm != "gbs" && base_opt->count() > 0) {
        throw Error("--gbs-base-beam requires --algorithm gbs");
      }
      return run_decode(d, in, out, err);
    }
    if (train->parsed()) return run_train(t, out);
    if (bench->parsed()) return run_bench(b, out);
    if (analyze->parsed()) return run_analyze(an, in, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace lexcon::cli
