// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include "coherence/cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "coherence/cli/run_config.hpp"
#include "coherence/data/corpus.hpp"
#include "coherence/data/embeddings.hpp"
#include "coherence/data/io.hpp"
#include "coherence/data/permutations.hpp"
#include "coherence/data/synth.hpp"
#include "coherence/evaluation/report.hpp"
#include "coherence/evaluation/saliency.hpp"
#include "coherence/model/model.hpp"
#include "coherence/training/training.hpp"
#include "coherence/util/error.hpp"
#include "coherence/util/log.hpp"

namespace coherence::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

void write_corpus(const fs::path& path, const data::Corpus& corpus) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  data::write_corpus_jsonl(path, corpus);
}

// --- permute ---------------------------------------------------------------

struct PermuteArgs {
  std::string input;
  std::string output;
  std::size_t k = 20;
  std::uint64_t seed = 1;
};

int cmd_permute(const PermuteArgs& a, std::ostream& out) {
  if (a.k == 0) throw ConfigError("--k: must be at least 1");
  auto corpus = data::read_corpus_jsonl(fs::path(a.input));
  const std::size_t removed = data::remove_single_sentence_documents(corpus);
  data::Corpus result;
  std::size_t synthetic = 0;
  for (const auto& doc : corpus.documents) {
    result.documents.push_back(doc);
    for (auto& p : data::generate_permutations(doc, a.k, a.seed)) {
      result.documents.push_back(std::move(p));
      ++synthetic;
    }
  }
  write_corpus(a.output, result);
  out << "documents\t" << corpus.size() << "\n"
      << "synthetic documents\t" << synthetic << "\n"
      << "skipped single-sentence documents\t" << removed << "\n"
      << "written\t" << result.size() << "\n";
  return kOk;
}

// --- train -----------------------------------------------------------------

int cmd_train(const std::string& config_path, std::ostream& out) {
  const RunConfig cfg = load_run_config(config_path);
  if (cfg.paths.train.empty()) throw ConfigError("paths.train: required for training");
  auto train_corpus = data::read_corpus_jsonl(fs::path(cfg.paths.train));
  data::Corpus dev;
  if (cfg.paths.dev.empty()) {
    std::tie(train_corpus, dev) = data::split_by_original(train_corpus, 0.9, cfg.train.seed);
    out << "split training data 9:1 into " << train_corpus.size() << " train / " << dev.size() << " dev documents\n";
  } else {
    dev = data::read_corpus_jsonl(fs::path(cfg.paths.dev));
  }
  if (cfg.model.levels == 3 && !train_corpus.has_paragraphs()) {
    throw ConfigError("model.levels: 3 needs documents with paragraph boundaries");
  }
  std::optional<data::EmbeddingMatrix> pretrained;
  if (!cfg.paths.embeddings.empty()) pretrained = data::load_embeddings(cfg.paths.embeddings, cfg.model.embed_dim);

  const fs::path dir(cfg.paths.output_dir);
  fs::create_directories(dir);
  write_text(dir / "run_config.json", to_json(cfg).dump(2) + "\n");
  for (std::size_t run = 0; run < cfg.train.ensemble_runs; ++run) {
    training::TrainConfig tc = cfg.train;
    tc.seed = cfg.train.seed + run;
    auto result = training::train(train_corpus, dev, cfg.model, tc, pretrained ? &*pretrained : nullptr);
    const auto name = std::to_string(run);
    result.model.save(dir / ("model-" + name + ".json"));
    std::ostringstream csv;
    training::write_history_csv(csv, result.history);
    write_text(dir / ("history-" + name + ".csv"), csv.str());
    out << "run " << run << " seed " << tc.seed << ": best epoch " << result.best_epoch << ", dev "
        << training::to_string(cfg.train.selection_metric) << " " << result.best_dev_metric << "\n";
  }
  return kOk;
}

// --- eval ------------------------------------------------------------------

std::vector<model::CoherenceModel> load_checkpoints(const fs::path& path) {
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      const auto name = entry.path().filename().string();
      if (entry.is_regular_file() && name.rfind("model-", 0) == 0 && entry.path().extension() == ".json") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  if (files.empty()) throw DataError("no model-*.json checkpoints in " + path.string());
  std::vector<model::CoherenceModel> models;
  for (const auto& f : files) models.push_back(model::CoherenceModel::load(f));
  return models;
}

struct EvalArgs {
  std::string checkpoints;
  std::string test;
  std::string metrics;
  std::string output;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  auto models = load_checkpoints(a.checkpoints);
  const auto& cfg = models.front().config();
  const auto metrics = evaluation::parse_metrics(a.metrics.empty() ? (cfg.binary() ? "pra,tpra" : "accuracy")
                                                                   : a.metrics);
  const auto corpus = data::read_corpus_jsonl(fs::path(a.test));
  const bool want_gr = metrics.count("f1") > 0;
  if (want_gr && !model::has_gr_head(cfg.variant)) throw ConfigError("--metrics: f1 needs models with a GR head");

  std::vector<evaluation::DocumentScores> scores;
  for (const auto& doc : corpus.documents) {
    evaluation::DocumentScores s;
    s.score = training::ensemble_predict(models, doc);
    if (want_gr) {
      std::vector<std::vector<double>> mean;
      for (auto& m : models) {
        auto probs = *m.predict(doc).gr_probs;
        if (mean.empty()) mean.assign(probs.size(), std::vector<double>(probs.front().size(), 0.0));
        for (std::size_t t = 0; t < probs.size(); ++t)
          for (std::size_t c = 0; c < probs[t].size(); ++c) mean[t][c] += probs[t][c];
      }
      const auto& vocab = *models.front().gr_vocab();
      for (const auto& p : mean) {
        s.gr.push_back(vocab.name(static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())));
      }
    }
    scores.push_back(std::move(s));
  }
  auto report = evaluation::evaluate(corpus, scores, metrics);
  report.counts["models"] = models.size();
  const fs::path output = a.output.empty() ? (fs::is_directory(a.checkpoints) ? fs::path(a.checkpoints) / "report.json"
                                                                              : fs::path("report.json"))
                                           : fs::path(a.output);
  const auto text = report.to_json().dump(2) + "\n";
  write_text(output, text);
  out << text;
  return kOk;
}

// --- saliency --------------------------------------------------------------

struct SaliencyArgs {
  std::string checkpoint;
  std::string corpus;
  std::string doc;
  std::string output;
};

int cmd_saliency(const SaliencyArgs& a, std::ostream& out) {
  auto m = model::CoherenceModel::load(a.checkpoint);
  const auto corpus = data::read_corpus_jsonl(fs::path(a.corpus));
  const auto* doc = corpus.find(a.doc);
  if (!doc) throw DataError("document '" + a.doc + "' is not in " + a.corpus);
  const auto norms = evaluation::saliency(m, *doc);
  write_text(a.output, evaluation::saliency_html(*doc, norms));
  for (const auto& t : norms) out << t.token << '\t' << t.norm << '\n';
  return kOk;
}

// --- synth -----------------------------------------------------------------

data::SynthSpec read_synth_spec(const std::string& path) {
  data::SynthSpec spec;
  if (path.empty()) return spec;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open synth spec " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": malformed JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(path + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "num_docs") spec.num_docs = value.get<std::size_t>();
      else if (key == "vocab_size") spec.vocab_size = value.get<std::size_t>();
      else if (key == "sents_per_doc") spec.sents_per_doc = value.get<std::size_t>();
      else if (key == "words_per_sent") spec.words_per_sent = value.get<std::size_t>();
      else if (key == "gr_rule") spec.gr_rule = value.get<std::string>();
      else if (key == "seed") spec.seed = value.get<std::uint64_t>();
      else if (key == "paragraphs_per_doc") spec.paragraphs_per_doc = value.get<std::size_t>();
      else if (key == "graded") spec.graded = value.get<bool>();
      else throw ConfigError("synth." + key + ": unknown field");
    } catch (const json::exception&) {
      throw ConfigError("synth." + key + ": wrong type");
    }
  }
  return spec;
}

struct SynthArgs {
  std::string spec;
  std::string output;
  std::size_t permutations = 0;
  std::uint64_t permutation_seed = 1;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  auto corpus = data::synth_corpus(read_synth_spec(a.spec));
  const std::size_t originals = corpus.size();
  if (a.permutations > 0) {
    data::Corpus with;
    for (const auto& d : corpus.documents) {
      with.documents.push_back(d);
      for (auto& p : data::generate_permutations(d, a.permutations, a.permutation_seed)) {
        with.documents.push_back(std::move(p));
      }
    }
    corpus = std::move(with);
  }
  write_corpus(a.output, corpus);
  out << "documents\t" << originals << "\nsynthetic documents\t" << corpus.size() - originals << "\n";
  return kOk;
}

// --- ingest / preset -------------------------------------------------------

int cmd_ingest(const std::string& input, const std::string& output, std::ostream& out) {
  auto corpus = data::ingest_conllu(input);
  write_corpus(output, corpus);
  std::size_t sentences = 0;
  for (const auto& d : corpus.documents) sentences += d.num_sentences();
  out << "documents\t" << corpus.size() << "\nsentences\t" << sentences << "\n";
  return kOk;
}

int cmd_preset(const std::string& name, const std::string& output, std::ostream& out) {
  const auto text = to_json(preset(name)).dump(2) + "\n";
  if (output.empty()) {
    out << text;
  } else {
    write_text(output, text);
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural discourse coherence models with grammatical-role multi-task learning", "coherence"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress messages to stderr");

  PermuteArgs permute;
  auto* permute_cmd = app.add_subcommand("permute", "Add sentence permutations of each document");
  permute_cmd->add_option("--input", permute.input, "Input corpus (JSONL)")->required();
  permute_cmd->add_option("--output", permute.output, "Output corpus (JSONL)")->required();
  permute_cmd->add_option("--k", permute.k, "Permutations per document")->capture_default_str();
  permute_cmd->add_option("--seed", permute.seed, "Random seed")->capture_default_str();

  std::string train_config;
  auto* train_cmd = app.add_subcommand("train", "Train an ensemble from a run config");
  train_cmd->add_option("--config", train_config, "Run config (JSON)")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score a test corpus with an ensemble and compute metrics");
  eval_cmd->add_option("--checkpoints", eval.checkpoints, "Checkpoint directory (model-*.json) or file")->required();
  eval_cmd->add_option("--test", eval.test, "Test corpus (JSONL)")->required();
  eval_cmd->add_option("--metrics", eval.metrics, "Comma-separated: pra,tpra,accuracy,pearson,f1");
  eval_cmd->add_option("--out", eval.output, "Report path (default: <checkpoints>/report.json)");

  SaliencyArgs sal;
  auto* sal_cmd = app.add_subcommand("saliency", "Render per-word gradient norms as HTML");
  sal_cmd->add_option("--checkpoint", sal.checkpoint, "Checkpoint file")->required();
  sal_cmd->add_option("--corpus", sal.corpus, "Corpus containing the document (JSONL)")->required();
  sal_cmd->add_option("--doc", sal.doc, "Document id")->required();
  sal_cmd->add_option("--out", sal.output, "Output HTML file")->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth_cmd->add_option("--spec", synth.spec, "Synthetic corpus spec (JSON); defaults when omitted");
  synth_cmd->add_option("--out", synth.output, "Output corpus (JSONL)")->required();
  synth_cmd->add_option("--permutations", synth.permutations, "Also add up to this many permutations per document")
      ->capture_default_str();
  synth_cmd->add_option("--permutation-seed", synth.permutation_seed, "Seed for the permutations")
      ->capture_default_str();

  std::string ingest_in, ingest_out;
  auto* ingest_cmd = app.add_subcommand("ingest", "Convert CoNLL-U to the JSONL corpus format");
  ingest_cmd->add_option("--input", ingest_in, "CoNLL-U file")->required();
  ingest_cmd->add_option("--output", ingest_out, "Output corpus (JSONL)")->required();

  std::string preset_name, preset_out;
  auto* preset_cmd = app.add_subcommand("preset", "Print a domain preset as a run config");
  std::string names;
  for (auto n : preset_names()) names += (names.empty() ? "" : ", ") + std::string(n);
  preset_cmd->add_option("--name", preset_name, "One of: " + names)->required();
  preset_cmd->add_option("--out", preset_out, "Write to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  log::Sink previous;
  if (verbose) {
    previous = log::set_sink([&err](log::Level level, const std::string& m) {
      err << (level == log::Level::kWarning ? "warning: " : "") << m << "\n";
    });
  }
  struct Restore {
    bool active;
    log::Sink& sink;
    ~Restore() {
      if (active) log::set_sink(std::move(sink));
    }
  } restore{verbose, previous};

  try {
    if (*permute_cmd) return cmd_permute(permute, out);
    if (*train_cmd) return cmd_train(train_config, out);
    if (*eval_cmd) return cmd_eval(eval, out);
    if (*sal_cmd) return cmd_saliency(sal, out);
    if (*synth_cmd) return cmd_synth(synth, out);
    if (*ingest_cmd) return cmd_ingest(ingest_in, ingest_out, out);
    if (*preset_cmd) return cmd_preset(preset_name, preset_out, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace coherence::cli
