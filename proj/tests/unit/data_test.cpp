// Copyright 2026 The Coherence MTL Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"

#include "coherence/data/corpus.hpp"
#include "coherence/data/embeddings.hpp"
#include "coherence/data/gr_vocabulary.hpp"
#include "coherence/data/io.hpp"
#include "coherence/data/permutations.hpp"
#include "coherence/data/synth.hpp"
#include "coherence/util/error.hpp"
#include "coherence/util/log.hpp"
#include "coherence/util/rng.hpp"
#include "support/oracles.hpp"

using namespace coherence;
using namespace coherence::data;
using testing::bfs_distance;

namespace {

const char* kConllu =
    "# newdoc id = d1\n"
    "# newpar\n"
    "# sent_id = 1\n"
    "1\tThe\tthe\tDET\tDT\t_\t2\tdet\t_\t_\n"
    "2\tcat\tcat\tNOUN\tNN\t_\t3\tnsubj\t_\t_\n"
    "3\tsat\tsit\tVERB\tVBD\t_\t0\troot\t_\t_\n"
    "4\t.\t.\tPUNCT\t.\t_\t3\tpunct\t_\t_\n"
    "\n"
    "1-2\tIts\t_\t_\t_\t_\t_\t_\t_\t_\n"
    "1\tIt\tit\tPRON\tPRP\t_\t2\tnmod:poss\t_\t_\n"
    "2\ts\tbe\tVERB\tVBZ\t_\t0\troot\t_\t_\n"
    "2.1\tghost\t_\t_\t_\t_\t_\t_\t_\t_\n"
    "3\tfur\tfur\tNOUN\tNN\t_\t2\tNMOD:TMOD\t_\t_\n"
    "\n"
    "# newpar\n"
    "1\tGone\tgo\tVERB\tVBN\t_\t0\troot\t_\t_\n"
    "2\tnow\tnow\tADV\tRB\t_\t1\tadvmod:foo\t_\t_\n"
    "\n"
    "# newdoc id = d2\n"
    "# label = high\n"
    "1\tHi\thi\tINTJ\tUH\t_\t0\troot\t_\t_\n"
    "\n";

Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return read_conllu(in, "test.conllu");
}

Document make_doc(std::size_t sentences, const std::string& id = "doc") {
  Document d;
  d.id = id;
  d.paragraphs.emplace_back();
  for (std::size_t i = 0; i < sentences; ++i) d.paragraphs[0].push_back({Token{"s" + std::to_string(i), "root"}});
  return d;
}

std::vector<std::size_t> order_of(const Document& d) {
  std::vector<std::size_t> out;
  for (const auto* s : d.sentences()) out.push_back(std::stoul(s->front().surface.substr(1)));
  return out;
}

}  // namespace

TEST_CASE("CoNLL-U ingestion") {
  auto corpus = parse(kConllu);
  REQUIRE(corpus.size() == 2);
  const auto& d1 = corpus.documents[0];
  CHECK(d1.id == "d1");
  REQUIRE(d1.paragraphs.size() == 2);
  CHECK(d1.paragraphs[0].size() == 2);
  const auto& s1 = d1.paragraphs[0][0];
  REQUIRE(s1.size() == 4);
  CHECK(s1[1].surface == "cat");
  CHECK(s1[1].gr == "nsubj");
  CHECK(s1[2].gr == "root");

  const auto& s2 = d1.paragraphs[0][1];
  REQUIRE(s2.size() == 3);  // multiword range and empty node skipped
  CHECK(s2[0].gr == "nmod:poss");
  CHECK(s2[2].gr == "nmod:tmod");  // lower-cased, listed subtype kept
  CHECK(d1.paragraphs[1][0][1].gr == "advmod");  // unlisted subtype collapses
  CHECK(d1.label == CoherenceLabel::coherent());
  CHECK(corpus.documents[1].label == CoherenceLabel::graded(2));
}

TEST_CASE("CoNLL-U errors and defaults") {
  try {
    parse("1\tThe\tthe\n");
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(e.line() == 1);
  }
  try {
    parse("# newdoc\n1\ta\ta\tX\tX\t_\t0\troot\t_\t_\n\n1\tb\tb\tX\tX\t_\t0\troot\t_\n");
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(e.line() == 4);
  }
  auto c = parse("1\ta\ta\tX\tX\t_\t0\troot\t_\t_\n1\tb\tb\tX\tX\t_\t_\t_\t_\t_\n");
  REQUIRE(c.size() == 1);
  CHECK(c.documents[0].id == "doc-0");
  CHECK_FALSE(c.documents[0].paragraphs[0][0][1].gr.has_value());
  CHECK_THROWS_AS(ingest_conllu("/nonexistent/file.conllu"), DataError);
}

TEST_CASE("UD v2 relations map onto the reference inventory") {
  CHECK(canonical_gr("obj") == "dobj");
  CHECK(canonical_gr("nsubj:pass") == "nsubjpass");
  CHECK(canonical_gr("csubj:pass") == "csubjpass");
  CHECK(canonical_gr("aux:pass") == "auxpass");
  CHECK(canonical_gr("Compound:PRT") == "compound:prt");
  CHECK(canonical_gr("obl:tmod") == "obl");
}

TEST_CASE("reference relation inventory has 39 entries") {
  auto types = reference_gr_types();
  CHECK(types.size() == 39);
  std::set<std::string_view> unique(types.begin(), types.end());
  CHECK(unique.size() == 39);
  CHECK(unique.count("nmod:poss"));
  CHECK(unique.count("root"));
  CHECK(std::count_if(types.begin(), types.end(), [](auto t) { return t.find(':') != std::string_view::npos; }) == 7);
}

TEST_CASE("reduce_sox") {
  CHECK(reduce_sox("nsubj") == "S");
  CHECK(reduce_sox("csubj") == "S");
  CHECK(reduce_sox("nsubjpass") == "O");
  CHECK(reduce_sox("csubjpass") == "O");
  CHECK(reduce_sox("dobj") == "O");
  CHECK(reduce_sox("iobj") == "O");
  CHECK(reduce_sox("amod") == "X");
  CHECK(reduce_sox("root") == "X");
}

TEST_CASE("GR vocabulary") {
  auto train = parse(kConllu);
  auto vocab = GrVocabulary::build_full(train);
  CHECK(vocab.mode() == GrVocabulary::Mode::kFull);
  CHECK(vocab.index_of("root").has_value());
  CHECK(vocab.index_of("nsubj").has_value());
  CHECK_FALSE(vocab.index_of("xcomp").has_value());  // unseen in training: masked
  CHECK(std::is_sorted(vocab.classes().begin(), vocab.classes().end()));

  auto sox = GrVocabulary::sox();
  CHECK(sox.classes() == std::vector<std::string>{"S", "O", "X"});
  CHECK(sox.index_of("nsubj") == 0u);
  CHECK(sox.index_of("nsubjpass") == 1u);
  CHECK(sox.index_of("xcomp") == 2u);

  CHECK_THROWS_AS(GrVocabulary(GrVocabulary::Mode::kSox, {"S", "X"}), ConfigError);
  CHECK_THROWS_AS(GrVocabulary(GrVocabulary::Mode::kFull, {"nsubj", "amod"}), ConfigError);

  auto synth = synth_corpus({});
  auto synth_vocab = GrVocabulary::build_full(synth);
  CHECK(synth_vocab.index_of("root").has_value());
  CHECK_FALSE(synth_vocab.index_of("xcomp").has_value());
}

TEST_CASE("generate_permutations examples") {
  SUBCASE("two sentences") {
    auto perms = generate_permutations(make_doc(2), 20, 1);
    REQUIRE(perms.size() == 1);
    CHECK(order_of(perms[0]) == std::vector<std::size_t>{1, 0});
    CHECK(perms[0].label == CoherenceLabel::incoherent());
    CHECK(perms[0].origin.source_id == "doc");
    CHECK(perms[0].origin.order == std::vector<std::size_t>{1, 0});
  }
  SUBCASE("three sentences") {
    auto perms = generate_permutations(make_doc(3), 20, 1);
    REQUIRE(perms.size() == 5);
    std::set<std::vector<std::size_t>> orders;
    for (const auto& p : perms) orders.insert(order_of(p));
    CHECK(orders.size() == 5);
    CHECK_FALSE(orders.count({0, 1, 2}));
  }
  SUBCASE("ten sentences, reproducible") {
    auto a = generate_permutations(make_doc(10), 20, 42);
    auto b = generate_permutations(make_doc(10), 20, 42);
    REQUIRE(a.size() == 20);
    CHECK(a == b);
    std::set<std::vector<std::size_t>> orders;
    for (std::size_t i = 0; i < a.size(); ++i) {
      orders.insert(order_of(a[i]));
      CHECK(order_of(a[i]) == a[i].origin.order);
      CHECK(a[i].origin.index == i);
    }
    CHECK(orders.size() == 20);
    CHECK_FALSE(orders.count({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}));
  }
  SUBCASE("fewer than two sentences") { CHECK_THROWS_AS(generate_permutations(make_doc(1), 20, 1), DataError); }
}

TEST_CASE("permutations keep paragraph sizes") {
  Document d = make_doc(0);
  d.paragraphs = {{{Token{"s0", std::nullopt}}, {Token{"s1", std::nullopt}}}, {{Token{"s2", std::nullopt}}}};
  for (const auto& p : generate_permutations(d, 20, 3)) {
    REQUIRE(p.paragraphs.size() == 2);
    CHECK(p.paragraphs[0].size() == 2);
    CHECK(p.paragraphs[1].size() == 1);
  }
}

TEST_CASE("permutation sets never contain the identity or duplicates") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(9);
    const std::size_t k = 1 + rng.below(25);
    auto perms = generate_permutations(make_doc(n), k, rng.next());
    std::set<std::vector<std::size_t>> orders;
    for (const auto& p : perms) orders.insert(order_of(p));
    std::vector<std::size_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    CHECK(orders.size() == perms.size());
    CHECK_FALSE(orders.count(identity));
    if (n == 3) CHECK(perms.size() == std::min<std::size_t>(5, k));
  }
}

TEST_CASE("min_adjacent_transpositions examples") {
  const std::vector<std::size_t> id{1, 2, 3};
  CHECK(min_adjacent_transpositions(id, id) == 0);
  CHECK(min_adjacent_transpositions(std::vector<std::size_t>{3, 2, 1}, id) == 3);
  CHECK_THROWS_AS(min_adjacent_transpositions(std::vector<std::size_t>{1, 1, 2}, id), DataError);
  CHECK_THROWS_AS(min_adjacent_transpositions(std::vector<std::size_t>{1, 2}, id), DataError);
  CHECK_THROWS_AS(min_adjacent_transpositions(std::vector<std::size_t>{1, 2, 4}, id), DataError);
}

TEST_CASE("min_adjacent_transpositions equals BFS distance for n <= 6") {
  for (std::size_t n = 1; n <= 6; ++n) {
    std::vector<std::size_t> p(n), identity(n);
    std::iota(p.begin(), p.end(), 0);
    identity = p;
    do {
      CHECK(min_adjacent_transpositions(p, identity) == static_cast<std::uint64_t>(bfs_distance(p)));
    } while (std::next_permutation(p.begin(), p.end()));
  }
}

TEST_CASE("inversion count properties") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(30);
    std::vector<std::size_t> o(n), p(n);
    std::iota(o.begin(), o.end(), 100);
    for (std::size_t i = n; i > 1; --i) std::swap(o[i - 1], o[rng.below(i)]);
    p = o;
    for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    // Relabel: o^-1 . p against the identity.
    std::map<std::size_t, std::size_t> pos;
    for (std::size_t i = 0; i < n; ++i) pos[o[i]] = i;
    std::vector<std::size_t> relabeled(n), identity(n);
    for (std::size_t i = 0; i < n; ++i) relabeled[i] = pos[p[i]];
    std::iota(identity.begin(), identity.end(), 0);
    const auto inv = min_adjacent_transpositions(p, o);
    CHECK(inv == min_adjacent_transpositions(relabeled, identity));
    CHECK(inv <= n * (n - 1) / 2);
    std::vector<std::size_t> reversed(o.rbegin(), o.rend());
    CHECK(min_adjacent_transpositions(reversed, o) == n * (n - 1) / 2);
    if (inv == n * (n - 1) / 2) CHECK(p == reversed);
  }
}

TEST_CASE("load_embeddings") {
  std::istringstream ok("the 0.1 0.2\ncat -1 2.5e-1\n\nthe 9 9\n");
  std::vector<std::string> warnings;
  coherence::log::ScopedSink sink([&](auto, const std::string& m) { warnings.push_back(m); });
  auto m = read_embeddings(ok, 2);
  CHECK(m.size() == 2);
  auto the = m.find("the");
  REQUIRE(the.has_value());
  CHECK((*the)[0] == 0.1);
  CHECK((*the)[1] == 0.2);
  CHECK((*m.find("cat"))[1] == 0.25);
  CHECK(warnings.size() == 1);

  std::istringstream bad("a 1 2\nb 1 2 3\n");
  try {
    read_embeddings(bad, 2);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream nan_line("a 1 x\n");
  CHECK_THROWS_AS(read_embeddings(nan_line, 2), DataError);
}

TEST_CASE("load_embeddings skips a leading count/dim header") {
  std::istringstream with_header("\n2 2\nthe 0.1 0.2\ncat 1 2\n");
  CHECK(read_embeddings(with_header, 2).size() == 2);
  std::istringstream late_header("the 0.1 0.2\n2 2\n");
  CHECK_THROWS_AS(read_embeddings(late_header, 2), DataError);
  std::istringstream wrong_dim("2 3\nthe 0.1 0.2\n");
  CHECK_THROWS_AS(read_embeddings(wrong_dim, 2), DataError);
  // With one dimension "5 1" is a word and its value.
  std::istringstream one_dim("5 1\n");
  CHECK(read_embeddings(one_dim, 1).find("5").has_value());
}

TEST_CASE("load_embeddings reads 50- and 300-dimensional files") {
  const auto dir = std::filesystem::temp_directory_path() / "coherence_data_test";
  std::filesystem::create_directories(dir);
  for (std::size_t dim : {50u, 300u}) {
    const auto path = dir / ("vec" + std::to_string(dim) + ".txt");
    {
      std::ofstream out(path);
      for (int w = 0; w < 3; ++w) {
        out << "tok" << w;
        for (std::size_t i = 0; i < dim; ++i) out << ' ' << (w + 1) * 0.001 * static_cast<double>(i);
        out << '\n';
      }
    }
    auto m = load_embeddings(path, dim);
    CHECK(m.dim() == dim);
    CHECK(m.size() == 3);
    CHECK_THROWS_AS(load_embeddings(path, dim == 50 ? 300 : 50), DataError);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("synth_corpus") {
  SynthSpec spec;
  spec.num_docs = 20;
  spec.sents_per_doc = 5;
  spec.words_per_sent = 6;
  spec.seed = 9;
  auto a = synth_corpus(spec);
  CHECK(a == synth_corpus(spec));
  REQUIRE(a.size() == 20);
  for (const auto& d : a.documents) {
    CHECK(d.num_sentences() == 5);
    for (const auto* s : d.sentences()) CHECK(s->size() == 6);
    CHECK(d.label == CoherenceLabel::coherent());
  }

  spec.seed = 10;
  CHECK_FALSE(a == synth_corpus(spec));

  spec.gr_rule = "first-token=nsubj, last=punct, else=amod";
  auto c = synth_corpus(spec);
  std::map<std::string, std::size_t> histogram;
  for (const auto& d : c.documents)
    for (const auto* s : d.sentences())
      for (const auto& t : *s) ++histogram[t.gr.value()];
  // Recount from the rule: per sentence one nsubj, one punct, four amod.
  const std::size_t sentences = 20 * 5;
  CHECK(histogram == std::map<std::string, std::size_t>{{"amod", 4 * sentences}, {"nsubj", sentences}, {"punct", sentences}});

  spec.vocab_size = 4;
  CHECK_THROWS_AS(synth_corpus(spec), ConfigError);
  spec.vocab_size = 50;
  spec.num_docs = 0;
  CHECK_THROWS_AS(synth_corpus(spec), ConfigError);
  CHECK_THROWS_AS(GrRule::parse("middle=amod"), ConfigError);
}

TEST_CASE("synthetic graded corpora with paragraphs") {
  SynthSpec spec;
  spec.graded = true;
  spec.paragraphs_per_doc = 2;
  spec.num_docs = 60;
  auto c = synth_corpus(spec);
  CHECK(c.has_paragraphs());
  std::set<int> classes;
  for (const auto& d : c.documents) {
    CHECK(d.label.kind == CoherenceLabel::Kind::kGraded);
    classes.insert(d.label.value);
    CHECK(d.paragraphs.size() == 2);
    CHECK(d.paragraphs[0].size() == 3);
    CHECK(d.paragraphs[1].size() == 2);
  }
  CHECK(classes == std::set<int>{0, 1, 2});
}

TEST_CASE("JSONL round trip of an ingested corpus") {
  auto corpus = parse(kConllu);
  auto perms = generate_permutations(corpus.documents[0], 3, 4);
  corpus.documents.insert(corpus.documents.end(), perms.begin(), perms.end());
  std::stringstream buffer;
  write_corpus_jsonl(buffer, corpus);
  auto back = read_corpus_jsonl(buffer);
  CHECK(back == corpus);

  const auto line = document_to_json_line(corpus.documents[1]);
  CHECK(line.find("\"id\"") != std::string::npos);
  CHECK(line.find("\"label\"") != std::string::npos);
  CHECK(line.find("\"paragraphs\"") != std::string::npos);
  CHECK(line.find("\"origin\":\"original\"") != std::string::npos);
  CHECK(document_to_json_line(perms[0]).find("\"permutation_of\":\"d1\"") != std::string::npos);

  std::istringstream bad("{\"id\": \"x\"}\n");
  CHECK_THROWS_AS(read_corpus_jsonl(bad), DataError);
  std::istringstream garbage("not json\n");
  CHECK_THROWS_AS(read_corpus_jsonl(garbage), DataError);
}

TEST_CASE("split_by_original keeps permutations with their source") {
  auto corpus = synth_corpus({});
  Corpus full;
  for (const auto& d : corpus.documents) {
    full.documents.push_back(d);
    for (auto& p : generate_permutations(d, 3, 1)) full.documents.push_back(std::move(p));
  }
  auto [train, dev] = split_by_original(full, 0.9, 7);
  CHECK(train.size() + dev.size() == full.size());
  CHECK(train.size() == 18 * 4);
  std::set<std::string> train_ids;
  for (const auto& d : train.documents) train_ids.insert(d.origin.is_original() ? d.id : *d.origin.source_id);
  for (const auto& d : dev.documents) CHECK_FALSE(train_ids.count(d.origin.is_original() ? d.id : *d.origin.source_id));
  auto again = split_by_original(full, 0.9, 7);
  CHECK(again.first == train);
}

TEST_CASE("permutation groups and single-sentence removal") {
  Corpus c;
  c.documents.push_back(make_doc(3, "a"));
  c.documents.push_back(make_doc(1, "b"));
  for (auto& p : generate_permutations(c.documents[0], 2, 1)) c.documents.push_back(std::move(p));
  coherence::log::ScopedSink quiet([](auto, const std::string&) {});
  CHECK(remove_single_sentence_documents(c) == 1);
  auto groups = permutation_groups(c);
  REQUIRE(groups.size() == 1);
  CHECK(groups[0].original == 0);
  CHECK(groups[0].permutations == std::vector<std::size_t>{1, 2});
}

TEST_CASE("bundled synthetic corpus matches its generator spec") {
  const std::filesystem::path dir(COHERENCE_DATA_DIR);
  const auto bundled = read_corpus_jsonl(dir / "synthetic_binary.jsonl");
  std::ifstream in(dir / "synthetic_spec.json");
  const auto j = nlohmann::json::parse(in);
  SynthSpec spec;
  spec.num_docs = j.at("num_docs");
  spec.vocab_size = j.at("vocab_size");
  spec.sents_per_doc = j.at("sents_per_doc");
  spec.words_per_sent = j.at("words_per_sent");
  spec.gr_rule = j.at("gr_rule");
  spec.seed = j.at("seed");
  Corpus expected;
  for (const auto& d : synth_corpus(spec).documents) {
    expected.documents.push_back(d);
    for (auto& p : generate_permutations(d, 5, 1)) expected.documents.push_back(std::move(p));
  }
  CHECK(bundled == expected);
  CHECK(bundled.size() == 120);
  std::size_t originals = 0;
  for (const auto& d : bundled.documents) originals += d.origin.is_original();
  CHECK(originals == 20);
}
