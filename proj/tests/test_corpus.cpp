#include <doctest.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "sbys/corpus.hpp"
#include "sbys/error.hpp"

using namespace sbys;

namespace {

std::string words(std::size_t n, char c = 'w') {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + std::string(1, c);
  return s;
}

Segment seg(const std::string& doc, std::size_t index, std::size_t tokens) {
  return {doc, Domain::parse("news"), index, words(tokens), words(tokens, 'r'), "en", "de"};
}

}  // namespace

TEST_CASE("domains outside the known four map to other") {
  CHECK(Domain::parse("literary").kind == Domain::Kind::literary);
  CHECK(Domain::parse("speech").name() == "speech");
  const auto d = Domain::parse("medical");
  CHECK(d.kind == Domain::Kind::other);
  CHECK(d.name() == "medical");
}

TEST_CASE("whitespace token count") {
  CHECK(whitespace_token_count("") == 0);
  CHECK(whitespace_token_count("  a  b\tc\n") == 3);
}

TEST_CASE("tsv parsing sorts by index and rejects bad input") {
  const std::string tsv =
      "doc_id\tdomain\tindex\tsource\treference\tsource_lang\ttarget_lang\n"
      "d1\tnews\t1\tsecond\tzweite\ten\tde\n"
      "d1\tnews\t0\tfirst\terste\ten\tde\n";
  const auto segs = parse_corpus(tsv, CorpusFormat::tsv);
  REQUIRE(segs.size() == 2);
  CHECK(segs[0].source_text == "first");
  CHECK(segs[1].reference_text == "zweite");

  const std::string dup = tsv + "d1\tnews\t1\tagain\tnochmal\ten\tde\n";
  CHECK_THROWS_AS(parse_corpus(dup, CorpusFormat::tsv), DuplicateIndex);

  const std::string gap =
      "doc_id\tdomain\tindex\tsource\treference\tsource_lang\ttarget_lang\n"
      "d1\tnews\t0\ta\tb\ten\tde\n"
      "d1\tnews\t2\ta\tb\ten\tde\n";
  CHECK_THROWS_AS(parse_corpus(gap, CorpusFormat::tsv), ParseError);

  const std::string short_row =
      "doc_id\tdomain\tindex\tsource\treference\tsource_lang\ttarget_lang\n"
      "d1\tnews\t0\ta\n";
  try {
    parse_corpus(short_row, CorpusFormat::tsv);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("jsonl parsing") {
  const std::string jsonl =
      R"({"doc_id":"a","domain":"social","index":0,"source":"hi","reference":null,"source_lang":"en","target_lang":"ja"})"
      "\n";
  const auto segs = parse_corpus(jsonl, CorpusFormat::jsonl);
  REQUIRE(segs.size() == 1);
  CHECK(!segs[0].reference_text.has_value());
  CHECK_THROWS_AS(parse_corpus("{not json}\n", CorpusFormat::jsonl), ParseError);
}

TEST_CASE("greedy blobbing follows the hand trace") {
  // [100,100,100] with cap 250 -> [[0,1],[2]]
  std::vector<Segment> segs = {seg("d", 0, 100), seg("d", 1, 100), seg("d", 2, 100)};
  const auto docs = assemble_documents(segs, 250);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].segment_span == SegmentSpan{0, 1});
  CHECK(docs[1].segment_span == SegmentSpan{2, 2});
  CHECK(docs[0].id == "d:0-1");
  CHECK(docs[0].token_count == 200);
  CHECK(docs[0].source_text == segs[0].source_text + "\n" + segs[1].source_text);
  CHECK(docs[0].reference_text == *segs[0].reference_text + "\n" + *segs[1].reference_text);
}

TEST_CASE("an oversized segment stays whole") {
  std::vector<Segment> segs = {seg("d", 0, 10), seg("d", 1, 400), seg("d", 2, 10)};
  const auto docs = assemble_documents(segs, 250);
  REQUIRE(docs.size() == 3);
  CHECK(docs[1].token_count == 400);
}

TEST_CASE("blobs never cross documents and drop references when any is missing") {
  auto a = seg("a", 0, 5);
  auto b = seg("b", 0, 5);
  b.reference_text.reset();
  const auto docs = assemble_documents({a, b}, 250);
  REQUIRE(docs.size() == 2);
  CHECK(docs[0].reference_text.has_value());
  CHECK(!docs[1].reference_text.has_value());
}

TEST_CASE("blobbing matches the greedy oracle on random corpora") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::size_t> tokens(1 + rng() % 30);
    for (auto& t : tokens) t = 1 + rng() % 120;
    std::vector<Segment> segs;
    for (std::size_t i = 0; i < tokens.size(); ++i) segs.push_back(seg("d", i, tokens[i]));
    const auto docs = assemble_documents(segs, 250);
    const auto expected = oracle::greedy_blobs(tokens, 250);
    REQUIRE(docs.size() == expected.size());
    for (std::size_t k = 0; k < docs.size(); ++k) {
      CHECK(docs[k].segment_span.first == expected[k].front());
      CHECK(docs[k].segment_span.last == expected[k].back());
    }
  }
}

TEST_CASE("stats per domain") {
  std::vector<Segment> segs = {seg("a", 0, 100), seg("b", 0, 50)};
  segs[1].domain = Domain::parse("literary");
  const auto s = corpus_stats(assemble_documents(segs, 250));
  CHECK(s.total_documents == 2);
  CHECK(s.per_domain.at("news").average_length() == doctest::Approx(100));
  CHECK(s.average_length() == doctest::Approx(75));
}

TEST_CASE("assembled jsonl round-trips") {
  std::vector<Segment> segs = {seg("a", 0, 3), seg("a", 1, 4)};
  const auto docs = assemble_documents(segs, 250);
  const auto path = std::filesystem::temp_directory_path() / "sbys_assembled_rt.jsonl";
  write_assembled_jsonl(path, docs);
  CHECK(read_assembled_jsonl(path) == docs);
  CHECK(corpus_digest(docs) == corpus_digest(read_assembled_jsonl(path)));
  std::filesystem::remove(path);
}
