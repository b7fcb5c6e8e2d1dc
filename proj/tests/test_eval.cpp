#include "dcyk/eval.hpp"

#include "dcyk/grammar.hpp"
#include "doctest.h"

using namespace dcyk;

namespace {

const char* kFig1 = R"(start: S
S -> D E
S -> D S
D -> a
E -> b
)";

SweepConfig small_config() {
  SweepConfig cfg;
  cfg.grammar_ids = {"fig1"};
  cfg.grammars = {parse_grammar(kFig1)};
  cfg.dims = {64, 128};
  cfg.seeds = {1};
  for (std::uint64_t s = 0; s < 5; ++s) cfg.sentences.push_back(generate_sentence(cfg.grammars[0], 6, s));
  cfg.workers = 2;
  return cfg;
}

}  // namespace

TEST_CASE("identical charts score perfectly") {
  Grammar g = parse_grammar(kFig1);
  Chart c = cyk_parse(g, Sentence::from_line("a a b"));
  CellScores s = score_cells(c, c);
  CHECK(s.tp == 5);
  CHECK(s.fp == 0);
  CHECK(s.fn == 0);
  CHECK(s.precision == 1.0);
  CHECK(s.recall == 1.0);
  CHECK(s.f1 == 1.0);
}

TEST_CASE("empty decoded chart scores zero recall") {
  Grammar g = parse_grammar(kFig1);
  Chart oracle = cyk_parse(g, Sentence::from_line("a a b"));
  Chart empty;
  empty.n = 3;
  CellScores s = score_cells(oracle, empty);
  CHECK(s.recall == 0.0);
  CHECK(s.f1 == 0.0);
  CHECK(s.precision == 0.0);  // no predictions but gold exists

  // both empty: perfect by convention
  CellScores both = score_cells(empty, empty);
  CHECK(both.precision == 1.0);
  CHECK(both.recall == 1.0);
}

TEST_CASE("one missing triple: p=1, r=0.8") {
  Grammar g = parse_grammar(kFig1);
  Chart oracle = cyk_parse(g, Sentence::from_line("a a b"));
  Chart decoded = oracle;
  decoded.cells.erase({0, 3});  // drop (0,3,S)
  CellScores s = score_cells(oracle, decoded);
  CHECK(s.tp == 4);
  CHECK(s.fn == 1);
  CHECK(s.fp == 0);
  CHECK(s.precision == 1.0);
  CHECK(s.recall == doctest::Approx(0.8));
  CHECK(s.f1 == doctest::Approx(2.0 * 0.8 / 1.8));
}

TEST_CASE("mismatched lengths are rejected") {
  Chart a, b;
  a.n = 2;
  b.n = 3;
  CHECK_THROWS(score_cells(a, b));
}

TEST_CASE("sweep produces one row per combination, in key order") {
  SweepConfig cfg = small_config();
  auto rows = run_sweep(cfg);
  REQUIRE(rows.size() == 2 * 1 * 5);
  int i = 0;
  for (int dim : cfg.dims)
    for (std::size_t s = 0; s < cfg.sentences.size(); ++s) {
      CHECK(rows[i].dim == dim);
      CHECK(rows[i].sentence_id == static_cast<int>(s));
      CHECK(rows[i].sentence_len == cfg.sentences[s].size());
      CHECK(rows[i].error.empty());
      CHECK(rows[i].wall_time_ms > 0.0);
      ++i;
    }
}

TEST_CASE("sweep rows CSV is byte-stable across runs and resumable") {
  SweepConfig cfg = small_config();
  auto rows1 = run_sweep(cfg);
  auto rows2 = run_sweep(cfg);
  CHECK(rows_to_csv(rows1) == rows_to_csv(rows2));

  // resume from a partial result: final bytes identical
  std::vector<SweepRow> partial(rows1.begin(), rows1.begin() + 4);
  auto resumed = run_sweep(cfg, &partial);
  CHECK(rows_to_csv(resumed) == rows_to_csv(rows1));

  // round trip
  auto parsed = rows_from_csv(rows_to_csv(rows1));
  CHECK(rows_to_csv(parsed) == rows_to_csv(rows1));
}

TEST_CASE("aggregation groups by dim and by length") {
  std::vector<SweepRow> rows;
  SweepRow r;
  r.grammar_id = "g";
  r.dim = 64;
  r.sentence_id = 0;
  r.sentence_len = 2;
  r.f1 = 0.4;
  r.precision = 0.5;
  r.recall = 0.5;
  rows.push_back(r);
  r.sentence_id = 1;
  r.sentence_len = 3;
  r.f1 = 0.6;
  rows.push_back(r);

  auto by_dim = aggregate_by_dim(rows);
  REQUIRE(by_dim.size() == 1);
  CHECK(by_dim[0].count == 2);
  CHECK(by_dim[0].mean_f1 == doctest::Approx(0.5));
  CHECK(by_dim[0].sentence_len == -1);

  auto by_len = aggregate_by_length(rows);
  REQUIRE(by_len.size() == 2);
  CHECK(by_len[0].sentence_len == 2);
  CHECK(by_len[0].mean_f1 == doctest::Approx(0.4));
  CHECK(by_len[1].sentence_len == 3);

  // single row: summary equals the row
  auto one = aggregate_by_dim({rows[0]});
  CHECK(one[0].count == 1);
  CHECK(one[0].mean_f1 == doctest::Approx(0.4));
  CHECK(one[0].ci95_f1 == 0.0);

  // failed rows are excluded
  SweepRow bad = r;
  bad.error = "boom";
  rows.push_back(bad);
  CHECK(aggregate_by_dim(rows)[0].count == 2);
}

TEST_CASE("csv escaping follows rfc 4180") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");

  // an error message with commas survives the round trip
  std::vector<SweepRow> rows(1);
  rows[0].grammar_id = "g";
  rows[0].error = "failed, badly \"quoted\"";
  auto parsed = rows_from_csv(rows_to_csv(rows));
  REQUIRE(parsed.size() == 1);
  CHECK(parsed[0].error == rows[0].error);
}

TEST_CASE("summary csv and table render") {
  std::vector<SweepRow> rows(1);
  rows[0].grammar_id = "g";
  rows[0].dim = 64;
  rows[0].f1 = 1.0;
  rows[0].precision = 1.0;
  rows[0].recall = 1.0;
  auto agg = aggregate_by_dim(rows);
  CHECK(summary_to_csv(agg).find("grammar_id,dim,") == 0);
  CHECK(summary_to_table(agg).find("grammar") != std::string::npos);
}

TEST_CASE("empty sentence list gives an empty sweep") {
  SweepConfig cfg = small_config();
  cfg.sentences.clear();
  CHECK(run_sweep(cfg).empty());
}
