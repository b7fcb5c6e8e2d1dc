#include "dcyk/cyk.hpp"

#include <set>

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

// Derivation-tree membership by brute force (see test_grammar for the
// enumeration variant): can `target` be derived from symbol `sym`?
bool derives(const Grammar& g, const std::string& sym, const std::vector<std::string>& target) {
  if (target.empty()) return false;
  if (target.size() == 1) {
    for (const auto& r : g.unary_rules)
      if (r.lhs == sym && r.terminal == target[0]) return true;
    return false;
  }
  for (const auto& r : g.binary_rules) {
    if (r.lhs != sym) continue;
    for (std::size_t k = 1; k < target.size(); ++k) {
      std::vector<std::string> left(target.begin(), target.begin() + k);
      std::vector<std::string> right(target.begin() + k, target.end());
      if (derives(g, r.left, left) && derives(g, r.right, right)) return true;
    }
  }
  return false;
}

std::vector<Sentence> all_strings(const std::vector<std::string>& alphabet, int max_len) {
  std::vector<Sentence> out;
  std::vector<std::vector<std::string>> layer{{}};
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& prefix : layer)
      for (const auto& t : alphabet) {
        auto s = prefix;
        s.push_back(t);
        next.push_back(s);
        out.push_back(Sentence{s});
      }
    layer = std::move(next);
  }
  return out;
}

}  // namespace

TEST_CASE("chart for 'a a b' matches the worked table") {
  Grammar g = parse_grammar(kFig1);
  Chart p = cyk_parse(g, Sentence::from_line("a a b"));
  CHECK(p.n == 3);
  CHECK(p.at(0, 1) == std::set<std::string>{"D"});
  CHECK(p.at(1, 2) == std::set<std::string>{"D"});
  CHECK(p.at(2, 3) == std::set<std::string>{"E"});
  CHECK(p.at(0, 2).empty());
  CHECK(p.at(1, 3) == std::set<std::string>{"S"});
  CHECK(p.at(0, 3) == std::set<std::string>{"S"});
  CHECK(p.triple_count() == 5);
  CHECK(recognizes(p, g));
}

TEST_CASE("single-token and negative inputs") {
  Grammar g = parse_grammar(kFig1);

  Chart b = cyk_parse(g, Sentence::from_line("b"));
  CHECK(b.at(0, 1) == std::set<std::string>{"E"});
  CHECK(!recognizes(b, g));

  CHECK(recognizes(cyk_parse(g, Sentence::from_line("a b")), g));
  CHECK(!recognizes(cyk_parse(g, Sentence::from_line("b a")), g));

  CHECK_THROWS_AS(cyk_parse(g, Sentence{}), GrammarError);
  CHECK_THROWS_AS(cyk_parse(g, Sentence::from_line("a x")), GrammarError);
}

TEST_CASE("oracle equivalence against brute-force derivation membership") {
  Grammar fig1 = parse_grammar(kFig1);
  for (const auto& w : all_strings({"a", "b"}, 5)) {
    const bool via_cyk = recognizes(cyk_parse(fig1, w), fig1);
    CHECK(via_cyk == derives(fig1, fig1.start, w.tokens));
  }

  Grammar g0 = load_grammar_file(std::string(DCYK_DATA_DIR) + "/grammars/g0.grammar");
  for (const auto& w : all_strings({"a", "b", "c"}, 4)) {
    const bool via_cyk = recognizes(cyk_parse(g0, w), g0);
    CHECK(via_cyk == derives(g0, g0.start, w.tokens));
  }
}

TEST_CASE("cell contents equal the derivation relation on every span") {
  Grammar g0 = load_grammar_file(std::string(DCYK_DATA_DIR) + "/grammars/g0.grammar");
  Sentence w = Sentence::from_line("a a b b");
  Chart p = cyk_parse(g0, w);
  for (int i = 0; i < w.size(); ++i)
    for (int j = i + 1; j <= w.size(); ++j)
      for (const auto& a : g0.nonterminals) {
        std::vector<std::string> span(w.tokens.begin() + i, w.tokens.begin() + j);
        CHECK(p.contains(i, j, a) == derives(g0, a, span));
      }
}

TEST_CASE("chart grows monotonically under grammar expansion") {
  Grammar g0 = load_grammar_file(std::string(DCYK_DATA_DIR) + "/grammars/g0.grammar");
  Grammar g1 = expand_grammar(g0, RuleKind::unary, 17, 101);
  Grammar g2 = expand_grammar(g1, RuleKind::binary, 3, 102);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Sentence w = generate_sentence(g0, 7, seed);
    Chart base = cyk_parse(g0, w);
    Chart big = cyk_parse(g2, w);
    for (const auto& [span, syms] : base.cells)
      for (const auto& s : syms) CHECK(big.contains(span.first, span.second, s));
  }
}

TEST_CASE("serialization format and round trip") {
  Grammar g = parse_grammar(kFig1);
  Chart p = cyk_parse(g, Sentence::from_line("a a b"));
  const std::string text = p.serialize();
  CHECK(text ==
        "0 1 : D\n"
        "0 3 : S\n"
        "1 2 : D\n"
        "1 3 : S\n"
        "2 3 : E\n");
  Chart q = Chart::parse(text);
  CHECK(q == p);
  CHECK_THROWS(Chart::parse("garbage line\n"));
}
