#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>

#include "dcyk/grammar.hpp"

namespace dcyk {

// CYK table: span (i,j), 0 <= i < j <= n, to the set of nonterminals that
// derive tokens i+1..j. Only non-empty cells are stored.
struct Chart {
  int n = 0;
  std::map<std::pair<int, int>, std::set<std::string>> cells;

  bool contains(int i, int j, const std::string& sym) const;
  const std::set<std::string>& at(int i, int j) const;  // empty set when absent
  void add(int i, int j, const std::string& sym);
  std::size_t triple_count() const;

  // One line per non-empty cell: "i j : A B C", symbols sorted.
  std::string serialize() const;
  static Chart parse(const std::string& text);

  bool operator==(const Chart&) const = default;
};

// The classical CYK recognizer. Loop order: j ascending 2..n, i descending
// j-2..0, k ascending i+1..j-1. Throws GrammarError on unknown tokens.
Chart cyk_parse(const Grammar& g, const Sentence& w);

bool recognizes(const Chart& c, const Grammar& g);

}  // namespace dcyk
