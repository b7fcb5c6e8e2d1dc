#include "dcyk/cyk.hpp"

#include <sstream>

namespace dcyk {

namespace {
const std::set<std::string> kEmpty;
}

bool Chart::contains(int i, int j, const std::string& sym) const {
  auto it = cells.find({i, j});
  return it != cells.end() && it->second.count(sym) > 0;
}

const std::set<std::string>& Chart::at(int i, int j) const {
  auto it = cells.find({i, j});
  return it == cells.end() ? kEmpty : it->second;
}

void Chart::add(int i, int j, const std::string& sym) { cells[{i, j}].insert(sym); }

std::size_t Chart::triple_count() const {
  std::size_t c = 0;
  for (const auto& [span, syms] : cells) c += syms.size();
  return c;
}

std::string Chart::serialize() const {
  std::ostringstream out;
  for (const auto& [span, syms] : cells) {
    if (syms.empty()) continue;
    out << span.first << " " << span.second << " :";
    for (const auto& s : syms) out << " " << s;
    out << "\n";
  }
  return out.str();
}

Chart Chart::parse(const std::string& text) {
  Chart c;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    int i, j;
    std::string colon, sym;
    if (!(ls >> i >> j >> colon) || colon != ":")
      throw GrammarError("bad chart line: " + line);
    while (ls >> sym) c.add(i, j, sym);
    c.n = std::max(c.n, j);
  }
  return c;
}

Chart cyk_parse(const Grammar& g, const Sentence& w) {
  const int n = w.size();
  if (n == 0) throw GrammarError("cyk_parse: sentence is empty");
  for (const auto& tok : w.tokens)
    if (!g.is_terminal(tok)) throw GrammarError("cyk_parse: unknown terminal '" + tok + "'");

  Chart p;
  p.n = n;
  for (int i = 1; i <= n; ++i)
    for (const auto& r : g.unary_rules)
      if (r.terminal == w.tokens[i - 1]) p.add(i - 1, i, r.lhs);

  for (int j = 2; j <= n; ++j)
    for (int i = j - 2; i >= 0; --i)
      for (int k = i + 1; k <= j - 1; ++k)
        for (const auto& r : g.binary_rules)
          if (p.contains(i, k, r.left) && p.contains(k, j, r.right)) p.add(i, j, r.lhs);

  return p;
}

bool recognizes(const Chart& c, const Grammar& g) { return c.contains(0, c.n, g.start); }

}  // namespace dcyk
