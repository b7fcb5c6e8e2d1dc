#include "dcyk/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "dcyk/rng.hpp"

namespace dcyk {
namespace {

bool is_decimal_numeral(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Symbols with an uppercase first letter are nonterminals; everything else
// is a terminal. This is what makes mixed rules like "S -> a B" detectable.
bool is_nonterminal_name(const std::string& s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

void push_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

}  // namespace

bool Grammar::is_nonterminal(const std::string& s) const {
  return std::find(nonterminals.begin(), nonterminals.end(), s) != nonterminals.end();
}

bool Grammar::is_terminal(const std::string& s) const {
  return std::find(terminals.begin(), terminals.end(), s) != terminals.end();
}

void Grammar::finalize() {
  if (rule_count() == 0) throw GrammarError("grammar has no rules");
  if (start.empty()) throw GrammarError("no start symbol declared (expected 'start: S' header)");

  std::sort(binary_rules.begin(), binary_rules.end());
  std::sort(unary_rules.begin(), unary_rules.end());
  if (std::adjacent_find(binary_rules.begin(), binary_rules.end()) != binary_rules.end())
    throw GrammarError("duplicate binary rule");
  if (std::adjacent_find(unary_rules.begin(), unary_rules.end()) != unary_rules.end())
    throw GrammarError("duplicate unary rule");

  for (const auto& r : binary_rules)
    for (const auto& s : {r.lhs, r.left, r.right})
      if (!is_nonterminal_name(s))
        throw GrammarError("rule '" + r.lhs + " -> " + r.left + " " + r.right +
                           "' is not CNF: '" + s + "' is not a nonterminal");
  for (const auto& r : unary_rules) {
    if (!is_nonterminal_name(r.lhs))
      throw GrammarError("rule lhs '" + r.lhs + "' is not a nonterminal");
    if (is_nonterminal_name(r.terminal))
      throw GrammarError("rule '" + r.lhs + " -> " + r.terminal +
                         "' is not CNF: unit chains are not allowed");
  }

  nonterminals.clear();
  terminals.clear();
  push_unique(nonterminals, start);
  for (const auto& r : binary_rules) {
    push_unique(nonterminals, r.lhs);
    push_unique(nonterminals, r.left);
    push_unique(nonterminals, r.right);
  }
  for (const auto& r : unary_rules) {
    push_unique(nonterminals, r.lhs);
    push_unique(terminals, r.terminal);
  }

  bool start_used = false;
  for (const auto& r : binary_rules)
    start_used |= r.lhs == start || r.left == start || r.right == start;
  for (const auto& r : unary_rules) start_used |= r.lhs == start;
  if (!start_used)
    throw GrammarError("start symbol '" + start + "' does not occur in any rule");
  if (!is_nonterminal_name(start))
    throw GrammarError("start symbol '" + start + "' is not a nonterminal");

  for (const auto& s : nonterminals)
    if (is_decimal_numeral(s))
      throw GrammarError("symbol name '" + s + "' is a decimal numeral (reserved for span indices)");
  for (const auto& s : terminals)
    if (is_decimal_numeral(s))
      throw GrammarError("symbol name '" + s + "' is a decimal numeral (reserved for span indices)");
}

Grammar parse_grammar(const std::string& text) {
  Grammar g;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    auto toks = split_ws(line);
    if (toks.empty()) continue;

    if (toks[0] == "start:" || (toks.size() >= 2 && toks[0] == "start" && toks[1] == ":")) {
      std::size_t idx = (toks[0] == "start:") ? 1 : 2;
      if (toks.size() != idx + 1)
        throw GrammarError("line " + std::to_string(lineno) + ": malformed start declaration");
      if (!g.start.empty())
        throw GrammarError("line " + std::to_string(lineno) + ": duplicate start declaration");
      g.start = toks[idx];
      continue;
    }

    auto arrow = std::find(toks.begin(), toks.end(), "->");
    if (arrow == toks.end() || arrow != toks.begin() + 1)
      throw GrammarError("line " + std::to_string(lineno) + ": expected 'A -> B C' or 'A -> a'");
    const std::string lhs = toks[0];
    std::vector<std::string> rhs(arrow + 1, toks.end());
    try {
      if (rhs.size() == 1) {
        g.unary_rules.push_back({lhs, rhs[0]});
      } else if (rhs.size() == 2) {
        g.binary_rules.push_back({lhs, rhs[0], rhs[1]});
      } else {
        throw GrammarError("rule of '" + lhs +
                           "' is not CNF (rhs must be one terminal or two nonterminals)");
      }
      // fail fast with the line number on shape violations
      if (rhs.size() == 1 && is_nonterminal_name(rhs[0]))
        throw GrammarError("rule '" + lhs + " -> " + rhs[0] +
                           "' is not CNF: unit chains are not allowed");
      if (rhs.size() == 2 && (!is_nonterminal_name(lhs) || !is_nonterminal_name(rhs[0]) ||
                              !is_nonterminal_name(rhs[1])))
        throw GrammarError("rule '" + lhs + "' is not CNF: binary rhs must be nonterminals");
    } catch (const GrammarError& e) {
      throw GrammarError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }

  g.finalize();
  return g;
}

std::string render_grammar(const Grammar& g) {
  std::ostringstream out;
  out << "start: " << g.start << "\n";
  for (const auto& r : g.binary_rules) out << r.lhs << " -> " << r.left << " " << r.right << "\n";
  for (const auto& r : g.unary_rules) out << r.lhs << " -> " << r.terminal << "\n";
  return out.str();
}

Grammar load_grammar_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GrammarError("cannot open grammar file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_grammar(ss.str());
}

Sentence Sentence::from_line(const std::string& line) { return Sentence{split_ws(line)}; }

std::string Sentence::to_line() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

Sentence generate_sentence(const Grammar& g, int max_len, std::uint64_t rng_seed, int max_attempts) {
  if (max_len < 1) throw GrammarError("generate_sentence: max_len must be >= 1");
  SplitMix64 rng(mix_seed(rng_seed, 0x5e47e4ce));

  struct Alt {
    bool is_unary;
    std::size_t index;  // into unary_rules or binary_rules
  };
  // alternatives per nonterminal, in sorted-rule order
  std::vector<std::vector<Alt>> alts(g.nonterminals.size());
  auto nt_index = [&](const std::string& s) {
    return static_cast<std::size_t>(
        std::find(g.nonterminals.begin(), g.nonterminals.end(), s) - g.nonterminals.begin());
  };
  for (std::size_t i = 0; i < g.binary_rules.size(); ++i)
    alts[nt_index(g.binary_rules[i].lhs)].push_back({false, i});
  for (std::size_t i = 0; i < g.unary_rules.size(); ++i)
    alts[nt_index(g.unary_rules[i].lhs)].push_back({true, i});

  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    // sentential form: nonterminal indices are offset past the terminal space
    std::vector<std::string> form{g.start};
    std::vector<bool> is_nt{true};
    bool dead = false;
    while (!dead) {
      // leftmost nonterminal
      std::size_t pos = 0;
      while (pos < form.size() && !is_nt[pos]) ++pos;
      if (pos == form.size()) break;  // all terminals
      const auto& options = alts[nt_index(form[pos])];
      if (options.empty()) {
        dead = true;  // nonterminal with no rules (possible in expanded grammars)
        break;
      }
      const Alt& a = options[rng.below(options.size())];
      if (a.is_unary) {
        form[pos] = g.unary_rules[a.index].terminal;
        is_nt[pos] = false;
      } else {
        const auto& r = g.binary_rules[a.index];
        form[pos] = r.left;
        form.insert(form.begin() + pos + 1, r.right);
        is_nt.insert(is_nt.begin() + pos + 1, true);
      }
      // CNF derivations never shrink, so overlong forms can be rejected early
      if (static_cast<int>(form.size()) > max_len) {
        dead = true;
        break;
      }
    }
    if (!dead && !form.empty() && static_cast<int>(form.size()) <= max_len)
      return Sentence{form};
  }
  throw GrammarError("generate_sentence: no sentence of length <= " + std::to_string(max_len) +
                     " found in " + std::to_string(max_attempts) + " attempts");
}

Grammar expand_grammar(const Grammar& g, RuleKind kind, int count, std::uint64_t rng_seed) {
  if (count < 1) throw GrammarError("expand_grammar: count must be >= 1");
  Grammar out = g;
  SplitMix64 rng(mix_seed(rng_seed, kind == RuleKind::unary ? 0xa11bull : 0xb22cull));

  std::vector<std::string> nts = g.nonterminals;
  std::vector<std::string> ts = g.terminals;
  int next_nt = 1, next_t = 1;
  auto known = [&](const std::string& s) {
    return std::find(nts.begin(), nts.end(), s) != nts.end() ||
           std::find(ts.begin(), ts.end(), s) != ts.end();
  };
  auto fresh_nt = [&] {
    std::string s;
    do s = "N" + std::to_string(next_nt++);
    while (known(s));
    return s;
  };
  auto fresh_t = [&] {
    std::string s;
    do s = "t" + std::to_string(next_t++);
    while (known(s));
    return s;
  };
  // Existing symbols are favored so expanded grammars stress the per-symbol
  // rule operators rather than just adding disconnected symbols.
  auto pick_nt = [&](double fresh_prob) {
    if (rng.uniform01() < fresh_prob) {
      nts.push_back(fresh_nt());
      return nts.back();
    }
    return nts[rng.below(nts.size())];
  };
  auto pick_t = [&](double fresh_prob) {
    if (rng.uniform01() < fresh_prob) {
      ts.push_back(fresh_t());
      return ts.back();
    }
    return ts[rng.below(ts.size())];
  };

  int added = 0;
  int guard = 0;
  while (added < count) {
    if (++guard > count * 1000) throw GrammarError("expand_grammar: could not draw enough fresh rules");
    if (kind == RuleKind::unary) {
      UnaryRule r{pick_nt(0.2), pick_t(0.4)};
      if (std::find(out.unary_rules.begin(), out.unary_rules.end(), r) != out.unary_rules.end())
        continue;
      out.unary_rules.push_back(r);
    } else {
      BinaryRule r{pick_nt(0.2), pick_nt(0.15), pick_nt(0.15)};
      if (std::find(out.binary_rules.begin(), out.binary_rules.end(), r) != out.binary_rules.end())
        continue;
      out.binary_rules.push_back(r);
    }
    ++added;
  }
  out.finalize();
  return out;
}

}  // namespace dcyk
