#pragma once

#include <cstdint>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace dcyk {

class GrammarError : public std::runtime_error {
 public:
  explicit GrammarError(const std::string& what) : std::runtime_error(what) {}
};

struct BinaryRule {
  std::string lhs, left, right;  // lhs -> left right
  auto operator<=>(const BinaryRule&) const = default;
};

struct UnaryRule {
  std::string lhs, terminal;  // lhs -> terminal
  auto operator<=>(const UnaryRule&) const = default;
};

// A grammar in Chomsky normal form: every rule is A -> B C or A -> a.
// Rules are kept sorted; symbol lists keep a canonical first-appearance order
// (start symbol first, then lhs/rhs order over the sorted rules).
struct Grammar {
  std::vector<std::string> nonterminals;
  std::vector<std::string> terminals;
  std::vector<BinaryRule> binary_rules;
  std::vector<UnaryRule> unary_rules;
  std::string start;

  bool is_nonterminal(const std::string& s) const;
  bool is_terminal(const std::string& s) const;
  std::size_t rule_count() const { return binary_rules.size() + unary_rules.size(); }

  // Re-derives symbol order from the rules and checks every CNF invariant.
  // Throws GrammarError on violations.
  void finalize();

  bool operator==(const Grammar&) const = default;
};

// Parses the grammar file format:
//   start: S
//   S -> D E
//   D -> a
// '#' starts a comment, blank lines are skipped. Symbols are inferred from
// the rules: binary rhs symbols are nonterminals, unary rhs are terminals.
Grammar parse_grammar(const std::string& text);

// Canonical renderer; parse_grammar(render_grammar(g)) == g.
std::string render_grammar(const Grammar& g);

Grammar load_grammar_file(const std::string& path);

struct Sentence {
  std::vector<std::string> tokens;

  static Sentence from_line(const std::string& line);  // whitespace split
  std::string to_line() const;
  int size() const { return static_cast<int>(tokens.size()); }
  bool operator==(const Sentence&) const = default;
};

// Random sentence from g.start by stochastic top-down expansion with
// rejection of derivations exceeding max_len. Deterministic in rng_seed.
// Throws GrammarError when no sentence of length <= max_len is found within
// the attempt budget.
Sentence generate_sentence(const Grammar& g, int max_len, std::uint64_t rng_seed,
                           int max_attempts = 10000);

enum class RuleKind { unary, binary };

// Returns g plus `count` fresh rules of the given kind over a seeded mix of
// existing and fresh symbols (fresh names N1, N2, ... / t1, t2, ...). Adding
// rules never restricts the language, so every sentence of g stays parseable.
Grammar expand_grammar(const Grammar& g, RuleKind kind, int count, std::uint64_t rng_seed);

}  // namespace dcyk
