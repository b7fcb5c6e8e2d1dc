#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dcyk/cyk.hpp"
#include "dcyk/grammar.hpp"
#include "dcyk/hrr.hpp"

namespace dcyk {

// How matrix products with the structured encode/decode operators are
// evaluated: `dense` materializes every operator and multiplies (O(d^3) per
// product), `structured` applies the circulant and permutation factors
// column-blockwise via FFTs (O(d^2 log d)). Both paths compute the same
// values; they agree to ~1e-12 per entry.
enum class MatmulPolicy { dense, structured };

// The chart in distributed form. A triple (i,j,X) is carried as
//   p_left  += decode_op(i) decode_op(j) decode_op(X)
//   p_right += encode(X) encode(i) encode(j)
// Both matrices are d x d whatever the sentence length.
struct DistChart {
  Eigen::MatrixXd p_left;
  Eigen::MatrixXd p_right;
  int n = 0;
};

// Per-nonterminal rule-firing operators.
//   unary:  U_A = sum_{A -> a} encode(a)
//   binary: B_A = sum_{A -> B C} encode(B) decode_op(C)
// Every B_A is exactly a circulant (the permutation factors cancel), so the
// structured path keeps only the generating spectra.
struct RuleOperators {
  std::vector<std::string> nonterminal_order;
  std::map<std::string, Spectrum> unary_spec;
  std::map<std::string, Spectrum> binary_spec;
  // rule lists kept for the dense path, which rebuilds the operator matrices
  std::vector<UnaryRule> unary_rules;
  std::vector<BinaryRule> binary_rules;

  bool has_unary(const std::string& a) const { return unary_spec.count(a) > 0; }
  bool has_binary(const std::string& a) const { return binary_spec.count(a) > 0; }
};

RuleOperators build_rule_operators(const HrrSpace& space, const Grammar& g);

// Dense operator matrices, one per nonterminal with rules of that kind.
std::map<std::string, Eigen::MatrixXd> encode_unary_rules(const HrrSpace& space, const Grammar& g);
std::map<std::string, Eigen::MatrixXd> encode_binary_rules(const HrrSpace& space, const Grammar& g);

// Input encoding: sum over positions of
// decode_op(i-1) decode_op(i) decode_op(a_i).
Eigen::MatrixXd init_pleft(const HrrSpace& space, const Sentence& w);

// Unary pass: initializes p_left from the input, then for every position i
// and nonterminal A with unary rules computes
//   P_A = sigmoid(U_A encode(i) encode(i-1) p_left)
// and folds decode_op(i-1) decode_op(i) decode_op(A) P_A into p_left and
// encode(A) encode(i-1) encode(i) P_A into p_right. Updates are applied
// inside the loop, so later detections see earlier insertions.
DistChart dcyk_unary(const HrrSpace& space, const Sentence& w, const RuleOperators& ops,
                     MatmulPolicy policy = MatmulPolicy::structured);

// Binary pass over spans (j = 2..n ascending, i = j-2..0 descending):
//   P_A = sigmoid(decode_op(j) encode(i) p_left B_A p_right) masked to its
//         diagonal (the elementwise product with I),
// then the (i,j,A) triple scaled by P_A joins both matrices, again inside the
// loop. A one-token sentence is a no-op.
DistChart dcyk_binary(const HrrSpace& space, DistChart chart, const RuleOperators& ops,
                      MatmulPolicy policy = MatmulPolicy::structured);

// Reads the chart back out of p_left: A lands in cell (i,j) when
// sigmoid(encode(A) encode(j) encode(i) p_left)[0,0] clears the threshold.
// Only nonterminals of g are queried.
Chart decode_chart(const HrrSpace& space, const DistChart& chart, const Grammar& g,
                   double threshold = 0.99);

struct DecodeScore {
  int i = 0, j = 0;
  std::string symbol;
  double raw = 0.0;    // pre-sigmoid (0,0) entry
  double score = 0.0;  // sigmoid(raw), compared against the threshold
};

std::vector<DecodeScore> decode_scores(const HrrSpace& space, const DistChart& chart,
                                       const Grammar& g);

struct RecognitionResult {
  bool recognized = false;
  Chart chart;
  DistChart dist;
};

// init -> unary -> binary -> decode -> start-symbol test at (0,n).
RecognitionResult dcyk_recognize(const HrrSpace& space, const Grammar& g, const RuleOperators& ops,
                                 const Sentence& w, MatmulPolicy policy = MatmulPolicy::structured,
                                 double threshold = 0.99);

}  // namespace dcyk
