#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "dcyk/fft_engine.hpp"

namespace dcyk {

// The distributed universe: a dimension d, a master seed, one fixed random
// permutation shared by every symbol, and a lazily grown cache of per-symbol
// random vectors with entries ~ N(0, 1/d) so that E[a.a] = 1.
//
// Symbols are plain strings: terminals, nonterminals and span indices
// ("0", "1", ...) all live in one namespace. The encode operator is
//   encode(s)    = C_s * Pi          (circulant of the symbol vector, then Pi)
//   decode_op(s) = Pi^T * C_s^T
// so encode(a) * decode_op(a) ~ I and cross products are ~ 0.
class HrrSpace {
 public:
  HrrSpace(int dim, std::uint64_t seed, double beta = 40.0);

  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }
  double beta() const { return beta_; }

  // Pi maps e_j to e_{perm[j]}; (Pi x)[i] = x[inverse_perm[i]].
  const std::vector<int>& perm() const { return perm_; }
  const std::vector<int>& inverse_perm() const { return inverse_perm_; }

  // Cached random vector for a symbol; deterministic in (seed, symbol).
  const Eigen::VectorXd& vector_of(const std::string& symbol) const;
  // Cached true DFT of vector_of(symbol).
  const Spectrum& spectrum_of(const std::string& symbol) const;
  // conj(spectrum_of(s)), the spectrum of C_s^T's generating vector.
  Spectrum conj_spectrum_of(const std::string& symbol) const;

  // Dense d x d operators (reference path; the structured path never
  // materializes these).
  Eigen::MatrixXd encode(const std::string& symbol) const;
  Eigen::MatrixXd decode_op(const std::string& symbol) const;

  // Elementwise sigmoid(x) = 1 / (1 + exp(-(x - 0.5) * beta)).
  Eigen::MatrixXd sigmoid_mat(const Eigen::MatrixXd& m) const;

  // Populate the cache for all given symbols; after this the space can be
  // shared read-only across threads without cache contention.
  void warm_cache(const std::vector<std::string>& symbols) const;

 private:
  struct Entry {
    Eigen::VectorXd vec;
    Spectrum spec;
  };
  const Entry& entry_of(const std::string& symbol) const;

  int dim_;
  std::uint64_t seed_;
  double beta_;
  std::vector<int> perm_, inverse_perm_;
  mutable std::mutex mutex_;
  mutable std::unordered_map<std::string, std::unique_ptr<Entry>> cache_;
};

double sigmoid(double x, double beta);

// Mean of the diagonal: 1 for I, 0 for the zero matrix, k when a symbol
// occurs k times in a decoded multiset.
double identity_score(const Eigen::MatrixXd& m);

// Dense circulant of v: C[i][j] = v[(i - j) mod d].
Eigen::MatrixXd circulant(const Eigen::VectorXd& v);

// --- tolerance calibration ---------------------------------------------
// epsilon1 bounds the normalized Frobenius statistics of the unbinding
// products; delta bounds the multiset-count error for k <= 3. Both are the
// 99th percentile over `trials` sampled symbol pairs.

struct CalibrationRecord {
  int dim = 0;
  double epsilon1 = 0.0;
  double delta = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

std::vector<CalibrationRecord> run_calibration(const std::vector<int>& dims, int trials,
                                               std::uint64_t seed);

std::string calibration_to_csv(const std::vector<CalibrationRecord>& records);
std::vector<CalibrationRecord> calibration_from_csv(const std::string& text);
std::vector<CalibrationRecord> load_calibration_file(const std::string& path);
CalibrationRecord calibration_for_dim(const std::vector<CalibrationRecord>& records, int dim);

}  // namespace dcyk
