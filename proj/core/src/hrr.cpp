#include "dcyk/hrr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dcyk/rng.hpp"

namespace dcyk {

HrrSpace::HrrSpace(int dim, std::uint64_t seed, double beta) : dim_(dim), seed_(seed), beta_(beta) {
  if (dim < 8) throw std::invalid_argument("HrrSpace: dim must be >= 8");
  if (beta <= 0) throw std::invalid_argument("HrrSpace: beta must be > 0");
  // Fisher-Yates from a dedicated stream of the master seed.
  perm_.resize(dim);
  for (int i = 0; i < dim; ++i) perm_[i] = i;
  SplitMix64 rng(mix_seed(seed, 0x9e2a));
  for (int i = dim - 1; i > 0; --i)
    std::swap(perm_[i], perm_[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  inverse_perm_.resize(dim);
  for (int i = 0; i < dim; ++i) inverse_perm_[perm_[i]] = i;
}

const HrrSpace::Entry& HrrSpace::entry_of(const std::string& symbol) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(symbol);
    if (it != cache_.end()) return *it->second;
  }
  auto entry = std::make_unique<Entry>();
  entry->vec.resize(dim_);
  GaussianStream gauss(mix_seed(seed_, fnv1a64(symbol)));
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim_));
  for (int i = 0; i < dim_; ++i) entry->vec[i] = gauss.next() * scale;
  entry->spec = fft_engine_for(dim_).fft(entry->vec);

  std::lock_guard<std::mutex> lock(mutex_);
  auto [it, inserted] = cache_.try_emplace(symbol, std::move(entry));
  (void)inserted;  // a racing thread computed the identical entry
  return *it->second;
}

const Eigen::VectorXd& HrrSpace::vector_of(const std::string& symbol) const {
  return entry_of(symbol).vec;
}

const Spectrum& HrrSpace::spectrum_of(const std::string& symbol) const {
  return entry_of(symbol).spec;
}

Spectrum HrrSpace::conj_spectrum_of(const std::string& symbol) const {
  return entry_of(symbol).spec.conjugate();
}

Eigen::MatrixXd circulant(const Eigen::VectorXd& v) {
  const int d = static_cast<int>(v.size());
  Eigen::MatrixXd c(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) c(i, j) = v[(i - j + d) % d];
  return c;
}

Eigen::MatrixXd HrrSpace::encode(const std::string& symbol) const {
  // C_s * Pi: column j of the result is column perm[j] of C_s.
  const Eigen::VectorXd& v = vector_of(symbol);
  Eigen::MatrixXd out(dim_, dim_);
  for (int j = 0; j < dim_; ++j) {
    const int src = perm_[j];
    for (int i = 0; i < dim_; ++i) out(i, j) = v[(i - src + dim_) % dim_];
  }
  return out;
}

Eigen::MatrixXd HrrSpace::decode_op(const std::string& symbol) const {
  // Pi^T * C_s^T: row i of the result is row perm[i] of C_s^T.
  const Eigen::VectorXd& v = vector_of(symbol);
  Eigen::MatrixXd out(dim_, dim_);
  for (int j = 0; j < dim_; ++j)
    for (int i = 0; i < dim_; ++i) out(i, j) = v[(j - perm_[i] + dim_) % dim_];
  return out;
}

double sigmoid(double x, double beta) { return 1.0 / (1.0 + std::exp(-(x - 0.5) * beta)); }

Eigen::MatrixXd HrrSpace::sigmoid_mat(const Eigen::MatrixXd& m) const {
  return (1.0 / (1.0 + ((0.5 - m.array()) * beta_).exp())).matrix();
}

void HrrSpace::warm_cache(const std::vector<std::string>& symbols) const {
  for (const auto& s : symbols) entry_of(s);
}

double identity_score(const Eigen::MatrixXd& m) { return m.diagonal().mean(); }

std::vector<CalibrationRecord> run_calibration(const std::vector<int>& dims, int trials,
                                               std::uint64_t seed) {
  std::vector<CalibrationRecord> out;
  for (int d : dims) {
    std::vector<double> eps_stats, delta_stats;
    eps_stats.reserve(trials);
    delta_stats.reserve(trials);
    auto& engine = fft_engine_for(d);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    for (int t = 0; t < trials; ++t) {
      Eigen::VectorXd a(d), b(d);
      const std::uint64_t tag = (static_cast<std::uint64_t>(d) << 32) | (2u * t);
      GaussianStream ga(mix_seed(seed, tag));
      GaussianStream gb(mix_seed(seed, tag + 1));
      for (int i = 0; i < d; ++i) a[i] = ga.next() * scale;
      for (int i = 0; i < d; ++i) b[i] = gb.next() * scale;
      // Pi cancels inside encode(a)*decode_op(b), so the products are plain
      // circulant products and their Frobenius norms follow from the spectra:
      //   ||C_a C_a^T - I||_F^2 = sum_f w_f (|fa_f|^2 - 1)^2
      //   ||C_a C_b^T||_F^2     = sum_f w_f |fa_f|^2 |fb_f|^2
      // with w_f the half-spectrum multiplicities. Cross-checked against the
      // dense products in the unit tests.
      const Spectrum fa = engine.fft(a);
      const Spectrum fb = engine.fft(b);
      double match = 0.0, cross = 0.0;
      for (int f = 0; f < fa.size(); ++f) {
        const double wf = (f == 0 || (d % 2 == 0 && f == fa.size() - 1)) ? 1.0 : 2.0;
        const double pa = std::norm(fa[f]), pb = std::norm(fb[f]);
        match += wf * (pa - 1.0) * (pa - 1.0);
        cross += wf * pa * pb;
      }
      const double sqrt_d = std::sqrt(static_cast<double>(d));
      eps_stats.push_back(std::max(std::sqrt(match), std::sqrt(cross)) / sqrt_d);
      delta_stats.push_back(3.0 * std::abs(a.squaredNorm() - 1.0));
    }
    auto pct99 = [](std::vector<double>& v) {
      std::sort(v.begin(), v.end());
      const std::size_t idx = static_cast<std::size_t>(0.99 * (v.size() - 1));
      return v[idx];
    };
    out.push_back({d, pct99(eps_stats), pct99(delta_stats), trials, seed});
  }
  return out;
}

std::string calibration_to_csv(const std::vector<CalibrationRecord>& records) {
  std::ostringstream out;
  out << "dim,epsilon1,delta,trials,seed\n";
  out.precision(12);
  for (const auto& r : records)
    out << r.dim << "," << r.epsilon1 << "," << r.delta << "," << r.trials << "," << r.seed << "\n";
  return out.str();
}

std::vector<CalibrationRecord> calibration_from_csv(const std::string& text) {
  std::vector<CalibrationRecord> out;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("calibration: empty file");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CalibrationRecord r;
    char comma;
    std::istringstream ls(line);
    if (!(ls >> r.dim >> comma >> r.epsilon1 >> comma >> r.delta >> comma >> r.trials >> comma >>
          r.seed))
      throw std::runtime_error("calibration: bad line: " + line);
    out.push_back(r);
  }
  return out;
}

std::vector<CalibrationRecord> load_calibration_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open calibration file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return calibration_from_csv(ss.str());
}

CalibrationRecord calibration_for_dim(const std::vector<CalibrationRecord>& records, int dim) {
  for (const auto& r : records)
    if (r.dim == dim) return r;
  throw std::runtime_error("no calibration record for dim " + std::to_string(dim));
}

}  // namespace dcyk
