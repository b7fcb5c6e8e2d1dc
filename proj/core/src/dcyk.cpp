#include "dcyk/dcyk.hpp"

#include <array>
#include <cassert>

#include "dcyk/fft_engine.hpp"

namespace dcyk {
namespace {

std::string idx(int i) { return std::to_string(i); }

// ---------------------------------------------------------------------------
// Structured backend: every operator application runs as a blocked FFT chain.
// p_right is accumulated in spectral form (its only consumer inside the pass
// is the diagonal of X * B_A * p_right, which is a Parseval dot between row
// spectra of X * B_A and column spectra of p_right) and materialized once at
// the end.
class StructuredBackend {
 public:
  StructuredBackend(const HrrSpace& space, const RuleOperators& ops, int n)
      : space_(space),
        ops_(ops),
        engine_(fft_engine_for(space.dim())),
        d_(space.dim()),
        nf_(engine_.bins()),
        n_(n) {
    p_left_.setZero(d_, d_);
    p_right_spec_.setZero(nf_, d_);
    pa_.resize(d_, d_);
    x_.resize(d_, d_);
    build_.resize(d_, d_);
  }

  void load(const DistChart& chart) {
    p_left_ = chart.p_left;
    // column spectra of p_right
    Eigen::VectorXd col(d_);
    for (int c = 0; c < d_; ++c) p_right_spec_.col(c) = engine_.fft(chart.p_right.col(c));
  }

  void add_input_triples(const Sentence& w) {
    for (int i = 1; i <= n_; ++i) {
      build_scaled_circulant_t(space_.vector_of(w.tokens[i - 1]), nullptr);
      const Spectrum cj = space_.conj_spectrum_of(idx(i));
      const Spectrum ci = space_.conj_spectrum_of(idx(i - 1));
      const std::array<ChainStage, 3> stages{{
          {perm(), cj.data()},
          {perm(), ci.data()},
          {perm(), nullptr},
      }};
      engine_.apply_chain(build_.data(), stages, ChainSink::add, 0.0, p_left_.data(), nullptr);
    }
  }

  void unary_detect(int i, const std::string& a) {
    const Spectrum& s_lo = space_.spectrum_of(idx(i - 1));
    const Spectrum& s_hi = space_.spectrum_of(idx(i));
    const Spectrum& s_u = ops_.unary_spec.at(a);
    const std::array<ChainStage, 3> stages{{
        {iperm(), s_lo.data()},
        {iperm(), s_hi.data()},
        {iperm(), s_u.data()},
    }};
    engine_.apply_chain(p_left_.data(), stages, ChainSink::sigmoid_store, space_.beta(), pa_.data(),
                        nullptr);
  }

  void unary_insert(int i, const std::string& a) {
    const Spectrum ca = space_.conj_spectrum_of(a);
    const Spectrum c_hi = space_.conj_spectrum_of(idx(i));
    const Spectrum c_lo = space_.conj_spectrum_of(idx(i - 1));
    const std::array<ChainStage, 4> left{{
        {nullptr, ca.data()},
        {perm(), c_hi.data()},
        {perm(), c_lo.data()},
        {perm(), nullptr},
    }};
    engine_.apply_chain(pa_.data(), left, ChainSink::add, 0.0, p_left_.data(), nullptr);

    const Spectrum& s_hi = space_.spectrum_of(idx(i));
    const Spectrum& s_lo = space_.spectrum_of(idx(i - 1));
    const Spectrum& s_a = space_.spectrum_of(a);
    const std::array<ChainStage, 3> right{{
        {iperm(), s_hi.data()},
        {iperm(), s_lo.data()},
        {iperm(), s_a.data()},
    }};
    engine_.apply_chain(pa_.data(), right, ChainSink::spectral_add, 0.0, nullptr,
                        p_right_spec_.data());
  }

  // diagonal of sigmoid(decode_op(j) encode(i) p_left B_A p_right)
  Eigen::VectorXd binary_detect(int i, int j, const std::string& a) {
    const Spectrum span = space_.conj_spectrum_of(idx(j)).cwiseProduct(space_.spectrum_of(idx(i)));
    const std::array<ChainStage, 2> stages{{
        {iperm(), span.data()},
        {perm(), nullptr},
    }};
    engine_.apply_chain(p_left_.data(), stages, ChainSink::store, 0.0, x_.data(), nullptr);
    engine_.row_spectra(x_, xrows_);

    // Parseval: <row_k(X C_v), col_k(p_right)> from the half spectra, with
    // explicit real arithmetic in the inner loop.
    const Spectrum& vb = ops_.binary_spec.at(a);
    const double* v = reinterpret_cast<const double*>(vb.data());
    Eigen::VectorXd raw(d_);
    const double inv_d = 1.0 / d_;
    const int last = nf_ - 1;
    const bool even = d_ % 2 == 0;
    for (int k = 0; k < d_; ++k) {
      const double* x = reinterpret_cast<const double*>(xrows_.col(k).data());
      const double* p = reinterpret_cast<const double*>(p_right_spec_.col(k).data());
      // Re((x conj(v)) conj(p)) = (xr vr + xi vi) pr + (xi vr - xr vi) pi
      auto term = [&](int f) {
        const double yr = x[2 * f] * v[2 * f] + x[2 * f + 1] * v[2 * f + 1];
        const double yi = x[2 * f + 1] * v[2 * f] - x[2 * f] * v[2 * f + 1];
        return yr * p[2 * f] + yi * p[2 * f + 1];
      };
      double mid = 0.0;
      const int hi = even ? last : nf_;
      for (int f = 1; f < hi; ++f) mid += term(f);
      double acc = term(0) + 2.0 * mid;
      if (even) acc += term(last);
      raw[k] = acc * inv_d;
    }
    return raw;
  }

  void binary_insert(int i, int j, const std::string& a, const Eigen::VectorXd& pa_diag) {
    // decode_op(i) decode_op(j) decode_op(A) diag(pa): the innermost factor
    // C_A^T diag(pa) is materialized directly, the rest is a chain.
    build_scaled_circulant_t(space_.vector_of(a), &pa_diag);
    const Spectrum cj = space_.conj_spectrum_of(idx(j));
    const Spectrum ci = space_.conj_spectrum_of(idx(i));
    const std::array<ChainStage, 3> left{{
        {perm(), cj.data()},
        {perm(), ci.data()},
        {perm(), nullptr},
    }};
    engine_.apply_chain(build_.data(), left, ChainSink::add, 0.0, p_left_.data(), nullptr);

    // encode(A) encode(i) encode(j) diag(pa): C_j Pi diag(pa) is one scaled
    // column of C_j per output column, built directly.
    build_shifted_columns(space_.vector_of(idx(j)), pa_diag);
    const Spectrum& si = space_.spectrum_of(idx(i));
    const Spectrum& sa = space_.spectrum_of(a);
    const std::array<ChainStage, 2> right{{
        {iperm(), si.data()},
        {iperm(), sa.data()},
    }};
    engine_.apply_chain(build_.data(), right, ChainSink::spectral_add, 0.0, nullptr,
                        p_right_spec_.data());
  }

  DistChart finalize() {
    DistChart out;
    out.n = n_;
    out.p_left = p_left_;
    engine_.inverse_columns(p_right_spec_, out.p_right);
    return out;
  }

  double beta() const { return space_.beta(); }

 private:
  const int* perm() const { return space_.perm().data(); }
  const int* iperm() const { return space_.inverse_perm().data(); }

  // build_ = C_v^T * diag(scale)  (scale == nullptr means identity):
  // build_(r, c) = v[(c - r) mod d] * scale[c]
  void build_scaled_circulant_t(const Eigen::VectorXd& v, const Eigen::VectorXd* scale) {
    for (int c = 0; c < d_; ++c) {
      const double s = scale ? (*scale)[c] : 1.0;
      double* col = build_.data() + static_cast<std::size_t>(c) * d_;
      // v[(c - r) mod d] walks v backwards from position c
      for (int r = 0; r <= c; ++r) col[r] = v[c - r] * s;
      for (int r = c + 1; r < d_; ++r) col[r] = v[c - r + d_] * s;
    }
  }

  // build_ = C_v * Pi * diag(scale): column c is v rotated by perm[c], scaled.
  void build_shifted_columns(const Eigen::VectorXd& v, const Eigen::VectorXd& scale) {
    const auto& p = space_.perm();
    for (int c = 0; c < d_; ++c) {
      const int shift = p[c];
      const double s = scale[c];
      double* col = build_.data() + static_cast<std::size_t>(c) * d_;
      for (int r = 0; r < shift; ++r) col[r] = v[r - shift + d_] * s;
      for (int r = shift; r < d_; ++r) col[r] = v[r - shift] * s;
    }
  }

  const HrrSpace& space_;
  const RuleOperators& ops_;
  FftEngine& engine_;
  int d_, nf_, n_;
  Eigen::MatrixXd p_left_, pa_, x_, build_;
  Eigen::MatrixXcd p_right_spec_, xrows_;
};

// ---------------------------------------------------------------------------
// Dense backend: the reference path. Operators are materialized and every
// product is a plain matrix multiplication.
class DenseBackend {
 public:
  DenseBackend(const HrrSpace& space, const RuleOperators& ops, int n) : space_(space), n_(n) {
    for (const auto& r : ops.unary_rules) {
      auto [it, fresh] =
          unary_.try_emplace(r.lhs, Eigen::MatrixXd::Zero(space.dim(), space.dim()));
      it->second += space.encode(r.terminal);
    }
    for (const auto& r : ops.binary_rules) {
      auto [it, fresh] =
          binary_.try_emplace(r.lhs, Eigen::MatrixXd::Zero(space.dim(), space.dim()));
      it->second += space.encode(r.left) * space.decode_op(r.right);
    }
    p_left_.setZero(space.dim(), space.dim());
    p_right_.setZero(space.dim(), space.dim());
  }

  void load(const DistChart& chart) {
    p_left_ = chart.p_left;
    p_right_ = chart.p_right;
  }

  void add_input_triples(const Sentence& w) {
    for (int i = 1; i <= n_; ++i)
      p_left_ += space_.decode_op(idx(i - 1)) *
                 (space_.decode_op(idx(i)) * space_.decode_op(w.tokens[i - 1]));
  }

  void unary_detect(int i, const std::string& a) {
    pa_ = space_.sigmoid_mat(unary_.at(a) *
                             (space_.encode(idx(i)) * (space_.encode(idx(i - 1)) * p_left_)));
  }

  void unary_insert(int i, const std::string& a) {
    p_left_ +=
        space_.decode_op(idx(i - 1)) * (space_.decode_op(idx(i)) * (space_.decode_op(a) * pa_));
    p_right_ += space_.encode(a) * (space_.encode(idx(i - 1)) * (space_.encode(idx(i)) * pa_));
  }

  Eigen::VectorXd binary_detect(int i, int j, const std::string& a) {
    const Eigen::MatrixXd x = space_.decode_op(idx(j)) * (space_.encode(idx(i)) * p_left_);
    const Eigen::MatrixXd full = (x * binary_.at(a)) * p_right_;
    return full.diagonal();
  }

  void binary_insert(int i, int j, const std::string& a, const Eigen::VectorXd& pa_diag) {
    const Eigen::MatrixXd scaled_dec = space_.decode_op(a) * pa_diag.asDiagonal();
    p_left_ += space_.decode_op(idx(i)) * (space_.decode_op(idx(j)) * scaled_dec);
    const Eigen::MatrixXd scaled_enc = space_.encode(idx(j)) * pa_diag.asDiagonal();
    p_right_ += space_.encode(a) * (space_.encode(idx(i)) * scaled_enc);
  }

  DistChart finalize() {
    DistChart out;
    out.n = n_;
    out.p_left = p_left_;
    out.p_right = p_right_;
    return out;
  }

  double beta() const { return space_.beta(); }

 private:
  const HrrSpace& space_;
  int n_;
  std::map<std::string, Eigen::MatrixXd> unary_, binary_;
  Eigen::MatrixXd p_left_, p_right_, pa_;
};

template <class Backend>
void run_unary_pass(Backend& b, int n, const RuleOperators& ops) {
  for (int i = 1; i <= n; ++i)
    for (const auto& a : ops.nonterminal_order) {
      if (!ops.has_unary(a)) continue;
      b.unary_detect(i, a);
      b.unary_insert(i, a);
    }
}

template <class Backend>
void run_binary_pass(Backend& b, int n, const RuleOperators& ops) {
  const double beta = b.beta();
  for (int j = 2; j <= n; ++j)
    for (int i = j - 2; i >= 0; --i)
      for (const auto& a : ops.nonterminal_order) {
        if (!ops.has_binary(a)) continue;
        Eigen::VectorXd raw = b.binary_detect(i, j, a);
        // sigmoid then the elementwise mask with I: only the diagonal survives
        Eigen::VectorXd pa =
            (1.0 / (1.0 + ((0.5 - raw.array()) * beta).exp())).matrix();
        b.binary_insert(i, j, a, pa);
      }
}

void check_tokens(const HrrSpace& space, const Sentence& w) {
  (void)space;
  if (w.size() == 0) throw GrammarError("dcyk: sentence is empty");
}

}  // namespace

RuleOperators build_rule_operators(const HrrSpace& space, const Grammar& g) {
  RuleOperators ops;
  ops.nonterminal_order = g.nonterminals;
  ops.unary_rules = g.unary_rules;
  ops.binary_rules = g.binary_rules;
  const int nf = space.dim() / 2 + 1;
  for (const auto& r : g.unary_rules) {
    auto [it, fresh] = ops.unary_spec.try_emplace(r.lhs, Spectrum::Zero(nf));
    it->second += space.spectrum_of(r.terminal);
  }
  for (const auto& r : g.binary_rules) {
    auto [it, fresh] = ops.binary_spec.try_emplace(r.lhs, Spectrum::Zero(nf));
    it->second += space.spectrum_of(r.left).cwiseProduct(space.conj_spectrum_of(r.right));
  }
  return ops;
}

std::map<std::string, Eigen::MatrixXd> encode_unary_rules(const HrrSpace& space, const Grammar& g) {
  std::map<std::string, Eigen::MatrixXd> out;
  for (const auto& r : g.unary_rules) {
    auto [it, fresh] =
        out.try_emplace(r.lhs, Eigen::MatrixXd::Zero(space.dim(), space.dim()));
    it->second += space.encode(r.terminal);
  }
  return out;
}

std::map<std::string, Eigen::MatrixXd> encode_binary_rules(const HrrSpace& space,
                                                           const Grammar& g) {
  std::map<std::string, Eigen::MatrixXd> out;
  for (const auto& r : g.binary_rules) {
    auto [it, fresh] =
        out.try_emplace(r.lhs, Eigen::MatrixXd::Zero(space.dim(), space.dim()));
    it->second += space.encode(r.left) * space.decode_op(r.right);
  }
  return out;
}

Eigen::MatrixXd init_pleft(const HrrSpace& space, const Sentence& w) {
  check_tokens(space, w);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(space.dim(), space.dim());
  for (int i = 1; i <= w.size(); ++i)
    p += space.decode_op(idx(i - 1)) *
         (space.decode_op(idx(i)) * space.decode_op(w.tokens[i - 1]));
  return p;
}

DistChart dcyk_unary(const HrrSpace& space, const Sentence& w, const RuleOperators& ops,
                     MatmulPolicy policy) {
  check_tokens(space, w);
  const int n = w.size();
  if (policy == MatmulPolicy::structured) {
    StructuredBackend b(space, ops, n);
    b.add_input_triples(w);
    run_unary_pass(b, n, ops);
    return b.finalize();
  }
  DenseBackend b(space, ops, n);
  b.add_input_triples(w);
  run_unary_pass(b, n, ops);
  return b.finalize();
}

DistChart dcyk_binary(const HrrSpace& space, DistChart chart, const RuleOperators& ops,
                      MatmulPolicy policy) {
  if (chart.n < 2) return chart;  // loop ranges are empty
  if (policy == MatmulPolicy::structured) {
    StructuredBackend b(space, ops, chart.n);
    b.load(chart);
    run_binary_pass(b, chart.n, ops);
    return b.finalize();
  }
  DenseBackend b(space, ops, chart.n);
  b.load(chart);
  run_binary_pass(b, chart.n, ops);
  return b.finalize();
}

Chart decode_chart(const HrrSpace& space, const DistChart& chart, const Grammar& g,
                   double threshold) {
  Chart out;
  out.n = chart.n;
  for (const auto& s : decode_scores(space, chart, g))
    if (s.score > threshold) out.add(s.i, s.j, s.symbol);
  return out;
}

std::vector<DecodeScore> decode_scores(const HrrSpace& space, const DistChart& chart,
                                       const Grammar& g) {
  auto& engine = fft_engine_for(space.dim());
  const int d = space.dim();
  const auto& ip = space.inverse_perm();
  std::vector<DecodeScore> out;
  Eigen::VectorXd z(d), tmp(d);
  for (int i = 0; i < chart.n; ++i)
    for (int j = i + 1; j <= chart.n; ++j) {
      // encode(A) encode(j) encode(i) p_left, entry (0,0): walk the vector
      // p_left e_0 through the chain, then dot with row 0 of C_A.
      for (int r = 0; r < d; ++r) z[r] = chart.p_left(ip[r], 0);
      z = engine.convolve(space.spectrum_of(idx(i)), z);
      for (int r = 0; r < d; ++r) tmp[r] = z[ip[r]];
      z = engine.convolve(space.spectrum_of(idx(j)), tmp);
      for (int r = 0; r < d; ++r) tmp[r] = z[ip[r]];
      for (const auto& a : g.nonterminals) {
        const Eigen::VectorXd& va = space.vector_of(a);
        double raw = va[0] * tmp[0];
        for (int k = 1; k < d; ++k) raw += va[d - k] * tmp[k];
        out.push_back({i, j, a, raw, sigmoid(raw, space.beta())});
      }
    }
  return out;
}

RecognitionResult dcyk_recognize(const HrrSpace& space, const Grammar& g, const RuleOperators& ops,
                                 const Sentence& w, MatmulPolicy policy, double threshold) {
  for (const auto& tok : w.tokens)
    if (!g.is_terminal(tok)) throw GrammarError("dcyk_recognize: unknown terminal '" + tok + "'");
  RecognitionResult res;
  res.dist = dcyk_binary(space, dcyk_unary(space, w, ops, policy), ops, policy);
  res.chart = decode_chart(space, res.dist, g, threshold);
  res.recognized = res.chart.contains(0, w.size(), g.start);
  return res;
}

}  // namespace dcyk
