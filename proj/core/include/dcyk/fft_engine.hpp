#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

namespace dcyk {

// True (unnormalized) DFT of a real length-d vector, d/2+1 bins.
using Spectrum = Eigen::VectorXcd;

// One stage of a left-operator chain applied to a matrix: an optional row
// gather (out[r] = in[gather[r]], i.e. a permutation matrix) followed by an
// optional circular convolution of every column with a fixed spectrum.
// Circulant-times-matrix and permutation-times-matrix both act column-locally,
// which is what lets whole chains run cache-blocked.
struct ChainStage {
  const int* gather = nullptr;
  const std::complex<double>* spec = nullptr;
};

enum class ChainSink {
  store,          // dst = result
  add,            // dst += result
  sigmoid_store,  // dst = 1/(1+exp(-(result-0.5)*beta))
  spectral_add,   // spec_dst += fft(result); final stage must convolve
};

// Executes operator chains over d x d column-major matrices, one column block
// at a time so intermediate stages stay in cache. Owns FFTW plans and work
// buffers for a fixed dimension; not thread-safe, use one engine per thread
// (see fft_engine_for).
class FftEngine {
 public:
  explicit FftEngine(int d);
  ~FftEngine();
  FftEngine(const FftEngine&) = delete;
  FftEngine& operator=(const FftEngine&) = delete;

  int dim() const { return d_; }
  int bins() const { return nf_; }

  // dst may alias src (blocks are read fully before being written).
  void apply_chain(const double* src, std::span<const ChainStage> stages, ChainSink sink,
                   double beta, double* dst, std::complex<double>* spec_dst);

  // out.col(k) = fft(row k of x); out is bins() x d.
  void row_spectra(const Eigen::MatrixXd& x, Eigen::MatrixXcd& out);

  // out = ifft of every column of spec (normalized); out is d x d.
  void inverse_columns(const Eigen::MatrixXcd& spec, Eigen::MatrixXd& out);

  Spectrum fft(const Eigen::VectorXd& v);
  Eigen::VectorXd ifft(const Spectrum& s);  // normalized by 1/d

  // y = circular convolution of x with the vector behind spec.
  Eigen::VectorXd convolve(const Spectrum& spec, const Eigen::VectorXd& x);

 private:
  void pointwise(const std::complex<double>* spec, int cols, double scale);

  int d_, nf_, block_;
  double* work_ = nullptr;                 // d x block reals
  double* scratch_ = nullptr;              // d reals, for in-block row gathers
  std::complex<double>* cwork_ = nullptr;  // nf x block
  double* vreal_ = nullptr;                // d reals (vector transforms)
  std::complex<double>* vcplx_ = nullptr;  // nf
  void* plan_fwd_ = nullptr;               // block-wide plans
  void* plan_inv_ = nullptr;
  void* plan_fwd_rem_ = nullptr;  // remainder-width plans (may be null)
  void* plan_inv_rem_ = nullptr;
  void* plan_fwd_1_ = nullptr;  // single-vector plans
  void* plan_inv_1_ = nullptr;
  int rem_;
};

// Per-thread engine cache; engines are created on first use for a dimension.
FftEngine& fft_engine_for(int d);

}  // namespace dcyk
