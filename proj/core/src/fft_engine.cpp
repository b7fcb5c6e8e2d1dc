#include "dcyk/fft_engine.hpp"

#include <fftw3.h>

#include <cassert>
#include <cstring>
#include <memory>
#include <mutex>
#include <unordered_map>

namespace dcyk {
namespace {

// The FFTW planner mutates global state; executions are thread-safe.
std::mutex planner_mutex;

// FFTW_ESTIMATE keeps plan selection independent of runtime timing, so
// identical configs give bitwise-identical results across executions.
fftw_plan make_fwd(int d, int howmany, double* in, fftw_complex* out) {
  std::lock_guard<std::mutex> lock(planner_mutex);
  int n[1] = {d};
  return fftw_plan_many_dft_r2c(1, n, howmany, in, nullptr, 1, d, out, nullptr, 1, d / 2 + 1,
                                FFTW_ESTIMATE);
}

fftw_plan make_inv(int d, int howmany, fftw_complex* in, double* out) {
  std::lock_guard<std::mutex> lock(planner_mutex);
  int n[1] = {d};
  return fftw_plan_many_dft_c2r(1, n, howmany, in, nullptr, 1, d / 2 + 1, out, nullptr, 1, d,
                                FFTW_ESTIMATE);
}

void destroy(void* p) {
  if (p) {
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(static_cast<fftw_plan>(p));
  }
}

constexpr int kBlock = 32;  // columns per block; keeps a block in L2

}  // namespace

FftEngine::FftEngine(int d) : d_(d), nf_(d / 2 + 1) {
  block_ = d < kBlock ? d : kBlock;
  rem_ = d % block_;
  work_ = fftw_alloc_real(static_cast<std::size_t>(d_) * block_);
  scratch_ = fftw_alloc_real(d_);
  cwork_ = reinterpret_cast<std::complex<double>*>(
      fftw_alloc_complex(static_cast<std::size_t>(nf_) * block_));
  vreal_ = fftw_alloc_real(d_);
  vcplx_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(nf_));

  auto* cw = reinterpret_cast<fftw_complex*>(cwork_);
  plan_fwd_ = make_fwd(d_, block_, work_, cw);
  plan_inv_ = make_inv(d_, block_, cw, work_);
  if (rem_ > 0) {
    plan_fwd_rem_ = make_fwd(d_, rem_, work_, cw);
    plan_inv_rem_ = make_inv(d_, rem_, cw, work_);
  }
  plan_fwd_1_ = make_fwd(d_, 1, vreal_, reinterpret_cast<fftw_complex*>(vcplx_));
  plan_inv_1_ = make_inv(d_, 1, reinterpret_cast<fftw_complex*>(vcplx_), vreal_);
}

FftEngine::~FftEngine() {
  destroy(plan_fwd_);
  destroy(plan_inv_);
  destroy(plan_fwd_rem_);
  destroy(plan_inv_rem_);
  destroy(plan_fwd_1_);
  destroy(plan_inv_1_);
  fftw_free(work_);
  fftw_free(scratch_);
  fftw_free(cwork_);
  fftw_free(vreal_);
  fftw_free(vcplx_);
}

void FftEngine::pointwise(const std::complex<double>* spec, int cols, double scale) {
  // explicit real arithmetic; complex operator* would go through __muldc3
  const double* s = reinterpret_cast<const double*>(spec);
  for (int c = 0; c < cols; ++c) {
    double* col = reinterpret_cast<double*>(cwork_ + static_cast<std::size_t>(c) * nf_);
    for (int f = 0; f < nf_; ++f) {
      const double sr = s[2 * f] * scale, si = s[2 * f + 1] * scale;
      const double xr = col[2 * f], xi = col[2 * f + 1];
      col[2 * f] = xr * sr - xi * si;
      col[2 * f + 1] = xr * si + xi * sr;
    }
  }
}

void FftEngine::apply_chain(const double* src, std::span<const ChainStage> stages, ChainSink sink,
                            double beta, double* dst, std::complex<double>* spec_dst) {
  assert(!stages.empty());
  assert(sink != ChainSink::spectral_add || stages.back().spec != nullptr);

  for (int c0 = 0; c0 < d_; c0 += block_) {
    const int w = std::min(block_, d_ - c0);
    fftw_plan fwd = static_cast<fftw_plan>(w == block_ ? plan_fwd_ : plan_fwd_rem_);
    fftw_plan inv = static_cast<fftw_plan>(w == block_ ? plan_inv_ : plan_inv_rem_);

    // copy block in, fusing the first stage's gather into the copy
    const double* sblk = src + static_cast<std::size_t>(c0) * d_;
    if (stages[0].gather) {
      const int* g = stages[0].gather;
      for (int c = 0; c < w; ++c) {
        const double* in = sblk + static_cast<std::size_t>(c) * d_;
        double* out = work_ + static_cast<std::size_t>(c) * d_;
        for (int r = 0; r < d_; ++r) out[r] = in[g[r]];
      }
    } else {
      std::memcpy(work_, sblk, sizeof(double) * d_ * w);
    }

    bool spectral_done = false;
    for (std::size_t s = 0; s < stages.size(); ++s) {
      if (s > 0 && stages[s].gather) {
        const int* g = stages[s].gather;
        for (int c = 0; c < w; ++c) {
          double* col = work_ + static_cast<std::size_t>(c) * d_;
          for (int r = 0; r < d_; ++r) scratch_[r] = col[g[r]];
          std::memcpy(col, scratch_, sizeof(double) * d_);
        }
      }
      if (stages[s].spec) {
        const bool spectral_out = s + 1 == stages.size() && sink == ChainSink::spectral_add;
        fftw_execute(fwd);
        // the 1/d of the inverse transform folds into the pointwise product;
        // a spectral sink stores true DFT values instead
        pointwise(stages[s].spec, w, spectral_out ? 1.0 : 1.0 / d_);
        if (spectral_out) {
          for (int c = 0; c < w; ++c) {
            std::complex<double>* acc = spec_dst + static_cast<std::size_t>(c0 + c) * nf_;
            const std::complex<double>* col = cwork_ + static_cast<std::size_t>(c) * nf_;
            for (int f = 0; f < nf_; ++f) acc[f] += col[f];
          }
          spectral_done = true;
          break;
        }
        fftw_execute(inv);
      }
    }
    if (spectral_done) continue;

    double* dblk = dst + static_cast<std::size_t>(c0) * d_;
    const std::size_t nblk = static_cast<std::size_t>(d_) * w;
    switch (sink) {
      case ChainSink::store:
        std::memcpy(dblk, work_, sizeof(double) * nblk);
        break;
      case ChainSink::add: {
        Eigen::Map<Eigen::ArrayXd> out(dblk, nblk);
        out += Eigen::Map<const Eigen::ArrayXd>(work_, nblk);
        break;
      }
      case ChainSink::sigmoid_store: {
        Eigen::Map<const Eigen::ArrayXd> in(work_, nblk);
        Eigen::Map<Eigen::ArrayXd> out(dblk, nblk);
        out = 1.0 / (1.0 + ((0.5 - in) * beta).exp());
        break;
      }
      case ChainSink::spectral_add:
        assert(false);
        break;
    }
  }
}

void FftEngine::row_spectra(const Eigen::MatrixXd& x, Eigen::MatrixXcd& out) {
  assert(x.rows() == d_ && x.cols() == d_);
  out.resize(nf_, d_);
  for (int r0 = 0; r0 < d_; r0 += block_) {
    const int w = std::min(block_, d_ - r0);
    fftw_plan fwd = static_cast<fftw_plan>(w == block_ ? plan_fwd_ : plan_fwd_rem_);
    // transpose-gather rows r0..r0+w into contiguous length-d sequences
    for (int t = 0; t < d_; ++t) {
      const double* col = x.data() + static_cast<std::size_t>(t) * d_ + r0;
      for (int q = 0; q < w; ++q) work_[static_cast<std::size_t>(q) * d_ + t] = col[q];
    }
    fftw_execute(fwd);
    for (int q = 0; q < w; ++q)
      std::memcpy(out.data() + static_cast<std::size_t>(r0 + q) * nf_,
                  cwork_ + static_cast<std::size_t>(q) * nf_, sizeof(std::complex<double>) * nf_);
  }
}

void FftEngine::inverse_columns(const Eigen::MatrixXcd& spec, Eigen::MatrixXd& out) {
  assert(spec.rows() == nf_ && spec.cols() == d_);
  out.resize(d_, d_);
  const double inv_d = 1.0 / d_;
  for (int c0 = 0; c0 < d_; c0 += block_) {
    const int w = std::min(block_, d_ - c0);
    fftw_plan inv = static_cast<fftw_plan>(w == block_ ? plan_inv_ : plan_inv_rem_);
    std::memcpy(cwork_, spec.data() + static_cast<std::size_t>(c0) * nf_,
                sizeof(std::complex<double>) * nf_ * w);
    fftw_execute(inv);
    Eigen::Map<Eigen::ArrayXd> dst(out.data() + static_cast<std::size_t>(c0) * d_,
                                   static_cast<std::size_t>(d_) * w);
    dst = Eigen::Map<const Eigen::ArrayXd>(work_, static_cast<std::size_t>(d_) * w) * inv_d;
  }
}

Spectrum FftEngine::fft(const Eigen::VectorXd& v) {
  assert(v.size() == d_);
  std::memcpy(vreal_, v.data(), sizeof(double) * d_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_1_));
  return Eigen::Map<const Spectrum>(vcplx_, nf_);
}

Eigen::VectorXd FftEngine::ifft(const Spectrum& s) {
  assert(s.size() == nf_);
  std::memcpy(vcplx_, s.data(), sizeof(std::complex<double>) * nf_);
  fftw_execute(static_cast<fftw_plan>(plan_inv_1_));
  return Eigen::Map<const Eigen::VectorXd>(vreal_, d_) / d_;
}

Eigen::VectorXd FftEngine::convolve(const Spectrum& spec, const Eigen::VectorXd& x) {
  std::memcpy(vreal_, x.data(), sizeof(double) * d_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_1_));
  for (int f = 0; f < nf_; ++f) vcplx_[f] *= spec[f];
  fftw_execute(static_cast<fftw_plan>(plan_inv_1_));
  return Eigen::Map<const Eigen::VectorXd>(vreal_, d_) / d_;
}

FftEngine& fft_engine_for(int d) {
  thread_local std::unordered_map<int, std::unique_ptr<FftEngine>> cache;
  auto& slot = cache[d];
  if (!slot) slot = std::make_unique<FftEngine>(d);
  return *slot;
}

}  // namespace dcyk
