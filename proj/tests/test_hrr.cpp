#include "dcyk/hrr.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dcyk/fft_engine.hpp"
#include "dcyk/rng.hpp"
#include "doctest.h"

using namespace dcyk;

namespace {

Eigen::MatrixXd perm_matrix(const HrrSpace& s) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(s.dim(), s.dim());
  for (int j = 0; j < s.dim(); ++j) p(s.perm()[j], j) = 1.0;
  return p;
}

double fro_to_identity(const Eigen::MatrixXd& m) {
  return (m - Eigen::MatrixXd::Identity(m.rows(), m.cols())).norm();
}

}  // namespace

TEST_CASE("symbol vectors are deterministic and unit-ish") {
  HrrSpace s(1000, 1);
  const Eigen::VectorXd a1 = s.vector_of("a");
  const Eigen::VectorXd a2 = s.vector_of("a");
  CHECK(a1 == a2);  // cached

  HrrSpace s2(1000, 1);
  CHECK(a1 == s2.vector_of("a"));  // fresh space, same seed: bitwise identical

  HrrSpace s3(1000, 2);
  CHECK(a1 != s3.vector_of("a"));

  const double tol = 4.0 / std::sqrt(1000.0);
  CHECK(std::abs(a1.dot(a1) - 1.0) < tol);
  CHECK(std::abs(a1.dot(s.vector_of("b"))) < tol);
}

TEST_CASE("dot-product tolerance 4/sqrt(d) holds at the 99th percentile") {
  // sampling oracle: 1000 draws at d=1000
  const int d = 1000, trials = 1000;
  std::vector<double> self_err, cross_err;
  for (int t = 0; t < trials; ++t) {
    HrrSpace s(d, 10000 + t);
    self_err.push_back(std::abs(s.vector_of("a").dot(s.vector_of("a")) - 1.0));
    cross_err.push_back(std::abs(s.vector_of("a").dot(s.vector_of("b"))));
  }
  std::sort(self_err.begin(), self_err.end());
  std::sort(cross_err.begin(), cross_err.end());
  const double tol = 4.0 / std::sqrt(double(d));
  CHECK(self_err[989] < tol);
  CHECK(cross_err[989] < tol);
}

TEST_CASE("permutation factor is a bijection with unit row sums") {
  HrrSpace s(128, 7);
  Eigen::MatrixXd p = perm_matrix(s);
  for (int i = 0; i < 128; ++i) {
    CHECK(p.row(i).sum() == 1.0);
    CHECK(p.col(i).sum() == 1.0);
  }
  CHECK((p * p.transpose()).isIdentity(0.0));
}

TEST_CASE("encode is the circulant times the permutation") {
  HrrSpace s(64, 3);
  Eigen::MatrixXd c = circulant(s.vector_of("a"));
  CHECK((s.encode("a") - c * perm_matrix(s)).norm() == 0.0);
  CHECK((s.decode_op("a") - perm_matrix(s).transpose() * c.transpose()).norm() < 1e-15);
}

TEST_CASE("unbinding: matching products near I, mismatched near 0") {
  const int d = 1000;
  auto calib = run_calibration({d}, 1000, 4242);
  const double eps1 = calib[0].epsilon1;
  const double sqrt_d = std::sqrt(double(d));

  HrrSpace s(d, 42);
  Eigen::MatrixXd lr = s.encode("a") * s.decode_op("a");
  Eigen::MatrixXd rl = s.decode_op("a") * s.encode("a");
  Eigen::MatrixXd cross = s.encode("a") * s.decode_op("b");

  CHECK(fro_to_identity(lr) / sqrt_d < eps1);
  CHECK(fro_to_identity(rl) / sqrt_d < eps1);  // both cancellation orders
  CHECK(cross.norm() / sqrt_d < eps1);
  // identity-likeness shows up on the diagonal
  CHECK(identity_score(lr) == doctest::Approx(1.0).epsilon(0.15));
  CHECK(identity_score(rl) == doctest::Approx(1.0).epsilon(0.15));
  CHECK(std::abs(identity_score(cross)) < 0.15);
}

TEST_CASE("string and set queries behave like the worked membership tests") {
  const int d = 1000;
  HrrSpace s(d, 9);
  auto enc = [&](const char* x) { return s.encode(x); };
  auto dec = [&](const char* x) { return s.decode_op(x); };

  // decode_op(b) encode(a) encode(b) encode(S) ~ 0
  Eigen::MatrixXd m = dec("b") * enc("a") * enc("b") * enc("S");
  CHECK(std::abs(identity_score(m)) < 0.2);

  // set {abS, DSa}: query abS fires, query aDS does not
  Eigen::MatrixXd set = enc("a") * enc("b") * enc("S") + enc("D") * enc("S") * enc("a");
  CHECK(identity_score(dec("S") * dec("b") * dec("a") * set) > 0.8);
  CHECK(identity_score(dec("S") * dec("D") * dec("a") * set) < 0.2);

  // prefix query: decode_op(a) applied to the set leaves ~ encode(b) encode(S)
  Eigen::MatrixXd rest = dec("a") * set;
  CHECK(identity_score(dec("S") * dec("b") * rest) > 0.8);
}

TEST_CASE("multiset counting stays within the calibrated delta") {
  const int d = 1000;
  auto calib = run_calibration({d}, 1000, 4242);
  HrrSpace s(d, 11);
  for (int k = 1; k <= 3; ++k) {
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    for (int c = 0; c < k; ++c) sum += s.encode("a");
    const double score = identity_score(s.decode_op("a") * sum);
    CHECK(std::abs(score - k) < calib[0].delta);
  }
}

TEST_CASE("sigmoid closed forms") {
  HrrSpace s(64, 5, 40.0);
  const double sig0 = 1.0 / (1.0 + std::exp(0.5 * 40.0));

  Eigen::MatrixXd z = s.sigmoid_mat(Eigen::MatrixXd::Zero(8, 8));
  CHECK(z(3, 4) == doctest::Approx(sig0).epsilon(1e-12));
  CHECK(z(3, 4) < 1e-8);

  Eigen::MatrixXd id = s.sigmoid_mat(Eigen::MatrixXd::Identity(8, 8));
  CHECK(id(0, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-0.5 * 40.0))).epsilon(1e-12));
  CHECK(id(0, 0) > 0.99);
  CHECK(id(0, 1) < 1e-8);

  Eigen::MatrixXd half = s.sigmoid_mat(Eigen::MatrixXd::Constant(2, 2, 0.5));
  CHECK(half(0, 0) == 0.5);

  CHECK(sigmoid(0.5, 40.0) == 0.5);
}

TEST_CASE("identity_score trivials") {
  CHECK(identity_score(Eigen::MatrixXd::Identity(16, 16)) == 1.0);
  CHECK(identity_score(Eigen::MatrixXd::Zero(16, 16)) == 0.0);
  CHECK(identity_score(2.0 * Eigen::MatrixXd::Identity(16, 16)) == 2.0);
}

TEST_CASE("structured chain application matches dense products") {
  const int d = 96;
  HrrSpace s(d, 21);
  auto& eng = fft_engine_for(d);

  Eigen::MatrixXd m = Eigen::MatrixXd::Random(d, d);

  // encode(a) m
  {
    const Spectrum& sa = s.spectrum_of("a");
    std::array<ChainStage, 1> st{{{s.inverse_perm().data(), sa.data()}}};
    Eigen::MatrixXd out(d, d);
    eng.apply_chain(m.data(), st, ChainSink::store, 0.0, out.data(), nullptr);
    CHECK((out - s.encode("a") * m).norm() < 1e-11);
  }
  // decode_op(a) m  =  Pi^T C_a^T m
  {
    const Spectrum ca = s.conj_spectrum_of("a");
    std::array<ChainStage, 2> st{{{nullptr, ca.data()}, {s.perm().data(), nullptr}}};
    Eigen::MatrixXd out(d, d);
    eng.apply_chain(m.data(), st, ChainSink::store, 0.0, out.data(), nullptr);
    CHECK((out - s.decode_op("a") * m).norm() < 1e-11);
  }
  // chained operators with the sigmoid sink:
  // sigmoid(encode(b) decode_op(c) m)
  {
    const Spectrum cc = s.conj_spectrum_of("c");
    const Spectrum& sb = s.spectrum_of("b");
    // decode_op(c) = Pi^T C_c^T, then encode(b) = C_b Pi; the Pi of encode
    // composes with the trailing Pi^T of decode_op into the identity, so the
    // stage list is conv(conj c) then conv(b).
    std::array<ChainStage, 2> st{{
        {nullptr, cc.data()},
        {nullptr, sb.data()},
    }};
    Eigen::MatrixXd out(d, d);
    eng.apply_chain(m.data(), st, ChainSink::sigmoid_store, s.beta(), out.data(), nullptr);
    Eigen::MatrixXd want = s.sigmoid_mat(s.encode("b") * s.decode_op("c") * m);
    CHECK((out - want).norm() < 1e-9);
  }
  // add sink accumulates
  {
    const Spectrum& sa = s.spectrum_of("a");
    std::array<ChainStage, 1> st{{{s.inverse_perm().data(), sa.data()}}};
    Eigen::MatrixXd acc = Eigen::MatrixXd::Ones(d, d);
    eng.apply_chain(m.data(), st, ChainSink::add, 0.0, acc.data(), nullptr);
    CHECK((acc - (Eigen::MatrixXd::Ones(d, d) + s.encode("a") * m)).norm() < 1e-11);
  }
  // spectral accumulation equals the fft of the result
  {
    const Spectrum& sa = s.spectrum_of("a");
    std::array<ChainStage, 1> st{{{s.inverse_perm().data(), sa.data()}}};
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(eng.bins(), d);
    eng.apply_chain(m.data(), st, ChainSink::spectral_add, 0.0, nullptr, acc.data());
    Eigen::MatrixXd back(d, d);
    eng.inverse_columns(acc, back);
    CHECK((back - s.encode("a") * m).norm() < 1e-11);
  }
  // row_spectra: column k holds the fft of row k
  {
    Eigen::MatrixXcd rows;
    eng.row_spectra(m, rows);
    Eigen::VectorXd row0 = m.row(0);
    Spectrum want = eng.fft(row0);
    CHECK((rows.col(0) - want).norm() < 1e-10);
    Eigen::VectorXd rowlast = m.row(d - 1);
    CHECK((rows.col(d - 1) - eng.fft(rowlast)).norm() < 1e-10);
  }
}

TEST_CASE("calibration spectral shortcut agrees with dense Frobenius stats") {
  // the sampling oracle computes its statistics from spectra; check the
  // identities against dense products at a small dimension
  const int d = 64;
  HrrSpace s(d, 33);
  auto& eng = fft_engine_for(d);
  const Eigen::VectorXd a = s.vector_of("a");
  const Eigen::VectorXd b = s.vector_of("b");
  const Spectrum fa = eng.fft(a);
  const Spectrum fb = eng.fft(b);

  double match = 0, cross = 0;
  for (int f = 0; f < fa.size(); ++f) {
    const double wf = (f == 0 || (d % 2 == 0 && f == fa.size() - 1)) ? 1.0 : 2.0;
    match += wf * (std::norm(fa[f]) - 1.0) * (std::norm(fa[f]) - 1.0);
    cross += wf * std::norm(fa[f]) * std::norm(fb[f]);
  }
  Eigen::MatrixXd ca = circulant(a), cb = circulant(b);
  CHECK(std::sqrt(match) == doctest::Approx(fro_to_identity(ca * ca.transpose())).epsilon(1e-9));
  CHECK(std::sqrt(cross) == doctest::Approx((ca * cb.transpose()).norm()).epsilon(1e-9));
  // the permutation cancels inside encode(a) decode_op(b)
  CHECK((s.encode("a") * s.decode_op("b") - ca * cb.transpose()).norm() < 1e-12);
}

TEST_CASE("calibration csv round-trips and is deterministic") {
  auto recs = run_calibration({64, 128}, 200, 99);
  auto recs2 = run_calibration({64, 128}, 200, 99);
  CHECK(calibration_to_csv(recs) == calibration_to_csv(recs2));
  auto parsed = calibration_from_csv(calibration_to_csv(recs));
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].dim == 64);
  CHECK(parsed[0].epsilon1 == doctest::Approx(recs[0].epsilon1));
  CHECK(calibration_for_dim(parsed, 128).dim == 128);
  CHECK_THROWS(calibration_for_dim(parsed, 100));
}

TEST_CASE("vector fft round trip and convolution") {
  auto& eng = fft_engine_for(50);
  Eigen::VectorXd v = Eigen::VectorXd::Random(50);
  CHECK((eng.ifft(eng.fft(v)) - v).norm() < 1e-12);

  Eigen::VectorXd w = Eigen::VectorXd::Random(50);
  Eigen::VectorXd conv = eng.convolve(eng.fft(v), w);
  Eigen::VectorXd naive = circulant(v) * w;
  CHECK((conv - naive).norm() < 1e-12);
}

TEST_CASE("space rejects bad construction parameters") {
  CHECK_THROWS(HrrSpace(4, 1));
  CHECK_THROWS(HrrSpace(100, 1, 0.0));
  CHECK_THROWS(HrrSpace(100, 1, -3.0));
}
