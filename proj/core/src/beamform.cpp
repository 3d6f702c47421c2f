#include "usdbf/beamform.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>

#include "usdbf/errors.hpp"
#include "usdbf/util/parallel.hpp"

namespace usdbf {

void MVParams::validate(int rx_channels) const {
  const int k = effective_subaperture(rx_channels);
  if (k < 1 || k > rx_channels / 2)
    throw ConfigError("mv: subaperture length must satisfy 1 <= K <= J/2");
  if (temporal_halfwidth < 0)
    throw ConfigError("mv: temporal halfwidth must be >= 0");
  if (loading_factor < 0.0)
    throw ConfigError("mv: loading factor must be >= 0");
}

int MVParams::effective_subaperture(int rx_channels) const {
  return subaperture_len > 0 ? subaperture_len : rx_channels / 2;
}

TimeAlignedCube time_align(const RFFrame& frame, const DelayTable& delays) {
  const int L = frame.probe.num_te_events;
  const int J = frame.probe.num_rx_active;
  const int N = frame.probe.num_depth_samples;
  if (delays.rx_channels != J || delays.depth_samples != N)
    throw DimensionError("time_align: delay table does not match frame");

  TimeAlignedCube cube(L, J, N);
  parallel_for(0, static_cast<std::int64_t>(L) * J, [&](std::int64_t idx) {
    const int l = static_cast<int>(idx / J);
    const int j = static_cast<int>(idx % J);
    const float* src = frame.trace(l, j);
    float* dst = cube.trace(l, j);
    const std::int32_t* tau = &delays.tau[static_cast<std::size_t>(j) * N];
    for (int n = 0; n < N; ++n) {
      // The echo from depth sample n arrives tau_j[n] samples late on
      // channel j, so alignment advances the read cursor.
      const std::int64_t m = static_cast<std::int64_t>(n) + tau[n];
      dst[n] = (m >= 0 && m < N) ? src[m] : 0.0f;
    }
  });
  return cube;
}

ScanlineImage das(const TimeAlignedCube& cube) {
  std::vector<float> w(static_cast<std::size_t>(cube.rx_channels),
                       1.0f / static_cast<float>(cube.rx_channels));
  return das(cube, w);
}

ScanlineImage das(const TimeAlignedCube& cube, const std::vector<float>& w) {
  const int L = cube.scan_lines, J = cube.rx_channels, N = cube.depth_samples;
  if (static_cast<int>(w.size()) != J)
    throw DimensionError("das: weight vector length must equal J");
  for (float x : w)
    if (!std::isfinite(x)) throw NumericError("das: non-finite weight");

  ScanlineImage img(L, N);
  parallel_for(0, L, [&](std::int64_t l) {
    std::vector<double> acc(static_cast<std::size_t>(N), 0.0);
    for (int j = 0; j < J; ++j) {
      const double wj = w[j];
      const float* trace = cube.trace(static_cast<int>(l), j);
      for (int n = 0; n < N; ++n) acc[n] += wj * trace[n];
    }
    float* out = img.line(static_cast<int>(l));
    for (int n = 0; n < N; ++n) out[n] = static_cast<float>(acc[n]);
  });
  return img;
}

ScanlineImage das_adaptive(const TimeAlignedCube& cube,
                           const std::vector<float>& w) {
  const int L = cube.scan_lines, J = cube.rx_channels, N = cube.depth_samples;
  if (w.size() != static_cast<std::size_t>(L) * N * J)
    throw DimensionError("das: adaptive weights must be laid out [l][n][j]");
  for (float x : w)
    if (!std::isfinite(x)) throw NumericError("das: non-finite weight");

  ScanlineImage img(L, N);
  parallel_for(0, L, [&](std::int64_t l) {
    for (int n = 0; n < N; ++n) {
      const float* wln = &w[(static_cast<std::size_t>(l) * N + n) * J];
      double acc = 0.0;
      for (int j = 0; j < J; ++j)
        acc += static_cast<double>(wln[j]) * cube.at(static_cast<int>(l), j, n);
      img.at(static_cast<int>(l), n) = static_cast<float>(acc);
    }
  });
  return img;
}

namespace {

// Accumulates Y_l[m] Y_l[m]^T / (J-K+1) into r for one depth m.
void accumulate_smoothed(const TimeAlignedCube& cube, int l, int m, int K,
                         Eigen::MatrixXd& r) {
  const int J = cube.rx_channels;
  const int subs = J - K + 1;
  const float* y = cube.trace(l, 0);
  const int N = cube.depth_samples;
  const double scale = 1.0 / subs;
  Eigen::VectorXd snap(K);
  for (int s = 0; s < subs; ++s) {
    for (int k = 0; k < K; ++k)
      snap(k) = y[static_cast<std::size_t>(s + k) * N + m];
    r.selfadjointView<Eigen::Lower>().rankUpdate(snap, scale);
  }
}

Eigen::MatrixXd covariance_at(const TimeAlignedCube& cube, int l, int n,
                              const MVParams& params, int K) {
  const int N = cube.depth_samples;
  const int hw = params.temporal_halfwidth;
  const int m0 = std::max(0, n - hw);
  const int m1 = std::min(N - 1, n + hw);

  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(K, K);
  for (int m = m0; m <= m1; ++m) accumulate_smoothed(cube, l, m, K, r);
  r /= static_cast<double>(m1 - m0 + 1);
  r.triangularView<Eigen::Upper>() = r.transpose();

  if (params.loading_factor > 0.0) {
    const double load = params.loading_factor * r.trace() / K;
    r.diagonal().array() += load;
  }
  return r;
}

std::vector<double> weights_from_cov(const Eigen::MatrixXd& r, int K,
                                     bool& ok) {
  Eigen::LLT<Eigen::MatrixXd> llt(r);
  if (llt.info() != Eigen::Success) {
    ok = false;
    return std::vector<double>(K, 1.0 / K);
  }
  const Eigen::VectorXd a = Eigen::VectorXd::Ones(K);
  Eigen::VectorXd u = llt.solve(a);
  const double denom = a.dot(u);
  if (!std::isfinite(denom) || denom == 0.0) {
    ok = false;
    return std::vector<double>(K, 1.0 / K);
  }
  ok = true;
  u /= denom;
  return std::vector<double>(u.data(), u.data() + K);
}

}  // namespace

std::vector<double> capon_weights(const Matrix& covariance, bool& ok) {
  Eigen::Map<const Eigen::MatrixXd> r(covariance.a.data(), covariance.n,
                                      covariance.n);
  return weights_from_cov(r, covariance.n, ok);
}

Matrix mv_covariance(const TimeAlignedCube& cube, int l, int n,
                     const MVParams& params) {
  params.validate(cube.rx_channels);
  const int K = params.effective_subaperture(cube.rx_channels);
  const Eigen::MatrixXd r = covariance_at(cube, l, n, params, K);
  Matrix out(K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) out.at(i, j) = r(i, j);
  return out;
}

std::vector<double> mv_weights(const TimeAlignedCube& cube, int l, int n,
                               const MVParams& params, MVDiagnostics* diag) {
  params.validate(cube.rx_channels);
  const int K = params.effective_subaperture(cube.rx_channels);
  bool ok = false;
  auto w = weights_from_cov(covariance_at(cube, l, n, params, K), K, ok);
  if (diag) {
    ++diag->solved;
    if (!ok) ++diag->fallbacks;
  }
  return w;
}

ScanlineImage mv_beamform(const TimeAlignedCube& cube, const MVParams& params,
                          MVDiagnostics* diag) {
  params.validate(cube.rx_channels);
  const int L = cube.scan_lines, J = cube.rx_channels, N = cube.depth_samples;
  const int K = params.effective_subaperture(J);
  const int subs = J - K + 1;

  ScanlineImage img(L, N);
  std::vector<std::int64_t> fallback_per_line(L, 0);

  parallel_for(0, L, [&](std::int64_t l) {
    const float* y = cube.trace(static_cast<int>(l), 0);
    std::int64_t fallbacks = 0;
    for (int n = 0; n < N; ++n) {
      bool ok = false;
      const auto w = weights_from_cov(
          covariance_at(cube, static_cast<int>(l), n, params, K), K, ok);
      if (!ok) ++fallbacks;
      double acc = 0.0;
      for (int s = 0; s < subs; ++s) {
        double dot = 0.0;
        for (int k = 0; k < K; ++k)
          dot += w[k] * y[static_cast<std::size_t>(s + k) * N + n];
        acc += dot;
      }
      img.at(static_cast<int>(l), n) = static_cast<float>(acc / subs);
    }
    fallback_per_line[static_cast<std::size_t>(l)] = fallbacks;
  });

  if (diag) {
    diag->solved += static_cast<std::int64_t>(L) * N;
    for (auto f : fallback_per_line) diag->fallbacks += f;
  }
  return img;
}

}  // namespace usdbf
