#include "usdbf/postproc.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>

#include "usdbf/errors.hpp"
#include "usdbf/util/parallel.hpp"

namespace usdbf {

namespace {

// FFTW plan pair for one transform length. Plan creation is not thread
// safe; execution on per-call buffers is.
class FftPlans {
 public:
  explicit FftPlans(int n) : n_(n) {
    buf_ = fftw_alloc_complex(static_cast<std::size_t>(n));
    fwd_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_1d(n, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~FftPlans() {
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
    fftw_free(buf_);
  }
  FftPlans(const FftPlans&) = delete;
  FftPlans& operator=(const FftPlans&) = delete;

  void forward(fftw_complex* inout) const { fftw_execute_dft(fwd_, inout, inout); }
  void inverse(fftw_complex* inout) const { fftw_execute_dft(inv_, inout, inout); }
  int size() const { return n_; }

 private:
  int n_;
  fftw_complex* buf_;
  fftw_plan fwd_, inv_;
};

std::mutex g_plan_mutex;

}  // namespace

IQImage hilbert_analytic(const ScanlineImage& z) {
  const int L = z.scan_lines;
  const int N = z.depth_samples;
  if (N < 2) throw DataError("hilbert: need at least two depth samples");

  std::unique_ptr<FftPlans> plans;
  {
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    plans = std::make_unique<FftPlans>(N);
  }

  IQImage iq(L, N);
  const int half = N / 2;
  const bool even = (N % 2) == 0;

  parallel_for(0, L, [&](std::int64_t l) {
    fftw_complex* buf = fftw_alloc_complex(static_cast<std::size_t>(N));
    const float* src = z.line(static_cast<int>(l));
    for (int n = 0; n < N; ++n) {
      buf[n][0] = src[n];
      buf[n][1] = 0.0;
    }
    plans->forward(buf);
    // Analytic-signal mask: DC (and Nyquist when N even) unscaled,
    // positive bins doubled, negative bins zeroed.
    const int pos_end = even ? half : half + 1;
    for (int k = 1; k < pos_end; ++k) {
      buf[k][0] *= 2.0;
      buf[k][1] *= 2.0;
    }
    for (int k = half + 1; k < N; ++k) {
      buf[k][0] = 0.0;
      buf[k][1] = 0.0;
    }
    plans->inverse(buf);
    const double scale = 1.0 / N;  // FFTW's inverse is unnormalized
    double* out_i = &iq.i[iq.index(static_cast<int>(l), 0)];
    double* out_q = &iq.q[iq.index(static_cast<int>(l), 0)];
    for (int n = 0; n < N; ++n) {
      out_i[n] = buf[n][0] * scale;
      out_q[n] = buf[n][1] * scale;
    }
    fftw_free(buf);
  });
  return iq;
}

std::vector<double> envelope(const IQImage& iq) {
  std::vector<double> env(iq.i.size());
  for (std::size_t k = 0; k < env.size(); ++k)
    env[k] = std::sqrt(iq.i[k] * iq.i[k] + iq.q[k] * iq.q[k]);
  return env;
}

BModeImage log_compress(const std::vector<double>& env, int scan_lines,
                        int depth_samples, double dynamic_range_db) {
  if (env.size() != static_cast<std::size_t>(scan_lines) * depth_samples)
    throw DimensionError("log_compress: envelope size mismatch");
  if (dynamic_range_db <= 0.0)
    throw ConfigError("log_compress: dynamic range must be positive");

  double env_max = 0.0;
  for (double e : env) env_max = std::max(env_max, e);
  if (env_max <= 0.0)
    throw NumericError("log_compress: all-zero envelope has no reference");

  const double dr = dynamic_range_db;
  const double floor_level = std::pow(10.0, -dr / 20.0) * 1e-2 * env_max;

  BModeImage img(scan_lines, depth_samples, dr);
  for (std::size_t k = 0; k < env.size(); ++k) {
    const double db = 20.0 * std::log10(std::max(env[k], floor_level) / env_max);
    const double v = std::clamp(1.0 + db / dr, 0.0, 1.0);
    img.pixels[k] = static_cast<std::uint8_t>(std::lround(255.0 * v));
  }
  return img;
}

void write_pgm(const BModeImage& img, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("pgm: cannot open for writing: " + path);
  os << "P5\n" << img.scan_lines << " " << img.depth_samples << "\n255\n";
  // One row per depth sample.
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.scan_lines));
  for (int n = 0; n < img.depth_samples; ++n) {
    for (int l = 0; l < img.scan_lines; ++l) row[l] = img.at(l, n);
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size()));
  }
  if (!os) throw DataError("pgm: write failed: " + path);
}

namespace {

int next_pnm_token(std::istream& is) {
  // Skips whitespace and '#' comments, then parses one non-negative int.
  int c = is.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = is.get();
    } else if (!std::isspace(c)) {
      break;
    } else {
      c = is.get();
    }
  }
  if (c == EOF) throw TruncatedError("pgm: truncated header");
  int value = 0;
  bool any = false;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    any = true;
    c = is.get();
  }
  if (!any) throw DataError("pgm: malformed header");
  return value;
}

}  // namespace

BModeImage read_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("pgm: cannot open: " + path);
  char m0 = 0, m1 = 0;
  is.get(m0);
  is.get(m1);
  if (m0 != 'P' || m1 != '5') throw BadMagicError("pgm: not a binary PGM");
  const int width = next_pnm_token(is);
  const int height = next_pnm_token(is);
  const int maxval = next_pnm_token(is);
  if (width <= 0 || height <= 0)
    throw DimensionError("pgm: bad dimensions");
  if (maxval != 255) throw DataError("pgm: expected maxval 255");

  BModeImage img(width, height, 60.0);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(width));
  for (int n = 0; n < height; ++n) {
    is.read(reinterpret_cast<char*>(row.data()), width);
    if (is.gcount() != width) throw TruncatedError("pgm: truncated payload");
    for (int l = 0; l < width; ++l)
      img.pixels[static_cast<std::size_t>(l) * height + n] = row[l];
  }
  return img;
}

}  // namespace usdbf
