#pragma once

// Periodic grid on [0, L), real fields and the discrete Fourier pair
//
//   forward:  c_k = dx  * sum_j f_j e^{-2 i pi x_j xi_k}
//   inverse:  f_j = 1/L * sum_k c_k e^{+2 i pi x_j xi_k}
//
// with x_j = j dx and xi_k = k / L. Coefficients therefore approximate the
// continuum transform  F f(xi) = \int e^{-2 i pi x xi} f(x) dx  and any
// symbol written in that convention applies verbatim at xi_k.
//
// Storage is in FFT order: slot j holds the signed mode k = j for j < N/2
// and k = j - N otherwise, so slot N/2 is the Nyquist mode k = -N/2.

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace fowler {

using complex = std::complex<double>;

class Grid {
 public:
  Grid(double length, std::size_t points) : length_(length), points_(points) {
    if (!(length > 0.0) || !std::isfinite(length)) {
      throw std::invalid_argument("Grid: length must be positive and finite");
    }
    if (points < 8 || points % 2 != 0) {
      throw std::invalid_argument("Grid: point count must be even and >= 8");
    }
  }

  double length() const noexcept { return length_; }
  std::size_t size() const noexcept { return points_; }
  double dx() const noexcept { return length_ / static_cast<double>(points_); }

  double node(std::size_t j) const noexcept { return static_cast<double>(j) * dx(); }

  /// Signed mode number stored in FFT slot j.
  long mode(std::size_t j) const noexcept {
    const auto n = static_cast<long>(points_);
    const auto s = static_cast<long>(j);
    return s < n / 2 ? s : s - n;
  }

  /// FFT slot holding signed mode k, k in [-N/2, N/2).
  std::size_t slot(long k) const {
    const auto n = static_cast<long>(points_);
    if (k < -n / 2 || k >= n / 2) throw std::out_of_range("Grid::slot: mode out of range");
    return static_cast<std::size_t>(k >= 0 ? k : k + n);
  }

  double frequency(std::size_t j) const noexcept { return static_cast<double>(mode(j)) / length_; }

  std::size_t nyquist_slot() const noexcept { return points_ / 2; }

  /// Node closest to x (x taken modulo L).
  std::size_t nearest_node(double x) const noexcept {
    double r = std::fmod(x, length_);
    if (r < 0) r += length_;
    auto j = static_cast<std::size_t>(std::llround(r / dx()));
    return j % points_;
  }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.points_ == b.points_ && a.length_ == b.length_;
  }

 private:
  double length_;
  std::size_t points_;
};

struct Field {
  Field(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (values.size() != grid.size()) throw std::invalid_argument("Field: size does not match grid");
  }
  explicit Field(Grid g) : grid(g), values(g.size(), 0.0) {}

  Grid grid;
  std::vector<double> values;

  bool finite() const noexcept {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
  }
};

struct Spectrum {
  Spectrum(Grid g, std::vector<complex> c) : grid(g), coeffs(std::move(c)) {
    if (coeffs.size() != grid.size()) throw std::invalid_argument("Spectrum: size does not match grid");
  }
  explicit Spectrum(Grid g) : grid(g), coeffs(g.size(), complex{}) {}

  Grid grid;
  std::vector<complex> coeffs;

  complex& at(long k) { return coeffs[grid.slot(k)]; }
  const complex& at(long k) const { return coeffs[grid.slot(k)]; }
};

template <class Fn>
Field sample(const Grid& grid, Fn&& fn) {
  Field f(grid);
  for (std::size_t j = 0; j < grid.size(); ++j) f.values[j] = fn(grid.node(j));
  return f;
}

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

namespace detail {

// FFTW plans are created once per size under a lock (the planner is not
// thread-safe); execution through fftw_execute_dft with caller buffers is.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n) : n_(n) {
    std::vector<complex> a(n), b(n);
    auto* in = reinterpret_cast<fftw_complex*>(a.data());
    auto* out = reinterpret_cast<fftw_complex*>(b.data());
    const int len = static_cast<int>(n);
    forward_ = fftw_plan_dft_1d(len, in, out, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward_ = fftw_plan_dft_1d(len, in, out, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (forward_ == nullptr || backward_ == nullptr) throw std::runtime_error("FFTW planning failed");
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  void forward(const std::vector<complex>& in, std::vector<complex>& out) const { run(forward_, in, out); }
  void backward(const std::vector<complex>& in, std::vector<complex>& out) const { run(backward_, in, out); }

 private:
  void run(fftw_plan p, const std::vector<complex>& in, std::vector<complex>& out) const {
    out.resize(n_);
    // FFTW does not write to the input of an out-of-place c2c transform.
    auto* src = const_cast<fftw_complex*>(reinterpret_cast<const fftw_complex*>(in.data()));
    fftw_execute_dft(p, src, reinterpret_cast<fftw_complex*>(out.data()));
  }

  std::size_t n_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

inline const FftPlan& plan_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<FftPlan>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<FftPlan>(n);
  return *slot;
}

}  // namespace detail

/// Relative Hermitian defect max_k |c_{-k} - conj(c_k)| / max_k |c_k|.
/// The Nyquist and zero modes must be real.
inline double hermitian_defect(const Spectrum& s) {
  const auto& g = s.grid;
  const std::size_t n = g.size();
  double scale = 0.0;
  for (const auto& c : s.coeffs) scale = std::max(scale, std::abs(c));
  if (scale == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t mirror = (n - j) % n;
    worst = std::max(worst, std::abs(s.coeffs[mirror] - std::conj(s.coeffs[j])));
  }
  return worst / scale;
}

inline constexpr double kHermitianTolerance = 1e-10;

inline Spectrum forward(const Field& f) {
  if (!f.finite()) {
    for (std::size_t j = 0; j < f.values.size(); ++j) {
      if (!std::isfinite(f.values[j])) {
        std::ostringstream msg;
        msg << "forward: non-finite sample " << f.values[j] << " at node " << j;
        throw std::invalid_argument(msg.str());
      }
    }
  }
  const std::size_t n = f.grid.size();
  std::vector<complex> in(n), out;
  for (std::size_t j = 0; j < n; ++j) in[j] = f.values[j];
  detail::plan_for(n).forward(in, out);
  const double dx = f.grid.dx();
  for (auto& c : out) c *= dx;
  // Exact Hermitian symmetry; FFTW leaves roundoff-level asymmetry otherwise.
  for (std::size_t j = 1; j < n / 2; ++j) {
    const complex avg = 0.5 * (out[j] + std::conj(out[n - j]));
    out[j] = avg;
    out[n - j] = std::conj(avg);
  }
  out[0] = out[0].real();
  out[n / 2] = out[n / 2].real();
  return Spectrum(f.grid, std::move(out));
}

inline Field inverse(const Spectrum& s) {
  const double defect = hermitian_defect(s);
  if (defect > kHermitianTolerance) {
    std::ostringstream msg;
    msg << "inverse: spectrum is not Hermitian (relative defect " << defect << ")";
    throw std::invalid_argument(msg.str());
  }
  const std::size_t n = s.grid.size();
  std::vector<complex> out;
  detail::plan_for(n).backward(s.coeffs, out);
  Field f(s.grid);
  const double scale = 1.0 / s.grid.length();
  for (std::size_t j = 0; j < n; ++j) f.values[j] = out[j].real() * scale;
  return f;
}

/// Multiply by a symbol m(xi) with m(-xi) = conj(m(xi)). At the Nyquist slot,
/// which represents both +-N/2, the symmetric part Re m is used so that the
/// product stays Hermitian.
template <class Symbol>
Spectrum apply_multiplier(const Spectrum& s, Symbol&& m) {
  Spectrum out(s.grid);
  const std::size_t nyq = s.grid.nyquist_slot();
  for (std::size_t j = 0; j < s.grid.size(); ++j) {
    complex mj = m(s.grid.frequency(j));
    if (j == nyq) mj = mj.real();
    out.coeffs[j] = mj * s.coeffs[j];
  }
  return out;
}

inline double l2_norm(const Field& f) {
  double acc = 0.0;
  for (double v : f.values) acc += v * v;
  return std::sqrt(acc * f.grid.dx());
}

/// L2 norm through Parseval: sqrt((1/L) sum |c_k|^2).
inline double l2_norm(const Spectrum& s) {
  double acc = 0.0;
  for (const auto& c : s.coeffs) acc += std::norm(c);
  return std::sqrt(acc / s.grid.length());
}

inline double mass(const Field& f) {
  double acc = 0.0;
  for (double v : f.values) acc += v;
  return acc * f.grid.dx();
}

/// Fraction of spectral energy carried by modes with |k| > cutoff.
inline double tail_fraction(const Spectrum& s, long cutoff) {
  double total = 0.0, tail = 0.0;
  for (std::size_t j = 0; j < s.grid.size(); ++j) {
    const double e = std::norm(s.coeffs[j]);
    total += e;
    if (std::labs(s.grid.mode(j)) > cutoff) tail += e;
  }
  return total > 0.0 ? tail / total : 0.0;
}

/// Spectral derivative d/dx (multiplier 2 i pi xi, Nyquist dropped).
inline Spectrum derivative(const Spectrum& s) {
  return apply_multiplier(s, [](double xi) { return complex(0.0, 2.0 * std::numbers::pi * xi); });
}

inline Spectrum operator+(const Spectrum& a, const Spectrum& b) {
  require_same_grid(a.grid, b.grid, "Spectrum +");
  Spectrum out = a;
  for (std::size_t j = 0; j < out.coeffs.size(); ++j) out.coeffs[j] += b.coeffs[j];
  return out;
}

inline Spectrum operator-(const Spectrum& a, const Spectrum& b) {
  require_same_grid(a.grid, b.grid, "Spectrum -");
  Spectrum out = a;
  for (std::size_t j = 0; j < out.coeffs.size(); ++j) out.coeffs[j] -= b.coeffs[j];
  return out;
}

inline Spectrum operator*(double a, const Spectrum& s) {
  Spectrum out = s;
  for (auto& c : out.coeffs) c *= a;
  return out;
}

}  // namespace fowler
