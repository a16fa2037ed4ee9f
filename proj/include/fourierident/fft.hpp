#pragma once

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>

namespace fident {

using cplx = std::complex<double>;

namespace detail {

// Plan creation and destruction in FFTW are not thread-safe; execution is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const {
    if (!p) return;
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(p);
  }
};
using FftwPlan = std::unique_ptr<fftw_plan_s, FftwPlanDeleter>;

template <typename T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <typename U>
  FftwAllocator(const FftwAllocator<U>&) {}
  T* allocate(std::size_t n) { return static_cast<T*>(fftw_malloc(n * sizeof(T))); }
  void deallocate(T* p, std::size_t) { fftw_free(p); }
  friend bool operator==(const FftwAllocator&, const FftwAllocator&) { return true; }
};

template <typename T>
using fftw_vector = std::vector<T, FftwAllocator<T>>;

inline fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }


}  // namespace detail

/// Unnormalized forward 2-D DFT of real data: out(kx, kt) = sum_{p,q} in(p,q) e^{-2 pi i (p kx/Nx + q kt/Nt)}.
/// Returns the full Nx x Nt spectrum (the redundant half is filled by conjugate symmetry).
inline Eigen::MatrixXcd fft2_real(const Eigen::MatrixXd& in) {
  const int nx = static_cast<int>(in.rows());
  const int nt = static_cast<int>(in.cols());
  // Row-major copy with t fastest, so the halved dimension of r2c is t.
  const int nt_half = nt / 2 + 1;
  detail::fftw_vector<double> buf(static_cast<std::size_t>(nx) * nt);
  detail::fftw_vector<cplx> spec(static_cast<std::size_t>(nx) * nt_half);
  detail::FftwPlan plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan.reset(fftw_plan_dft_r2c_2d(nx, nt, buf.data(), detail::as_fftw(spec.data()), FFTW_ESTIMATE));
  }
  for (int p = 0; p < nx; ++p)
    for (int q = 0; q < nt; ++q) buf[static_cast<std::size_t>(p) * nt + q] = in(p, q);
  fftw_execute(plan.get());

  Eigen::MatrixXcd out(nx, nt);
  for (int kx = 0; kx < nx; ++kx)
    for (int kt = 0; kt < nt_half; ++kt) out(kx, kt) = spec[static_cast<std::size_t>(kx) * nt_half + kt];
  for (int kx = 0; kx < nx; ++kx)
    for (int kt = nt_half; kt < nt; ++kt) out(kx, kt) = std::conj(out((nx - kx) % nx, nt - kt));
  return out;
}

/// Unnormalized forward 1-D DFT of a real sequence, full length.
inline Eigen::VectorXcd fft_real(const Eigen::VectorXd& in) {
  const Eigen::MatrixXd m = in;
  return fft2_real(m).col(0);
}

/// Reusable real<->half-complex 1-D transform of fixed length, used by the simulator.
/// Forward is unnormalized; inverse divides by n so inverse(forward(x)) == x.
class RealFft1d {
 public:
  explicit RealFft1d(int n)
      : n_(n), real_(static_cast<std::size_t>(n)), spec_(static_cast<std::size_t>(n / 2 + 1)) {
    std::lock_guard lock(detail::planner_mutex());
    forward_.reset(fftw_plan_dft_r2c_1d(n_, real_.data(), detail::as_fftw(spec_.data()), FFTW_ESTIMATE));
    inverse_.reset(fftw_plan_dft_c2r_1d(n_, detail::as_fftw(spec_.data()), real_.data(), FFTW_ESTIMATE));
  }

  int size() const { return n_; }
  int spectrum_size() const { return n_ / 2 + 1; }

  void forward(const double* in, cplx* out) {
    std::copy(in, in + n_, real_.begin());
    fftw_execute(forward_.get());
    std::copy(spec_.begin(), spec_.end(), out);
  }

  void inverse(const cplx* in, double* out) {
    std::copy(in, in + spectrum_size(), spec_.begin());
    fftw_execute(inverse_.get());  // c2r destroys its input; spec_ is scratch
    const double scale = 1.0 / n_;
    for (int i = 0; i < n_; ++i) out[i] = real_[i] * scale;
  }

 private:
  int n_;
  detail::fftw_vector<double> real_;
  detail::fftw_vector<cplx> spec_;
  detail::FftwPlan forward_;
  detail::FftwPlan inverse_;
};

}  // namespace fident
