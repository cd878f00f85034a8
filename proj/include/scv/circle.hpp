#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace scv {

using cd = std::complex<double>;

// Values sampled at theta_k = 2*pi*k/N on the unit circle, N even >= 4.
class CircleFunction {
 public:
  explicit CircleFunction(std::vector<cd> samples);
  CircleFunction(int n, const std::function<double(double)>& f);

  static CircleFunction zero(int n) { return CircleFunction(std::vector<cd>(n, 0.0)); }
  static CircleFunction from_real(const std::vector<double>& samples);

  int size() const { return static_cast<int>(samples_.size()); }
  double theta(int k) const;
  const std::vector<cd>& samples() const { return samples_; }
  cd sample(int k) const { return samples_[static_cast<std::size_t>(k)]; }

  bool is_real() const;
  std::vector<double> real_samples() const;
  cd mean() const;

  // Fourier coefficients c_k = (1/N) sum_j u_j e^{-i k theta_j}, buckets 0..N-1.
  std::vector<cd> spectrum() const;

  nlohmann::json to_json() const;
  static CircleFunction from_json(const nlohmann::json& j);

 private:
  std::vector<cd> samples_;
};

// (T u)^(k) = -i sgn(k) u^(k), (T u)^(0) = 0; the conjugate boundary function
// whose harmonic extension vanishes at the disc center.
CircleFunction hilbert_transform(const CircleFunction& u);

// Harmonic extension of the trigonometric interpolant of the samples,
// evaluated at zeta (trapezoid quadrature against the band-limited Poisson
// kernel; exact on trig polynomials of degree <= N/2).
cd poisson_extend(const CircleFunction& u, cd zeta);

// K_P(zeta,t) <= (1/pi)(1-|zeta|)/|e^{it}-zeta|^2 under the stated aperture
// preconditions; evaluates both sides literally.
bool poisson_kernel_bound_check(cd zeta, double t, double tau);

double poisson_kernel(cd zeta, double t);

// Holomorphic disc given by the analytic completion of real boundary data.
class AnalyticDisc {
 public:
  AnalyticDisc(std::vector<CircleFunction> boundary);

  int dimension() const { return static_cast<int>(boundary_.size()); }
  int grid_size() const;
  const std::vector<CircleFunction>& boundary() const { return boundary_; }

  Eigen::VectorXcd boundary_point(double theta) const;  // trig-interpolated
  Eigen::VectorXcd evaluate(cd zeta) const;             // |zeta| <= 1 - 1e-12
  Eigen::VectorXcd derivative(cd zeta) const;           // d/dzeta, |zeta| <= 1

 private:
  std::vector<CircleFunction> boundary_;
  std::vector<std::vector<cd>> coeff_;  // per-component Fourier buckets
};

// Boundary trace u + i(T(u) + c), componentwise.
AnalyticDisc analytic_completion(const std::vector<CircleFunction>& u,
                                 const Eigen::VectorXd& c);

namespace detail {
// In-place FFT, sign=-1 forward / sign=+1 inverse (unscaled); radix-2 fast
// path for power-of-2 sizes, direct transform otherwise.
void fourier_transform(std::vector<cd>& a, int sign);
}  // namespace detail

}  // namespace scv
