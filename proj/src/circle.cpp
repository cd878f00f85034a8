#include "scv/circle.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>

namespace scv {

namespace detail {

void fourier_transform(std::vector<cd>& a, int sign) {
  const std::size_t n = a.size();
  if (n == 0) return;
  if ((n & (n - 1)) == 0) {
    // Iterative radix-2 with bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const double ang = sign * 2.0 * M_PI / static_cast<double>(len);
      const cd wlen(std::cos(ang), std::sin(ang));
      for (std::size_t i = 0; i < n; i += len) {
        cd w(1.0);
        for (std::size_t k = 0; k < len / 2; ++k) {
          cd u = a[i + k];
          cd v = a[i + k + len / 2] * w;
          a[i + k] = u + v;
          a[i + k + len / 2] = u - v;
          w *= wlen;
        }
      }
    }
    return;
  }
  // Direct transform for non-power-of-2 sizes (correctness path).
  std::vector<cd> out(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = sign * 2.0 * M_PI * static_cast<double>(j * k % n) /
                         static_cast<double>(n);
      out[k] += a[j] * cd(std::cos(ang), std::sin(ang));
    }
  }
  a = std::move(out);
}

}  // namespace detail

namespace {

void check_grid_size(int n) {
  if (n < 4 || n % 2 != 0)
    throw std::invalid_argument("circle grid size must be even and >= 4");
}

std::vector<cd> spectrum_of(const std::vector<cd>& samples) {
  std::vector<cd> c = samples;
  detail::fourier_transform(c, -1);
  const double inv = 1.0 / static_cast<double>(samples.size());
  for (cd& x : c) x *= inv;
  return c;
}

std::vector<cd> samples_of(std::vector<cd> spectrum) {
  detail::fourier_transform(spectrum, +1);
  return spectrum;
}

// Harmonic extension of the trig interpolant with Fourier buckets c.
cd harmonic_eval(const std::vector<cd>& c, cd zeta) {
  const int n = static_cast<int>(c.size());
  const int half = n / 2;
  cd zp(1.0), zm(1.0);
  const cd zc = std::conj(zeta);
  cd acc = c[0];
  for (int k = 1; k < half; ++k) {
    zp *= zeta;
    zm *= zc;
    acc += c[static_cast<std::size_t>(k)] * zp +
           c[static_cast<std::size_t>(n - k)] * zm;
  }
  zp *= zeta;
  zm *= zc;
  acc += c[static_cast<std::size_t>(half)] * 0.5 * (zp + zm);
  return acc;
}

cd holomorphic_derivative_eval(const std::vector<cd>& c, cd zeta) {
  const int n = static_cast<int>(c.size());
  const int half = n / 2;
  cd zp(1.0);
  cd acc(0.0);
  for (int k = 1; k < half; ++k) {
    acc += c[static_cast<std::size_t>(k)] * static_cast<double>(k) * zp;
    zp *= zeta;
  }
  acc += c[static_cast<std::size_t>(half)] * 0.5 * static_cast<double>(half) * zp;
  return acc;
}

}  // namespace

// ---- CircleFunction ----

CircleFunction::CircleFunction(std::vector<cd> samples) : samples_(std::move(samples)) {
  check_grid_size(static_cast<int>(samples_.size()));
}

CircleFunction::CircleFunction(int n, const std::function<double(double)>& f) {
  check_grid_size(n);
  samples_.resize(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    samples_[static_cast<std::size_t>(k)] = f(2.0 * M_PI * k / n);
}

CircleFunction CircleFunction::from_real(const std::vector<double>& samples) {
  std::vector<cd> s(samples.begin(), samples.end());
  return CircleFunction(std::move(s));
}

double CircleFunction::theta(int k) const { return 2.0 * M_PI * k / size(); }

bool CircleFunction::is_real() const {
  for (const cd& s : samples_)
    if (s.imag() != 0.0) return false;
  return true;
}

std::vector<double> CircleFunction::real_samples() const {
  std::vector<double> out(samples_.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) out[i] = samples_[i].real();
  return out;
}

cd CircleFunction::mean() const {
  cd acc(0.0);
  for (const cd& s : samples_) acc += s;
  return acc / static_cast<double>(samples_.size());
}

std::vector<cd> CircleFunction::spectrum() const { return spectrum_of(samples_); }

nlohmann::json CircleFunction::to_json() const {
  nlohmann::json j;
  j["n"] = size();
  if (is_real()) {
    j["samples"] = real_samples();
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const cd& s : samples_) arr.push_back({s.real(), s.imag()});
    j["samples"] = arr;
  }
  return j;
}

CircleFunction CircleFunction::from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  const nlohmann::json& arr = j.at("samples");
  if (static_cast<int>(arr.size()) != n)
    throw std::invalid_argument("circle function: sample count differs from n");
  std::vector<cd> s;
  s.reserve(arr.size());
  for (const nlohmann::json& e : arr) {
    if (e.is_array())
      s.emplace_back(e.at(0).get<double>(), e.at(1).get<double>());
    else
      s.emplace_back(e.get<double>(), 0.0);
  }
  return CircleFunction(std::move(s));
}

// ---- operators ----

CircleFunction hilbert_transform(const CircleFunction& u) {
  if (!u.is_real())
    throw std::invalid_argument("hilbert_transform: input must be real-valued");
  const int n = u.size();
  const int half = n / 2;
  std::vector<cd> c = u.spectrum();
  c[0] = 0.0;
  for (int k = 1; k < half; ++k) {
    c[static_cast<std::size_t>(k)] *= cd(0.0, -1.0);
    c[static_cast<std::size_t>(n - k)] *= cd(0.0, 1.0);
  }
  // The Nyquist cosine mode has a conjugate that vanishes on the grid.
  c[static_cast<std::size_t>(half)] = 0.0;
  std::vector<cd> s = samples_of(std::move(c));
  std::vector<cd> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = cd(s[i].real(), 0.0);
  return CircleFunction(std::move(out));
}

cd poisson_extend(const CircleFunction& u, cd zeta) {
  if (std::abs(zeta) > 1.0 - 1e-12)
    throw std::invalid_argument("poisson_extend: |zeta| must be <= 1 - 1e-12");
  return harmonic_eval(u.spectrum(), zeta);
}

double poisson_kernel(cd zeta, double t) {
  const cd e(std::cos(t), std::sin(t));
  return (1.0 - std::norm(zeta)) / (2.0 * M_PI * std::norm(e - zeta));
}

bool poisson_kernel_bound_check(cd zeta, double t, double tau) {
  const double r = std::abs(zeta);
  if (r >= 1.0) throw std::invalid_argument("kernel bound check: |zeta| must be < 1");
  if (std::abs(std::arg(zeta)) > tau / 2.0)
    throw std::invalid_argument("kernel bound check: |arg zeta| must be <= tau/2");
  if (std::abs(t) <= tau)
    throw std::invalid_argument("kernel bound check: |t| must exceed tau");
  const cd e(std::cos(t), std::sin(t));
  const double lhs = poisson_kernel(zeta, t);
  const double rhs = (1.0 - r) / (M_PI * std::norm(e - zeta));
  return lhs <= rhs;
}

// ---- AnalyticDisc ----

AnalyticDisc::AnalyticDisc(std::vector<CircleFunction> boundary)
    : boundary_(std::move(boundary)) {
  if (boundary_.empty()) throw std::invalid_argument("analytic disc: empty boundary");
  const int n = boundary_[0].size();
  coeff_.reserve(boundary_.size());
  for (const CircleFunction& b : boundary_) {
    if (b.size() != n)
      throw std::invalid_argument("analytic disc: mismatched component grids");
    coeff_.push_back(b.spectrum());
  }
}

int AnalyticDisc::grid_size() const { return boundary_[0].size(); }

Eigen::VectorXcd AnalyticDisc::boundary_point(double theta) const {
  const cd zeta(std::cos(theta), std::sin(theta));
  Eigen::VectorXcd out(dimension());
  for (int j = 0; j < dimension(); ++j)
    out[j] = harmonic_eval(coeff_[static_cast<std::size_t>(j)], zeta);
  return out;
}

Eigen::VectorXcd AnalyticDisc::evaluate(cd zeta) const {
  if (std::abs(zeta) > 1.0 - 1e-12)
    throw std::invalid_argument("analytic disc: |zeta| must be <= 1 - 1e-12");
  Eigen::VectorXcd out(dimension());
  for (int j = 0; j < dimension(); ++j)
    out[j] = harmonic_eval(coeff_[static_cast<std::size_t>(j)], zeta);
  return out;
}

Eigen::VectorXcd AnalyticDisc::derivative(cd zeta) const {
  if (std::abs(zeta) > 1.0)
    throw std::invalid_argument("analytic disc: derivative needs |zeta| <= 1");
  Eigen::VectorXcd out(dimension());
  for (int j = 0; j < dimension(); ++j)
    out[j] = holomorphic_derivative_eval(coeff_[static_cast<std::size_t>(j)], zeta);
  return out;
}

AnalyticDisc analytic_completion(const std::vector<CircleFunction>& u,
                                 const Eigen::VectorXd& c) {
  if (static_cast<int>(u.size()) != c.size())
    throw std::invalid_argument("analytic_completion: dimension mismatch");
  std::vector<CircleFunction> boundary;
  boundary.reserve(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (!u[j].is_real())
      throw std::invalid_argument("analytic_completion: input must be real-valued");
    const int n = u[j].size();
    const int half = n / 2;
    // Assemble u + i(T(u) + c_j) in the spectrum: positive buckets double,
    // negative buckets cancel exactly, the mean picks up i*c_j.
    std::vector<cd> g = u[j].spectrum();
    g[0] += cd(0.0, c[static_cast<int>(j)]);
    for (int k = 1; k < half; ++k) {
      g[static_cast<std::size_t>(k)] *= 2.0;
      g[static_cast<std::size_t>(n - k)] = 0.0;
    }
    boundary.emplace_back(samples_of(std::move(g)));
  }
  return AnalyticDisc(std::move(boundary));
}

}  // namespace scv
