#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace scv {

using cd = std::complex<double>;

// Polynomial in the variables (z_1..z_n, conj(z_1)..conj(z_n)) with complex
// coefficients. Small by construction (defining functions of degree <= 4),
// so terms are kept as a merged, sorted list.
class Poly {
 public:
  struct Term {
    cd coeff;
    std::vector<std::uint8_t> zp;  // powers of z_j
    std::vector<std::uint8_t> cp;  // powers of conj(z_j)
  };

  explicit Poly(int vars) : vars_(vars) {}

  static Poly constant(int vars, cd c);
  static Poly variable(int vars, int j);       // z_j
  static Poly conj_variable(int vars, int j);  // conj(z_j)
  static Poly re_variable(int vars, int j);    // x_j = (z_j + conj z_j)/2
  static Poly im_variable(int vars, int j);    // y_j = (z_j - conj z_j)/(2i)
  static Poly abs2(int vars);                  // |z|^2

  int vars() const { return vars_; }
  int total_degree() const;
  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(cd coeff, std::vector<int> zp, std::vector<int> cp);

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly operator*(cd s) const;
  Poly& operator+=(const Poly& o) { return *this = *this + o; }

  Poly dz(int j) const;
  Poly dzbar(int j) const;
  Poly conjugate() const;

  // Substitute z -> U z (and conj accordingly).
  Poly compose_linear(const Eigen::MatrixXcd& u) const;

  // True when the polynomial takes real values for every z, i.e. the
  // coefficient of z^a conj(z)^b equals the conjugate coefficient of
  // z^b conj(z)^a.
  bool is_real_valued(double tol = 1e-12) const;

  cd eval(const Eigen::VectorXcd& z) const;

  nlohmann::json to_json() const;
  static Poly from_json(const nlohmann::json& j, int vars);

 private:
  void normalize();

  int vars_;
  std::vector<Term> terms_;
};

// Real-valued polynomial with cached derivative polynomials: the full 2-jet
// (value, d/dz_j, d2/dz_j dzbar_k, d2/dz_j dz_k) evaluated exactly.
class Jet2 {
 public:
  explicit Jet2(Poly p);

  int vars() const { return poly_.vars(); }
  const Poly& poly() const { return poly_; }

  double value(const Eigen::VectorXcd& z) const;
  Eigen::VectorXcd grad_z(const Eigen::VectorXcd& z) const;
  Eigen::MatrixXcd hess_zzbar(const Eigen::VectorXcd& z) const;
  Eigen::MatrixXcd hess_zz(const Eigen::VectorXcd& z) const;

 private:
  Poly poly_;
  std::vector<Poly> dz_;
  std::vector<std::vector<Poly>> dzzbar_;
  std::vector<std::vector<Poly>> dzz_;
};

}  // namespace scv
