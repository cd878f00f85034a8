#include "scv/poly.hpp"

#include <algorithm>
#include <stdexcept>

namespace scv {

namespace {

std::vector<std::uint8_t> to_u8(const std::vector<int>& v) {
  std::vector<std::uint8_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0 || v[i] > 255) throw std::invalid_argument("bad exponent");
    out[i] = static_cast<std::uint8_t>(v[i]);
  }
  return out;
}

bool key_less(const Poly::Term& a, const Poly::Term& b) {
  if (a.zp != b.zp) return a.zp < b.zp;
  return a.cp < b.cp;
}

cd pow_int(cd base, int e) {
  cd acc(1.0);
  while (e-- > 0) acc *= base;
  return acc;
}

}  // namespace

Poly Poly::constant(int vars, cd c) {
  Poly p(vars);
  p.add_term(c, std::vector<int>(static_cast<std::size_t>(vars), 0),
             std::vector<int>(static_cast<std::size_t>(vars), 0));
  return p;
}

Poly Poly::variable(int vars, int j) {
  Poly p(vars);
  std::vector<int> zp(static_cast<std::size_t>(vars), 0), cp = zp;
  zp[static_cast<std::size_t>(j)] = 1;
  p.add_term(1.0, zp, cp);
  return p;
}

Poly Poly::conj_variable(int vars, int j) {
  Poly p(vars);
  std::vector<int> zp(static_cast<std::size_t>(vars), 0), cp = zp;
  cp[static_cast<std::size_t>(j)] = 1;
  p.add_term(1.0, zp, cp);
  return p;
}

Poly Poly::re_variable(int vars, int j) {
  return (variable(vars, j) + conj_variable(vars, j)) * cd(0.5);
}

Poly Poly::im_variable(int vars, int j) {
  return (variable(vars, j) - conj_variable(vars, j)) * cd(0.0, -0.5);
}

Poly Poly::abs2(int vars) {
  Poly p(vars);
  for (int j = 0; j < vars; ++j) p += variable(vars, j) * conj_variable(vars, j);
  return p;
}

int Poly::total_degree() const {
  int deg = 0;
  for (const Term& t : terms_) {
    int d = 0;
    for (std::uint8_t e : t.zp) d += e;
    for (std::uint8_t e : t.cp) d += e;
    deg = std::max(deg, d);
  }
  return deg;
}

void Poly::add_term(cd coeff, std::vector<int> zp, std::vector<int> cp) {
  if (static_cast<int>(zp.size()) != vars_ || static_cast<int>(cp.size()) != vars_)
    throw std::invalid_argument("poly term has wrong arity");
  terms_.push_back(Term{coeff, to_u8(zp), to_u8(cp)});
  normalize();
}

void Poly::normalize() {
  std::sort(terms_.begin(), terms_.end(), key_less);
  std::vector<Term> merged;
  for (Term& t : terms_) {
    if (!merged.empty() && merged.back().zp == t.zp && merged.back().cp == t.cp)
      merged.back().coeff += t.coeff;
    else
      merged.push_back(std::move(t));
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(),
                              [](const Term& t) { return std::abs(t.coeff) == 0.0; }),
               merged.end());
  terms_ = std::move(merged);
}

Poly Poly::operator+(const Poly& o) const {
  if (vars_ != o.vars_) throw std::invalid_argument("poly arity mismatch");
  Poly out(vars_);
  out.terms_ = terms_;
  out.terms_.insert(out.terms_.end(), o.terms_.begin(), o.terms_.end());
  out.normalize();
  return out;
}

Poly Poly::operator-(const Poly& o) const { return *this + o * cd(-1.0); }

Poly Poly::operator*(const Poly& o) const {
  if (vars_ != o.vars_) throw std::invalid_argument("poly arity mismatch");
  Poly out(vars_);
  for (const Term& a : terms_) {
    for (const Term& b : o.terms_) {
      Term t;
      t.coeff = a.coeff * b.coeff;
      t.zp.resize(a.zp.size());
      t.cp.resize(a.cp.size());
      for (std::size_t i = 0; i < t.zp.size(); ++i) {
        t.zp[i] = static_cast<std::uint8_t>(a.zp[i] + b.zp[i]);
        t.cp[i] = static_cast<std::uint8_t>(a.cp[i] + b.cp[i]);
      }
      out.terms_.push_back(std::move(t));
    }
  }
  out.normalize();
  return out;
}

Poly Poly::operator*(cd s) const {
  Poly out(vars_);
  out.terms_ = terms_;
  for (Term& t : out.terms_) t.coeff *= s;
  out.normalize();
  return out;
}

Poly Poly::dz(int j) const {
  Poly out(vars_);
  for (const Term& t : terms_) {
    const std::uint8_t e = t.zp[static_cast<std::size_t>(j)];
    if (e == 0) continue;
    Term d = t;
    d.coeff *= static_cast<double>(e);
    d.zp[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(e - 1);
    out.terms_.push_back(std::move(d));
  }
  out.normalize();
  return out;
}

Poly Poly::dzbar(int j) const {
  Poly out(vars_);
  for (const Term& t : terms_) {
    const std::uint8_t e = t.cp[static_cast<std::size_t>(j)];
    if (e == 0) continue;
    Term d = t;
    d.coeff *= static_cast<double>(e);
    d.cp[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>(e - 1);
    out.terms_.push_back(std::move(d));
  }
  out.normalize();
  return out;
}

Poly Poly::conjugate() const {
  Poly out(vars_);
  for (const Term& t : terms_)
    out.terms_.push_back(Term{std::conj(t.coeff), t.cp, t.zp});
  out.normalize();
  return out;
}

Poly Poly::compose_linear(const Eigen::MatrixXcd& u) const {
  if (u.rows() != vars_ || u.cols() != vars_)
    throw std::invalid_argument("compose_linear: matrix must be n x n");
  std::vector<Poly> lin, linc;
  for (int j = 0; j < vars_; ++j) {
    Poly l(vars_);
    for (int k = 0; k < vars_; ++k)
      if (u(j, k) != cd(0.0)) l += variable(vars_, k) * u(j, k);
    if (l.is_zero()) l = constant(vars_, 0.0);
    lin.push_back(l);
    linc.push_back(l.conjugate());
  }
  Poly out(vars_);
  for (const Term& t : terms_) {
    Poly acc = constant(vars_, t.coeff);
    for (int j = 0; j < vars_; ++j) {
      for (int e = 0; e < t.zp[static_cast<std::size_t>(j)]; ++e)
        acc = acc * lin[static_cast<std::size_t>(j)];
      for (int e = 0; e < t.cp[static_cast<std::size_t>(j)]; ++e)
        acc = acc * linc[static_cast<std::size_t>(j)];
    }
    out += acc;
  }
  return out;
}

bool Poly::is_real_valued(double tol) const {
  for (const Term& t : terms_) {
    bool found = false;
    for (const Term& s : terms_) {
      if (s.zp == t.cp && s.cp == t.zp) {
        if (std::abs(s.coeff - std::conj(t.coeff)) > tol) return false;
        found = true;
        break;
      }
    }
    if (!found && std::abs(t.coeff) > tol) return false;
  }
  return true;
}

cd Poly::eval(const Eigen::VectorXcd& z) const {
  if (z.size() != vars_) throw std::invalid_argument("poly eval arity mismatch");
  cd acc(0.0);
  for (const Term& t : terms_) {
    cd m = t.coeff;
    for (int j = 0; j < vars_; ++j) {
      if (t.zp[static_cast<std::size_t>(j)])
        m *= pow_int(z[j], t.zp[static_cast<std::size_t>(j)]);
      if (t.cp[static_cast<std::size_t>(j)])
        m *= pow_int(std::conj(z[j]), t.cp[static_cast<std::size_t>(j)]);
    }
    acc += m;
  }
  return acc;
}

nlohmann::json Poly::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const Term& t : terms_) {
    nlohmann::json jt;
    if (t.coeff.imag() == 0.0)
      jt["c"] = t.coeff.real();
    else
      jt["c"] = {t.coeff.real(), t.coeff.imag()};
    jt["z"] = std::vector<int>(t.zp.begin(), t.zp.end());
    jt["zbar"] = std::vector<int>(t.cp.begin(), t.cp.end());
    arr.push_back(jt);
  }
  return arr;
}

Poly Poly::from_json(const nlohmann::json& j, int vars) {
  Poly out(vars);
  for (const nlohmann::json& jt : j) {
    cd c;
    if (jt.at("c").is_array())
      c = cd(jt.at("c").at(0).get<double>(), jt.at("c").at(1).get<double>());
    else
      c = cd(jt.at("c").get<double>(), 0.0);
    out.add_term(c, jt.at("z").get<std::vector<int>>(),
                 jt.at("zbar").get<std::vector<int>>());
  }
  return out;
}

// ---- Jet2 ----

Jet2::Jet2(Poly p) : poly_(std::move(p)) {
  if (!poly_.is_real_valued())
    throw std::invalid_argument("jet: polynomial must be real-valued");
  const int n = poly_.vars();
  dz_.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) dz_.push_back(poly_.dz(j));
  dzzbar_.resize(static_cast<std::size_t>(n));
  dzz_.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    for (int k = 0; k < n; ++k) {
      dzzbar_[static_cast<std::size_t>(j)].push_back(dz_[static_cast<std::size_t>(j)].dzbar(k));
      dzz_[static_cast<std::size_t>(j)].push_back(dz_[static_cast<std::size_t>(j)].dz(k));
    }
  }
}

double Jet2::value(const Eigen::VectorXcd& z) const { return poly_.eval(z).real(); }

Eigen::VectorXcd Jet2::grad_z(const Eigen::VectorXcd& z) const {
  const int n = vars();
  Eigen::VectorXcd g(n);
  for (int j = 0; j < n; ++j) g[j] = dz_[static_cast<std::size_t>(j)].eval(z);
  return g;
}

Eigen::MatrixXcd Jet2::hess_zzbar(const Eigen::VectorXcd& z) const {
  const int n = vars();
  Eigen::MatrixXcd h(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      h(j, k) = dzzbar_[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)].eval(z);
  return h;
}

Eigen::MatrixXcd Jet2::hess_zz(const Eigen::VectorXcd& z) const {
  const int n = vars();
  Eigen::MatrixXcd h(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      h(j, k) = dzz_[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)].eval(z);
  return h;
}

}  // namespace scv
