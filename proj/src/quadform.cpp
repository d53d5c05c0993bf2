#include "horocount/quadform.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace horocount {

namespace {

// Plain Cholesky with a pivot floor; throws on failure.
Matrix cholesky_checked(const Matrix& m, double pivot_floor) {
  const int d = static_cast<int>(m.rows());
  Matrix l = Matrix::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    double s = m(j, j);
    for (int k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
    if (!(s > pivot_floor))
      throw std::invalid_argument("quadratic form is not positive definite (pivot " +
                                  std::to_string(s) + ")");
    l(j, j) = std::sqrt(s);
    for (int i = j + 1; i < d; ++i) {
      double v = m(i, j);
      for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

// m = L D L^T with L unit lower triangular, no pivoting.
void ldlt(const Matrix& m, Matrix& l, Vector& dd) {
  const int d = static_cast<int>(m.rows());
  l = Matrix::Identity(d, d);
  dd = Vector::Zero(d);
  for (int j = 0; j < d; ++j) {
    double s = m(j, j);
    for (int k = 0; k < j; ++k) s -= l(j, k) * l(j, k) * dd(k);
    if (!(s > 0.0)) throw std::runtime_error("Iwasawa decomposition: singular input");
    dd(j) = s;
    for (int i = j + 1; i < d; ++i) {
      double v = m(i, j);
      for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k) * dd(k);
      l(i, j) = v / s;
    }
  }
}

double hadamard_bound(const Matrix& m) {
  double p = 1.0;
  for (int j = 0; j < m.cols(); ++j) p *= m.col(j).norm();
  return p;
}

}  // namespace

QuadForm::QuadForm(const Matrix& gram) {
  const int d = static_cast<int>(gram.rows());
  if (d < 2 || gram.cols() != d) throw std::invalid_argument("Gram matrix must be square with d >= 2");
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j)
      if (!(std::abs(gram(i, j) - gram(j, i)) <= 1e-12))
        throw std::invalid_argument("Gram matrix is not symmetric");
  Matrix g = 0.5 * (gram + gram.transpose());
  double scale = g.diagonal().cwiseAbs().maxCoeff();
  Matrix l = cholesky_checked(g, 1e-12 * scale);
  double logdet = 0.0;
  for (int i = 0; i < d; ++i) logdet += 2.0 * std::log(l(i, i));
  double c = std::exp(-logdet / d);
  gram_ = g * c;
  chol_ = cholesky_checked(gram_, 1e-12);
}

QuadForm QuadForm::identity(int d) { return QuadForm(Matrix::Identity(d, d)); }

bool QuadForm::is_integral(double tol) const {
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j)
      if (std::abs(gram_(i, j) - std::round(gram_(i, j))) > tol) return false;
  return true;
}

GroupElement::GroupElement(const Matrix& mat) : mat_(mat) {
  if (mat.rows() != mat.cols() || mat.rows() < 1) throw std::invalid_argument("group element must be square");
  double det = mat.determinant();
  if (!(std::abs(det - 1.0) <= 1e-9 * std::max(1.0, hadamard_bound(mat))))
    throw std::invalid_argument("group element must have determinant 1 (got " + std::to_string(det) + ")");
}

GroupElement GroupElement::identity(int d) { return GroupElement(Matrix::Identity(d, d)); }

GroupElement GroupElement::normalized(const Matrix& mat) {
  double det = mat.determinant();
  if (!(det > 0.0)) throw std::invalid_argument("cannot normalize: determinant not positive");
  return GroupElement(mat / std::pow(det, 1.0 / mat.rows()));
}

GroupElement GroupElement::operator*(const GroupElement& o) const {
  if (dim() != o.dim()) throw std::invalid_argument("dimension mismatch");
  return GroupElement(mat_ * o.mat_);
}

Rates rates(int d) {
  if (d < 2) throw std::invalid_argument("d must be >= 2");
  double lambda = 1.0 / std::sqrt(double(d - 1) * d);
  return {lambda, (d - 1) * lambda};
}

QuadForm act(const QuadForm& q, const GroupElement& g) {
  if (q.dim() != g.dim()) throw std::invalid_argument("dimension mismatch in act");
  Matrix m = g.mat().transpose() * q.gram() * g.mat();
  return QuadForm(0.5 * (m + m.transpose()));
}

GroupElement geodesic_r(int d, double t) {
  auto [lambda, mu] = rates(d);
  Matrix a = Matrix::Identity(d, d) * std::exp(lambda * t / 2);
  a(d - 1, d - 1) = std::exp(-mu * t / 2);
  return GroupElement(a);
}

GroupElement geodesic_rho(int d, double t) {
  auto [lambda, mu] = rates(d);
  Matrix a = Matrix::Identity(d, d) * std::exp(-lambda * t / 2);
  a(0, 0) = std::exp(mu * t / 2);
  return GroupElement(a);
}

double busemann_r(const QuadForm& q) {
  const int d = q.dim();
  return std::sqrt(double(d) / (d - 1)) * std::log(q.gram()(d - 1, d - 1));
}

double busemann_rho(const QuadForm& q) {
  const int d = q.dim();
  double det = q.gram().bottomRightCorner(d - 1, d - 1).determinant();
  return std::sqrt(double(d) / (d - 1)) * std::log(det);
}

IwasawaCoord iwasawa_decompose(const QuadForm& q) {
  const int d = q.dim();
  const Matrix& m = q.gram();
  // Reverse the coordinate order so that an ordinary LDL^T yields the
  // lower-triangular n on the right.
  Matrix jmj(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) jmj(i, j) = m(d - 1 - i, d - 1 - j);
  Matrix l;
  Vector dd;
  ldlt(jmj, l, dd);
  auto [lambda, mu] = rates(d);
  IwasawaCoord c;
  c.n = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j) c.n(i, j) = l(d - 1 - j, d - 1 - i);
  std::vector<double> s(d);
  for (int i = 0; i < d; ++i) s[i] = 0.5 * std::log(dd(d - 1 - i));
  c.t = 2.0 * s[d - 1] / mu;
  c.aprime.resize(d - 1);
  double sum = 0.0;
  for (int i = 0; i < d - 1; ++i) {
    c.aprime[i] = s[i] + lambda * c.t / 2;
    sum += c.aprime[i];
  }
  for (auto& a : c.aprime) a -= sum / (d - 1);
  return c;
}

IwasawaCoord iwasawa_decompose(const GroupElement& g) {
  Matrix m = g.mat().transpose() * g.mat();
  return iwasawa_decompose(QuadForm(0.5 * (m + m.transpose())));
}

GroupElement iwasawa_compose(const IwasawaCoord& c) {
  const int d = static_cast<int>(c.n.rows());
  if (d < 2 || static_cast<int>(c.aprime.size()) != d - 1)
    throw std::invalid_argument("malformed Iwasawa coordinate");
  auto [lambda, mu] = rates(d);
  Matrix n = Matrix::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j) n(i, j) = c.n(i, j);
  Vector a(d);
  for (int i = 0; i < d - 1; ++i) a(i) = std::exp(-lambda * c.t / 2 + c.aprime[i]);
  a(d - 1) = std::exp(mu * c.t / 2);
  return GroupElement::normalized(a.asDiagonal() * n);
}

QuadForm phi_t(const QuadForm& q, double t) {
  IwasawaCoord c = iwasawa_decompose(q);
  c.t += t;
  Matrix g = iwasawa_compose(c).mat();
  Matrix m = g.transpose() * g;
  return QuadForm(0.5 * (m + m.transpose()));
}

double chi_d(const GroupElement& a) {
  const Matrix& m = a.mat();
  const int d = a.dim();
  double scale = m.diagonal().cwiseAbs().maxCoeff();
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (i != j && std::abs(m(i, j)) > 1e-12 * scale)
        throw std::invalid_argument("chi_d needs a diagonal element");
  double logp = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j) logp += std::log(std::abs(m(i, i))) - std::log(std::abs(m(j, j)));
  return std::exp(logp);
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

int alpha_of(int d) { return d % 2 == 0 ? 2 : 1; }

double zeta(int s) {
  if (s < 2) throw std::invalid_argument("zeta needs s >= 2");
  // Euler-Maclaurin: explicit head, integral tail and three Bernoulli terms.
  const int n = 1000;
  double head = 0.0;
  for (int k = n - 1; k >= 1; --k) head += std::pow(double(k), -s);
  double N = n;
  double tail = std::pow(N, 1.0 - s) / (s - 1) + 0.5 * std::pow(N, -s);
  const double b[3] = {1.0 / 6, -1.0 / 30, 1.0 / 42};
  double fact = 1.0, rising = 1.0;
  for (int j = 1; j <= 3; ++j) {
    fact *= (2 * j - 1) * (2 * j);
    rising = 1.0;
    for (int r = 0; r < 2 * j - 1; ++r) rising *= s + r;
    tail += b[j - 1] / fact * rising * std::pow(N, -s - 2 * j + 1);
  }
  return head + tail;
}

Constants constants(int d) {
  if (d < 2) throw std::invalid_argument("constants: d must be >= 2");
  auto [lambda, mu] = rates(d);
  Constants c{};
  c.d = d;
  c.lambda = lambda;
  c.mu = mu;
  c.alpha_d = alpha_of(d);
  c.omega_d = unit_ball_volume(d);
  c.zeta_d = zeta(d);
  double factor = d == 2 ? 4.0 : 2.0;
  double root = std::sqrt(double(d - 1) * d);
  c.C_d = 2.0 * std::sqrt(factor * c.zeta_d / (root * root * c.omega_d));
  c.kappa_over_vol = c.omega_d / (2.0 * c.zeta_d);
  if (d == 2) c.kappa_d = c.kappa_over_vol * (2.0 * std::numbers::pi / 3.0);
  c.T_d = 8.0 / root * std::log(0.75 * root);
  c.exponent_thm11 = root / 4;
  c.exponent_thm12 = root / 8;
  c.exponent_edwards = 0.25 * std::sqrt(double(d) / (d - 1));
  if (d == 2) c.exponent_rh = 3.0 * std::sqrt(2.0) / 8;
  return c;
}

}  // namespace horocount
