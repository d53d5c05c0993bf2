#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace horocount {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Positive definite form of determinant one. The Gram matrix passed in is
// rescaled by det^{-1/d}.
class QuadForm {
 public:
  explicit QuadForm(const Matrix& gram);
  static QuadForm identity(int d);

  int dim() const { return static_cast<int>(gram_.rows()); }
  const Matrix& gram() const { return gram_; }
  const Matrix& chol() const { return chol_; }

  double operator()(const Vector& v) const { return v.dot(gram_ * v); }

  // True when every Gram entry is within tol of an integer.
  bool is_integral(double tol = 1e-9) const;

 private:
  Matrix gram_;
  Matrix chol_;
};

class GroupElement {
 public:
  explicit GroupElement(const Matrix& mat);
  static GroupElement identity(int d);
  // Divides by det^{1/d}; det must be positive.
  static GroupElement normalized(const Matrix& mat);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Matrix& mat() const { return mat_; }
  GroupElement operator*(const GroupElement& o) const;

 private:
  Matrix mat_;
};

struct IwasawaCoord {
  double t = 0.0;
  std::vector<double> aprime;  // d-1 log-entries of A', sum 0
  Matrix n;                    // strictly lower triangular part of n(x)
};

struct Rates {
  double lambda;
  double mu;
};
Rates rates(int d);

QuadForm act(const QuadForm& q, const GroupElement& g);

GroupElement geodesic_r(int d, double t);
GroupElement geodesic_rho(int d, double t);

double busemann_r(const QuadForm& q);
double busemann_rho(const QuadForm& q);

// g = k * a * n with a = diag(exp(-lambda t/2 + a'_i), exp(mu t/2)) and n
// unit lower triangular, so that Q_0 . g has Gram n^T a^2 n.
IwasawaCoord iwasawa_decompose(const GroupElement& g);
IwasawaCoord iwasawa_decompose(const QuadForm& q);
GroupElement iwasawa_compose(const IwasawaCoord& c);

QuadForm phi_t(const QuadForm& q, double t);

double chi_d(const GroupElement& a);

struct Constants {
  int d;
  double lambda, mu;
  int alpha_d;
  double omega_d;
  double zeta_d;
  double C_d;
  std::optional<double> kappa_d;  // needs vol(M_d); known for d = 2
  double kappa_over_vol;          // kappa_d / vol(M_d)
  double T_d;
  double exponent_thm11, exponent_thm12, exponent_edwards;
  std::optional<double> exponent_rh;
};

Constants constants(int d);

double unit_ball_volume(int d);
// Riemann zeta at an integer argument s >= 2.
double zeta(int s);
int alpha_of(int d);

}  // namespace horocount
