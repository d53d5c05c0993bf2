#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>

#include "horocount/quadform.hpp"

namespace testsupport {

using horocount::Matrix;

inline Matrix random_matrix(std::mt19937_64& rng, int d, double spread = 1.0) {
  std::normal_distribution<double> n(0.0, spread);
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = n(rng);
  return m;
}

// Random element of SL_d(R) with moderate condition number.
inline horocount::GroupElement random_sl(std::mt19937_64& rng, int d) {
  for (;;) {
    Matrix m = Matrix::Identity(d, d) + 0.6 * random_matrix(rng, d);
    double det = m.determinant();
    if (det > 0.2) return horocount::GroupElement::normalized(m);
  }
}

inline Matrix random_rotation(std::mt19937_64& rng, int d) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, d));
  Matrix q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1;
  return q;
}

// Product of elementary integer matrices: an element of SL_d(Z).
inline Matrix random_sl_z(std::mt19937_64& rng, int d, int steps = 6) {
  std::uniform_int_distribution<int> idx(0, d - 1), coef(-2, 2);
  Matrix g = Matrix::Identity(d, d);
  for (int s = 0; s < steps; ++s) {
    int i = idx(rng), j = idx(rng);
    if (i == j) continue;
    Matrix e = Matrix::Identity(d, d);
    e(i, j) = coef(rng);
    g = g * e;
  }
  return g;
}

inline horocount::QuadForm random_form(std::mt19937_64& rng, int d) {
  Matrix g = random_sl(rng, d).mat();
  Matrix m = g.transpose() * g;
  return horocount::QuadForm(0.5 * (m + m.transpose()));
}

}  // namespace testsupport
