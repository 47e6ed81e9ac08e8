#pragma once

// Independent reference implementations used by the tests. They are written
// directly from the defining formulas and share no code with the library
// beyond the basic types.

#include <cmath>
#include <complex>
#include <functional>
#include <random>

#include <Eigen/Dense>

namespace oracle {

using C = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

inline const C I{0.0, 1.0};

// h(z) of the additive-noise family straight from its definition.
inline C additive_h(C z, C delta, C kappa) {
  const C e = std::exp(2.0 * z / delta + kappa);
  return (1.0 - e) / (1.0 + e);
}

inline Eigen::Matrix2cd kernel(C h, C ht) {
  Eigen::Matrix2cd m;
  m << 1.0, ht, h, h * ht;
  return m / (1.0 + h * ht);
}

// Single-mode additive-noise drift with kappa = 0, written with tanh/sinh.
inline Vec single_mode_drift(double Omega, double omega, double gs, C delta, const Vec& phi) {
  const C a = phi[0], b = phi[1], z = phi[2], w = phi[3];
  const C dc = std::conj(delta);
  const C th = std::tanh(z / delta + w / dc);
  Vec out(4);
  out[0] = I * (-omega * a + gs * th);
  out[1] = I * (omega * b - gs * th);
  out[2] = I * (-Omega * delta / 2.0 * std::sinh(2.0 * z / delta) + gs * delta * (a + b));
  out[3] = I * (Omega * dc / 2.0 * std::sinh(2.0 * w / dc) - gs * dc * (a + b));
  return out;
}

// Single-mode additive-noise noise matrix in the (alpha, beta, z, w) rows.
inline Mat single_mode_noise(double gs, C delta) {
  const C pre = std::sqrt(I * gs / 2.0);
  const C sd = std::sqrt(delta);
  const C sdc = std::sqrt(std::conj(delta));
  Mat B = Mat::Zero(4, 4);
  B(0, 0) = I * sd;
  B(0, 1) = -sd;
  B(1, 2) = -I * sdc;
  B(1, 3) = -sdc;
  B(2, 0) = -I * sd;
  B(2, 1) = -sd;
  B(3, 2) = -I * sdc;
  B(3, 3) = sdc;
  return pre * B;
}

// Fourth-order central difference of f along the real direction of
// coordinate k; equals the complex derivative for analytic f.
inline Vec fd_column(const std::function<Vec(const Vec&)>& f, const Vec& x, int k, double h) {
  auto at = [&](double t) {
    Vec y = x;
    y[k] += t;
    return f(y);
  };
  return (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
}

inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double h = 1e-3) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (int k = 0; k < x.size(); ++k) J.col(k) = fd_column(f, x, k, h);
  return J;
}

// Hessian of component `row` of f by differencing the FD Jacobian.
inline Mat fd_hessian(const std::function<Vec(const Vec&)>& f, const Vec& x, int row,
                      double h = 1e-3) {
  const int n = static_cast<int>(x.size());
  Mat H(n, n);
  for (int k = 0; k < n; ++k) {
    auto grad = [&](const Vec& y) -> Vec {
      Vec g(n);
      for (int j = 0; j < n; ++j) g[j] = fd_column(f, y, j, h)[row];
      return g;
    };
    H.col(k) = fd_column(grad, x, k, h);
  }
  return H;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  }
  return out;
}

inline Mat destroy(int n_max) {
  Mat a = Mat::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

// Atomic operators in the (down, up) basis.
inline Mat sigma_z() {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = -0.5;
  m(1, 1) = 0.5;
  return m;
}
inline Mat sigma_plus() {
  Mat m = Mat::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}
inline Mat sigma_minus() { return sigma_plus().adjoint(); }

// Lifts an operator on mode k (or the atom when k < 0) of a space with
// `modes` modes to the full space; basis index s + 2 (n_1 + (n_max+1) n_2 + ...).
inline Mat lift(const Mat& op, int k, int modes, int n_max) {
  Mat out = k < 0 ? op : Mat::Identity(2, 2);
  for (int m = 0; m < modes; ++m) {
    const Mat factor = (m == k) ? op : Mat::Identity(n_max + 1, n_max + 1);
    out = kron(factor, out);
  }
  return out;
}

inline Vec random_complex(std::mt19937_64& rng, int n, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) {
    const double re = g(rng);
    v[i] = C(re, g(rng));
  }
  return v;
}

// Ornstein-Uhlenbeck dx = -theta x dt + sigma dW.
inline double ou_mean(double x0, double theta, double t) { return x0 * std::exp(-theta * t); }
inline double ou_second_moment(double x0, double theta, double sigma, double t) {
  const double m = ou_mean(x0, theta, t);
  return m * m + sigma * sigma / (2.0 * theta) * (1.0 - std::exp(-2.0 * theta * t));
}

}  // namespace oracle
