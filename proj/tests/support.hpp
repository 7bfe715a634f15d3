#pragma once

// Independent reference constructions used by the tests. Nothing here calls
// the ladder/passive/squeezer kernels under test.

#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "homsim/fock.hpp"

namespace homsim::testing {

using Poly = std::map<std::pair<int, int>, complex>;  // (i, j) -> coefficient of x^i y^j

inline double factorial(int n) { return std::tgamma(n + 1.0); }

inline Poly poly_mul(const Poly& p, const Poly& q) {
  Poly out;
  for (const auto& [a, ca] : p)
    for (const auto& [b, cb] : q) out[{a.first + b.first, a.second + b.second}] += ca * cb;
  return out;
}

// f(a+, b+)|0,0> for a polynomial f: x^i y^j |0,0> = sqrt(i! j!) |i, j>.
inline PureState poly_state(const Poly& p, const ModeLayout& layout) {
  PureState s(layout);
  for (const auto& [ij, c] : p)
    if (std::abs(c) > 0.0) s[layout.index_of({ij.first, ij.second})] += c * std::sqrt(factorial(ij.first) * factorial(ij.second));
  return s;
}

inline PureState noon(const ModeLayout& layout, int n, complex rel = 1.0) {
  PureState s(layout);
  s[layout.index_of({n, 0})] = std::sqrt(0.5);
  s[layout.index_of({0, n})] += rel * std::sqrt(0.5);
  return s;
}

// Random normalized state with no population in the top `clear` levels of
// any mode.
inline PureState random_state(const ModeLayout& layout, unsigned seed, int clear = 0) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> g;
  PureState s(layout);
  for (std::size_t i = 0; i < layout.dimension(); ++i) {
    bool ok = true;
    for (Mode m = 0; m < layout.modes(); ++m) ok = ok && layout.occupation(i, m) <= layout.cutoff(m) - clear;
    if (ok) s[i] = complex{g(rng), g(rng)};
  }
  return normalize(s).state;
}

// Dense single-mode matrices on levels 0..c.
inline Eigen::MatrixXcd lowering(int c) {
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(c + 1, c + 1);
  for (int n = 1; n <= c; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

// Two-mode operator kron(A on mode 0, B on mode 1), mode 0 slowest.
inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline Eigen::VectorXcd to_vector(const PureState& s) {
  Eigen::VectorXcd v(s.dimension());
  for (std::size_t i = 0; i < s.dimension(); ++i) v(Eigen::Index(i)) = s[i];
  return v;
}

// Balanced splitter a+ -> (a+ + b+)/sqrt2, b+ -> (b+ - a+)/sqrt2 on a [c, c]
// register via Eigen's matrix exponential of -(pi/4)(a+ b - a b+). Exact on
// photon-number blocks with N <= c.
inline Eigen::MatrixXcd balanced_splitter_matrix(int c) {
  const Eigen::MatrixXcd a = lowering(c);
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(c + 1, c + 1);
  const Eigen::MatrixXcd A = kron(a, id), B = kron(id, a);
  const Eigen::MatrixXcd g = A.adjoint() * B - B.adjoint() * A;
  return (-(std::numbers::pi / 4) * g).exp();
}

// <Pi_b> after phase exp(i phi n_b) and the balanced splitter, by dense
// matrices on a [c, c] register.
inline double brute_parity(const PureState& s, double phi) {
  const int c = s.layout().cutoff(0);
  const Eigen::MatrixXcd u = balanced_splitter_matrix(c);
  Eigen::VectorXcd v = to_vector(s);
  for (std::size_t i = 0; i < s.dimension(); ++i) v(Eigen::Index(i)) *= std::polar(1.0, phi * s.layout().occupation(i, 1));
  const Eigen::VectorXcd out = u * v;
  double p = 0.0;
  for (std::size_t i = 0; i < s.dimension(); ++i)
    p += (s.layout().occupation(i, 1) % 2 == 0 ? 1.0 : -1.0) * std::norm(out(Eigen::Index(i)));
  return p;
}

}  // namespace homsim::testing
