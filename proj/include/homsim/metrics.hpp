#pragma once

// Figures of merit: fidelity, entanglement entropy, EPR variance sum, parity
// phase estimation, and the r-optimisation used for the TMSS comparisons.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "homsim/optics.hpp"

namespace homsim {

// F = sum_i w_i |<target|psi_i>|^2
inline double fidelity(const PureState& target, const PureState& state) { return std::norm(inner_product(target, state)); }

inline double fidelity(const PureState& target, const MixedState& state) {
  double f = 0.0;
  for (const auto& b : state.branches()) f += b.weight * fidelity(target, b.state);
  return f;
}

inline void require_normalized(const PureState& state) {
  if (std::abs(state.norm_squared() - 1.0) > 1e-8) fail(ErrorKind::not_normalized, "state must be normalized");
}

inline void require_normalized(const MixedState& state) {
  if (state.empty()) fail(ErrorKind::not_normalized, "empty ensemble");
  if (std::abs(state.total_weight() - 1.0) > 1e-8) fail(ErrorKind::not_normalized, "branch weights must sum to 1");
  for (const auto& b : state.branches()) require_normalized(b.state);
}

// Von Neumann entropy (bits) of the reduced state on `partition`.
inline double entanglement_entropy(const PureState& state, std::span<const Mode> partition) {
  require_normalized(state);
  const Eigen::MatrixXcd rho = reduced_density(state, partition);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  double h = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = es.eigenvalues()(i);
    if (l > 0.0) h -= l * std::log2(l);
  }
  return h;
}

inline double entanglement_entropy(const PureState& state, std::initializer_list<Mode> partition) {
  return entanglement_entropy(state, std::span<const Mode>(partition.begin(), partition.size()));
}

struct EprResult {
  double value;
  double top_population;  // weight on each mode's highest level; quadratures are truncated there

  bool flagged() const { return top_population >= 1e-8; }
};

namespace detail {

struct QuadratureMoments {
  double mean_x = 0.0, mean_x2 = 0.0, mean_p = 0.0, mean_p2 = 0.0;
};

// Moments of X = x_A - x_B and P = p_A + p_B with x = (a + a+)/sqrt2,
// p = (a - a+)/(i sqrt2). Both are Hermitian, so <X^2> = ||X psi||^2.
inline QuadratureMoments quadrature_moments(const PureState& psi, Mode a, Mode b) {
  const PureState la = apply_annihilation(psi, a), ca = apply_creation(psi, a);
  const PureState lb = apply_annihilation(psi, b), cb = apply_creation(psi, b);
  const double k = 1.0 / std::sqrt(2.0);
  const complex mi{0.0, -1.0};
  PureState x = k * ((la + ca) + complex{-1.0, 0.0} * (lb + cb));
  PureState p = (k * mi) * ((la + complex{-1.0, 0.0} * ca) + (lb + complex{-1.0, 0.0} * cb));
  return {inner_product(psi, x).real(), x.norm_squared(), inner_product(psi, p).real(), p.norm_squared()};
}

}  // namespace detail

// Var(x_A - x_B) + Var(p_A + p_B); 2 for the vacuum, below 2 certifies EPR
// correlation.
inline EprResult epr_sum(const MixedState& state, Mode mode_a, Mode mode_b) {
  require_normalized(state);
  check_distinct_modes(state.layout(), mode_a, mode_b);
  double mx = 0, mx2 = 0, mp = 0, mp2 = 0, top = 0;
  for (const auto& br : state.branches()) {
    const auto m = detail::quadrature_moments(br.state, mode_a, mode_b);
    mx += br.weight * m.mean_x;
    mx2 += br.weight * m.mean_x2;
    mp += br.weight * m.mean_p;
    mp2 += br.weight * m.mean_p2;
    const auto& l = br.state.layout();
    for (std::size_t i = 0; i < br.state.dimension(); ++i)
      if (l.occupation(i, mode_a) == l.cutoff(mode_a) || l.occupation(i, mode_b) == l.cutoff(mode_b))
        top += br.weight * std::norm(br.state[i]);
  }
  return {(mx2 - mx * mx) + (mp2 - mp * mp), top};
}

inline EprResult epr_sum(const PureState& state, Mode mode_a, Mode mode_b) {
  return epr_sum(MixedState::pure(state), mode_a, mode_b);
}

// Parity readout of a two-mode state sitting inside a Mach-Zehnder
// interferometer: phase exp(i phi n_b) on mode 1, the balanced splitter on
// (0, 1), then (-1)^{n_b} on mode 1. Because both the phase and the splitter
// conserve total photon number, <Pi_b>(phi) is a trigonometric polynomial
//   sum_d c_d exp(i d phi),
// whose coefficients are fixed once from the state's photon-number blocks.
class ParityInterferometer {
 public:
  explicit ParityInterferometer(const MixedState& state) {
    require_normalized(state);
    const auto& layout = state.layout();
    if (layout.modes() != 2) fail(ErrorKind::invalid_argument, "parity readout needs a two-mode state");
    const int ca = layout.cutoff(0), cb = layout.cutoff(1);
    max_total_ = ca + cb;
    coeff_.assign(2 * max_total_ + 1, complex{});
    const detail::PassiveBlocks blocks(BeamSplitterParam::balanced().creation_map(), max_total_);

    for (int total = 0; total <= max_total_; ++total) {
      const int lo = std::max(0, total - cb), hi = std::min(total, ca);
      Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(total + 1, total + 1);
      for (const auto& br : state.branches()) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(total + 1);
        for (int k = lo; k <= hi; ++k) v(k) = br.state[layout.index_of({k, total - k})];
        rho.noalias() += br.weight * v * v.adjoint();
      }
      if (rho.cwiseAbs().maxCoeff() == 0.0) continue;
      const Eigen::MatrixXcd& u = blocks.block(total);
      Eigen::VectorXd parity(total + 1);
      for (int k = 0; k <= total; ++k) parity(k) = ((total - k) % 2 == 0) ? 1.0 : -1.0;
      const Eigen::MatrixXcd m = u.adjoint() * parity.asDiagonal() * u;
      // rho(k,l) M(l,k) exp(i phi ((N-k) - (N-l)))
      for (int k = 0; k <= total; ++k)
        for (int l = 0; l <= total; ++l) coeff_[std::size_t(l - k + max_total_)] += rho(k, l) * m(l, k);
    }
  }

  // The coefficients satisfy c_{-d} = conj(c_d), so only d >= 0 is summed.
  double expectation(double phi) const {
    const complex z = std::polar(1.0, phi);
    complex zd{1.0, 0.0};
    double acc = coeff_[std::size_t(max_total_)].real();
    for (int d = 1; d <= max_total_; ++d) {
      zd *= z;
      acc += 2.0 * (coeff_[std::size_t(d + max_total_)] * zd).real();
    }
    return acc;
  }

  double analytic_derivative(double phi) const {
    const complex z = std::polar(1.0, phi);
    complex zd{1.0, 0.0};
    double acc = 0.0;
    for (int d = 1; d <= max_total_; ++d) {
      zd *= z;
      acc -= 2.0 * d * (coeff_[std::size_t(d + max_total_)] * zd).imag();
    }
    return acc;
  }

  // Magnitude of the exp(i d phi) + exp(-i d phi) component.
  double harmonic(int d) const {
    if (d < 0 || d > max_total_) return 0.0;
    if (d == 0) return std::abs(coeff_[std::size_t(max_total_)]);
    return std::abs(coeff_[std::size_t(d + max_total_)]) + std::abs(coeff_[std::size_t(max_total_ - d)]);
  }

  int max_total() const { return max_total_; }

 private:
  int max_total_ = 0;
  std::vector<complex> coeff_;
};

inline std::vector<double> parity_phase_scan(const MixedState& state, std::span<const double> phi_grid) {
  const ParityInterferometer mz(state);
  std::vector<double> out;
  out.reserve(phi_grid.size());
  for (double phi : phi_grid) out.push_back(mz.expectation(phi));
  return out;
}

inline std::vector<double> parity_phase_scan(const PureState& state, std::span<const double> phi_grid) {
  return parity_phase_scan(MixedState::pure(state), phi_grid);
}

inline constexpr double kPhaseStep = 1e-4;

// Central difference with step h, Richardson-extrapolated against 2h.
inline double parity_derivative(const ParityInterferometer& mz, double phi, double h = kPhaseStep) {
  const double d1 = (mz.expectation(phi + h) - mz.expectation(phi - h)) / (2 * h);
  const double d2 = (mz.expectation(phi + 2 * h) - mz.expectation(phi - 2 * h)) / (4 * h);
  return (4.0 * d1 - d2) / 3.0;
}

// Delta phi = Delta Pi_b / |d<Pi_b>/dphi|, with Delta Pi_b = sqrt(1 - <Pi_b>^2)
// because the parity takes values +-1.
inline double phase_sensitivity(const ParityInterferometer& mz, double phi) {
  const double deriv = parity_derivative(mz, phi);
  if (std::abs(deriv) < 1e-12) fail(ErrorKind::derivative_vanishes, "parity signal is stationary at this phase");
  const double mean = mz.expectation(phi);
  return std::sqrt(std::max(0.0, 1.0 - mean * mean)) / std::abs(deriv);
}

inline double phase_sensitivity(const MixedState& state, double phi) { return phase_sensitivity(ParityInterferometer(state), phi); }
inline double phase_sensitivity(const PureState& state, double phi) { return phase_sensitivity(MixedState::pure(state), phi); }

struct PhaseOptimum {
  double delta_phi;
  double phi;
};

// Minimum of Delta phi over a uniform grid on (0, 2 pi), refined by golden
// section inside the bracketing grid cell.
inline PhaseOptimum optimal_phase_sensitivity(const ParityInterferometer& mz, int grid_points = 2048) {
  const double step = 2.0 * std::numbers::pi / grid_points;
  double max_slope = 0.0;
  for (int i = 0; i < grid_points; ++i) max_slope = std::max(max_slope, std::abs(parity_derivative(mz, (i + 0.5) * step)));
  // Near stationary points both numerator and derivative vanish and the
  // ratio is dominated by rounding, so those phases are excluded.
  auto eval = [&](double phi) {
    const double deriv = parity_derivative(mz, phi);
    if (std::abs(deriv) < 1e-3 * max_slope || std::abs(deriv) < 1e-12) return std::numeric_limits<double>::infinity();
    const double mean = mz.expectation(phi);
    return std::sqrt(std::max(0.0, 1.0 - mean * mean)) / std::abs(deriv);
  };
  PhaseOptimum best{std::numeric_limits<double>::infinity(), 0.0};
  for (int i = 0; i < grid_points; ++i) {
    const double phi = (i + 0.5) * step;
    const double v = eval(phi);
    if (v < best.delta_phi) best = {v, phi};
  }
  if (!std::isfinite(best.delta_phi)) fail(ErrorKind::derivative_vanishes, "parity signal is flat");

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = best.phi - step, hi = best.phi + step;
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = eval(x1), f2 = eval(x2);
  while (hi - lo > 1e-7) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = eval(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = eval(x2);
    }
  }
  const double mid = 0.5 * (lo + hi);
  const double fm = eval(mid);
  if (fm < best.delta_phi) best = {fm, mid};
  return best;
}

inline PhaseOptimum optimal_phase_sensitivity(const MixedState& state, int grid_points = 2048) {
  return optimal_phase_sensitivity(ParityInterferometer(state), grid_points);
}

// (t a + r a+)(t b + r b+) on modes (0, 1), normalized.
inline Normalized apply_first_order_superpose(const PureState& state, double t, double r) {
  if (state.layout().modes() != 2) fail(ErrorKind::invalid_argument, "needs a two-mode state");
  auto op = [&](const PureState& s, Mode m) {
    return complex{t, 0.0} * apply_annihilation(s, m) + complex{r, 0.0} * apply_creation(s, m);
  };
  return normalize(op(op(state, 0), 1));
}

// (t a^2 + r a+^2)(t b^2 + r b+^2) on modes (0, 1), normalized.
inline Normalized apply_second_order_superpose(const PureState& state, double t, double r) {
  if (state.layout().modes() != 2) fail(ErrorKind::invalid_argument, "needs a two-mode state");
  auto op = [&](const PureState& s, Mode m) {
    return complex{t, 0.0} * apply_annihilation(apply_annihilation(s, m), m) +
           complex{r, 0.0} * apply_creation(apply_creation(s, m), m);
  };
  return normalize(op(op(state, 0), 1));
}

enum class Objective { max_entropy, min_epr };
enum class Order { first, second };

struct OptimizeResult {
  double r;
  double value;
};

inline constexpr int kFig4Cutoff = 25;

// Objective of the TMSS comparison at reflectivity r (t = sqrt(1 - r^2)).
// Returns NaN when the operator annihilates the state.
inline double superpose_objective(const PureState& tmss, Objective objective, Order order, double r) {
  const double t = std::sqrt(std::max(0.0, 1.0 - r * r));
  try {
    const auto out = order == Order::first ? apply_first_order_superpose(tmss, t, r) : apply_second_order_superpose(tmss, t, r);
    if (objective == Objective::max_entropy) return entanglement_entropy(out.state, {0});
    return epr_sum(out.state, 0, 1).value;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::zero_norm_state) throw;
    return std::numeric_limits<double>::quiet_NaN();
  }
}

// Grid search r in [0, 1] with step 0.01, then golden-section refinement to
// |dr| < 1e-4 around the best grid point. Ties go to the smaller r.
inline OptimizeResult optimize_r(Objective objective, Order order, double s, int cutoff = kFig4Cutoff) {
  if (!(s >= 0.0)) fail(ErrorKind::invalid_argument, "squeezing strength must be >= 0");
  const PureState tmss = tmss_state(s, ModeLayout{cutoff, cutoff});
  const double sign = objective == Objective::max_entropy ? 1.0 : -1.0;
  auto score = [&](double r) {
    const double v = superpose_objective(tmss, objective, order, r);
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : sign * v;
  };

  double best_r = 0.0, best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 100; ++i) {
    const double r = i / 100.0;
    const double v = score(r);
    if (v > best) {
      best = v;
      best_r = r;
    }
  }

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::max(0.0, best_r - 0.01), hi = std::min(1.0, best_r + 0.01);
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = score(x1), f2 = score(x2);
  while (hi - lo > 1e-4) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = score(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = score(x2);
    }
  }
  const double mid = 0.5 * (lo + hi);
  const double fm = score(mid);
  if (fm > best) {
    best = fm;
    best_r = mid;
  }
  return {best_r, sign * best};
}

}  // namespace homsim
