#pragma once

// Heralded second-order superposition operations built from two NDPAs and a
// Hong-Ou-Mandel beam splitter, their weak-coupling targets, the NOON
// cascade and coherent photon subtraction.

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "homsim/circuit.hpp"

namespace homsim {

// Register cutoffs used by the scheme builders.
struct SchemeOptions {
  int idler_cutoff = 10;
  int ancilla_cutoff = 6;
};

// Which measurement heralds success on the two HOM detectors.
struct CoincidenceHerald {
  std::optional<double> eta;  // empty: exact <1,1| projection

  static CoincidenceHerald exact() { return {}; }
  static CoincidenceHerald on_off(double eta) { return {eta}; }

  HeraldOutcome outcome() const {
    if (eta) return Click{DetectorModel::on_off(*eta)};
    return ExactFock{1};
  }
};

struct SourceModel {
  double p = 1.0;

  void validate() const {
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorKind::invalid_argument, "source efficiency must lie in [0, 1]");
  }
};

// Superposition phase realised by NDPA pump phases (phi1, phi2) in the weak
// coupling limit: a+^2 + exp(i phi) b+^2 with phi = 2(phi2 - phi1) + pi.
inline double superposition_phase(double phi1, double phi2) { return 2.0 * (phi2 - phi1) + std::numbers::pi; }

// Pump phase for the b-side NDPA that realises superposition phase `phi`
// when the a-side pump phase is `phi1`.
inline double pump_phase_for(double phi, double phi1 = 0.0) { return phi1 + 0.5 * (phi - std::numbers::pi); }

namespace detail {

inline void require_headroom(const PureState& s, int depth) {
  if (s.top_population(depth) > 1e-8)
    fail(ErrorKind::cutoff_too_small, "signal population within " + std::to_string(depth) + " levels of the cutoff");
}

inline void require_headroom(const MixedState& s, int depth) {
  for (const auto& b : s.branches()) require_headroom(b.state, depth);
}

}  // namespace detail

// Register (a, b, c, d): S_ac(xi1), S_bd(xi2), 50:50 on (c, d), herald on (c, d).
inline Circuit add2_circuit(const ModeLayout& signal_layout, const SqueezeParam& xi1, const SqueezeParam& xi2,
                            const CoincidenceHerald& herald, const SchemeOptions& opt = {}) {
  if (signal_layout.modes() != 2) fail(ErrorKind::invalid_argument, "second-order superposition acts on two modes");
  Circuit c;
  c.layout = signal_layout.concat(ModeLayout{opt.idler_cutoff, opt.idler_cutoff});
  c.input_modes = 2;
  c.gates = {SqueezerGate{0, 2, xi1}, SqueezerGate{1, 3, xi2}, BeamSplitterGate{2, 3, BeamSplitterParam::balanced()}};
  c.herald = HeraldSpec{{2, herald.outcome()}, {3, herald.outcome()}};
  c.validate();
  return c;
}

// Heralded a+^2 + exp(i phi) b+^2 on a two-mode signal.
inline MixedHeraldResult superpose_add2(const MixedState& signal, const SqueezeParam& xi1, const SqueezeParam& xi2,
                                        const CoincidenceHerald& herald, const SchemeOptions& opt = {}) {
  detail::require_headroom(signal, 2);
  const Circuit c = add2_circuit(signal.layout(), xi1, xi2, herald, opt);
  return herald_mixed(signal, c);
}

inline MixedHeraldResult superpose_add2(const PureState& signal, const SqueezeParam& xi1, const SqueezeParam& xi2,
                                        const CoincidenceHerald& herald, const SchemeOptions& opt = {}) {
  return superpose_add2(MixedState::pure(signal), xi1, xi2, herald, opt);
}

// (a+^2 + exp(i phi) gamma b+^2)|psi>, normalized; `norm` is the operator
// output norm, its square the relative success weight.
inline Normalized superpose_add2_ideal(const PureState& signal, double phi, complex gamma) {
  if (signal.layout().modes() != 2) fail(ErrorKind::invalid_argument, "second-order superposition acts on two modes");
  detail::require_headroom(signal, 2);
  PureState a2 = apply_creation(apply_creation(signal, 0), 0);
  PureState b2 = apply_creation(apply_creation(signal, 1), 1);
  return normalize(a2 + std::polar(1.0, phi) * gamma * b2);
}

// Weak-coupling ratio of the Fig. 2(a)-style weighted scheme in this
// library's beam-splitter convention.
inline complex weighted_gamma(const BeamSplitterParam& t1, const BeamSplitterParam& t2) {
  return (t2.t * t2.t) / (t1.t * t1.t);
}

// Register (a, b, c, d, e, f): S_ac, S_bd, B_ce(t1), B_df(t2), 50:50 on (c, d);
// heralds the coincidence on (c, d) and vacuum on (e, f).
inline Circuit add2_weighted_circuit(const ModeLayout& signal_layout, const SqueezeParam& xi1, const SqueezeParam& xi2,
                                     const BeamSplitterParam& t1, const BeamSplitterParam& t2,
                                     const CoincidenceHerald& herald, const SchemeOptions& opt = {},
                                     HeraldOutcome ancilla_outcome = ExactFock{0}) {
  if (signal_layout.modes() != 2) fail(ErrorKind::invalid_argument, "second-order superposition acts on two modes");
  Circuit c;
  c.layout = signal_layout.concat(ModeLayout{opt.idler_cutoff, opt.idler_cutoff, opt.ancilla_cutoff, opt.ancilla_cutoff});
  c.input_modes = 2;
  c.gates = {SqueezerGate{0, 2, xi1}, SqueezerGate{1, 3, xi2}, BeamSplitterGate{3, 5, t2}, BeamSplitterGate{2, 4, t1},
             BeamSplitterGate{2, 3, BeamSplitterParam::balanced()}};
  c.herald = HeraldSpec{{2, herald.outcome()}, {3, herald.outcome()}, {4, ancilla_outcome}, {5, ancilla_outcome}};
  c.validate();
  return c;
}

inline MixedHeraldResult superpose_add2_weighted(const PureState& signal, const SqueezeParam& xi1,
                                                 const SqueezeParam& xi2, const BeamSplitterParam& t1,
                                                 const BeamSplitterParam& t2, const CoincidenceHerald& herald,
                                                 const SchemeOptions& opt = {}) {
  detail::require_headroom(signal, 2);
  const Circuit c = add2_weighted_circuit(signal.layout(), xi1, xi2, t1, t2, herald, opt);
  return herald_mixed(MixedState::pure(signal), c);
}

// Weak-coupling ratio gamma of the local scheme's target a^2 + gamma a+^2,
// in this library's beam-splitter and squeezer conventions:
//   gamma = -exp(2 i phi) tanh^2 s * t2^2 / ((r/t)^2 t1^2).
inline complex local_gamma(const BeamSplitterParam& tap, const SqueezeParam& xi, const BeamSplitterParam& t1,
                           const BeamSplitterParam& t2) {
  const complex ratio = tap.r / tap.t;
  const complex tau = -std::polar(std::tanh(xi.s), xi.phi);
  return -(tau * tau * t2.t * t2.t) / (ratio * ratio * t1.t * t1.t);
}

// Register (a, b, c, d, e): tap B_ab(t, r), S_ad(xi), B_bc(t1), B_de(t2),
// 50:50 on (b, d); heralds the coincidence on (b, d) and vacuum on (c, e).
inline Circuit local_circuit(const ModeLayout& signal_layout, const BeamSplitterParam& tap, const SqueezeParam& xi,
                             const BeamSplitterParam& t1, const BeamSplitterParam& t2, const CoincidenceHerald& herald,
                             const SchemeOptions& opt = {}, HeraldOutcome ancilla_outcome = ExactFock{0}) {
  if (signal_layout.modes() != 1) fail(ErrorKind::invalid_argument, "local superposition acts on one mode");
  Circuit c;
  c.layout = signal_layout.concat(ModeLayout{opt.idler_cutoff, opt.ancilla_cutoff, opt.idler_cutoff, opt.ancilla_cutoff});
  c.input_modes = 1;
  c.gates = {BeamSplitterGate{0, 1, tap}, SqueezerGate{0, 3, xi}, BeamSplitterGate{3, 4, t2}, BeamSplitterGate{1, 2, t1},
             BeamSplitterGate{1, 3, BeamSplitterParam::balanced()}};
  c.herald = HeraldSpec{{1, herald.outcome()}, {3, herald.outcome()}, {2, ancilla_outcome}, {4, ancilla_outcome}};
  c.validate();
  return c;
}

// Heralded a^2 + gamma a+^2 on a single mode.
inline MixedHeraldResult local_superpose(const PureState& signal, const BeamSplitterParam& tap, const SqueezeParam& xi,
                                         const BeamSplitterParam& t1, const BeamSplitterParam& t2,
                                         const CoincidenceHerald& herald, const SchemeOptions& opt = {}) {
  detail::require_headroom(signal, 2);
  const Circuit c = local_circuit(signal.layout(), tap, xi, t1, t2, herald, opt);
  return herald_mixed(MixedState::pure(signal), c);
}

// (a^2 + gamma a+^2)|psi>, normalized.
inline Normalized local_superpose_ideal(const PureState& signal, complex gamma) {
  if (signal.layout().modes() != 1) fail(ErrorKind::invalid_argument, "local superposition acts on one mode");
  detail::require_headroom(signal, 2);
  PureState sub = apply_annihilation(apply_annihilation(signal, 0), 0);
  PureState add = apply_creation(apply_creation(signal, 0), 0);
  return normalize(sub + gamma * add);
}

// Phases of the NOON cascade: phi_k = 4 pi k / N, k = 1..N/2.
inline std::vector<double> cascade_phases(int n) {
  if (n < 2 || n % 2 != 0) fail(ErrorKind::invalid_argument, "cascade needs an even N >= 2");
  std::vector<double> phases;
  for (int k = 1; k <= n / 2; ++k) phases.push_back(4.0 * std::numbers::pi * k / n);
  return phases;
}

struct CascadeMode {
  bool physical = false;
  double s = 0.0;
  std::optional<double> eta;  // physical only; empty = exact coincidence herald
  int signal_headroom = 4;

  static CascadeMode ideal() { return {}; }
  static CascadeMode heralded(double s, std::optional<double> eta = std::nullopt) { return {true, s, eta, 4}; }
};

struct CascadeResult {
  MixedState state;
  double probability;               // product of stage probabilities (ideal: of stage norms squared)
  std::vector<double> stage_probabilities;
};

// prod_k (a+^2 + exp(i phi_k) b+^2)|0,0>. Ideal mode applies the operators
// exactly on a [cutoff, cutoff] layout; physical mode re-runs the heralded
// four-mode scheme once per factor, reusing fresh idlers each stage.
inline CascadeResult noon_cascade(int n, const CascadeMode& mode, std::optional<int> cutoff = std::nullopt,
                                  const SchemeOptions& opt = {}) {
  const auto phases = cascade_phases(n);
  const int cut = cutoff.value_or(mode.physical ? n + mode.signal_headroom : n);
  if (cut < n) fail(ErrorKind::cutoff_too_small, "cascade to N = " + std::to_string(n) + " needs cutoff >= N");
  const ModeLayout layout{cut, cut};

  CascadeResult result{MixedState::pure(vacuum_state(layout)), 1.0, {}};
  if (!mode.physical) {
    PureState psi = vacuum_state(layout);
    for (double phi : phases) {
      PureState a2 = apply_creation(apply_creation(psi, 0), 0);
      PureState b2 = apply_creation(apply_creation(psi, 1), 1);
      auto normed = normalize(a2 + std::polar(1.0, phi) * b2);
      const double w = normed.norm * normed.norm;
      result.stage_probabilities.push_back(w);
      result.probability *= w;
      psi = std::move(normed.state);
    }
    result.state = MixedState::pure(std::move(psi));
    return result;
  }

  const CoincidenceHerald herald = mode.eta ? CoincidenceHerald::on_off(*mode.eta) : CoincidenceHerald::exact();
  for (double phi : phases) {
    const SqueezeParam xi1{mode.s, 0.0};
    const SqueezeParam xi2{mode.s, pump_phase_for(phi)};
    const Circuit c = add2_circuit(layout, xi1, xi2, herald, opt);
    auto stage = herald_mixed(result.state, c);
    result.stage_probabilities.push_back(stage.probability);
    result.probability *= stage.probability;
    result.state = std::move(stage.state);
  }
  return result;
}

// (a + b)|psi>, normalized; the norm squared is returned alongside.
inline Normalized coherent_subtract(const PureState& state) {
  if (state.layout().modes() != 2) fail(ErrorKind::invalid_argument, "coherent subtraction acts on two modes");
  return normalize(apply_annihilation(state, 0) + apply_annihilation(state, 1));
}

// Imperfect single photons (1-p)|0><0| + p|1><1| on each input of a 50:50
// splitter: four branches B|0,0>, B|1,0>, B|0,1>, B|1,1>.
inline MixedState prepare_hom_input(const SourceModel& source, int cutoff = 2) {
  source.validate();
  if (cutoff < 2) fail(ErrorKind::cutoff_too_small, "HOM input needs cutoff >= 2");
  const ModeLayout layout{cutoff, cutoff};
  const double p = source.p, q = 1.0 - source.p;
  const struct {
    int n, m;
    double w;
  } inputs[] = {{0, 0, q * q}, {1, 0, p * q}, {0, 1, q * p}, {1, 1, p * p}};
  MixedState out;
  for (const auto& in : inputs) {
    if (in.w == 0.0) continue;
    out.push_back({in.w, apply_beam_splitter_5050(fock_basis_state(layout, {in.n, in.m}), 0, 1)});
  }
  return out;
}

}  // namespace homsim
