#pragma once

// Detector models and heralding: exact Fock projections, inefficient on-off
// POVMs, and the conditional (post-selected) states they produce.

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "homsim/fock.hpp"

namespace homsim {

inline constexpr double kPruneWeight = 1e-12;

enum class DetectorKind { ideal_spd, on_off };

struct DetectorModel {
  double eta = 1.0;
  DetectorKind kind = DetectorKind::on_off;

  static DetectorModel ideal() { return {1.0, DetectorKind::ideal_spd}; }
  static DetectorModel on_off(double eta) { return {eta, DetectorKind::on_off}; }

  void validate() const {
    if (!(eta >= 0.0 && eta <= 1.0)) fail(ErrorKind::invalid_argument, "detector efficiency must lie in [0, 1]");
  }
};

// Pi_0 = sum_n (1 - eta)^n |n><n|.
inline double povm_no_click_weight(int n, double eta) {
  if (n < 0) fail(ErrorKind::invalid_argument, "photon number must be >= 0");
  if (!(eta >= 0.0 && eta <= 1.0)) fail(ErrorKind::invalid_argument, "detector efficiency must lie in [0, 1]");
  return std::pow(1.0 - eta, n);
}

inline double povm_click_weight(int n, double eta) { return 1.0 - povm_no_click_weight(n, eta); }

struct ExactFock {
  int n = 0;
};
struct Click {
  DetectorModel detector;
};
struct NoClick {
  DetectorModel detector;
};
using HeraldOutcome = std::variant<ExactFock, Click, NoClick>;

// Diagonal weight <n| E |n> of the measurement element for one outcome. An
// ideal_spd "click" is the single-photon projector; its "no click" is vacuum.
inline double outcome_weight(const HeraldOutcome& outcome, int n) {
  return std::visit(
      [n](const auto& o) -> double {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, ExactFock>) {
          return n == o.n ? 1.0 : 0.0;
        } else if constexpr (std::is_same_v<T, Click>) {
          if (o.detector.kind == DetectorKind::ideal_spd) return n == 1 ? 1.0 : 0.0;
          return povm_click_weight(n, o.detector.eta);
        } else {
          if (o.detector.kind == DetectorKind::ideal_spd) return n == 0 ? 1.0 : 0.0;
          return povm_no_click_weight(n, o.detector.eta);
        }
      },
      outcome);
}

struct HeraldEntry {
  Mode mode;
  HeraldOutcome outcome;
};

class HeraldSpec {
 public:
  HeraldSpec() = default;
  HeraldSpec(std::initializer_list<HeraldEntry> entries) : entries_(entries) {}
  explicit HeraldSpec(std::vector<HeraldEntry> entries) : entries_(std::move(entries)) {}

  const std::vector<HeraldEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  HeraldSpec& add(Mode mode, HeraldOutcome outcome) {
    entries_.push_back({mode, outcome});
    return *this;
  }

  std::vector<Mode> modes() const {
    std::vector<Mode> m;
    for (const auto& e : entries_) m.push_back(e.mode);
    return m;
  }

  void validate(const ModeLayout& layout) const {
    auto m = modes();
    if (m.empty()) fail(ErrorKind::invalid_argument, "herald must name at least one mode");
    for (Mode x : m) check_mode(layout, x);
    std::sort(m.begin(), m.end());
    if (std::adjacent_find(m.begin(), m.end()) != m.end())
      fail(ErrorKind::invalid_argument, "herald modes must be distinct");
    if (m.size() >= layout.modes()) fail(ErrorKind::invalid_argument, "herald must leave at least one mode unmeasured");
    for (const auto& e : entries_) {
      if (const auto* c = std::get_if<Click>(&e.outcome)) c->detector.validate();
      if (const auto* c = std::get_if<NoClick>(&e.outcome)) c->detector.validate();
      if (const auto* f = std::get_if<ExactFock>(&e.outcome); f && (f->n < 0 || f->n > layout.cutoff(e.mode)))
        fail(ErrorKind::occupation_exceeds_cutoff, "heralded Fock number outside the mode cutoff");
    }
  }

 private:
  std::vector<HeraldEntry> entries_;
};

// Coincident single-photon detection on two idlers.
inline HeraldSpec coincidence_exact(Mode c, Mode d) { return {{c, ExactFock{1}}, {d, ExactFock{1}}}; }
inline HeraldSpec coincidence_on_off(Mode c, Mode d, double eta) {
  return {{c, Click{DetectorModel::on_off(eta)}}, {d, Click{DetectorModel::on_off(eta)}}};
}

struct HeraldResult {
  PureState state;     // normalized, on the unmeasured modes
  double probability;  // squared norm of the projection
};

struct MixedHeraldResult {
  MixedState state;
  double probability;
};

namespace detail {

// Splits a layout into measured and unmeasured modes and precomputes, for
// every unmeasured-mode index, the matching base index in the full layout.
struct Contraction {
  ModeLayout remaining;
  std::vector<Mode> measured;
  std::vector<std::size_t> base;  // remaining index -> full index with measured occupations zero

  Contraction(const ModeLayout& layout, std::vector<Mode> measured_modes)
      : remaining(layout.without(measured_modes)), measured(std::move(measured_modes)) {
    std::vector<Mode> kept;
    for (Mode m = 0; m < layout.modes(); ++m)
      if (std::find(measured.begin(), measured.end(), m) == measured.end()) kept.push_back(m);
    base.resize(remaining.dimension());
    for (std::size_t r = 0; r < remaining.dimension(); ++r) {
      std::size_t idx = 0;
      for (std::size_t j = 0; j < kept.size(); ++j) idx += remaining.occupation(r, j) * layout.stride(kept[j]);
      base[r] = idx;
    }
  }

  PureState project(const PureState& state, std::size_t offset) const {
    PureState out(remaining);
    for (std::size_t r = 0; r < base.size(); ++r) out[r] = state[base[r] + offset];
    return out;
  }
};

}  // namespace detail

// Contracts the listed modes against Fock bras <n|.
inline HeraldResult herald_exact(const PureState& state, const std::vector<std::pair<Mode, int>>& outcomes) {
  HeraldSpec spec;
  for (const auto& [m, n] : outcomes) spec.add(m, ExactFock{n});
  spec.validate(state.layout());
  const auto& layout = state.layout();
  detail::Contraction con(layout, spec.modes());
  std::size_t offset = 0;
  for (const auto& [m, n] : outcomes) offset += std::size_t(n) * layout.stride(m);
  PureState projected = con.project(state, offset);
  const double p = projected.norm_squared();
  if (!(p >= kZeroNorm))
    fail(ErrorKind::zero_norm_state, "herald probability " + std::to_string(p) + " is numerically zero");
  projected *= complex{1.0 / std::sqrt(p), 0.0};
  projected.set_leakage(state.leakage() / p);
  return {std::move(projected), p};
}

// Conditional state for a diagonal (in Fock space) measurement element on the
// heralded modes, as an explicit sum over their Fock outcomes: outcome tuple
// (n_1..n_k) contributes a branch with weight prod_i w_i(n_i) |<n|psi>|^2.
// Posterior branches below kPruneWeight are dropped and reported.
inline MixedHeraldResult herald_on_off(const PureState& state, const HeraldSpec& spec) {
  const auto& layout = state.layout();
  spec.validate(layout);
  detail::Contraction con(layout, spec.modes());
  const auto& entries = spec.entries();

  struct Raw {
    double weight;
    PureState state;
  };
  std::vector<Raw> raw;
  double total = 0.0;
  std::vector<int> occ(entries.size(), 0);
  while (true) {
    double w = 1.0;
    std::size_t offset = 0;
    for (std::size_t i = 0; i < entries.size() && w > 0.0; ++i) {
      w *= outcome_weight(entries[i].outcome, occ[i]);
      offset += std::size_t(occ[i]) * layout.stride(entries[i].mode);
    }
    if (w > 0.0) {
      PureState proj = con.project(state, offset);
      const double p = proj.norm_squared();
      if (p > 0.0) {
        total += w * p;
        proj *= complex{1.0 / std::sqrt(p), 0.0};
        raw.push_back({w * p, std::move(proj)});
      }
    }
    std::size_t i = 0;
    for (; i < entries.size(); ++i) {
      if (++occ[i] <= layout.cutoff(entries[i].mode)) break;
      occ[i] = 0;
    }
    if (i == entries.size()) break;
  }
  if (!(total >= kZeroNorm))
    fail(ErrorKind::zero_norm_state, "herald probability " + std::to_string(total) + " is numerically zero");

  MixedState out;
  double pruned = 0.0;
  const double leak = state.leakage() / total;
  for (auto& r : raw) {
    const double posterior = r.weight / total;
    if (posterior < kPruneWeight) {
      pruned += posterior;
      continue;
    }
    r.state.set_leakage(leak);
    out.push_back({posterior, std::move(r.state)});
  }
  if (pruned > 0.0) {
    std::vector<Branch> kept = out.branches();
    for (auto& b : kept) b.weight /= (1.0 - pruned);
    out = MixedState(std::move(kept));
  }
  out.set_pruned_weight(pruned);
  return {std::move(out), total};
}

}  // namespace homsim
