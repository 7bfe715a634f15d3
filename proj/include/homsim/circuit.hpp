#pragma once

// Heralded linear-optics circuits: an input register, an ordered gate list
// and a herald on the ancilla/idler modes.

#include <string>
#include <variant>
#include <vector>

#include "homsim/detectors.hpp"
#include "homsim/optics.hpp"

namespace homsim {

struct BeamSplitterGate {
  Mode mode_1;
  Mode mode_2;
  BeamSplitterParam param = BeamSplitterParam::balanced();
};

struct SqueezerGate {
  Mode signal;
  Mode idler;
  SqueezeParam param;
};

using Gate = std::variant<BeamSplitterGate, SqueezerGate>;

// The input state occupies the leading `input_modes` modes of `layout`; the
// remaining modes start in vacuum. Gates apply in list order.
struct Circuit {
  ModeLayout layout;
  std::size_t input_modes = 0;
  std::vector<Gate> gates;
  HeraldSpec herald;

  void validate() const {
    if (input_modes == 0 || input_modes >= layout.modes())
      fail(ErrorKind::invalid_argument, "circuit needs input modes and at least one ancilla");
    for (const auto& g : gates) {
      std::visit(
          [&](const auto& gate) {
            using T = std::decay_t<decltype(gate)>;
            if constexpr (std::is_same_v<T, BeamSplitterGate>) {
              check_distinct_modes(layout, gate.mode_1, gate.mode_2);
              gate.param.validate();
            } else {
              check_distinct_modes(layout, gate.signal, gate.idler);
              gate.param.validate();
            }
          },
          g);
    }
    herald.validate(layout);
    for (Mode m : herald.modes())
      if (m < input_modes) fail(ErrorKind::invalid_argument, "herald may only measure ancilla modes");
  }

  ModeLayout input_layout() const {
    return ModeLayout(std::vector<int>(layout.cutoffs().begin(), layout.cutoffs().begin() + long(input_modes)));
  }

  ModeLayout ancilla_layout() const {
    return ModeLayout(std::vector<int>(layout.cutoffs().begin() + long(input_modes), layout.cutoffs().end()));
  }

  // Unitary part only: embeds `input` next to vacuum ancillas and runs the gates.
  PureState evolve(const PureState& input) const {
    if (!(input.layout() == input_layout())) fail(ErrorKind::layout_mismatch, "circuit input layout mismatch");
    PureState state = tensor_product(input, vacuum_state(ancilla_layout()));
    for (const auto& g : gates) {
      state = std::visit(
          [&](const auto& gate) -> PureState {
            using T = std::decay_t<decltype(gate)>;
            if constexpr (std::is_same_v<T, BeamSplitterGate>)
              return apply_beam_splitter(state, gate.mode_1, gate.mode_2, gate.param);
            else
              return apply_two_mode_squeezer(state, gate.signal, gate.idler, gate.param);
          },
          g);
    }
    return state;
  }
};

// Combines per-branch heralds of already evolved states: the total probability
// is the prior average of branch probabilities and output weights are the
// posteriors. Zero-probability branches drop out; posteriors below
// kPruneWeight are discarded and the rest renormalized.
inline MixedHeraldResult herald_evolved(const std::vector<Branch>& evolved, const HeraldSpec& spec) {
  if (evolved.empty()) fail(ErrorKind::invalid_argument, "empty input ensemble");
  std::vector<std::pair<double, MixedHeraldResult>> parts;
  double total = 0.0;
  for (const auto& b : evolved) {
    if (b.weight == 0.0) continue;
    try {
      auto r = herald_on_off(b.state, spec);
      total += b.weight * r.probability;
      parts.emplace_back(b.weight, std::move(r));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::zero_norm_state) throw;
    }
  }
  if (!(total >= kZeroNorm))
    fail(ErrorKind::zero_norm_state, "mixed herald probability " + std::to_string(total) + " is numerically zero");

  std::vector<Branch> kept;
  double pruned = 0.0;
  for (auto& [prior, part] : parts) {
    const double scale = prior * part.probability / total;
    pruned += scale * part.state.pruned_weight();
    for (const auto& br : part.state.branches()) {
      const double w = scale * br.weight;
      if (w < kPruneWeight) {
        pruned += w;
        continue;
      }
      kept.push_back({w, br.state});
    }
  }
  double sum = 0.0;
  for (const auto& b : kept) sum += b.weight;
  for (auto& b : kept) b.weight /= sum;
  MixedState result(std::move(kept));
  result.set_pruned_weight(pruned);
  return {std::move(result), total};
}

inline std::vector<Branch> evolve_all(const MixedState& input, const Circuit& circuit) {
  std::vector<Branch> out;
  for (const auto& b : input.branches())
    if (b.weight != 0.0) out.push_back({b.weight, circuit.evolve(b.state)});
  return out;
}

inline MixedHeraldResult herald_mixed(const MixedState& input, const HeraldSpec& spec, const Circuit& circuit) {
  if (input.empty()) fail(ErrorKind::invalid_argument, "empty input ensemble");
  return herald_evolved(evolve_all(input, circuit), spec);
}

inline MixedHeraldResult herald_mixed(const MixedState& input, const Circuit& circuit) {
  return herald_mixed(input, circuit.herald, circuit);
}

}  // namespace homsim
