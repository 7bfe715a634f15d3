#pragma once

// Beam splitters and non-degenerate parametric amplifiers (two-mode
// squeezers) on truncated Fock states.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "homsim/expm.hpp"
#include "homsim/fock.hpp"

namespace homsim {

// Complex transmissivity t and reflectivity r. Acting on the creation
// operators of (mode_1, mode_2):
//   a1+ -> t a1+ - r a2+
//   a2+ -> r* a1+ + t* a2+
// so |1,0> -> t|1,0> - r|0,1>. The balanced splitter used throughout is
// t = 1/sqrt2, r = -1/sqrt2, i.e. c+ -> (c+ + d+)/sqrt2, d+ -> (-c+ + d+)/sqrt2.
struct BeamSplitterParam {
  complex t{1.0, 0.0};
  complex r{0.0, 0.0};

  static BeamSplitterParam balanced() { return {complex{std::numbers::sqrt2 / 2, 0.0}, complex{-std::numbers::sqrt2 / 2, 0.0}}; }

  // Real transmissivity; reflectivity chosen real and nonnegative.
  static BeamSplitterParam from_transmissivity(double t) {
    return {complex{t, 0.0}, complex{std::sqrt(std::max(0.0, 1.0 - t * t)), 0.0}};
  }

  void validate() const {
    if (std::abs(std::norm(t) + std::norm(r) - 1.0) > 1e-12)
      fail(ErrorKind::non_unitary_param, "|t|^2 + |r|^2 must equal 1");
  }

  // Row i holds the image of a_i+ in the (a1+, a2+) basis.
  Eigen::Matrix2cd creation_map() const {
    Eigen::Matrix2cd m;
    m << t, -r, std::conj(r), std::conj(t);
    return m;
  }
};

// NDPA coupling xi = s * exp(i phi).
struct SqueezeParam {
  double s = 0.0;
  double phi = 0.0;

  complex xi() const { return std::polar(s, phi); }
  void validate() const {
    if (!(s >= 0.0)) fail(ErrorKind::invalid_argument, "squeezing strength must be >= 0");
  }
};

namespace detail {

// Photon-number blocks of a two-mode passive linear map. block(N)(k, n) is
// <k, N-k| U |n, N-n>. Columns are built by applying the mapped creation
// operators one photon at a time, which keeps each column a unit vector.
class PassiveBlocks {
 public:
  PassiveBlocks(const Eigen::Matrix2cd& creation_map, int max_total) : blocks_(max_total + 1) {
    blocks_[0] = Eigen::MatrixXcd::Ones(1, 1);
    for (int total = 1; total <= max_total; ++total) {
      const Eigen::MatrixXcd& prev = blocks_[total - 1];
      Eigen::MatrixXcd cur(total + 1, total + 1);
      for (int n = 0; n <= total; ++n) {
        // |n, total-n> = (a1+ or a2+)/sqrt(count) applied to a lower column.
        const bool from_first = n > 0;
        const int prev_col = from_first ? n - 1 : 0;
        const complex c1 = from_first ? creation_map(0, 0) : creation_map(1, 0);
        const complex c2 = from_first ? creation_map(0, 1) : creation_map(1, 1);
        const double denom = std::sqrt(double(from_first ? n : total - n));
        Eigen::VectorXcd col = Eigen::VectorXcd::Zero(total + 1);
        for (int k = 0; k < total; ++k) {
          const complex v = prev(k, prev_col);
          col(k + 1) += c1 * std::sqrt(double(k + 1)) * v;
          col(k) += c2 * std::sqrt(double(total - k)) * v;
        }
        cur.col(n) = col / denom;
      }
      blocks_[total] = std::move(cur);
    }
  }

  const Eigen::MatrixXcd& block(int total) const { return blocks_.at(total); }
  int max_total() const { return int(blocks_.size()) - 1; }

 private:
  std::vector<Eigen::MatrixXcd> blocks_;
};

inline PureState apply_passive(const PureState& state, Mode m1, Mode m2, const Eigen::Matrix2cd& creation_map) {
  const auto& layout = state.layout();
  check_distinct_modes(layout, m1, m2);
  const int c1 = layout.cutoff(m1), c2 = layout.cutoff(m2);
  const std::size_t s1 = layout.stride(m1), s2 = layout.stride(m2);
  const PassiveBlocks blocks(creation_map, c1 + c2);

  PureState out(layout);
  double lost = 0.0;
  Eigen::VectorXcd in_vec, out_vec;
  for_each_pair_fiber(layout, m1, m2, [&](std::size_t base) {
    for (int total = 0; total <= c1 + c2; ++total) {
      const int lo = std::max(0, total - c2), hi = std::min(total, c1);
      in_vec = Eigen::VectorXcd::Zero(total + 1);
      bool any = false;
      for (int n = lo; n <= hi; ++n) {
        in_vec(n) = state[base + n * s1 + (total - n) * s2];
        any = any || in_vec(n) != complex{};
      }
      if (!any) continue;
      out_vec.noalias() = blocks.block(total) * in_vec;
      for (int k = 0; k <= total; ++k) {
        if (k >= lo && k <= hi)
          out[base + k * s1 + (total - k) * s2] = out_vec(k);
        else
          lost += std::norm(out_vec(k));
      }
    }
  });
  out.set_leakage(state.leakage() + lost);
  return out;
}

}  // namespace detail

inline PureState apply_beam_splitter(const PureState& state, Mode mode_1, Mode mode_2, const BeamSplitterParam& bs) {
  bs.validate();
  return detail::apply_passive(state, mode_1, mode_2, bs.creation_map());
}

// 50:50 splitter with c+ -> (c+ + d+)/sqrt2, d+ -> (-c+ + d+)/sqrt2, so that
// |1,1> -> (|0,2> - |2,0>)/sqrt2 (Hong-Ou-Mandel bunching, no |1,1> term).
inline PureState apply_beam_splitter_5050(const PureState& state, Mode mode_c, Mode mode_d) {
  return apply_beam_splitter(state, mode_c, mode_d, BeamSplitterParam::balanced());
}

// Phase shift exp(i theta n) on one mode.
inline PureState apply_phase_shift(const PureState& state, Mode mode, double theta) {
  check_mode(state.layout(), mode);
  PureState out = state;
  for (std::size_t i = 0; i < out.dimension(); ++i)
    out[i] *= std::polar(1.0, theta * state.layout().occupation(i, mode));
  return out;
}

// exp(-xi a+ c+ + xi* a c) on (signal, idler), exponentiated per block of
// fixed n_signal - n_idler on a padded ladder and projected back onto the
// layout. Whatever lands above either cutoff is reported as leakage.
class TwoModeSqueezer {
 public:
  static constexpr int kDefaultPadding = 16;

  TwoModeSqueezer(int signal_cutoff, int idler_cutoff, SqueezeParam xi, int padding = kDefaultPadding)
      : signal_cutoff_(signal_cutoff), idler_cutoff_(idler_cutoff), xi_(xi), padding_(padding) {
    xi.validate();
    const complex z = xi.xi();
    const int sa = signal_cutoff + padding, sc = idler_cutoff + padding;
    for (int diff = -idler_cutoff; diff <= signal_cutoff; ++diff) {
      Block blk;
      blk.diff = diff;
      blk.signal0 = std::max(diff, 0);
      blk.idler0 = std::max(-diff, 0);
      const int len = std::min(sa - blk.signal0, sc - blk.idler0) + 1;
      Eigen::MatrixXcd gen = Eigen::MatrixXcd::Zero(len, len);
      for (int j = 0; j + 1 < len; ++j) {
        const double amp = std::sqrt(double(blk.signal0 + j + 1) * double(blk.idler0 + j + 1));
        gen(j + 1, j) = -z * amp;
        gen(j, j + 1) = std::conj(z) * amp;
      }
      blk.unitary = expm(gen);
      blocks_.push_back(std::move(blk));
    }
  }

  PureState apply(const PureState& state, Mode signal, Mode idler) const {
    const auto& layout = state.layout();
    check_distinct_modes(layout, signal, idler);
    if (layout.cutoff(signal) != signal_cutoff_ || layout.cutoff(idler) != idler_cutoff_)
      fail(ErrorKind::layout_mismatch, "squeezer built for different cutoffs");
    const std::size_t ss = layout.stride(signal), si = layout.stride(idler);

    PureState out(layout);
    double lost = 0.0;
    Eigen::VectorXcd in_vec, out_vec;
    detail::for_each_pair_fiber(layout, signal, idler, [&](std::size_t base) {
      for (const auto& blk : blocks_) {
        const int len = int(blk.unitary.rows());
        const int inside = std::min(signal_cutoff_ - blk.signal0, idler_cutoff_ - blk.idler0) + 1;
        in_vec = Eigen::VectorXcd::Zero(len);
        bool any = false;
        for (int j = 0; j < inside; ++j) {
          in_vec(j) = state[base + (blk.signal0 + j) * ss + (blk.idler0 + j) * si];
          any = any || in_vec(j) != complex{};
        }
        if (!any) continue;
        out_vec.noalias() = blk.unitary.leftCols(inside) * in_vec.head(inside);
        for (int j = 0; j < len; ++j) {
          if (j < inside)
            out[base + (blk.signal0 + j) * ss + (blk.idler0 + j) * si] = out_vec(j);
          else
            lost += std::norm(out_vec(j));
        }
      }
    });
    out.set_leakage(state.leakage() + lost);
    return out;
  }

  const SqueezeParam& param() const { return xi_; }
  int padding() const { return padding_; }

 private:
  struct Block {
    int diff = 0;
    int signal0 = 0;
    int idler0 = 0;
    Eigen::MatrixXcd unitary;
  };
  int signal_cutoff_;
  int idler_cutoff_;
  SqueezeParam xi_;
  int padding_;
  std::vector<Block> blocks_;
};

inline PureState apply_two_mode_squeezer(const PureState& state, Mode mode_signal, Mode mode_idler, const SqueezeParam& xi,
                                         int padding = TwoModeSqueezer::kDefaultPadding) {
  check_distinct_modes(state.layout(), mode_signal, mode_idler);
  const TwoModeSqueezer sq(state.layout().cutoff(mode_signal), state.layout().cutoff(mode_idler), xi, padding);
  return sq.apply(state, mode_signal, mode_idler);
}

// Same squeezer through the normal-ordered disentangled product
//   exp(tau K+) exp(-(n_a + n_c + 1) ln cosh s) exp(-tau* K-),
// K+ = a+ c+, K- = a c, tau = -exp(i phi) tanh s. The lowering and diagonal
// factors never leave the layout and the raising series only climbs, so the
// result is the exact infinite-space output restricted to the layout.
inline PureState apply_squeezer_factored(const PureState& state, Mode mode_signal, Mode mode_idler, const SqueezeParam& xi) {
  const auto& layout = state.layout();
  check_distinct_modes(layout, mode_signal, mode_idler);
  xi.validate();
  const int ca = layout.cutoff(mode_signal), cc = layout.cutoff(mode_idler);
  const std::size_t sa = layout.stride(mode_signal), sc = layout.stride(mode_idler);
  const double th = std::tanh(xi.s);
  const complex tau = -std::polar(th, xi.phi);
  const complex lower_coef = -std::conj(tau);
  const double log_cosh = std::log(std::cosh(xi.s));

  PureState out(layout);
  double kept = 0.0;
  std::vector<complex> v, term, acc;
  detail::for_each_pair_fiber(layout, mode_signal, mode_idler, [&](std::size_t base) {
    for (int diff = -cc; diff <= ca; ++diff) {
      const int a0 = std::max(diff, 0), c0 = std::max(-diff, 0);
      const int len = std::min(ca - a0, cc - c0) + 1;
      v.assign(len, complex{});
      bool any = false;
      for (int j = 0; j < len; ++j) {
        v[j] = state[base + (a0 + j) * sa + (c0 + j) * sc];
        any = any || v[j] != complex{};
      }
      if (!any) continue;
      auto pair_amp = [&](int j) { return std::sqrt(double(a0 + j + 1) * double(c0 + j + 1)); };

      // exp(lower_coef * a c): (a c) maps ladder step j+1 -> j.
      acc = v;
      term = v;
      for (int k = 1; k < len; ++k) {
        std::vector<complex> next(len, complex{});
        for (int j = 0; j + 1 < len; ++j) next[j] = lower_coef / double(k) * pair_amp(j) * term[j + 1];
        term.swap(next);
        for (int j = 0; j < len; ++j) acc[j] += term[j];
      }
      for (int j = 0; j < len; ++j) acc[j] *= std::exp(-double(a0 + c0 + 2 * j + 1) * log_cosh);

      // exp(tau a+ c+): truncated raising series; terms past the layout are dropped.
      v = acc;
      term = acc;
      for (int k = 1; k < len; ++k) {
        std::vector<complex> next(len, complex{});
        for (int j = 0; j + 1 < len; ++j) next[j + 1] = tau / double(k) * pair_amp(j) * term[j];
        term.swap(next);
        for (int j = 0; j < len; ++j) v[j] += term[j];
      }
      for (int j = 0; j < len; ++j) out[base + (a0 + j) * sa + (c0 + j) * sc] = v[j];
    }
  });
  kept = out.norm_squared();
  out.set_leakage(state.leakage() + std::max(0.0, state.norm_squared() - kept));
  return out;
}

// sqrt(1 - l^2) sum_n l^n |n, n>, l = tanh s, truncated and renormalized.
inline PureState tmss_state(double s, const ModeLayout& layout) {
  if (layout.modes() != 2) fail(ErrorKind::invalid_argument, "two-mode squeezed vacuum needs a 2-mode layout");
  if (!(s >= 0.0)) fail(ErrorKind::invalid_argument, "squeezing strength must be >= 0");
  const double lambda = std::tanh(s);
  const int nmax = std::min(layout.cutoff(0), layout.cutoff(1));
  PureState out(layout);
  double kept = 0.0;
  double amp = std::sqrt(1.0 - lambda * lambda);
  for (int n = 0; n <= nmax; ++n) {
    out[layout.index_of({n, n})] = amp;
    kept += amp * amp;
    amp *= lambda;
  }
  auto normed = normalize(out);
  normed.state.set_leakage(std::max(0.0, 1.0 - kept) / kept);
  return std::move(normed.state);
}

}  // namespace homsim
