#pragma once

// Truncated multi-mode Fock space: layouts, dense pure states, branch
// ensembles, ladder operators and partial traces.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "homsim/errors.hpp"

namespace homsim {

using complex = std::complex<double>;
using Mode = std::size_t;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kZeroNorm = 1e-14;
inline constexpr std::size_t kDensityGuard = 4096;

// Per-mode inclusive photon-number cutoffs. Basis ordering is lexicographic
// in the occupations with mode 0 varying slowest.
class ModeLayout {
 public:
  ModeLayout() = default;

  explicit ModeLayout(std::vector<int> cutoffs) : cutoffs_(std::move(cutoffs)) {
    if (cutoffs_.empty()) fail(ErrorKind::invalid_argument, "layout needs at least one mode");
    strides_.assign(cutoffs_.size(), 1);
    std::size_t dim = 1;
    for (std::size_t i = cutoffs_.size(); i-- > 0;) {
      if (cutoffs_[i] < 1) fail(ErrorKind::invalid_argument, "mode cutoff must be >= 1");
      strides_[i] = dim;
      const auto levels = static_cast<std::size_t>(cutoffs_[i]) + 1;
      if (dim > std::numeric_limits<std::size_t>::max() / levels)
        fail(ErrorKind::invalid_argument, "layout dimension overflows the index space");
      dim *= levels;
    }
    dimension_ = dim;
  }

  ModeLayout(std::initializer_list<int> cutoffs) : ModeLayout(std::vector<int>(cutoffs)) {}

  std::size_t modes() const { return cutoffs_.size(); }
  int cutoff(Mode m) const { return cutoffs_.at(m); }
  int levels(Mode m) const { return cutoffs_.at(m) + 1; }
  const std::vector<int>& cutoffs() const { return cutoffs_; }
  std::size_t stride(Mode m) const { return strides_.at(m); }
  std::size_t dimension() const { return dimension_; }

  int occupation(std::size_t index, Mode m) const {
    return static_cast<int>((index / strides_[m]) % static_cast<std::size_t>(cutoffs_[m] + 1));
  }

  std::vector<int> occupations(std::size_t index) const {
    std::vector<int> occ(cutoffs_.size());
    for (Mode m = 0; m < cutoffs_.size(); ++m) occ[m] = occupation(index, m);
    return occ;
  }

  std::size_t index_of(std::span<const int> occupations) const {
    if (occupations.size() != cutoffs_.size())
      fail(ErrorKind::layout_mismatch, "occupation list length differs from mode count");
    std::size_t idx = 0;
    for (Mode m = 0; m < cutoffs_.size(); ++m) {
      if (occupations[m] < 0 || occupations[m] > cutoffs_[m])
        fail(ErrorKind::occupation_exceeds_cutoff,
             "mode " + std::to_string(m) + " occupation " + std::to_string(occupations[m]) +
                 " outside [0, " + std::to_string(cutoffs_[m]) + "]");
      idx += static_cast<std::size_t>(occupations[m]) * strides_[m];
    }
    return idx;
  }

  std::size_t index_of(std::initializer_list<int> occupations) const {
    return index_of(std::span<const int>(occupations.begin(), occupations.size()));
  }

  ModeLayout concat(const ModeLayout& other) const {
    std::vector<int> c = cutoffs_;
    c.insert(c.end(), other.cutoffs_.begin(), other.cutoffs_.end());
    return ModeLayout(std::move(c));
  }

  // Layout of the modes NOT listed in `removed`, in original order.
  ModeLayout without(std::span<const Mode> removed) const {
    std::vector<int> c;
    for (Mode m = 0; m < cutoffs_.size(); ++m)
      if (std::find(removed.begin(), removed.end(), m) == removed.end()) c.push_back(cutoffs_[m]);
    if (c.empty()) fail(ErrorKind::invalid_argument, "cannot remove every mode of a layout");
    return ModeLayout(std::move(c));
  }

  bool operator==(const ModeLayout& other) const { return cutoffs_ == other.cutoffs_; }

 private:
  std::vector<int> cutoffs_;
  std::vector<std::size_t> strides_;
  std::size_t dimension_ = 0;
};

inline void check_mode(const ModeLayout& layout, Mode m) {
  if (m >= layout.modes())
    fail(ErrorKind::invalid_argument, "mode index " + std::to_string(m) + " out of range");
}

inline void check_distinct_modes(const ModeLayout& layout, Mode m1, Mode m2) {
  check_mode(layout, m1);
  check_mode(layout, m2);
  if (m1 == m2) fail(ErrorKind::same_mode, "two-mode operation on mode " + std::to_string(m1));
}

// Dense amplitude vector over a ModeLayout.
//
// `leakage` is the squared norm discarded by truncation so far, in units of
// the current state's scale (normalize() rescales it along with the
// amplitudes). Operations add their own loss to the inherited figure.
class PureState {
 public:
  PureState() = default;
  explicit PureState(ModeLayout layout)
      : layout_(std::move(layout)), amplitudes_(layout_.dimension(), complex{0.0, 0.0}) {}
  PureState(ModeLayout layout, std::vector<complex> amplitudes, double leakage = 0.0)
      : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)), leakage_(leakage) {
    if (amplitudes_.size() != layout_.dimension())
      fail(ErrorKind::layout_mismatch, "amplitude count does not match layout dimension");
  }

  const ModeLayout& layout() const { return layout_; }
  std::size_t dimension() const { return amplitudes_.size(); }
  std::span<const complex> amplitudes() const { return amplitudes_; }
  std::span<complex> amplitudes() { return amplitudes_; }

  complex operator[](std::size_t i) const { return amplitudes_[i]; }
  complex& operator[](std::size_t i) { return amplitudes_[i]; }
  complex amplitude(std::initializer_list<int> occ) const { return amplitudes_[layout_.index_of(occ)]; }

  double leakage() const { return leakage_; }
  void add_leakage(double l) { leakage_ += l; }
  void set_leakage(double l) { leakage_ = l; }

  double norm_squared() const {
    double acc = 0.0;
    for (const auto& a : amplitudes_) acc += std::norm(a);
    return acc;
  }
  double norm() const { return std::sqrt(norm_squared()); }

  PureState& operator*=(complex c) {
    for (auto& a : amplitudes_) a *= c;
    leakage_ *= std::norm(c);
    return *this;
  }

  PureState& operator+=(const PureState& other) {
    if (!(layout_ == other.layout_)) fail(ErrorKind::layout_mismatch, "adding states on different layouts");
    for (std::size_t i = 0; i < amplitudes_.size(); ++i) amplitudes_[i] += other.amplitudes_[i];
    leakage_ += other.leakage_;
    return *this;
  }

  friend PureState operator*(complex c, PureState s) { return s *= c; }
  friend PureState operator+(PureState a, const PureState& b) { return a += b; }

  // Squared population with occupation above `cutoff - depth` on any mode.
  double top_population(int depth = 1) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < amplitudes_.size(); ++i) {
      for (Mode m = 0; m < layout_.modes(); ++m) {
        if (layout_.occupation(i, m) > layout_.cutoff(m) - depth) {
          acc += std::norm(amplitudes_[i]);
          break;
        }
      }
    }
    return acc;
  }

 private:
  ModeLayout layout_;
  std::vector<complex> amplitudes_;
  double leakage_ = 0.0;
};

struct Branch {
  double weight;
  PureState state;
};

// Weighted ensemble of normalized pure branches sharing one layout.
class MixedState {
 public:
  MixedState() = default;
  explicit MixedState(std::vector<Branch> branches) : branches_(std::move(branches)) {
    for (const auto& b : branches_) {
      if (b.weight < 0.0) fail(ErrorKind::invalid_argument, "negative branch weight");
      if (!(b.state.layout() == branches_.front().state.layout()))
        fail(ErrorKind::layout_mismatch, "mixed-state branches must share a layout");
    }
  }
  static MixedState pure(PureState s) { return MixedState({Branch{1.0, std::move(s)}}); }

  const std::vector<Branch>& branches() const { return branches_; }
  std::size_t size() const { return branches_.size(); }
  bool empty() const { return branches_.empty(); }
  const ModeLayout& layout() const { return branches_.front().state.layout(); }

  double total_weight() const {
    double w = 0.0;
    for (const auto& b : branches_) w += b.weight;
    return w;
  }

  double leakage() const {
    double l = 0.0;
    for (const auto& b : branches_) l += b.weight * b.state.leakage();
    return l;
  }

  double pruned_weight() const { return pruned_; }
  void set_pruned_weight(double w) { pruned_ = w; }

  void push_back(Branch b) {
    if (!branches_.empty() && !(b.state.layout() == layout()))
      fail(ErrorKind::layout_mismatch, "mixed-state branches must share a layout");
    branches_.push_back(std::move(b));
  }

 private:
  std::vector<Branch> branches_;
  double pruned_ = 0.0;
};

inline PureState vacuum_state(const ModeLayout& layout) {
  PureState s(layout);
  s[0] = 1.0;
  return s;
}

inline PureState fock_basis_state(const ModeLayout& layout, std::span<const int> occupations) {
  PureState s(layout);
  s[layout.index_of(occupations)] = 1.0;
  return s;
}

inline PureState fock_basis_state(const ModeLayout& layout, std::initializer_list<int> occupations) {
  return fock_basis_state(layout, std::span<const int>(occupations.begin(), occupations.size()));
}

namespace detail {

// Visit every basis index whose occupation of `mode` is zero; the caller
// walks the mode's ladder from there by adding multiples of its stride.
template <typename F>
void for_each_fiber(const ModeLayout& layout, Mode mode, F&& f) {
  const std::size_t stride = layout.stride(mode);
  const std::size_t block = stride * static_cast<std::size_t>(layout.levels(mode));
  for (std::size_t hi = 0; hi < layout.dimension(); hi += block)
    for (std::size_t lo = 0; lo < stride; ++lo) f(hi + lo);
}

// Same, for a pair of modes: every index with both occupations zero.
template <typename F>
void for_each_pair_fiber(const ModeLayout& layout, Mode m1, Mode m2, F&& f) {
  for (std::size_t i = 0; i < layout.dimension(); ++i)
    if (layout.occupation(i, m1) == 0 && layout.occupation(i, m2) == 0) f(i);
}

}  // namespace detail

// a-dagger on `mode`. Population pushed past the cutoff is dropped and added
// to the leakage figure; the result is not renormalized.
inline PureState apply_creation(const PureState& state, Mode mode) {
  const auto& layout = state.layout();
  check_mode(layout, mode);
  PureState out(layout);
  const std::size_t stride = layout.stride(mode);
  const int cut = layout.cutoff(mode);
  double lost = 0.0;
  detail::for_each_fiber(layout, mode, [&](std::size_t base) {
    for (int n = 0; n < cut; ++n)
      out[base + (n + 1) * stride] = std::sqrt(double(n + 1)) * state[base + n * stride];
    lost += double(cut + 1) * std::norm(state[base + cut * stride]);
  });
  out.set_leakage(state.leakage() + lost);
  return out;
}

inline PureState apply_annihilation(const PureState& state, Mode mode) {
  const auto& layout = state.layout();
  check_mode(layout, mode);
  PureState out(layout);
  const std::size_t stride = layout.stride(mode);
  const int cut = layout.cutoff(mode);
  detail::for_each_fiber(layout, mode, [&](std::size_t base) {
    for (int n = 1; n <= cut; ++n)
      out[base + (n - 1) * stride] = std::sqrt(double(n)) * state[base + n * stride];
  });
  out.set_leakage(state.leakage());
  return out;
}

// Number operator on `mode` (diagonal, never truncates).
inline PureState apply_number(const PureState& state, Mode mode) {
  const auto& layout = state.layout();
  check_mode(layout, mode);
  PureState out = state;
  for (std::size_t i = 0; i < out.dimension(); ++i) out[i] *= double(layout.occupation(i, mode));
  return out;
}

inline PureState tensor_product(const PureState& s1, const PureState& s2) {
  PureState out(s1.layout().concat(s2.layout()));
  const std::size_t d2 = s2.dimension();
  for (std::size_t i = 0; i < s1.dimension(); ++i) {
    if (s1[i] == complex{}) continue;
    for (std::size_t j = 0; j < d2; ++j) out[i * d2 + j] = s1[i] * s2[j];
  }
  out.set_leakage(s1.leakage() * s2.norm_squared() + s2.leakage() * s1.norm_squared());
  return out;
}

// <s1|s2>, conjugate-linear in the first argument.
inline complex inner_product(const PureState& s1, const PureState& s2) {
  if (!(s1.layout() == s2.layout())) fail(ErrorKind::layout_mismatch, "inner product of different layouts");
  complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < s1.dimension(); ++i) acc += std::conj(s1[i]) * s2[i];
  return acc;
}

struct Normalized {
  PureState state;
  double norm;
};

inline Normalized normalize(const PureState& state) {
  const double n = state.norm();
  if (!(n > kZeroNorm)) fail(ErrorKind::zero_norm_state, "state norm " + std::to_string(n) + " is numerically zero");
  PureState out = state;
  out *= complex{1.0 / n, 0.0};
  return {std::move(out), n};
}

namespace detail {

struct Bipartition {
  ModeLayout kept;
  std::vector<std::size_t> kept_index;    // full index -> kept-subsystem index
  std::vector<std::size_t> traced_index;  // full index -> traced-subsystem index
  std::size_t traced_dimension = 1;
};

inline Bipartition bipartition(const ModeLayout& layout, std::span<const Mode> keep) {
  std::vector<Mode> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  if (kept.empty() || std::adjacent_find(kept.begin(), kept.end()) != kept.end())
    fail(ErrorKind::invalid_argument, "kept modes must be a nonempty set");
  for (Mode m : kept) check_mode(layout, m);

  std::vector<int> kept_cut, traced_cut;
  std::vector<Mode> traced;
  for (Mode m = 0; m < layout.modes(); ++m) {
    if (std::binary_search(kept.begin(), kept.end(), m)) {
      kept_cut.push_back(layout.cutoff(m));
    } else {
      traced.push_back(m);
      traced_cut.push_back(layout.cutoff(m));
    }
  }
  Bipartition bp{ModeLayout(kept_cut), {}, {}, 1};
  std::vector<std::size_t> tstride(traced.size(), 1);
  for (std::size_t i = traced.size(); i-- > 0;) {
    tstride[i] = bp.traced_dimension;
    bp.traced_dimension *= static_cast<std::size_t>(traced_cut[i] + 1);
  }
  bp.kept_index.resize(layout.dimension());
  bp.traced_index.resize(layout.dimension());
  for (std::size_t idx = 0; idx < layout.dimension(); ++idx) {
    std::size_t k = 0;
    for (std::size_t j = 0; j < kept.size(); ++j) k += layout.occupation(idx, kept[j]) * bp.kept.stride(j);
    std::size_t t = 0;
    for (std::size_t j = 0; j < traced.size(); ++j) t += layout.occupation(idx, traced[j]) * tstride[j];
    bp.kept_index[idx] = k;
    bp.traced_index[idx] = t;
  }
  return bp;
}

inline Eigen::MatrixXcd coefficient_matrix(const PureState& state, const Bipartition& bp) {
  Eigen::MatrixXcd psi = Eigen::MatrixXcd::Zero(Eigen::Index(bp.kept.dimension()), Eigen::Index(bp.traced_dimension));
  for (std::size_t idx = 0; idx < state.dimension(); ++idx)
    psi(Eigen::Index(bp.kept_index[idx]), Eigen::Index(bp.traced_index[idx])) = state[idx];
  return psi;
}

}  // namespace detail

// Partial trace onto `keep`. Trace equals the input norm squared.
inline Eigen::MatrixXcd reduced_density(const PureState& state, std::span<const Mode> keep) {
  auto bp = detail::bipartition(state.layout(), keep);
  if (bp.kept.dimension() > kDensityGuard)
    fail(ErrorKind::dimension_guard_exceeded,
         "kept dimension " + std::to_string(bp.kept.dimension()) + " exceeds " + std::to_string(kDensityGuard));
  const Eigen::MatrixXcd psi = detail::coefficient_matrix(state, bp);
  return psi * psi.adjoint();
}

inline Eigen::MatrixXcd reduced_density(const MixedState& state, std::span<const Mode> keep) {
  if (state.empty()) fail(ErrorKind::invalid_argument, "empty mixed state");
  auto bp = detail::bipartition(state.layout(), keep);
  if (bp.kept.dimension() > kDensityGuard)
    fail(ErrorKind::dimension_guard_exceeded,
         "kept dimension " + std::to_string(bp.kept.dimension()) + " exceeds " + std::to_string(kDensityGuard));
  const auto d = Eigen::Index(bp.kept.dimension());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
  for (const auto& b : state.branches()) {
    const Eigen::MatrixXcd psi = detail::coefficient_matrix(b.state, bp);
    rho.noalias() += b.weight * (psi * psi.adjoint());
  }
  return rho;
}

inline Eigen::MatrixXcd reduced_density(const PureState& state, std::initializer_list<Mode> keep) {
  return reduced_density(state, std::span<const Mode>(keep.begin(), keep.size()));
}
inline Eigen::MatrixXcd reduced_density(const MixedState& state, std::initializer_list<Mode> keep) {
  return reduced_density(state, std::span<const Mode>(keep.begin(), keep.size()));
}

// Copy of `state` re-expressed on a layout with (elementwise) larger or
// equal cutoffs; amplitudes above a smaller target cutoff count as leakage.
inline PureState embed(const PureState& state, const ModeLayout& target) {
  const auto& src = state.layout();
  if (src.modes() != target.modes()) fail(ErrorKind::layout_mismatch, "embed needs equal mode counts");
  PureState out(target);
  double lost = 0.0;
  std::vector<int> occ(src.modes());
  for (std::size_t i = 0; i < state.dimension(); ++i) {
    if (state[i] == complex{}) continue;
    bool fits = true;
    for (Mode m = 0; m < src.modes(); ++m) {
      occ[m] = src.occupation(i, m);
      fits = fits && occ[m] <= target.cutoff(m);
    }
    if (fits)
      out[target.index_of(occ)] = state[i];
    else
      lost += std::norm(state[i]);
  }
  out.set_leakage(state.leakage() + lost);
  return out;
}

}  // namespace homsim
