#include <gtest/gtest.h>

#include "homsim/expm.hpp"
#include "homsim/optics.hpp"
#include "support.hpp"

using namespace homsim;
using homsim::testing::random_state;

namespace {

double fid(const PureState& a, const PureState& b) { return std::norm(inner_product(a, b)) / (a.norm_squared() * b.norm_squared()); }

// Largest |amplitude| on basis elements whose (m1, m2) quantity differs from
// the input's single value.
template <class F>
double off_block(const PureState& out, F key, int expected) {
  double worst = 0.0;
  for (std::size_t i = 0; i < out.dimension(); ++i)
    if (key(i) != expected) worst = std::max(worst, std::abs(out[i]));
  return worst;
}

}  // namespace

TEST(Expm, MatchesEigenReference) {
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  for (int n : {1, 3, 8, 20}) {
    for (double scale : {1e-3, 0.5, 4.0, 40.0}) {
      Eigen::MatrixXcd m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = scale * complex(g(rng), g(rng)) / double(n);
      const Eigen::MatrixXcd ref = m.exp();
      EXPECT_LT((homsim::expm(m) - ref).norm() / ref.norm(), 1e-11) << "n=" << n << " scale=" << scale;
    }
  }
}

TEST(BeamSplitter, HongOuMandel) {
  const ModeLayout l{2, 2};
  const auto out = apply_beam_splitter_5050(fock_basis_state(l, {1, 1}), 0, 1);
  EXPECT_EQ(out.amplitude({1, 1}), complex(0.0));
  EXPECT_NEAR(fid(out, homsim::testing::noon(l, 2, -1.0)), 1.0, 1e-15);
  // relative sign is fixed: amplitudes on |2,0> and |0,2> are opposite
  EXPECT_NEAR((out.amplitude({2, 0}) + out.amplitude({0, 2})).real(), 0.0, 1e-15);
}

TEST(BeamSplitter, SinglePhotonAndVacuum) {
  const ModeLayout l{2, 2};
  const auto one = apply_beam_splitter_5050(fock_basis_state(l, {1, 0}), 0, 1);
  EXPECT_NEAR(one.amplitude({1, 0}).real(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(one.amplitude({0, 1}).real(), std::sqrt(0.5), 1e-15);
  const auto vac = apply_beam_splitter_5050(vacuum_state(l), 0, 1);
  EXPECT_EQ(vac.amplitude({0, 0}), complex(1.0));
}

TEST(BeamSplitter, GeneralParameters) {
  const ModeLayout l{3, 3, 1};
  const auto psi = random_state(l, 3);
  const auto same = apply_beam_splitter(psi, 0, 1, {1.0, 0.0});
  for (std::size_t i = 0; i < psi.dimension(); ++i) EXPECT_LT(std::abs(same[i] - psi[i]), 1e-15);

  const BeamSplitterParam bs{complex(0.6, 0.0), complex(0.0, 0.8)};
  const auto one = apply_beam_splitter(fock_basis_state(ModeLayout{2, 2}, {1, 0}), 0, 1, bs);
  EXPECT_LT(std::abs(one.amplitude({1, 0}) - bs.t), 1e-15);
  EXPECT_LT(std::abs(one.amplitude({0, 1}) + bs.r), 1e-15);

  const auto bal = apply_beam_splitter(psi, 1, 0, BeamSplitterParam::balanced());
  const auto ref = apply_beam_splitter_5050(psi, 1, 0);
  for (std::size_t i = 0; i < psi.dimension(); ++i) EXPECT_LT(std::abs(bal[i] - ref[i]), 1e-15);
}

TEST(BeamSplitter, Errors) {
  const auto v = vacuum_state(ModeLayout{1, 1});
  EXPECT_THROW(apply_beam_splitter(v, 0, 1, {0.9, 0.9}), Error);
  try {
    apply_beam_splitter_5050(v, 1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::same_mode);
  }
}

TEST(BeamSplitter, ConservesPhotonNumberPerBlock) {
  const ModeLayout l{4, 4, 2};
  const BeamSplitterParam bs{std::polar(0.8, 0.3), std::polar(0.6, -1.1)};
  for (int n = 0; n <= 4; ++n)
    for (int m = 0; m <= 4; ++m) {
      const auto out = apply_beam_splitter(fock_basis_state(l, {n, m, 1}), 0, 1, bs);
      EXPECT_LT(off_block(out, [&](std::size_t i) { return l.occupation(i, 0) + l.occupation(i, 1); }, n + m), 1e-15);
      EXPECT_LT(off_block(out, [&](std::size_t i) { return l.occupation(i, 2); }, 1), 1e-15);
      EXPECT_NEAR(out.norm_squared() + out.leakage(), 1.0, 1e-12);
    }
}

TEST(BeamSplitter, MatchesMatrixExponentialOracle) {
  const int c = 5;
  const ModeLayout l{c, c};
  const Eigen::MatrixXcd u = homsim::testing::balanced_splitter_matrix(c);
  for (unsigned seed = 1; seed <= 3; ++seed) {
    // keep total photon number <= c so the dense oracle is exact
    PureState psi = random_state(l, seed);
    for (std::size_t i = 0; i < psi.dimension(); ++i)
      if (l.occupation(i, 0) + l.occupation(i, 1) > c) psi[i] = 0.0;
    psi = normalize(psi).state;
    const Eigen::VectorXcd ref = u * homsim::testing::to_vector(psi);
    const auto out = apply_beam_splitter_5050(psi, 0, 1);
    EXPECT_LT((homsim::testing::to_vector(out) - ref).norm(), 1e-12);
    EXPECT_LT(out.leakage(), 1e-24);
  }
}

TEST(BeamSplitter, UnitarityAndLeakageBound) {
  const ModeLayout l{3, 2, 2};
  for (unsigned seed = 1; seed <= 6; ++seed) {
    const auto psi = random_state(l, seed);
    const auto out = apply_beam_splitter(psi, 0, 2, {std::polar(0.3, 0.2), std::sqrt(1 - 0.09)});
    EXPECT_LE(std::abs(out.norm_squared() - psi.norm_squared()), out.leakage() + 1e-12);
  }
}

TEST(PhaseShift, MultipliesByNumberPhase) {
  const ModeLayout l{3, 3};
  const auto out = apply_phase_shift(fock_basis_state(l, {0, 3}), 1, 0.25);
  EXPECT_LT(std::abs(out.amplitude({0, 3}) - std::polar(1.0, 0.75)), 1e-15);
}

TEST(Squeezer, VacuumSeriesAnalytic) {
  const ModeLayout l{12, 12};
  for (const SqueezeParam xi : {SqueezeParam{0.2, 0.0}, SqueezeParam{0.35, 1.3}, SqueezeParam{0.05, -2.0}}) {
    const auto out = apply_two_mode_squeezer(vacuum_state(l), 0, 1, xi);
    const double th = std::tanh(xi.s), ch = std::cosh(xi.s);
    for (int n = 0; n <= 12; ++n) {
      const complex expect = std::pow(-std::polar(th, xi.phi), n) / ch;
      EXPECT_LT(std::abs(out.amplitude({n, n}) - expect), 1e-12) << "n=" << n;
    }
  }
}

TEST(Squeezer, MeanPhotonNumber) {
  const ModeLayout l{12, 12};
  const auto out = apply_two_mode_squeezer(vacuum_state(l), 0, 1, {0.2, 0.0});
  EXPECT_NEAR(inner_product(out, apply_number(out, 0)).real(), std::pow(std::sinh(0.2), 2), 1e-8);
}

TEST(Squeezer, ZeroStrengthIsIdentity) {
  const ModeLayout l{3, 3, 2};
  const auto psi = random_state(l, 9);
  const auto a = apply_two_mode_squeezer(psi, 0, 2, {0.0, 0.7});
  const auto b = apply_squeezer_factored(psi, 0, 2, {0.0, 0.7});
  for (std::size_t i = 0; i < psi.dimension(); ++i) {
    EXPECT_LT(std::abs(a[i] - psi[i]), 1e-15);
    EXPECT_LT(std::abs(b[i] - psi[i]), 1e-15);
  }
}

TEST(Squeezer, PadeMatchesFactoredOracle) {
  const ModeLayout l{12, 12};
  const auto vac_a = apply_two_mode_squeezer(vacuum_state(l), 0, 1, {0.3, 0.4});
  const auto vac_b = apply_squeezer_factored(vacuum_state(l), 0, 1, {0.3, 0.4});
  for (std::size_t i = 0; i < l.dimension(); ++i) EXPECT_LT(std::abs(vac_a[i] - vac_b[i]), 1e-10);

  const auto one = fock_basis_state(l, {1, 0});
  const auto a = apply_two_mode_squeezer(one, 0, 1, {0.1, 0.0});
  const auto b = apply_squeezer_factored(one, 0, 1, {0.1, 0.0});
  for (std::size_t i = 0; i < l.dimension(); ++i) EXPECT_LT(std::abs(a[i] - b[i]), 1e-8);
}

TEST(Squeezer, OracleAgreementOnRandomLowStates) {
  const ModeLayout l{10, 3, 10};
  for (unsigned seed = 1; seed <= 4; ++seed) {
    PureState psi = random_state(l, seed);
    for (std::size_t i = 0; i < psi.dimension(); ++i)
      if (l.occupation(i, 0) > 2 || l.occupation(i, 2) > 2) psi[i] = 0.0;
    psi = normalize(psi).state;
    const SqueezeParam xi{0.12, 0.9 * seed};
    const auto a = apply_two_mode_squeezer(psi, 0, 2, xi);
    const auto b = apply_squeezer_factored(psi, 0, 2, xi);
    ASSERT_LT(a.leakage(), 1e-10);
    for (std::size_t i = 0; i < l.dimension(); ++i) EXPECT_LT(std::abs(a[i] - b[i]), 1e-8);
    EXPECT_NEAR(a.leakage(), b.leakage(), 1e-12);
  }
}

TEST(Squeezer, ConservesNumberDifference) {
  const ModeLayout l{8, 8};
  for (int n = 0; n <= 3; ++n)
    for (int m = 0; m <= 3; ++m) {
      const auto out = apply_two_mode_squeezer(fock_basis_state(l, {n, m}), 0, 1, {0.4, 0.5});
      EXPECT_LT(off_block(out, [&](std::size_t i) { return l.occupation(i, 0) - l.occupation(i, 1); }, n - m), 1e-15);
      EXPECT_NEAR(out.norm_squared() + out.leakage(), 1.0, 1e-12);
    }
}

TEST(Squeezer, InverseRoundTrip) {
  const ModeLayout l{14, 14};
  PureState psi = random_state(l, 2);
  for (std::size_t i = 0; i < psi.dimension(); ++i)
    if (l.occupation(i, 0) > 2 || l.occupation(i, 1) > 2) psi[i] = 0.0;
  psi = normalize(psi).state;
  const auto fwd = apply_two_mode_squeezer(psi, 0, 1, {0.15, 0.3});
  const auto back = apply_two_mode_squeezer(fwd, 0, 1, {0.15, 0.3 + std::numbers::pi});
  ASSERT_LT(back.leakage(), 1e-10);
  for (std::size_t i = 0; i < l.dimension(); ++i) EXPECT_LT(std::abs(back[i] - psi[i]), 1e-8);
}

TEST(Squeezer, LeakageAccountsForNormLoss) {
  const ModeLayout l{4, 4};
  const auto out = apply_two_mode_squeezer(vacuum_state(l), 0, 1, {0.8, 0.0});
  EXPECT_GT(out.leakage(), 1e-3);
  EXPECT_NEAR(out.norm_squared() + out.leakage(), 1.0, 1e-12);
}

TEST(Tmss, AmplitudesAndLeakage) {
  const ModeLayout l{20, 20};
  EXPECT_EQ(tmss_state(0.0, l).amplitude({0, 0}), complex(1.0));
  const auto t = tmss_state(0.5, l);
  for (int n = 0; n < 20; ++n) EXPECT_NEAR((t.amplitude({n + 1, n + 1}) / t.amplitude({n, n})).real(), std::tanh(0.5), 1e-14);
  EXPECT_NEAR(t.norm(), 1.0, 1e-14);
  const double l2 = std::pow(std::tanh(0.5), 2);
  EXPECT_NEAR(t.leakage(), std::pow(l2, 21) / (1 - std::pow(l2, 21)), 1e-15);
}

TEST(Tmss, AgreesWithSqueezedVacuum) {
  const ModeLayout l{25, 25};
  const auto a = tmss_state(0.4, l);
  const auto b = apply_two_mode_squeezer(vacuum_state(l), 0, 1, {0.4, std::numbers::pi});
  EXPECT_NEAR(fid(a, b), 1.0, 1e-12);
}
