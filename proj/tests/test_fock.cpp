#include <gtest/gtest.h>

#include "homsim/fock.hpp"
#include "support.hpp"

using namespace homsim;
using homsim::testing::random_state;

namespace {

void expect_kind(ErrorKind kind, const std::function<void()>& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(kind);
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), kind) << e.what();
  }
}

}  // namespace

TEST(Layout, DimensionAndIndexRoundTrip) {
  const ModeLayout l{2, 3, 1};
  EXPECT_EQ(l.dimension(), 3u * 4u * 2u);
  for (std::size_t i = 0; i < l.dimension(); ++i) EXPECT_EQ(l.index_of(l.occupations(i)), i);
  // mode 0 slowest
  EXPECT_EQ(l.index_of({0, 0, 1}), 1u);
  EXPECT_EQ(l.index_of({1, 0, 0}), 8u);
}

TEST(Layout, RejectsBadCutoffs) {
  expect_kind(ErrorKind::invalid_argument, [] { ModeLayout{0, 2}; });
  expect_kind(ErrorKind::invalid_argument, [] { ModeLayout(std::vector<int>{}); });
}

TEST(Vacuum, UnitAmplitudeOnZeroOccupation) {
  const auto v = vacuum_state(ModeLayout{2});
  EXPECT_EQ(v[0], complex(1.0));
  EXPECT_EQ(v[1], complex(0.0));
  EXPECT_EQ(v[2], complex(0.0));
  EXPECT_EQ(vacuum_state(ModeLayout{1, 1}).amplitude({0, 0}), complex(1.0));
  EXPECT_DOUBLE_EQ(vacuum_state(ModeLayout{3, 5, 2}).norm(), 1.0);
}

TEST(FockBasis, OrthonormalAndBounded) {
  const ModeLayout l{4, 4};
  EXPECT_EQ(fock_basis_state(l, {2, 0}).amplitude({2, 0}), complex(1.0));
  expect_kind(ErrorKind::occupation_exceeds_cutoff, [&] { fock_basis_state(l, {5, 0}); });
  for (int n = 0; n <= 2; ++n)
    for (int m = 0; m <= 2; ++m)
      for (int n2 = 0; n2 <= 2; ++n2)
        for (int m2 = 0; m2 <= 2; ++m2)
          EXPECT_EQ(inner_product(fock_basis_state(l, {n, m}), fock_basis_state(l, {n2, m2})),
                    complex((n == n2 && m == m2) ? 1.0 : 0.0));
}

TEST(Ladder, CreationBasics) {
  const ModeLayout l{3};
  const auto one = apply_creation(vacuum_state(l), 0);
  EXPECT_EQ(one.amplitude({1}), complex(1.0));
  EXPECT_EQ(one.leakage(), 0.0);

  const auto top = apply_creation(fock_basis_state(l, {3}), 0);
  EXPECT_EQ(top.norm_squared(), 0.0);
  EXPECT_NEAR(top.leakage(), 4.0, 1e-14);  // (n+1)|amp|^2 pushed out

  const ModeLayout l2{3, 3};
  const auto a2 = apply_creation(apply_creation(vacuum_state(l2), 0), 0);
  EXPECT_NEAR(a2.amplitude({2, 0}).real(), std::sqrt(2.0), 1e-15);
}

TEST(Ladder, AnnihilationBasics) {
  const ModeLayout l{3};
  EXPECT_EQ(apply_annihilation(fock_basis_state(l, {1}), 0).amplitude({0}), complex(1.0));
  EXPECT_EQ(apply_annihilation(vacuum_state(l), 0).norm_squared(), 0.0);

  const ModeLayout l2{4, 4};
  const auto n4 = homsim::testing::noon(l2, 4);
  const auto out = normalize(apply_annihilation(n4, 0) + apply_annihilation(n4, 1)).state;
  EXPECT_NEAR(std::norm(inner_product(homsim::testing::noon(l2, 3), out)), 1.0, 1e-14);
}

TEST(Ladder, ALadderIdentitiesOnSafeSubspace) {
  const ModeLayout l{6, 5};
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto psi = random_state(l, seed, 2);
    for (Mode m = 0; m < 2; ++m) {
      // <a a+> = <n + 1>
      const auto aad = apply_annihilation(apply_creation(psi, m), m);
      EXPECT_NEAR(inner_product(psi, aad).real(), inner_product(psi, apply_number(psi, m)).real() + 1.0, 1e-10);
      // (a a+ - a+ a)|psi> = |psi>
      auto comm = aad + complex(-1.0) * apply_creation(apply_annihilation(psi, m), m);
      comm += complex(-1.0) * psi;
      EXPECT_LT(comm.norm(), 1e-10);
    }
  }
}

TEST(Tensor, ConcatenatesAndMultipliesNorms) {
  const auto s = tensor_product(fock_basis_state(ModeLayout{2}, {1}), vacuum_state(ModeLayout{1, 1}));
  EXPECT_EQ(s.layout(), (ModeLayout{2, 1, 1}));
  EXPECT_EQ(s.amplitude({1, 0, 0}), complex(1.0));
  EXPECT_EQ(tensor_product(vacuum_state(ModeLayout{2}), vacuum_state(ModeLayout{3})).amplitude({0, 0}), complex(1.0));
  const auto a = complex(2.0) * random_state(ModeLayout{3}, 7);
  const auto b = complex(0.5, 1.0) * random_state(ModeLayout{2, 2}, 8);
  EXPECT_NEAR(tensor_product(a, b).norm(), a.norm() * b.norm(), 1e-13);
}

TEST(InnerProduct, LinearityAndMismatch) {
  const ModeLayout l{3, 3};
  const auto p = random_state(l, 1), q = random_state(l, 2);
  EXPECT_NEAR(inner_product(p, p).real(), p.norm_squared(), 1e-14);
  EXPECT_EQ(inner_product(fock_basis_state(l, {2, 0}), fock_basis_state(l, {0, 2})), complex(0.0));
  const complex c{0.3, -1.7};
  EXPECT_LT(std::abs(inner_product(p, c * q) - c * inner_product(p, q)), 1e-14);
  EXPECT_LT(std::abs(inner_product(c * p, q) - std::conj(c) * inner_product(p, q)), 1e-14);
  expect_kind(ErrorKind::layout_mismatch, [&] { inner_product(p, vacuum_state(ModeLayout{3, 2})); });
}

TEST(Normalize, ReportsNormAndRejectsZero) {
  const ModeLayout l{2};
  const auto r = normalize(complex(2.0) * fock_basis_state(l, {1}));
  EXPECT_DOUBLE_EQ(r.norm, 2.0);
  EXPECT_EQ(r.state.amplitude({1}), complex(1.0));
  expect_kind(ErrorKind::zero_norm_state, [&] { normalize(PureState(l)); });
  const auto u = random_state(ModeLayout{3, 3}, 3);
  const auto again = normalize(u);
  EXPECT_NEAR(again.norm, 1.0, 1e-14);
  for (std::size_t i = 0; i < u.dimension(); ++i) EXPECT_LT(std::abs(again.state[i] - u[i]), 1e-15);
}

TEST(ReducedDensity, Examples) {
  const ModeLayout l{2, 2};
  const auto r0 = reduced_density(vacuum_state(l), {0});
  EXPECT_EQ(r0.rows(), 3);
  EXPECT_NEAR(r0(0, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(r0.cwiseAbs().sum(), 1.0, 1e-15);

  const auto n2 = homsim::testing::noon(l, 2, -1.0);
  const auto r = reduced_density(n2, {0});
  EXPECT_NEAR(r(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(r(2, 2).real(), 0.5, 1e-15);
  EXPECT_NEAR(r.cwiseAbs().sum(), 1.0, 1e-15);
}

TEST(ReducedDensity, HermitianUnitTracePositive) {
  const ModeLayout l{3, 2, 2};
  for (unsigned seed = 10; seed < 14; ++seed) {
    const auto psi = random_state(l, seed);
    for (std::vector<Mode> keep : {std::vector<Mode>{0}, {1, 2}, {0, 2}}) {
      const auto rho = reduced_density(psi, std::span<const Mode>(keep));
      EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
      EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
    }
  }
}

TEST(ReducedDensity, MixedIsWeightedSumAndGuarded) {
  const ModeLayout l{2, 2};
  const auto a = random_state(l, 1), b = random_state(l, 2);
  const MixedState m({{0.25, a}, {0.75, b}});
  const Eigen::MatrixXcd expect = 0.25 * reduced_density(a, {1}) + 0.75 * reduced_density(b, {1});
  EXPECT_LT((reduced_density(m, {1}) - expect).cwiseAbs().maxCoeff(), 1e-15);

  const ModeLayout big{64, 64, 1};
  expect_kind(ErrorKind::dimension_guard_exceeded, [&] { reduced_density(vacuum_state(big), {0, 1}); });
}

TEST(Embed, PreservesAmplitudesAndRejectsOverflow) {
  const auto s = random_state(ModeLayout{2, 2}, 4);
  const auto e = embed(s, ModeLayout{5, 3});
  for (int n = 0; n <= 2; ++n)
    for (int m = 0; m <= 2; ++m) EXPECT_EQ(e.amplitude({n, m}), s.amplitude({n, m}));
  EXPECT_NEAR(e.norm(), 1.0, 1e-14);
  expect_kind(ErrorKind::layout_mismatch, [&] { embed(s, ModeLayout{2}); });
}

TEST(MixedStateType, LayoutMustMatch) {
  MixedState m;
  m.push_back({1.0, vacuum_state(ModeLayout{2, 2})});
  expect_kind(ErrorKind::layout_mismatch, [&] { m.push_back({1.0, vacuum_state(ModeLayout{2, 3})}); });
  expect_kind(ErrorKind::invalid_argument, [] { MixedState({{-0.1, vacuum_state(ModeLayout{1})}}); });
}

TEST(Modes, SameModeAndRange) {
  const ModeLayout l{2, 2};
  expect_kind(ErrorKind::same_mode, [&] { check_distinct_modes(l, 1, 1); });
  expect_kind(ErrorKind::invalid_argument, [&] { check_mode(l, 2); });
}
