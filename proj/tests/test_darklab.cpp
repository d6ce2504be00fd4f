#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "chiralspin/darklab.hpp"
#include "chiralspin/evolve.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

using namespace chiralspin;

namespace {

DenseMatrix dense(const Operator& op) { return DenseMatrix(op); }

// chiral single-guide network with gamma_R - gamma_L = dgamma, gamma_L + gamma_R = 1
NetworkSpec chiral_net(std::size_t n, double omega, const DetuningPattern& deltas, double dgamma) {
  return single_guide_network(n, omega, deltas, 0.5 * (1.0 - dgamma), 0.5 * (1.0 + dgamma));
}

NetworkSpec two_guide_net(double omega, const DetuningPattern& deltas, double dg1, double dg2) {
  NetworkSpec spec;
  spec.n_spins = 4;
  spec.drive.rabi = {omega, omega, omega, omega};
  spec.drive.detuning = deltas;
  WaveguideSpec g1;
  g1.gamma_L = 0.5 * (1 - dg1);
  g1.gamma_R = 0.5 * (1 + dg1);
  g1.order = {1, 2, 3, 4};
  g1.phases = {0, 0, 0, 0};
  WaveguideSpec g2 = g1;
  g2.gamma_L = 0.5 * (1 - dg2);
  g2.gamma_R = 0.5 * (1 + dg2);
  g2.order = {1, 3, 2, 4};
  spec.waveguides = {g1, g2};
  return spec;
}

double steady_fidelity(const NetworkSpec& spec, const PureState& target, double t_max = 400.0) {
  EvolveOptions opts;
  opts.t_max = t_max;
  auto res = steady_state(assemble_model(spec), opts);
  return fidelity_pure(target, res.rho);
}

}  // namespace

TEST_CASE("dimer_state") {
  CHECK(fidelity_pure(dimer_state(0.0), ground_state(2)) == doctest::Approx(1.0));
  CHECK(fidelity_pure(dimer_state(cplx(1e6)), singlet_state(1, 2, 2)) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(dimer_state(cplx(0.3, 0.4)).norm() == doctest::Approx(1.0));
}

TEST_CASE("singlet_fraction") {
  const cplx a = singlet_fraction(0.5, 0.0, 0.9);
  CHECK(a.real() == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(a.imag() == doctest::Approx(std::sqrt(2.0) / 0.9));  // ~ 1.5713
  const cplx b = singlet_fraction(0.5, 0.3, 0.9);
  const cplx expected = -2.0 * std::sqrt(2.0) * 0.5 / cplx(0.6, 0.9);
  CHECK(std::abs(b - expected) < 1e-14);
  CHECK_THROWS(singlet_fraction(0.5, 0.0, 0.0));
}

TEST_CASE("gamma_eff") {
  CHECK(gamma_eff(0.0, 0.3, 0.2, 0.8) == doctest::Approx(2.0));
  CHECK(gamma_eff(0.5, 0.0, 0.0, 1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(gamma_eff(0.5, 0.0, 0.5, 0.5) == doctest::Approx(0.0));
  CHECK_THROWS(gamma_eff(0.5, 0.0, -0.1, 1.0));
}

TEST_CASE("dimerized_state") {
  SUBCASE("N=2 reduces to the dimer") {
    auto ms = dimerized_state({0.3, -0.3}, 0.5, 0.5);
    CHECK(fidelity_pure(ms.realized, dimer_state(singlet_fraction(0.5, 0.3, 0.5))) ==
          doctest::Approx(1.0));
    REQUIRE(ms.partition.size() == 1);
    CHECK(ms.partition[0] == std::vector<std::size_t>{1, 2});
  }
  SUBCASE("N=4 staggered pattern is certified dark") {
    DetuningPattern p = {0.4, -0.4, 0.2, -0.2};
    auto ms = dimerized_state(p, 0.5, 0.5);
    auto cert = verify_dark(ms.realized, assemble_model(chiral_net(4, 0.5, p, 0.5)));
    CHECK(cert.verdict);
    CHECK(ms.partition.size() == 2);
  }
  SUBCASE("errors") {
    CHECK_THROWS(dimerized_state({0.3, -0.3, 0.2}, 0.5, 0.5));    // odd N
    CHECK_THROWS(dimerized_state({0.3, -0.2}, 0.5, 0.5));         // not staggered
    CHECK_THROWS(dimerized_state({0.0, 0.0}, 0.5, 0.0));          // degenerate resonant pair
  }
}

TEST_CASE("tetramer_condition") {
  CHECK(*tetramer_condition(DetuningPattern{0.4, -0.4, 0.2, -0.2}) == TetramerCondition::I);
  CHECK(*tetramer_condition(DetuningPattern{0.3, 0.5, -0.3, -0.5}) == TetramerCondition::II);
  CHECK(*tetramer_condition(DetuningPattern{0.3, 0.5, -0.5, -0.3}) == TetramerCondition::III);
  CHECK_FALSE(tetramer_condition(DetuningPattern{0.3, 0.5, -0.4, -0.3}).has_value());
}

TEST_CASE("tetramer_state") {
  const double omega = 0.5, dg = 0.5;
  SUBCASE("condition I factorizes into adjacent dimers") {
    DetuningPattern p = {0.4, -0.4, 0.2, -0.2};
    PureState tet = tetramer_state(p, omega, dg);
    auto ms = dimerized_state(p, omega, dg);
    CHECK(fidelity_pure(tet, ms.realized) == doctest::Approx(1.0).epsilon(1e-12));
    auto sc = schmidt_coefficients(tet, {1, 2});
    CHECK(sc.back() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("conditions II and III are certified dark and four-partite entangled") {
    for (DetuningPattern p : {DetuningPattern{0.3, 0.5, -0.3, -0.5},
                              DetuningPattern{0.3, 0.5, -0.5, -0.3}}) {
      PureState tet = tetramer_state(p, omega, dg);
      auto cert = verify_dark(tet, assemble_model(chiral_net(4, omega, p, dg)));
      CHECK(cert.verdict);
      // entangled across the (1,2)|(3,4) cut
      auto sc = schmidt_coefficients(tet, {1, 2});
      CHECK(sc.back() < 1.0 - 1e-4);
    }
  }
  SUBCASE("condition II tetramer is reached from the ground state") {
    DetuningPattern p = {0.3, 0.5, -0.3, -0.5};
    PureState tet = tetramer_state(p, omega, dg);
    CHECK(steady_fidelity(chiral_net(4, omega, p, dg), tet) > 1.0 - 1e-6);
  }
  SUBCASE("errors") {
    CHECK_THROWS(tetramer_state(DetuningPattern{0.3, 0.5, -0.4, -0.3}, omega, dg));
    CHECK_THROWS(tetramer_state(DetuningPattern{0.3, -0.3}, omega, dg));
    CHECK_THROWS(tetramer_state(DetuningPattern{0.4, -0.4, 0.2, -0.2}, omega, 0.0));
  }
}

TEST_CASE("swap_unitary") {
  CHECK((dense(swap_unitary(0.0, 1, 2)) - DenseMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() <
        1e-14);
  for (double theta : {0.3, -0.7, 1.2}) {
    DenseMatrix u = dense(swap_unitary(theta, 2, 3));
    CHECK((u * u.adjoint() - DenseMatrix::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-13);
  }
  // matrix-exponential oracle: exp(i (theta/2) sigma.sigma) on two spins
  const double theta = 0.6;
  DenseMatrix dot = DenseMatrix::Zero(4, 4);
  for (int a = 0; a < 3; ++a)
    dot += Eigen::kroneckerProduct(Eigen::Matrix2cd(pauli(a)), Eigen::Matrix2cd(pauli(a)));
  DenseMatrix oracle = (cplx(0, 0.5 * theta) * dot).exp();
  CHECK((dense(swap_unitary(theta, 1, 2)) - oracle).cwiseAbs().maxCoeff() < 1e-13);
  CHECK_THROWS(swap_unitary(0.3, 2, 2));
}

TEST_CASE("theta_for_swap") {
  CHECK(theta_for_swap(0.2, 0.2, 0.5) == doctest::Approx(0.0));
  CHECK(theta_for_swap(0.0, 0.5, 0.5) == doctest::Approx(std::numbers::pi / 4));
  CHECK(theta_for_swap(0.4, -0.4, 0.9) == doctest::Approx(std::atan(-8.0 / 9.0)));
  CHECK(theta_for_swap(0.4, -0.4, 0.9) == doctest::Approx(-0.7266).epsilon(1e-4));
  CHECK_THROWS(theta_for_swap(0.1, 0.2, 0.0));
}

TEST_CASE("multimer_from_permutation") {
  const double omega = 0.5, dg = 0.5;
  const DetuningPattern stag = {0.4, -0.4, 0.2, -0.2};
  SUBCASE("identity permutation reproduces the dimerized state") {
    auto ms = multimer_from_permutation({1, 2, 3, 4}, stag, omega, dg);
    CHECK(fidelity_pure(ms.realized, dimerized_state(stag, omega, dg).realized) ==
          doctest::Approx(1.0));
    CHECK(ms.partition.size() == 2);
  }
  SUBCASE("transposition (2 3) gives the condition-II tetramer") {
    auto ms = multimer_from_permutation({1, 3, 2, 4}, stag, omega, dg);
    CHECK(ms.detunings == DetuningPattern{0.4, 0.2, -0.4, -0.2});
    auto cert = verify_dark(ms.realized, assemble_model(chiral_net(4, omega, ms.detunings, dg)));
    CHECK(cert.verdict);
    CHECK(fidelity_pure(ms.realized, tetramer_state(ms.detunings, omega, dg)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(ms.partition.size() == 1);
    CHECK(ms.partition[0] == std::vector<std::size_t>{1, 2, 3, 4});
  }
  SUBCASE("N=8: tetramer pairs from a double transposition") {
    DetuningPattern stag8 = {0.4, -0.4, 0.2, -0.2, 0.3, -0.3, 0.1, -0.1};
    std::vector<std::size_t> perm = {1, 3, 2, 4, 5, 7, 6, 8};
    auto ms = multimer_from_permutation(perm, stag8, omega, dg);
    auto cert = verify_dark(ms.realized, assemble_model(chiral_net(8, omega, ms.detunings, dg)));
    CHECK(cert.verdict);
    REQUIRE(ms.partition.size() == 2);
    CHECK(ms.partition[0] == std::vector<std::size_t>{1, 2, 3, 4});
    CHECK(ms.partition[1] == std::vector<std::size_t>{5, 6, 7, 8});
  }
  SUBCASE("errors") {
    CHECK_THROWS(multimer_from_permutation({1, 2, 2, 4}, stag, omega, dg));
    CHECK_THROWS(multimer_from_permutation({1, 2, 3}, stag, omega, dg));
    CHECK_THROWS(multimer_from_permutation({1, 2, 3, 4}, stag, omega, 0.0));
  }
}

TEST_CASE("two_waveguide_reduction formulas") {
  SUBCASE("real regime") {
    const double dg1 = 0.6, dg2 = 0.4, dj = 0.7, dl = -0.5;  // d = 1.2
    auto red = two_waveguide_reduction(dg1, dg2, dj, dl);
    CHECK(red.real());
    CHECK(red.epsilon.real() == doctest::Approx(std::sqrt(0.48)));  // 0.6928203
    CHECK(red.theta.real() == doctest::Approx(0.3998783).epsilon(1e-6));
    // the angle solves dg1 t^2 - d t + dg2 = 0
    const double t = std::tan(red.theta.real());
    CHECK(dg1 * t * t - 1.2 * t + dg2 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(red.mapped_delta_j.real() == doctest::Approx(0.1 + 0.5 * std::sqrt(0.48)));
    CHECK(red.mapped_delta_j1.real() == doctest::Approx(0.1 - 0.5 * std::sqrt(0.48)));
    auto red2 = two_waveguide_reduction(dg1, dg2, dj, dl, true);
    CHECK(red2.epsilon.real() == doctest::Approx(-std::sqrt(0.48)));
  }
  SUBCASE("complex regime: epsilon^2 = d^2 - 4 dg1 dg2 < 0") {
    const double dg1 = 0.6, dg2 = 0.4;
    auto red = two_waveguide_reduction(dg1, dg2, 0.0, 0.0);
    CHECK_FALSE(red.real());
    CHECK(red.epsilon.real() == doctest::Approx(0.0));
    CHECK(red.epsilon.imag() == doctest::Approx(2.0 * std::sqrt(dg1 * dg2)));
    // tan(theta) = -i sqrt(dg2/dg1) at d = 0
    const cplx t = std::tan(red.theta);
    CHECK(std::abs(t - cplx(0.0, -std::sqrt(dg2 / dg1))) < 1e-12);
    // mapped pair detunings are complex conjugates
    CHECK(std::abs(red.mapped_delta_j - std::conj(red.mapped_delta_j1)) < 1e-14);
  }
  CHECK_THROWS(two_waveguide_reduction(0.0, 0.4, 0.1, 0.2));
  CHECK_THROWS(two_waveguide_reduction(0.6, -0.4, 0.1, 0.2));
}

TEST_CASE("two-waveguide dark states") {
  const double omega = 0.5, dg1 = 0.6, dg2 = 0.4;
  SUBCASE("real mapping regime") {
    const double dj = 0.7, dl = -0.5;
    auto red = two_waveguide_reduction(dg1, dg2, dj, dl);
    DetuningPattern bare = {-red.mapped_delta_j1.real(), dj, dl, -red.mapped_delta_j.real()};
    ComplexPattern mapped = {bare[0], red.mapped_delta_j, red.mapped_delta_j1, bare[3]};
    PureState tet = tetramer_state(mapped, omega, dg1 + dg2);
    PureState target = PureState(swap_gate(-red.theta, 2, 4) * tet).normalized();
    NetworkSpec spec = two_guide_net(omega, bare, dg1, dg2);
    auto cert = verify_dark(target, assemble_model(spec));
    CHECK(cert.verdict);
  }
  SUBCASE("complex mapping regime (resonant inner pair)") {
    const double da = 0.9;
    DetuningPattern bare = {da, 0.0, 0.0, -da};
    auto red = two_waveguide_reduction(dg1, dg2, 0.0, 0.0);
    ComplexPattern mapped = {da, red.mapped_delta_j, red.mapped_delta_j1, -da};
    PureState tet = tetramer_state(mapped, omega, dg1 + dg2);
    PureState target = PureState(swap_gate(-red.theta, 2, 4) * tet).normalized();
    NetworkSpec spec = two_guide_net(omega, bare, dg1, dg2);
    auto cert = verify_dark(target, assemble_model(spec));
    CHECK(cert.verdict);
    CHECK(steady_fidelity(spec, target, 4000.0) > 1.0 - 1e-5);
  }
}

TEST_CASE("classify_pattern") {
  SUBCASE("outer/inner pairing satisfies only condition III") {
    auto cls = classify_pattern({0.6, 0.4, -0.4, -0.6});
    CHECK(cls.pairable);
    REQUIRE(cls.pairing.size() == 2);
    CHECK(cls.pairing[0] == std::pair<std::size_t, std::size_t>{1, 4});
    CHECK(cls.pairing[1] == std::pair<std::size_t, std::size_t>{2, 3});
    CHECK(cls.n4_conditions == std::set<TetramerCondition>{TetramerCondition::III});
  }
  SUBCASE("all zeros is pairable with every condition") {
    auto cls = classify_pattern({0.0, 0.0, 0.0, 0.0});
    CHECK(cls.pairable);
    CHECK(cls.n4_conditions.size() == 3);
  }
  SUBCASE("odd N is never pairable") {
    CHECK_FALSE(classify_pattern({0.3, -0.3, 0.1}).pairable);
  }
  SUBCASE("non-cancelling pattern") {
    CHECK_FALSE(classify_pattern({0.3, 0.2, -0.3, -0.1}).pairable);
  }
}

TEST_CASE("bidirectional_pairing") {
  auto p1 = bidirectional_pairing({0.6, 0.4, -0.4, -0.6});
  CHECK(p1 == std::vector<std::pair<std::size_t, std::size_t>>{{1, 4}, {2, 3}});
  auto p2 = bidirectional_pairing({0.6, -0.6, 0.4, -0.4});
  CHECK(p2 == std::vector<std::pair<std::size_t, std::size_t>>{{1, 2}, {3, 4}});
  CHECK_THROWS_AS(bidirectional_pairing({0.0, 0.3, -0.3, 0.0}), std::domain_error);
  CHECK_THROWS_AS(bidirectional_pairing({0.3, 0.3, -0.3, -0.3}), std::domain_error);
  CHECK_THROWS_AS(bidirectional_pairing({0.3, 0.2, -0.3, -0.1}), std::invalid_argument);
}

TEST_CASE("paired_dimer_state in a bidirectional channel") {
  const double omega = 0.5;
  DetuningPattern p = {0.6, 0.4, -0.4, -0.6};
  auto pairing = bidirectional_pairing(p);
  auto ms = paired_dimer_state(pairing, p, omega, 0.0);
  NetworkSpec spec = single_guide_network(4, omega, p, 0.5, 0.5);  // gamma_L = gamma_R
  auto cert = verify_dark(ms.realized, assemble_model(spec));
  CHECK(cert.verdict);
  CHECK(steady_fidelity(spec, ms.realized, 3000.0) > 1.0 - 1e-5);
  // non-local dimer: spins (1,4) form a pure pair
  CHECK(purity(reduced_from_pure(ms.realized, {1, 4})) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("verify_dark") {
  SUBCASE("undriven ground state") {
    NetworkSpec spec = single_guide_network(2, 0.0, {0.1, -0.1}, 0.3);
    auto cert = verify_dark(ground_state(2), assemble_model(spec));
    CHECK(cert.verdict);
    CHECK(cert.hamiltonian_residual < 1e-12);
  }
  SUBCASE("triplet is superradiant") {
    NetworkSpec spec = single_guide_network(2, 0.0, {0.0, 0.0}, 0.0, 1.0);
    auto cert = verify_dark(triplet_state(1, 2, 2), assemble_model(spec));
    CHECK_FALSE(cert.verdict);
    REQUIRE(cert.jump_residuals.size() == 1);
    CHECK(cert.jump_residuals[0] == doctest::Approx(std::sqrt(2.0)));
  }
  SUBCASE("dimension mismatch throws") {
    NetworkSpec spec = single_guide_network(2, 0.0, {0.0, 0.0}, 0.3);
    CHECK_THROWS(verify_dark(ground_state(3), assemble_model(spec)));
  }
}
