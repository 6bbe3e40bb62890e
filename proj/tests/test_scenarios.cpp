#include <doctest.h>

#include <cmath>

#include "dfskit/certify.hpp"
#include "dfskit/dynamics.hpp"
#include "dfskit/errors.hpp"
#include "dfskit/scenarios.hpp"
#include "generators.hpp"

using namespace dfskit;
using dfskit::testing::Rng;

namespace {

ComplexVector ket(std::size_t n, std::size_t i) {
    ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(n));
    v(static_cast<Eigen::Index>(i)) = 1.0;
    return v;
}

double predicted_residual(const ThreeQubitExampleParams& p) {
    return 2.0 * std::abs(p.u(0, 0) * p.u(0, 1)) * std::abs(p.d1 - p.d2);
}

} // namespace

TEST_CASE("three-qubit operators act on the protected states as stated") {
    const auto p = ThreeQubitExampleParams::from_eigen(1.3, 0.6, 0.3);
    const Scenario s = build_three_qubit_example(p);
    const auto& f = s.model.lindblad_ops();
    REQUIRE(f.size() == 2);
    const ComplexVector zero = ket(8, 0);
    CHECK((f[0] * zero - 2.0 * std::sqrt(p.d1) * p.u(0, 0) * zero).norm() < 1e-14);
    CHECK((f[1] * zero - 2.0 * std::sqrt(p.d2) * p.u(1, 0) * zero).norm() < 1e-14);
    CHECK((three_qubit_k2() * ket(8, 1)).norm() == 0.0);

    ComplexMatrix g = ComplexMatrix::Zero(8, 8);
    for (const auto& x : f) {
        g += x.adjoint() * x;
    }
    const Complex expected = 2.0 * p.d1 * std::conj(p.u(0, 0)) * p.u(0, 1) + 2.0 * p.d2 * std::conj(p.u(1, 0)) * p.u(1, 1);
    CHECK(std::abs(g(1, 7) - expected) < 1e-14);
    CHECK(std::abs(g(1, 7)) == doctest::Approx(predicted_residual(p)).epsilon(1e-12));
}

TEST_CASE("a_matrix and eigen parametrizations agree") {
    const auto p = ThreeQubitExampleParams::from_eigen(1.0, 3.0, 0.9);
    CHECK(hermiticity_defect(p.a_matrix) < 1e-14);
    const HermitianEigen e = hermitian_eig(p.a_matrix);
    CHECK(e.values(0) == doctest::Approx(1.0));
    CHECK(e.values(1) == doctest::Approx(3.0));
    const auto q = ThreeQubitExampleParams::from_matrix(p.a_matrix);
    const Scenario a = build_three_qubit_example(p);
    const Scenario b = build_three_qubit_example(q);
    // Same Σ F†F, hence the same dissipator, whatever eigenvector phases were chosen.
    ComplexMatrix ga = ComplexMatrix::Zero(8, 8);
    ComplexMatrix gb = ComplexMatrix::Zero(8, 8);
    for (std::size_t i = 0; i < 2; ++i) {
        ga += a.model.lindblad_ops()[i].adjoint() * a.model.lindblad_ops()[i];
        gb += b.model.lindblad_ops()[i].adjoint() * b.model.lindblad_ops()[i];
    }
    CHECK((ga - gb).norm() < 1e-12);
    CHECK(std::abs(q.d1 - 1.0) < 1e-12);
    CHECK(std::abs(predicted_residual(p) - predicted_residual(q)) < 1e-12);
}

TEST_CASE("three-qubit residual formula over a parameter sweep") {
    for (int i = 0; i <= 12; ++i) {
        const double d2 = 1.0 + 0.25 * i;
        for (const double theta : {0.2, M_PI / 4.0, 1.1}) {
            const auto p = ThreeQubitExampleParams::from_eigen(1.0, d2, theta);
            const Scenario s = build_three_qubit_example(p);
            const CheckReport legacy = check_markov_dfs_legacy(s.model, s.layout, 1e-9);
            const CheckReport perfect = check_markov_dfs(s.model, s.layout, Init::perfect, 1e-9);
            CHECK(legacy.passed());
            CHECK(std::abs(perfect.at("new-DFS-offdiag").absolute - predicted_residual(p)) <= 1e-10);
            CHECK(perfect.passed() == (i == 0));
        }
    }
}

TEST_CASE("three-qubit dynamics under perfect initialization") {
    Rng rng(91);
    ComplexVector psi = ComplexVector::Zero(8);
    psi.head(2) = testing::random_vector(rng, 2);
    const DensityState rho0 = DensityState::pure(psi);

    const Scenario equal = build_three_qubit_example(ThreeQubitExampleParams::from_eigen(1.0, 1.0));
    const EvolutionTrace t1 = integrate_lindblad(equal.model, rho0, 2.0, 1e-3, equal.layout);
    double worst = 0.0;
    for (double r : t1.dfs_unitarity_residual) {
        worst = std::max(worst, r);
    }
    CHECK(worst <= 1e-8);

    const Scenario unequal = build_three_qubit_example(ThreeQubitExampleParams::from_eigen(1.0, 2.0));
    const EvolutionTrace t2 = integrate_lindblad(unequal.model, rho0, 2.0, 1e-3, unequal.layout);
    CHECK(t2.dfs_unitarity_residual.back() > 1e-4);
}

TEST_CASE("collective dephasing presets") {
    const std::size_t dims[] = {2, 3, 6};
    for (std::size_t n = 2; n <= 4; ++n) {
        const Scenario s = build_collective_dephasing(n);
        CHECK(s.layout.ns_dim() == dims[n - 2]);
        CHECK(s.layout.total_dim() == (std::size_t{1} << n));
        CHECK(s.notes.empty() == (n % 2 == 0));
        for (Init init : {Init::imperfect, Init::perfect}) {
            const CheckReport r = check_markov_dfs(s.model, s.layout, init);
            CHECK(r.passed());
            const Complex c = (*r.fitted_scalars)[0];
            CHECK(std::abs(c - (n % 2 == 0 ? 0.0 : 1.0)) < 1e-12);
        }
    }
    const Scenario two = build_collective_dephasing(2);
    const auto& perm = two.layout.permutation();
    CHECK(perm[0] == 1);
    CHECK(perm[1] == 2);
    CHECK_THROWS_AS(build_collective_dephasing(5), ContractViolation);
}

TEST_CASE("three-qubit parameter validation") {
    CHECK_THROWS_AS(ThreeQubitExampleParams::from_eigen(1.0, 1.0, ComplexMatrix(2.0 * identity(2))), InvariantError);
    CHECK_THROWS_AS(ThreeQubitExampleParams::from_matrix(identity(3)), ShapeError);
    CHECK_THROWS_AS(build_three_qubit_example(ThreeQubitExampleParams::from_eigen(-1.0, 1.0)), InvariantError);
}
