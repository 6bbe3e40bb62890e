#include <doctest.h>

#include <cmath>

#include "dfskit/errors.hpp"
#include "dfskit/linalg.hpp"
#include "generators.hpp"

using namespace dfskit;
using dfskit::testing::Rng;

namespace {

ComplexMatrix diag(std::initializer_list<Complex> entries) {
    ComplexVector v(static_cast<Eigen::Index>(entries.size()));
    Eigen::Index i = 0;
    for (const auto& e : entries) {
        v(i++) = e;
    }
    return v.asDiagonal();
}

ComplexMatrix permutation_matrix(const std::vector<std::size_t>& perm) {
    // Row k selects user index perm[k].
    const auto n = static_cast<Eigen::Index>(perm.size());
    ComplexMatrix q = ComplexMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        q(k, static_cast<Eigen::Index>(perm[static_cast<std::size_t>(k)])) = 1.0;
    }
    return q;
}

ComplexMatrix swap_gate() {
    ComplexMatrix s = ComplexMatrix::Zero(4, 4);
    s(0, 0) = s(3, 3) = 1.0;
    s(1, 2) = s(2, 1) = 1.0;
    return s;
}

} // namespace

TEST_CASE("partition splits the identity diagonally") {
    const HilbertLayout layout(2, 1, 2);
    const BlockPartition b = partition(identity(4), layout);
    CHECK(b.p.isApprox(identity(2)));
    CHECK(b.b.isApprox(identity(2)));
    CHECK(b.a.norm() == 0.0);
    CHECK(b.d.norm() == 0.0);
}

TEST_CASE("partition of a diagonal matrix with an in factor") {
    const HilbertLayout layout(1, 2, 2);
    const BlockPartition b = partition(diag({1.0, 2.0, 3.0, 4.0}), layout);
    CHECK(b.p.isApprox(diag({1.0, 2.0})));
    CHECK(b.b.isApprox(diag({3.0, 4.0})));
    CHECK(b.a.norm() == 0.0);
    CHECK(b.d.norm() == 0.0);
}

TEST_CASE("permuted partition matches explicit conjugation") {
    Rng rng(11);
    const std::vector<std::size_t> perm{2, 3, 0, 1};
    const HilbertLayout layout(2, 1, 2, perm);
    const ComplexMatrix m = testing::ginibre(rng, 4, 4);
    const ComplexMatrix q = permutation_matrix(perm);
    const ComplexMatrix expected = q * m * q.transpose();
    const BlockPartition b = partition(m, layout);
    CHECK((b.p - expected.topLeftCorner(2, 2)).norm() == doctest::Approx(0.0));
    CHECK((b.a - expected.topRightCorner(2, 2)).norm() == doctest::Approx(0.0));
    CHECK((b.d - expected.bottomLeftCorner(2, 2)).norm() == doctest::Approx(0.0));
    CHECK((b.b - expected.bottomRightCorner(2, 2)).norm() == doctest::Approx(0.0));
    CHECK(reassemble(b, layout) == m);
}

TEST_CASE("partition round trip over random layouts") {
    Rng rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t ns = 1 + rng.index(3);
        const std::size_t in = 1 + rng.index(3);
        const std::size_t out = rng.index(4);
        const std::size_t n = ns * in + out;
        const HilbertLayout layout(ns, in, out, testing::random_permutation(rng, n));
        const ComplexMatrix m = testing::ginibre(rng, n, n);
        REQUIRE(reassemble(partition(m, layout), layout) == m);
        const ComplexVector v = testing::random_vector(rng, n);
        REQUIRE(layout.from_block_order(layout.to_block_order(v)) == v);
    }
}

TEST_CASE("frame layouts conjugate by the frame") {
    Rng rng(13);
    const ComplexMatrix v = testing::random_unitary(rng, 4);
    const HilbertLayout layout = HilbertLayout::from_frame(2, 1, 2, v);
    const ComplexMatrix m = testing::ginibre(rng, 4, 4);
    CHECK((layout.to_block_order(m) - v.adjoint() * m * v).norm() < 1e-12);
    CHECK((layout.from_block_order(layout.to_block_order(m)) - m).norm() < 1e-12);
    CHECK((layout.basis_matrix() - v).norm() < 1e-14);
}

TEST_CASE("layout validation") {
    CHECK_THROWS_AS(HilbertLayout(0, 1, 2), ShapeError);
    CHECK_THROWS_AS(HilbertLayout(1, 1, 1, {0, 0}), InvariantError);
    CHECK_THROWS_AS(HilbertLayout(1, 1, 1, {0, 1, 2}), ShapeError);
    CHECK_THROWS_AS(partition(identity(3), HilbertLayout(1, 1, 1)), ShapeError);
}

TEST_CASE("partial traces") {
    Rng rng(14);
    const ComplexMatrix rho_ns = testing::random_state(rng, 2).matrix();
    const ComplexMatrix sigma = testing::random_state(rng, 3).matrix();
    CHECK((partial_trace_in(kron(rho_ns, sigma), 2, 3) - rho_ns).norm() < 1e-13);
    CHECK((partial_trace_ns(kron(rho_ns, sigma), 2, 3) - sigma).norm() < 1e-13);
    CHECK(partial_trace_in(identity(4), 2, 2).isApprox(2.0 * identity(2)));

    const ComplexMatrix m = testing::ginibre(rng, 4, 4);
    const ComplexMatrix r = partial_trace_in(m, 2, 2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            Complex sum = 0.0;
            for (int k = 0; k < 2; ++k) {
                sum += m(i * 2 + k, j * 2 + k);
            }
            CHECK(std::abs(r(i, j) - sum) < 1e-14);
        }
    }
    CHECK_THROWS_AS(partial_trace_in(identity(5), 2, 2), ShapeError);
}

TEST_CASE("partial trace is linear and trace preserving") {
    Rng rng(15);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t ns = 1 + rng.index(3);
        const std::size_t in = 1 + rng.index(3);
        const ComplexMatrix x = testing::ginibre(rng, ns * in, ns * in);
        const ComplexMatrix y = testing::ginibre(rng, ns * in, ns * in);
        const Complex a = rng.complex_normal();
        const ComplexMatrix lhs = partial_trace_in(a * x + y, ns, in);
        const ComplexMatrix rhs = a * partial_trace_in(x, ns, in) + partial_trace_in(y, ns, in);
        REQUIRE((lhs - rhs).norm() < 1e-12);
        REQUIRE(std::abs(partial_trace_in(x, ns, in).trace() - x.trace()) < 1e-13 * (1.0 + x.norm()));
    }
}

TEST_CASE("matrix exponential") {
    Rng rng(16);
    const ComplexMatrix m = testing::ginibre(rng, 3, 3);
    CHECK((matrix_exp(m, 0.0) - identity(3)).norm() == 0.0);
    const ComplexMatrix e = matrix_exp(diag({0.5, Complex(-1.0, 2.0)}));
    CHECK(std::abs(e(0, 0) - std::exp(Complex(0.5))) < 1e-14);
    CHECK(std::abs(e(1, 1) - std::exp(Complex(-1.0, 2.0))) < 1e-13);

    // Taylor oracle for a rotation.
    const ComplexMatrix x = Complex(0.0, -1.0) * pauli_y() * (M_PI / 2.0);
    ComplexMatrix series = identity(2);
    ComplexMatrix term = identity(2);
    for (int k = 1; k < 40; ++k) {
        term = (term * x / static_cast<double>(k)).eval();
        series += term;
    }
    const ComplexMatrix r = matrix_exp(x);
    CHECK((r - series).norm() < 1e-13);
    ComplexVector zero(2);
    zero << 1.0, 0.0;
    CHECK(std::abs(std::abs((r * zero)(1)) - 1.0) < 1e-13);
}

TEST_CASE("matrix exponential inverse property") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.index(6);
        ComplexMatrix m = testing::ginibre(rng, n, n);
        m *= rng.uniform(0.0, 5.0) / norm(m, NormKind::spectral);
        const Complex s = rng.complex_normal();
        const ComplexMatrix m2 = m / std::abs(s);
        REQUIRE((matrix_exp(m2, s) * matrix_exp(m2, -s) - identity(n)).norm() < 1e-10);
    }
}

TEST_CASE("hermitian eigendecomposition") {
    const HermitianEigen z = hermitian_eig(pauli_z());
    CHECK(z.values(0) == doctest::Approx(-1.0));
    CHECK(z.values(1) == doctest::Approx(1.0));
    const HermitianEigen i3 = hermitian_eig(identity(3));
    CHECK((i3.values.array() - 1.0).abs().maxCoeff() < 1e-15);

    const ComplexMatrix zz = kron(pauli_z(), identity(2)) + kron(identity(2), pauli_z());
    const HermitianEigen e = hermitian_eig(zz);
    const double expected[] = {-2.0, 0.0, 0.0, 2.0};
    for (int k = 0; k < 4; ++k) {
        CHECK(e.values(k) == doctest::Approx(expected[k]).epsilon(1e-14));
    }
    CHECK_THROWS_AS(hermitian_eig(lowering()), ContractViolation);
}

TEST_CASE("hermitian eigendecomposition residuals") {
    Rng rng(18);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.index(8);
        const ComplexMatrix h = testing::random_hermitian(rng, n, 3.0);
        const HermitianEigen e = hermitian_eig(h);
        const ComplexMatrix rec = h * e.vectors - e.vectors * e.values.cast<Complex>().asDiagonal();
        REQUIRE(rec.norm() <= 1e-10 * std::max(1.0, h.norm()));
        REQUIRE((e.vectors.adjoint() * e.vectors - identity(n)).norm() < 1e-12);
    }
}

TEST_CASE("nearest Kronecker factor") {
    Rng rng(19);
    const ComplexMatrix u = testing::random_unitary(rng, 2);
    const ComplexMatrix c = diag({2.0, 3.0});
    const KronFactors f = nearest_kron_factor(kron(u, c), 2, 2);
    CHECK(f.residual <= 1e-12);
    CHECK((kron(f.left, f.right) - kron(u, c)).norm() < 1e-12);
    CHECK(f.left.norm() == doctest::Approx(1.0));

    const KronFactors id = nearest_kron_factor(identity(4), 2, 2);
    CHECK(id.residual < 1e-14);
    CHECK((id.left - identity(2) / std::sqrt(2.0)).norm() < 1e-14);
    CHECK((id.right - std::sqrt(2.0) * identity(2)).norm() < 1e-14);

    const KronFactors sw = nearest_kron_factor(swap_gate(), 2, 2);
    // Operator-Schmidt coefficients of SWAP are all 1: best rank-1 leaves √3.
    CHECK(sw.residual == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
    CHECK(sw.residual > 0.5);
}

TEST_CASE("norms") {
    CHECK(norm(identity(3), NormKind::trace) == doctest::Approx(3.0));
    CHECK(norm(diag({3.0, -4.0})) == doctest::Approx(5.0));
    CHECK(norm(diag({3.0, -4.0}), NormKind::spectral) == doctest::Approx(4.0));
    Rng rng(20);
    for (int trial = 0; trial < 50; ++trial) {
        const ComplexMatrix m = testing::ginibre(rng, 3, 3);
        const double s = norm(m, NormKind::spectral);
        const double f = norm(m, NormKind::frobenius);
        const double t = norm(m, NormKind::trace);
        REQUIRE(s <= f + 1e-14);
        REQUIRE(f <= t + 1e-14);
    }
}

TEST_CASE("vectorization convention") {
    Rng rng(21);
    const ComplexMatrix a = testing::ginibre(rng, 3, 3);
    const ComplexMatrix b = testing::ginibre(rng, 3, 3);
    const ComplexMatrix x = testing::ginibre(rng, 3, 3);
    const ComplexVector lhs = vec(a * x * b);
    const ComplexVector rhs = kron(b.transpose(), a) * vec(x);
    CHECK((lhs - rhs).norm() < 1e-12);
    CHECK(unvec(vec(x), 3) == x);
}

TEST_CASE("nullspace, polar, complement") {
    Rng rng(22);
    ComplexMatrix m = testing::ginibre(rng, 2, 4);
    const ComplexMatrix k = nullspace(m, 1e-9);
    CHECK(k.cols() == 2);
    CHECK((m * k).norm() < 1e-12);
    CHECK((k.adjoint() * k - identity(2)).norm() < 1e-12);

    const ComplexMatrix u = testing::random_unitary(rng, 3);
    const ComplexMatrix p = testing::random_state(rng, 3).matrix();
    CHECK((polar_unitary(u * p) - u).norm() < 1e-10);

    const ComplexMatrix q = testing::random_unitary(rng, 5).leftCols(2);
    const ComplexMatrix qc = orthonormal_complement(q);
    CHECK(qc.cols() == 3);
    CHECK((q.adjoint() * qc).norm() < 1e-12);
    CHECK((qc.adjoint() * qc - identity(3)).norm() < 1e-12);
}

TEST_CASE("pauli algebra") {
    const Complex i(0.0, 1.0);
    CHECK((pauli_x() * pauli_y() - i * pauli_z()).norm() < 1e-15);
    CHECK((commutator(pauli_x(), pauli_y()) - 2.0 * i * pauli_z()).norm() < 1e-15);
    CHECK(std::abs(lowering()(0, 1) - 1.0) < 1e-15);
    CHECK(hermiticity_defect(pauli_y()) == 0.0);
}
