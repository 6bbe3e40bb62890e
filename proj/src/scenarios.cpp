#include "dfskit/scenarios.hpp"

#include <cmath>
#include <string>

#include "dfskit/errors.hpp"

namespace dfskit {

namespace {

ComplexMatrix embed(const ComplexMatrix& op, std::size_t site, std::size_t n_qubits) {
    ComplexMatrix out = identity(1);
    for (std::size_t q = 0; q < n_qubits; ++q) {
        out = kron(out, q == site ? op : identity(2));
    }
    return out;
}

void require_unitary_2x2(const ComplexMatrix& u) {
    if (u.rows() != 2 || u.cols() != 2) {
        throw ShapeError("three-qubit example: u must be 2x2");
    }
    if ((u.adjoint() * u - identity(2)).norm() > 1e-10) {
        throw InvariantError("three-qubit example: u is not unitary");
    }
}

} // namespace

ThreeQubitExampleParams ThreeQubitExampleParams::from_eigen(double d1, double d2, double theta) {
    ComplexMatrix u(2, 2);
    u << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    return from_eigen(d1, d2, u);
}

ThreeQubitExampleParams ThreeQubitExampleParams::from_eigen(double d1, double d2, const ComplexMatrix& u) {
    require_unitary_2x2(u);
    ThreeQubitExampleParams p;
    p.d1 = d1;
    p.d2 = d2;
    p.u = u;
    ComplexMatrix d = ComplexMatrix::Zero(2, 2);
    d(0, 0) = d1;
    d(1, 1) = d2;
    p.a_matrix = u.transpose() * d * u.conjugate();
    return p;
}

ThreeQubitExampleParams ThreeQubitExampleParams::from_matrix(const ComplexMatrix& a_matrix) {
    if (a_matrix.rows() != 2 || a_matrix.cols() != 2) {
        throw ShapeError("three-qubit example: a_matrix must be 2x2");
    }
    const HermitianEigen e = hermitian_eig(a_matrix);
    ThreeQubitExampleParams p = from_eigen(e.values(0), e.values(1), ComplexMatrix(e.vectors.transpose()));
    p.a_matrix = a_matrix;
    return p;
}

ComplexMatrix three_qubit_k1() {
    return embed(pauli_z(), 0, 3) + embed(pauli_z(), 1, 3);
}

ComplexMatrix three_qubit_k2() {
    ComplexMatrix k2 = ComplexMatrix::Zero(8, 8);
    k2(1, 7) = 1.0; // |001⟩⟨111|
    k2(2, 7) = 1.0; // |010⟩⟨111|
    k2(4, 7) = 1.0; // |100⟩⟨111|
    return k2;
}

Scenario build_three_qubit_example(const ThreeQubitExampleParams& params) {
    if (!(params.d1 >= 0.0) || !(params.d2 >= 0.0)) {
        throw InvariantError("three-qubit example: d1 and d2 must be non-negative");
    }
    require_unitary_2x2(params.u);
    const ComplexMatrix k1 = three_qubit_k1();
    const ComplexMatrix k2 = three_qubit_k2();
    const double d[2] = {params.d1, params.d2};
    std::vector<ComplexMatrix> ops;
    for (int i = 0; i < 2; ++i) {
        ops.push_back(std::sqrt(d[i]) * (params.u(i, 0) * k1 + params.u(i, 1) * k2));
    }
    LindbladModel model(ComplexMatrix::Zero(8, 8), std::move(ops));
    // |000⟩, |001⟩ already lead the computational basis.
    HilbertLayout layout(2, 1, 6);
    return Scenario{std::move(model), std::move(layout), {}};
}

Scenario build_collective_dephasing(std::size_t n_qubits) {
    if (n_qubits < 2 || n_qubits > 4) {
        throw ContractViolation("collective dephasing: n_qubits must be 2, 3 or 4, got " + std::to_string(n_qubits));
    }
    ComplexMatrix f = ComplexMatrix::Zero(1 << n_qubits, 1 << n_qubits);
    for (std::size_t q = 0; q < n_qubits; ++q) {
        f += embed(pauli_z(), q, n_qubits);
    }
    // Eigenvalue on |b⟩ is (#zeros − #ones); even n → 0, odd n → +1.
    const int target = n_qubits % 2 == 0 ? 0 : 1;
    const std::size_t dim = std::size_t{1} << n_qubits;
    std::vector<std::size_t> inside;
    std::vector<std::size_t> outside;
    for (std::size_t b = 0; b < dim; ++b) {
        const int ones = __builtin_popcountll(b);
        const int eig = static_cast<int>(n_qubits) - 2 * ones;
        (eig == target ? inside : outside).push_back(b);
    }
    std::vector<std::size_t> perm = inside;
    perm.insert(perm.end(), outside.begin(), outside.end());
    Scenario s{LindbladModel(ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)), {f}),
               HilbertLayout(inside.size(), 1, outside.size(), std::move(perm)),
               {}};
    if (target != 0) {
        s.notes.push_back("odd qubit count: no zero-eigenvalue subspace; using the +1 eigenspace (c = 1)");
    }
    return s;
}

} // namespace dfskit
