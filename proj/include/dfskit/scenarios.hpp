// scenarios.hpp: preset models (three-qubit emission + dephasing, collective dephasing)

#pragma once

#include <string>
#include <vector>

#include "dfskit/linalg.hpp"
#include "dfskit/models.hpp"

namespace dfskit {

// Coefficients of the pre-diagonalized two-operator Lindblad equation.
// a_matrix = uᵀ diag(d1, d2) ū, i.e. row i of u holds the coefficients of
// F_i = √d_i (u_i1 K₁ + u_i2 K₂), and Σ_jk a_jk K_j ρ K_k† = Σ_i F_i ρ F_i†.
struct ThreeQubitExampleParams {
    double lambda1 = 1.0; // dephasing coupling, informational
    double lambda2 = 1.0; // emission coupling, informational
    ComplexMatrix a_matrix;
    double d1 = 0.0;
    double d2 = 0.0;
    ComplexMatrix u;

    // u = [[cos θ, sin θ], [−sin θ, cos θ]].
    static ThreeQubitExampleParams from_eigen(double d1, double d2, double theta = 0.7853981633974483);
    static ThreeQubitExampleParams from_eigen(double d1, double d2, const ComplexMatrix& u);
    // Diagonalizes a Hermitian a_matrix (eigenvalues ascending).
    static ThreeQubitExampleParams from_matrix(const ComplexMatrix& a_matrix);
};

struct Scenario {
    LindbladModel model;
    HilbertLayout layout;
    std::vector<std::string> notes;
};

// |q₁q₂q₃⟩ has index 4q₁ + 2q₂ + q₃ and σ_z|0⟩ = +|0⟩.
ComplexMatrix three_qubit_k1();
ComplexMatrix three_qubit_k2();

// F₁, F₂ as above, H = 0; protected block span{|000⟩, |001⟩}.
Scenario build_three_qubit_example(const ThreeQubitExampleParams& params);

// F = Σ σ_z^(i), H = 0, n ∈ {2, 3, 4}. The protected block is the eigenspace of
// F with the smallest |eigenvalue| (the +1 space for odd n).
Scenario build_collective_dephasing(std::size_t n_qubits);

} // namespace dfskit
