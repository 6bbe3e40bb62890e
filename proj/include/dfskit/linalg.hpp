// linalg.hpp: dense complex linear algebra used throughout dfskit
//
// Operators are Eigen::MatrixXcd values. Composite indices of the protected
// block are NS-major: index = ns_index * in_dim + in_index. Superoperators act
// on column-stacked density matrices.

#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace dfskit {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

enum class NormKind { frobenius, trace, spectral };

// Decomposition H_S = H_NS ⊗ H_in ⊕ H_out together with the change of basis that
// takes the user's computational basis into block order [NS⊗in | out].
//
// The change of basis is either a permutation (exact, bitwise block extraction)
// or a unitary frame whose columns are the block-ordered basis vectors written
// in user coordinates.
class HilbertLayout {
public:
    // Trivial permutation.
    HilbertLayout(std::size_t ns_dim, std::size_t in_dim, std::size_t out_dim);
    // permutation[k] is the user basis index placed at block position k.
    HilbertLayout(std::size_t ns_dim, std::size_t in_dim, std::size_t out_dim,
                  std::vector<std::size_t> permutation);

    static HilbertLayout from_frame(std::size_t ns_dim, std::size_t in_dim, std::size_t out_dim,
                                    ComplexMatrix frame);

    std::size_t ns_dim() const noexcept { return ns_dim_; }
    std::size_t in_dim() const noexcept { return in_dim_; }
    std::size_t out_dim() const noexcept { return out_dim_; }
    std::size_t protected_dim() const noexcept { return ns_dim_ * in_dim_; }
    std::size_t total_dim() const noexcept { return ns_dim_ * in_dim_ + out_dim_; }
    bool is_subspace() const noexcept { return in_dim_ == 1; }

    const std::vector<std::size_t>& permutation() const noexcept { return permutation_; }
    const std::optional<ComplexMatrix>& frame() const noexcept { return frame_; }

    // V† m V, with V the block-order basis.
    ComplexMatrix to_block_order(const ComplexMatrix& m) const;
    ComplexMatrix from_block_order(const ComplexMatrix& m) const;
    ComplexVector to_block_order(const ComplexVector& v) const;
    ComplexVector from_block_order(const ComplexVector& v) const;

    // Columns are the block-ordered basis vectors in user coordinates.
    ComplexMatrix basis_matrix() const;

private:
    std::size_t ns_dim_;
    std::size_t in_dim_;
    std::size_t out_dim_;
    std::vector<std::size_t> permutation_;
    std::optional<ComplexMatrix> frame_;
};

// The 2×2 block view (P A; D B) of an operator under a layout.
struct BlockPartition {
    ComplexMatrix p; // protected → protected
    ComplexMatrix a; // out → protected
    ComplexMatrix d; // protected → out
    ComplexMatrix b; // out → out
};

BlockPartition partition(const ComplexMatrix& op, const HilbertLayout& layout);
ComplexMatrix reassemble(const BlockPartition& blocks, const HilbertLayout& layout);

// Tr_in over the NS-major composite index.
ComplexMatrix partial_trace_in(const ComplexMatrix& op, std::size_t ns_dim, std::size_t in_dim);
// Tr_NS over the NS-major composite index.
ComplexMatrix partial_trace_ns(const ComplexMatrix& op, std::size_t ns_dim, std::size_t in_dim);

// exp(scale · m). Normal arguments go through a Schur (= unitary)
// diagonalization, everything else through Padé scaling-and-squaring.
ComplexMatrix matrix_exp(const ComplexMatrix& m, Complex scale = 1.0);

struct HermitianEigen {
    RealVector values;     // ascending
    ComplexMatrix vectors; // orthonormal columns
};

// Throws ContractViolation when ‖m − m†‖_F > tol::hermiticity · ‖m‖_F.
HermitianEigen hermitian_eig(const ComplexMatrix& m);

struct KronFactors {
    ComplexMatrix left;
    ComplexMatrix right;
    double residual; // ‖m − left ⊗ right‖_F
};

// Best Frobenius approximation m ≈ left ⊗ right (Van Loan–Pitsianis
// rearrangement + dominant singular pair). Gauge: ‖left‖_F = 1 and the first
// nonzero entry of left is real positive; the magnitude lives in right.
KronFactors nearest_kron_factor(const ComplexMatrix& m, std::size_t left_dim, std::size_t right_dim);

double norm(const ComplexMatrix& m, NormKind kind = NormKind::frobenius);

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix identity(std::size_t n);

// Column stacking.
ComplexVector vec(const ComplexMatrix& m);
ComplexMatrix unvec(const ComplexVector& v, std::size_t rows);

// Orthonormal basis (columns) of {x : m x = 0}; singular values below
// rank_cut · σ_max count as zero.
ComplexMatrix nullspace(const ComplexMatrix& m, double rank_cut);

// Unitary factor of the polar decomposition m = W·|m|.
ComplexMatrix polar_unitary(const ComplexMatrix& m);

// Orthonormal basis of the orthogonal complement of span(q), q with orthonormal columns.
ComplexMatrix orthonormal_complement(const ComplexMatrix& q);

// ‖m − m†‖_F / ‖m‖_F (0 for the zero matrix).
double hermiticity_defect(const ComplexMatrix& m);
bool all_finite(const ComplexMatrix& m);
void require_square(const ComplexMatrix& m, const char* what);

ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();
// |0⟩⟨1|: the decay |1⟩ → |0⟩.
ComplexMatrix lowering();

} // namespace dfskit
