// channels.hpp: Kraus representation of CP maps

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "dfskit/linalg.hpp"
#include "dfskit/tolerances.hpp"

namespace dfskit {

class LindbladModel;

// A list of equally sized square operators E_α. Construction checks shapes and
// finiteness only; trace preservation is measured (tp_residual) and enforced
// by the operations that need a valid channel, so that checkers can still
// inspect perturbed, slightly non-TP inputs.
class KrausSet {
public:
    explicit KrausSet(std::vector<ComplexMatrix> operators);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return operators_.size(); }
    const std::vector<ComplexMatrix>& operators() const noexcept { return operators_; }
    const ComplexMatrix& operator[](std::size_t k) const { return operators_[k]; }

    // ‖Σ E†E − I‖_F
    double tp_residual() const noexcept { return tp_residual_; }
    bool is_trace_preserving(double tol = tol::channel_tp) const noexcept { return tp_residual_ <= tol; }

    // Throws ContractViolation when tp_residual exceeds tol.
    void require_valid(double tol = tol::channel_tp) const;

private:
    std::size_t dim_;
    std::vector<ComplexMatrix> operators_;
    double tp_residual_;
};

class DensityState {
public:
    // Validating factory: Hermitian, unit trace, min eigenvalue ≥ positivity slack.
    static DensityState make(ComplexMatrix m);
    // Skips validation; for states produced by integrators, whose deviations
    // are reported separately (trace drift, min eigenvalue).
    static DensityState unchecked(ComplexMatrix m);
    static DensityState pure(const ComplexVector& psi);
    static DensityState maximally_mixed(std::size_t n);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
    const ComplexMatrix& matrix() const noexcept { return matrix_; }
    double min_eigenvalue() const;

private:
    explicit DensityState(ComplexMatrix m) : matrix_(std::move(m)) {}
    ComplexMatrix matrix_;
};

// Σ E ρ E†. Throws ShapeError on dimension mismatch and ContractViolation
// when the channel is not trace preserving within tp_tol.
DensityState apply(const KrausSet& channel, const DensityState& state, double tp_tol = tol::channel_tp);
// Same map on an arbitrary operator, no validation of the channel.
ComplexMatrix apply_map(const KrausSet& channel, const ComplexMatrix& x);

struct UnitalityResult {
    bool unital;
    double residual; // ‖Σ E E† − I‖_F
};

UnitalityResult is_unital(const KrausSet& channel, double tol = tol::unital);

struct Commutant {
    std::vector<ComplexMatrix> basis; // Frobenius-orthonormal
    std::size_t dimension;
};

// Basis of {T : [T, E_α] = 0 = [T, E_α†] ∀α}. Requires a unital channel.
Commutant fixed_point_commutant(const KrausSet& channel);

struct JumpDiscretization {
    KrausSet kraus;                // W₀, then W_β = √τ F_β
    double tau;
    double tp_residual;            // ‖Σ W†W − I‖_F
    double second_order_constant;  // tp_residual / τ²
};

// First-order quantum-jump Kraus set. Requires ‖τ H_c‖₂ < 0.1.
JumpDiscretization jump_discretize(const LindbladModel& model, double tau);

} // namespace dfskit
