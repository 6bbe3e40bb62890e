#include "dfskit/channels.hpp"

#include <cmath>
#include <string>

#include "dfskit/errors.hpp"
#include "dfskit/models.hpp"

namespace dfskit {

KrausSet::KrausSet(std::vector<ComplexMatrix> operators) : dim_(0), operators_(std::move(operators)) {
    if (operators_.empty()) {
        throw ShapeError("KrausSet: at least one operator is required");
    }
    const auto n = operators_.front().rows();
    if (n == 0) {
        throw ShapeError("KrausSet: operators must be non-empty");
    }
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    for (std::size_t k = 0; k < operators_.size(); ++k) {
        const ComplexMatrix& e = operators_[k];
        if (e.rows() != n || e.cols() != n) {
            throw ShapeError("KrausSet: operator " + std::to_string(k) + " is " + std::to_string(e.rows()) +
                             "x" + std::to_string(e.cols()) + ", expected " + std::to_string(n) + " square");
        }
        if (!all_finite(e)) {
            throw InvariantError("KrausSet: operator " + std::to_string(k) + " has non-finite entries");
        }
        sum.noalias() += e.adjoint() * e;
    }
    dim_ = static_cast<std::size_t>(n);
    tp_residual_ = (sum - ComplexMatrix::Identity(n, n)).norm();
}

void KrausSet::require_valid(double tol) const {
    if (tp_residual_ > tol) {
        throw ContractViolation("KrausSet: not trace preserving, tp_residual = " + std::to_string(tp_residual_));
    }
}

// ---------------------------------------------------------------- states

DensityState DensityState::make(ComplexMatrix m) {
    require_square(m, "DensityState");
    if (m.rows() == 0) {
        throw ShapeError("DensityState: empty matrix");
    }
    if (!all_finite(m)) {
        throw InvariantError("DensityState: non-finite entries");
    }
    const double herm = hermiticity_defect(m);
    if (herm > tol::hermiticity) {
        throw InvariantError("DensityState: not Hermitian (relative defect " + std::to_string(herm) + ")");
    }
    const Complex tr = m.trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > tol::trace) {
        throw InvariantError("DensityState: trace is " + std::to_string(tr.real()) + ", expected 1");
    }
    DensityState s(std::move(m));
    const double lmin = s.min_eigenvalue();
    if (lmin < tol::positivity_slack) {
        throw InvariantError("DensityState: negative eigenvalue " + std::to_string(lmin));
    }
    return s;
}

DensityState DensityState::unchecked(ComplexMatrix m) {
    require_square(m, "DensityState");
    return DensityState(std::move(m));
}

DensityState DensityState::pure(const ComplexVector& psi) {
    const double n = psi.norm();
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw InvariantError("DensityState: state vector must be finite and nonzero");
    }
    const ComplexVector v = psi / n;
    return DensityState(v * v.adjoint());
}

DensityState DensityState::maximally_mixed(std::size_t n) {
    if (n == 0) {
        throw ShapeError("DensityState: dimension must be positive");
    }
    return DensityState(identity(n) / static_cast<double>(n));
}

double DensityState::min_eigenvalue() const {
    const ComplexMatrix h = 0.5 * (matrix_ + matrix_.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

// ---------------------------------------------------------------- maps

ComplexMatrix apply_map(const KrausSet& channel, const ComplexMatrix& x) {
    const auto n = static_cast<Eigen::Index>(channel.dim());
    if (x.rows() != n || x.cols() != n) {
        throw ShapeError("apply: operand dimension " + std::to_string(x.rows()) + " does not match channel dimension " +
                         std::to_string(n));
    }
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    for (const auto& e : channel.operators()) {
        out.noalias() += e * x * e.adjoint();
    }
    return out;
}

DensityState apply(const KrausSet& channel, const DensityState& state, double tp_tol) {
    channel.require_valid(tp_tol);
    ComplexMatrix out = apply_map(channel, state.matrix());
    // Remove the rounding-level anti-Hermitian part.
    out = 0.5 * (out + out.adjoint()).eval();
    return DensityState::unchecked(std::move(out));
}

UnitalityResult is_unital(const KrausSet& channel, double tol) {
    const auto n = static_cast<Eigen::Index>(channel.dim());
    ComplexMatrix sum = ComplexMatrix::Zero(n, n);
    for (const auto& e : channel.operators()) {
        sum.noalias() += e * e.adjoint();
    }
    const double r = (sum - ComplexMatrix::Identity(n, n)).norm();
    return UnitalityResult{r <= tol, r};
}

Commutant fixed_point_commutant(const KrausSet& channel) {
    channel.require_valid();
    const UnitalityResult u = is_unital(channel);
    if (!u.unital) {
        throw ContractViolation("fixed_point_commutant: channel is not unital (residual " + std::to_string(u.residual) +
                                "); fixed points need not form the commutant");
    }
    const auto n = static_cast<Eigen::Index>(channel.dim());
    const auto n2 = n * n;
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    const auto k = static_cast<Eigen::Index>(channel.size());
    // vec(TE − ET) = (Eᵀ ⊗ I − I ⊗ E) vec(T), for each E_α and E_α†.
    ComplexMatrix stacked(2 * k * n2, n2);
    for (Eigen::Index a = 0; a < k; ++a) {
        const ComplexMatrix& e = channel[static_cast<std::size_t>(a)];
        const ComplexMatrix ed = e.adjoint();
        stacked.middleRows(2 * a * n2, n2) = kron(e.transpose(), id) - kron(id, e);
        stacked.middleRows((2 * a + 1) * n2, n2) = kron(ed.transpose(), id) - kron(id, ed);
    }
    const ComplexMatrix null = nullspace(stacked, tol::nullspace_rank_cut);
    Commutant out;
    out.dimension = static_cast<std::size_t>(null.cols());
    out.basis.reserve(out.dimension);
    for (Eigen::Index c = 0; c < null.cols(); ++c) {
        out.basis.push_back(unvec(null.col(c), static_cast<std::size_t>(n)));
    }
    return out;
}

JumpDiscretization jump_discretize(const LindbladModel& model, double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw ContractViolation("jump_discretize: tau must be positive and finite");
    }
    const ComplexMatrix hc = conditional_hamiltonian(model);
    const double guard = tau * norm(hc, NormKind::spectral);
    if (guard >= 0.1) {
        throw ContractViolation("jump_discretize: tau too large, ‖τ H_c‖ = " + std::to_string(guard) +
                                " (must be < 0.1)");
    }
    const auto n = static_cast<Eigen::Index>(model.dim());
    std::vector<ComplexMatrix> ops;
    ops.reserve(model.lindblad_ops().size() + 1);
    ops.push_back(ComplexMatrix::Identity(n, n) - Complex(0.0, tau) * hc);
    const double s = std::sqrt(tau);
    for (const auto& f : model.lindblad_ops()) {
        ops.push_back(s * f);
    }
    KrausSet kraus(std::move(ops));
    const double r = kraus.tp_residual();
    return JumpDiscretization{std::move(kraus), tau, r, r / (tau * tau)};
}

} // namespace dfskit
