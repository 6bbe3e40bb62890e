#include "dfskit/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dfskit/errors.hpp"
#include "dfskit/tolerances.hpp"

namespace dfskit {

LindbladModel::LindbladModel(ComplexMatrix hamiltonian, std::vector<ComplexMatrix> lindblad_ops)
    : hamiltonian_(std::move(hamiltonian)), ops_(std::move(lindblad_ops)) {
    require_square(hamiltonian_, "LindbladModel hamiltonian");
    const auto n = hamiltonian_.rows();
    if (n == 0) {
        throw ShapeError("LindbladModel: empty hamiltonian");
    }
    if (!all_finite(hamiltonian_)) {
        throw InvariantError("LindbladModel: hamiltonian has non-finite entries", "/hamiltonian");
    }
    const double herm = hermiticity_defect(hamiltonian_);
    if (herm > tol::hermiticity) {
        throw InvariantError("LindbladModel: hamiltonian is not Hermitian (relative defect " + std::to_string(herm) + ")",
                             "/hamiltonian");
    }
    for (std::size_t k = 0; k < ops_.size(); ++k) {
        const auto& f = ops_[k];
        if (f.rows() != n || f.cols() != n) {
            throw ShapeError("LindbladModel: operator " + std::to_string(k) + " has the wrong shape",
                             "/lindblad_ops/" + std::to_string(k));
        }
        if (!all_finite(f)) {
            throw InvariantError("LindbladModel: operator " + std::to_string(k) + " has non-finite entries",
                                 "/lindblad_ops/" + std::to_string(k));
        }
    }
}

// ---------------------------------------------------------------- kernels

KernelSpec::KernelSpec(ExponentialKernel k) : kind_(k) {
    if (!(k.lambda > 0.0) || !std::isfinite(k.lambda)) {
        throw InvariantError("kernel: exponential lambda must be positive and finite", "/kernel/lambda");
    }
}

KernelSpec::KernelSpec(ConstantKernel k) : kind_(k) {
    if (!std::isfinite(k.value)) {
        throw InvariantError("kernel: constant value must be finite", "/kernel/value");
    }
}

KernelSpec::KernelSpec(TabulatedKernel k) : kind_(std::move(k)) {
    const auto& t = std::get<TabulatedKernel>(kind_);
    if (t.times.empty() || t.times.size() != t.values.size()) {
        throw InvariantError("kernel: tabulated times and values must be non-empty and of equal length", "/kernel");
    }
    if (t.times.front() != 0.0) {
        throw InvariantError("kernel: tabulated times must start at 0", "/kernel/times/0");
    }
    for (std::size_t i = 0; i < t.times.size(); ++i) {
        if (!std::isfinite(t.times[i]) || !std::isfinite(t.values[i])) {
            throw InvariantError("kernel: non-finite tabulated sample", "/kernel/times/" + std::to_string(i));
        }
        if (i > 0 && !(t.times[i] > t.times[i - 1])) {
            throw InvariantError("kernel: tabulated times must be strictly increasing",
                                 "/kernel/times/" + std::to_string(i));
        }
    }
}

double KernelSpec::operator()(double t) const {
    if (const auto* e = std::get_if<ExponentialKernel>(&kind_)) {
        return e->lambda * std::exp(-e->lambda * t);
    }
    if (const auto* c = std::get_if<ConstantKernel>(&kind_)) {
        return c->value;
    }
    const auto& tab = std::get<TabulatedKernel>(kind_);
    if (t <= tab.times.front()) {
        return tab.values.front();
    }
    if (t >= tab.times.back()) {
        return tab.values.back();
    }
    const auto it = std::upper_bound(tab.times.begin(), tab.times.end(), t);
    const auto hi = static_cast<std::size_t>(it - tab.times.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - tab.times[lo]) / (tab.times[hi] - tab.times[lo]);
    return (1.0 - w) * tab.values[lo] + w * tab.values[hi];
}

const char* KernelSpec::name() const noexcept {
    switch (kind_.index()) {
    case 0:
        return "exponential";
    case 1:
        return "constant";
    default:
        return "tabulated";
    }
}

// ---------------------------------------------------------------- generators

ComplexMatrix dissipation_operator(const LindbladModel& model) {
    const auto n = static_cast<Eigen::Index>(model.dim());
    ComplexMatrix g = ComplexMatrix::Zero(n, n);
    for (const auto& f : model.lindblad_ops()) {
        g.noalias() += f.adjoint() * f;
    }
    return g;
}

ComplexMatrix conditional_hamiltonian(const LindbladModel& model) {
    return model.hamiltonian() - Complex(0.0, 0.5) * dissipation_operator(model);
}

ComplexMatrix lindblad_generator(const LindbladModel& model) {
    const auto n = static_cast<Eigen::Index>(model.dim());
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    ComplexMatrix out = ComplexMatrix::Zero(n * n, n * n);
    for (const auto& f : model.lindblad_ops()) {
        out += kron(f.conjugate(), f);
    }
    const ComplexMatrix g = dissipation_operator(model);
    out -= 0.5 * kron(id, g);
    out -= 0.5 * kron(g.transpose(), id);
    return out;
}

ComplexMatrix hamiltonian_generator(const ComplexMatrix& hamiltonian) {
    const auto n = hamiltonian.rows();
    const ComplexMatrix id = ComplexMatrix::Identity(n, n);
    return Complex(0.0, -1.0) * (kron(id, hamiltonian) - kron(hamiltonian.transpose(), id));
}

ComplexMatrix full_generator(const LindbladModel& model) {
    return hamiltonian_generator(model.hamiltonian()) + lindblad_generator(model);
}

ComplexMatrix apply_dissipator(const LindbladModel& model, const ComplexMatrix& rho) {
    const auto n = static_cast<Eigen::Index>(model.dim());
    if (rho.rows() != n || rho.cols() != n) {
        throw ShapeError("apply_dissipator: state dimension does not match model");
    }
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    for (const auto& f : model.lindblad_ops()) {
        const ComplexMatrix ff = f.adjoint() * f;
        out += f * rho * f.adjoint() - 0.5 * (ff * rho + rho * ff);
    }
    return out;
}

} // namespace dfskit
