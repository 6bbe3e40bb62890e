// models.hpp: Lindblad and memory-kernel dynamics descriptions

#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "dfskit/linalg.hpp"

namespace dfskit {

// H_S together with the Lindblad operators F_α (ħ = 1).
class LindbladModel {
public:
    LindbladModel(ComplexMatrix hamiltonian, std::vector<ComplexMatrix> lindblad_ops);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(hamiltonian_.rows()); }
    const ComplexMatrix& hamiltonian() const noexcept { return hamiltonian_; }
    const std::vector<ComplexMatrix>& lindblad_ops() const noexcept { return ops_; }

private:
    ComplexMatrix hamiltonian_;
    std::vector<ComplexMatrix> ops_;
};

// k(t) = λ e^{−λt}, unit mass on [0, ∞).
struct ExponentialKernel {
    double lambda;
};

struct ConstantKernel {
    double value;
};

// Piecewise linear through (times, values), constant beyond the last sample.
struct TabulatedKernel {
    std::vector<double> times;
    std::vector<double> values;
};

class KernelSpec {
public:
    using Variant = std::variant<ExponentialKernel, ConstantKernel, TabulatedKernel>;

    KernelSpec(ExponentialKernel k);
    KernelSpec(ConstantKernel k);
    KernelSpec(TabulatedKernel k);

    double operator()(double t) const;
    const Variant& kind() const noexcept { return kind_; }
    const char* name() const noexcept;

private:
    Variant kind_;
};

struct MemoryKernelModel {
    LindbladModel base;
    KernelSpec kernel;
};

// H_c = H_S − (i/2) Σ F†F
ComplexMatrix conditional_hamiltonian(const LindbladModel& model);

// Σ F†F
ComplexMatrix dissipation_operator(const LindbladModel& model);

// Matrix of the dissipator ρ ↦ Σ FρF† − ½{F†F, ρ} on column-stacked ρ.
ComplexMatrix lindblad_generator(const LindbladModel& model);

// Matrix of ρ ↦ −i[H, ρ] only.
ComplexMatrix hamiltonian_generator(const ComplexMatrix& hamiltonian);

// Matrix of ρ ↦ −i[H, ρ] + 𝓛[ρ].
ComplexMatrix full_generator(const LindbladModel& model);

// Direct element-wise evaluation of the dissipator; used as a cross-check.
ComplexMatrix apply_dissipator(const LindbladModel& model, const ComplexMatrix& rho);

} // namespace dfskit
