// dynamics.hpp: integrators, DFS unitarity monitoring, jump trajectories, Δ_leak

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dfskit/channels.hpp"
#include "dfskit/linalg.hpp"
#include "dfskit/models.hpp"

namespace dfskit {

struct EvolutionTrace {
    std::vector<double> times;
    std::vector<DensityState> states;
    HilbertLayout layout;
    // Empty when the run was not monitored (zero initial protected block).
    std::vector<double> dfs_unitarity_residual;
    std::vector<double> dfs_block_trace;
    std::vector<double> trace_drift;
    std::vector<double> min_eigenvalue;
    std::vector<std::string> warnings;
    double dt = 0.0;

    explicit EvolutionTrace(HilbertLayout l) : layout(std::move(l)) {}
    std::size_t size() const noexcept { return times.size(); }
};

struct IntegrationOptions {
    // Keep every record_stride-th step (the final step is always kept).
    std::size_t record_stride = 1;
    // Generator of the expected protected-block evolution. Defaults to the
    // protected block of H (its NS factor for subsystem layouts).
    std::optional<ComplexMatrix> h_dfs;
    bool monitor = true;
};

// Fixed-step classical RK4 on the vectorized Lindblad equation.
// Requires dt · ‖generator‖₂ ≤ 0.1. The step count is ceil(t_final/dt); dt is
// shrunk so the grid ends exactly at t_final.
EvolutionTrace integrate_lindblad(const LindbladModel& model, const DensityState& rho0, double t_final, double dt,
                                  const HilbertLayout& layout, const IntegrationOptions& options = {});

// Memory-kernel master equation on a uniform grid. The Hamiltonian part is
// propagated exactly, the outer and the memory integrals use the trapezoid
// rule, the implicit self term is solved with a pre-factored LU. Exponential
// and constant kernels update the memory sum recursively in O(1) per step;
// tabulated kernels keep the full history.
// Requires dt · (‖H‖₂ + ‖𝓛‖₂) ≤ 0.05.
EvolutionTrace integrate_memory_kernel(const MemoryKernelModel& model, const DensityState& rho0, double t_final,
                                       double dt, const HilbertLayout& layout,
                                       const IntegrationOptions& options = {});

struct UnitarityMonitor {
    std::vector<double> residuals;   // ‖ρ_P(t) − V(t) ρ_P(0) V(t)†‖_tr
    std::vector<double> block_trace; // Tr ρ_P(t)
    ComplexMatrix h_dfs;             // generator used for V(t) = exp(−i h t)
};

// ρ_P is the protected block (reduced to NS by Tr_in for subsystem layouts).
// Without h_dfs, h is fitted from the first samples: a minimum-norm solve of
// ρ_P′(0) = −i[h, ρ_P(0)], then the part of h commuting with ρ_P(0) from
// ρ_P″(0) = −[h, [h, ρ_P(0)]] when three or more samples exist. Throws
// ContractViolation when ρ_P(0) = 0.
UnitarityMonitor monitor_dfs_unitarity(const EvolutionTrace& trace,
                                       const std::optional<ComplexMatrix>& h_dfs = std::nullopt);

struct TrajectoryAverage {
    DensityState average;
    RealVector population_std_error; // standard error of each diagonal entry
    std::size_t n_traj;
    std::size_t steps;
};

// Monte Carlo wave-function unraveling with the first-order jump Kraus set.
// Trajectory i draws from a generator seeded by (seed, i), so the result
// does not depend on the number of worker threads.
TrajectoryAverage sample_trajectories(const LindbladModel& model, const ComplexVector& psi0, double t_final,
                                      double tau, std::size_t n_traj, std::uint64_t seed,
                                      std::size_t threads = 0);

// ‖U ρ_actual U† − U ρ_ideal U†‖ with U = U_DFS ⊕ I in block order.
double delta_leak(const DensityState& rho_actual, const DensityState& rho_ideal, const ComplexMatrix& u_dfs,
                  const HilbertLayout& layout, NormKind kind = NormKind::trace);

// Protected block of ρ, reduced over in for subsystem layouts.
ComplexMatrix protected_state(const ComplexMatrix& rho, const HilbertLayout& layout);

// Default h_dfs implied by a Hamiltonian and a layout.
ComplexMatrix implied_block_hamiltonian(const ComplexMatrix& hamiltonian, const HilbertLayout& layout);

} // namespace dfskit
