#include "dfskit/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <string>
#include <thread>

#include "dfskit/certify.hpp"
#include "dfskit/errors.hpp"
#include "dfskit/tolerances.hpp"

namespace dfskit {

namespace {

struct Grid {
    std::size_t steps;
    double dt;
};

Grid make_grid(double t_final, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ContractViolation("integrator: dt must be positive and finite");
    }
    if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
        throw ContractViolation("integrator: t_final must be non-negative and finite");
    }
    if (t_final == 0.0) {
        return Grid{0, dt};
    }
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(t_final / dt - 1e-9)));
    return Grid{steps, t_final / static_cast<double>(steps)};
}

void require_state(const DensityState& rho0, std::size_t dim, const HilbertLayout& layout) {
    if (rho0.dim() != dim) {
        throw ShapeError("integrator: state dimension " + std::to_string(rho0.dim()) +
                         " does not match model dimension " + std::to_string(dim));
    }
    if (layout.total_dim() != dim) {
        throw ShapeError("integrator: layout dimension does not match model dimension");
    }
}

// Protected-block unitarity against V(t) = exp(−i h t), with h diagonalized once.
class BlockMonitor {
public:
    BlockMonitor(const ComplexMatrix& rho0, const HilbertLayout& layout, const ComplexMatrix& h)
        : layout_(layout), rho0_(protected_state(rho0, layout)) {
        const auto k = static_cast<Eigen::Index>(layout.ns_dim());
        if (h.rows() != k || h.cols() != k) {
            throw ShapeError("monitor: h_dfs must be " + std::to_string(k) + " square");
        }
        const HermitianEigen e = hermitian_eig(h);
        q_ = e.vectors;
        lambda_ = e.values;
        rho0_eig_ = q_.adjoint() * rho0_ * q_;
    }

    bool zero_block() const { return rho0_.norm() == 0.0; }

    void push(double t, const ComplexMatrix& rho, std::vector<double>& residuals, std::vector<double>& traces) const {
        const ComplexMatrix block = protected_state(rho, layout_);
        const auto k = lambda_.size();
        ComplexMatrix evolved(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            for (Eigen::Index j = 0; j < k; ++j) {
                evolved(i, j) = rho0_eig_(i, j) * std::exp(Complex(0.0, -(lambda_(i) - lambda_(j)) * t));
            }
        }
        const ComplexMatrix diff = block - q_ * evolved * q_.adjoint();
        residuals.push_back(norm(diff, NormKind::trace));
        traces.push_back(block.trace().real());
    }

private:
    const HilbertLayout& layout_;
    ComplexMatrix rho0_;
    ComplexMatrix q_;
    RealVector lambda_;
    ComplexMatrix rho0_eig_;
};

class Recorder {
public:
    Recorder(EvolutionTrace& trace, const ComplexMatrix& rho0, const HilbertLayout& layout,
             const IntegrationOptions& options, const ComplexMatrix& hamiltonian)
        : trace_(trace), tr0_(rho0.trace().real()) {
        if (options.monitor) {
            const ComplexMatrix h = options.h_dfs ? *options.h_dfs : implied_block_hamiltonian(hamiltonian, layout);
            monitor_.emplace(rho0, layout, h);
            if (monitor_->zero_block()) {
                trace_.warnings.push_back("protected block of the initial state is zero; unitarity not monitored");
                monitor_.reset();
            }
        }
    }

    void record(double t, ComplexMatrix rho) {
        rho = 0.5 * (rho + rho.adjoint()).eval();
        trace_.times.push_back(t);
        trace_.trace_drift.push_back(std::abs(rho.trace().real() - tr0_));
        auto state = DensityState::unchecked(std::move(rho));
        trace_.min_eigenvalue.push_back(state.min_eigenvalue());
        if (monitor_) {
            monitor_->push(t, state.matrix(), trace_.dfs_unitarity_residual, trace_.dfs_block_trace);
        }
        trace_.states.push_back(std::move(state));
    }

private:
    EvolutionTrace& trace_;
    double tr0_;
    std::optional<BlockMonitor> monitor_;
};

bool keep(std::size_t step, std::size_t steps, std::size_t stride) {
    return step == steps || step % stride == 0;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

ComplexMatrix protected_state(const ComplexMatrix& rho, const HilbertLayout& layout) {
    const BlockPartition b = partition(rho, layout);
    if (layout.in_dim() == 1) {
        return b.p;
    }
    return partial_trace_in(b.p, layout.ns_dim(), layout.in_dim());
}

ComplexMatrix implied_block_hamiltonian(const ComplexMatrix& hamiltonian, const HilbertLayout& layout) {
    const BlockPartition b = partition(hamiltonian, layout);
    if (layout.in_dim() == 1) {
        return 0.5 * (b.p + b.p.adjoint());
    }
    const ComplexMatrix h = kronecker_sum_split(b.p, layout.ns_dim(), layout.in_dim()).h_ns;
    return 0.5 * (h + h.adjoint());
}

// ---------------------------------------------------------------- Lindblad

EvolutionTrace integrate_lindblad(const LindbladModel& model, const DensityState& rho0, double t_final, double dt,
                                  const HilbertLayout& layout, const IntegrationOptions& options) {
    require_state(rho0, model.dim(), layout);
    const Grid grid = make_grid(t_final, dt);
    const ComplexMatrix g = full_generator(model);
    const double gnorm = norm(g, NormKind::spectral);
    if (grid.dt * gnorm > 0.1) {
        throw ContractViolation("integrate_lindblad: stability guard violated, dt·‖G‖ = " +
                                std::to_string(grid.dt * gnorm) + " > 0.1");
    }
    // RK4 on a linear autonomous system is exactly one step of the degree-4
    // Taylor polynomial of exp(dt·G).
    const auto n2 = g.rows();
    const ComplexMatrix hg = grid.dt * g;
    ComplexMatrix step = ComplexMatrix::Identity(n2, n2);
    ComplexMatrix term = ComplexMatrix::Identity(n2, n2);
    for (int k = 1; k <= 4; ++k) {
        term = (term * hg / static_cast<double>(k)).eval();
        step += term;
    }

    EvolutionTrace trace(layout);
    trace.dt = grid.dt;
    const std::size_t stride = std::max<std::size_t>(1, options.record_stride);
    Recorder rec(trace, rho0.matrix(), layout, options, model.hamiltonian());
    const auto n = static_cast<std::size_t>(rho0.dim());
    ComplexVector y = vec(rho0.matrix());
    rec.record(0.0, rho0.matrix());
    for (std::size_t s = 1; s <= grid.steps; ++s) {
        y = step * y;
        if (keep(s, grid.steps, stride)) {
            rec.record(static_cast<double>(s) * grid.dt, unvec(y, n));
        }
    }
    return trace;
}

// ---------------------------------------------------------------- memory kernel

EvolutionTrace integrate_memory_kernel(const MemoryKernelModel& model, const DensityState& rho0, double t_final,
                                       double dt, const HilbertLayout& layout, const IntegrationOptions& options) {
    const LindbladModel& base = model.base;
    require_state(rho0, base.dim(), layout);
    const Grid grid = make_grid(t_final, dt);
    const double h = grid.dt;
    const ComplexMatrix lind = lindblad_generator(base);
    const ComplexMatrix ham = hamiltonian_generator(base.hamiltonian());
    const double guard = h * (norm(base.hamiltonian(), NormKind::spectral) + norm(lind, NormKind::spectral));
    if (guard > 0.05) {
        throw ContractViolation("integrate_memory_kernel: stability guard violated, dt·(‖H‖+‖𝓛‖) = " +
                                std::to_string(guard) + " > 0.05");
    }
    const auto n2 = lind.rows();
    const ComplexMatrix exp_ham = matrix_exp(ham, h);  // e^{hA}
    const ComplexMatrix exp_lind = matrix_exp(lind, h); // e^{h𝓛}
    const ComplexMatrix exp_ham_lind = exp_ham * lind;
    const double k0 = model.kernel(0.0);
    const Eigen::PartialPivLU<ComplexMatrix> implicit(ComplexMatrix::Identity(n2, n2) - (0.25 * h * h * k0) * lind);

    // Exponential and constant kernels satisfy k(jh) e^{jh𝓛} = a P^j with
    // P = e^{h(𝓛 − λ)}, so the memory sum obeys a one-step recursion.
    std::optional<double> rate;
    double amplitude = 0.0;
    if (const auto* e = std::get_if<ExponentialKernel>(&model.kernel.kind())) {
        rate = e->lambda;
        amplitude = e->lambda;
    } else if (const auto* c = std::get_if<ConstantKernel>(&model.kernel.kind())) {
        rate = 0.0;
        amplitude = c->value;
    }
    const ComplexMatrix decay = rate ? ComplexMatrix(std::exp(-*rate * h) * exp_lind) : ComplexMatrix();

    std::vector<double> k;
    if (!rate) {
        k.resize(grid.steps + 1);
        for (std::size_t j = 0; j <= grid.steps; ++j) {
            k[j] = model.kernel(static_cast<double>(j) * h);
        }
    }

    EvolutionTrace trace(layout);
    trace.dt = h;
    const std::size_t stride = std::max<std::size_t>(1, options.record_stride);
    Recorder rec(trace, rho0.matrix(), layout, options, base.hamiltonian());
    const auto n = static_cast<std::size_t>(rho0.dim());
    rec.record(0.0, rho0.matrix());

    // Before step s, history[j] = e^{j h 𝓛} y_{s−1−j}, newest first. Propagating
    // the history by e^{h𝓛} each step avoids caching e^{j h 𝓛} for every j.
    std::deque<ComplexVector> history;
    ComplexVector y = vec(rho0.matrix());
    if (!rate) {
        history.push_front(y);
    }
    // Recursive form: sum_s = Σ_{j=1..s} a P^j y_{s−j}, oldest_s = P^s y_0.
    ComplexVector sum = ComplexVector::Zero(n2);
    ComplexVector oldest = y;
    ComplexVector memory = ComplexVector::Zero(n2); // m_0 = 0
    bool warned = false;

    for (std::size_t s = 1; s <= grid.steps; ++s) {
        const ComplexVector y_prev = y;
        // Trapezoid for m_s = h Σ_j w_j k_j e^{j h 𝓛} y_{s−j}, without the implicit j = 0 term.
        ComplexVector partial;
        if (rate) {
            sum = decay * (amplitude * y_prev + sum);
            oldest = decay * oldest;
            partial = h * (sum - (0.5 * amplitude) * oldest);
        } else {
            for (auto& zj : history) {
                zj = exp_lind * zj;
            }
            partial = ComplexVector::Zero(n2);
            for (std::size_t j = 1; j <= history.size(); ++j) {
                const double w = (j == s) ? 0.5 : 1.0;
                partial += (w * k[j]) * history[j - 1];
            }
            partial *= h;
        }
        // y_s = e^{hA} y_{s−1} + (h/2)(e^{hA} 𝓛 m_{s−1} + 𝓛 m_s), with m_s = partial + (h/2) k_0 y_s.
        const ComplexVector rhs = exp_ham * y_prev + (0.5 * h) * (exp_ham_lind * memory + lind * partial);
        y = implicit.solve(rhs);
        memory = partial + (0.5 * h * k0) * y;
        if (!rate) {
            history.push_front(y);
        }

        if (keep(s, grid.steps, stride)) {
            rec.record(static_cast<double>(s) * h, unvec(y, n));
            if (!warned && trace.min_eigenvalue.back() < -1e-6) {
                trace.warnings.push_back("state lost positivity at t = " + std::to_string(trace.times.back()) +
                                         " (min eigenvalue " + std::to_string(trace.min_eigenvalue.back()) + ")");
                warned = true;
            }
        }
    }
    return trace;
}


// ---------------------------------------------------------------- monitor

UnitarityMonitor monitor_dfs_unitarity(const EvolutionTrace& trace, const std::optional<ComplexMatrix>& h_dfs) {
    if (trace.states.empty()) {
        throw ContractViolation("monitor_dfs_unitarity: empty trace");
    }
    const HilbertLayout& layout = trace.layout;
    const ComplexMatrix rho0 = protected_state(trace.states.front().matrix(), layout);
    if (rho0.norm() == 0.0) {
        throw ContractViolation("monitor_dfs_unitarity: protected block of the initial state is zero");
    }
    ComplexMatrix h;
    if (h_dfs) {
        h = *h_dfs;
    } else {
        if (trace.states.size() < 2) {
            throw ContractViolation("monitor_dfs_unitarity: fitting h needs at least two samples");
        }
        const double step = trace.times[1] - trace.times[0];
        std::vector<ComplexMatrix> r;
        for (std::size_t i = 0; i < std::min<std::size_t>(4, trace.states.size()); ++i) {
            r.push_back(protected_state(trace.states[i].matrix(), layout));
        }
        ComplexMatrix d1;
        std::optional<ComplexMatrix> d2;
        if (r.size() == 4) {
            d1 = (-11.0 * r[0] + 18.0 * r[1] - 9.0 * r[2] + 2.0 * r[3]) / (6.0 * step);
            d2 = (2.0 * r[0] - 5.0 * r[1] + 4.0 * r[2] - r[3]) / (step * step);
        } else if (r.size() == 3) {
            d1 = (-3.0 * r[0] + 4.0 * r[1] - r[2]) / (2.0 * step);
            d2 = (r[0] - 2.0 * r[1] + r[2]) / (step * step);
        } else {
            d1 = (r[1] - r[0]) / step;
        }
        // ρ′ = −i[h, ρ]: vec form −i(ρᵀ ⊗ I − I ⊗ ρ) vec(h), minimum-norm solve.
        const auto k = rho0.rows();
        const ComplexMatrix id = ComplexMatrix::Identity(k, k);
        const ComplexMatrix m = Complex(0.0, -1.0) * (kron(rho0.transpose(), id) - kron(id, rho0));
        const ComplexVector sol = m.completeOrthogonalDecomposition().solve(vec(d1));
        ComplexMatrix fitted = unvec(sol, static_cast<std::size_t>(k));
        fitted = 0.5 * (fitted + fitted.adjoint()).eval();
        if (d2) {
            // ρ′ leaves the part of h commuting with ρ(0) undetermined; ρ″ = −[h, [h, ρ]] is linear in it.
            const ComplexMatrix null = nullspace(m, tol::nullspace_rank_cut);
            if (null.cols() > 0) {
                const ComplexMatrix inner = commutator(fitted, rho0);
                const ComplexMatrix target = *d2 + commutator(fitted, inner);
                ComplexMatrix design(k * k, null.cols());
                for (Eigen::Index j = 0; j < null.cols(); ++j) {
                    const ComplexMatrix dj = unvec(null.col(j), static_cast<std::size_t>(k));
                    design.col(j) = vec(ComplexMatrix(-commutator(dj, inner)));
                }
                const ComplexVector coef = design.completeOrthogonalDecomposition().solve(vec(target));
                fitted += unvec(null * coef, static_cast<std::size_t>(k));
            }
        }
        h = 0.5 * (fitted + fitted.adjoint());
    }
    BlockMonitor monitor(trace.states.front().matrix(), layout, h);
    UnitarityMonitor out;
    out.h_dfs = h;
    for (std::size_t i = 0; i < trace.states.size(); ++i) {
        monitor.push(trace.times[i], trace.states[i].matrix(), out.residuals, out.block_trace);
    }
    return out;
}

// ---------------------------------------------------------------- trajectories

TrajectoryAverage sample_trajectories(const LindbladModel& model, const ComplexVector& psi0, double t_final,
                                      double tau, std::size_t n_traj, std::uint64_t seed, std::size_t threads) {
    if (static_cast<std::size_t>(psi0.size()) != model.dim()) {
        throw ShapeError("sample_trajectories: state vector length does not match model dimension");
    }
    if (n_traj == 0) {
        throw ContractViolation("sample_trajectories: n_traj must be positive");
    }
    const double psi_norm = psi0.norm();
    if (!(psi_norm > 0.0) || !std::isfinite(psi_norm)) {
        throw InvariantError("sample_trajectories: initial state must be finite and nonzero");
    }
    const JumpDiscretization jumps = jump_discretize(model, tau);
    const Grid grid = make_grid(t_final, tau);
    if (std::abs(grid.dt - tau) > 1e-12 * tau) {
        // Re-discretize on the shrunken step so the grid ends at t_final.
        return sample_trajectories(model, psi0, static_cast<double>(grid.steps) * grid.dt, grid.dt, n_traj, seed,
                                   threads);
    }
    const auto n = psi0.size();
    const auto& ops = jumps.kraus.operators();
    const ComplexVector start = psi0 / psi_norm;

    // Fixed chunking, independent of the worker count, keeps the reduction order stable.
    constexpr std::size_t chunks = 64;
    struct Partial {
        ComplexMatrix rho;
        RealVector pop_sq;
    };
    std::vector<Partial> partial(chunks, Partial{ComplexMatrix::Zero(n, n), RealVector::Zero(n)});

    auto run_chunk = [&](std::size_t c) {
        const std::size_t begin = n_traj * c / chunks;
        const std::size_t end = n_traj * (c + 1) / chunks;
        std::vector<double> probs(ops.size());
        std::vector<ComplexVector> cand(ops.size());
        for (std::size_t i = begin; i < end; ++i) {
            std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i))));
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            ComplexVector psi = start;
            for (std::size_t s = 0; s < grid.steps; ++s) {
                double total = 0.0;
                for (std::size_t b = 0; b < ops.size(); ++b) {
                    cand[b] = ops[b] * psi;
                    probs[b] = cand[b].squaredNorm();
                    total += probs[b];
                }
                double r = uni(rng) * total;
                std::size_t pick = ops.size() - 1;
                for (std::size_t b = 0; b < ops.size(); ++b) {
                    if (r < probs[b]) {
                        pick = b;
                        break;
                    }
                    r -= probs[b];
                }
                while (probs[pick] == 0.0 && pick > 0) {
                    --pick;
                }
                psi = cand[pick] / std::sqrt(probs[pick]);
            }
            partial[c].rho.noalias() += psi * psi.adjoint();
            partial[c].pop_sq += psi.cwiseAbs2().cwiseAbs2();
        }
    };

    std::size_t workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    workers = std::min(workers, chunks);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t c = w; c < chunks; c += workers) {
                run_chunk(c);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }

    ComplexMatrix rho = ComplexMatrix::Zero(n, n);
    RealVector pop_sq = RealVector::Zero(n);
    for (const auto& p : partial) {
        rho += p.rho;
        pop_sq += p.pop_sq;
    }
    const double count = static_cast<double>(n_traj);
    rho /= count;
    rho = 0.5 * (rho + rho.adjoint()).eval();
    const RealVector mean = rho.diagonal().real();
    RealVector stderr_pop(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double var = std::max(0.0, pop_sq(i) / count - mean(i) * mean(i));
        stderr_pop(i) = std::sqrt(var / count);
    }
    return TrajectoryAverage{DensityState::unchecked(std::move(rho)), stderr_pop, n_traj, grid.steps};
}

// ---------------------------------------------------------------- leakage

double delta_leak(const DensityState& rho_actual, const DensityState& rho_ideal, const ComplexMatrix& u_dfs,
                  const HilbertLayout& layout, NormKind kind) {
    const std::size_t n = layout.total_dim();
    if (rho_actual.dim() != n || rho_ideal.dim() != n) {
        throw ShapeError("delta_leak: state dimension does not match layout");
    }
    const auto k = static_cast<Eigen::Index>(layout.protected_dim());
    if (u_dfs.rows() != k || u_dfs.cols() != k) {
        throw ShapeError("delta_leak: u_dfs must be " + std::to_string(k) + " square");
    }
    if ((u_dfs.adjoint() * u_dfs - ComplexMatrix::Identity(k, k)).norm() > 1e-10 * std::sqrt(static_cast<double>(k))) {
        throw ContractViolation("delta_leak: u_dfs is not unitary");
    }
    const BlockPartition ideal = partition(rho_ideal.matrix(), layout);
    const double outside = std::sqrt(ideal.a.squaredNorm() + ideal.d.squaredNorm() + ideal.b.squaredNorm());
    if (outside > 1e-12) {
        throw ContractViolation("delta_leak: ideal state has support outside the protected block (" +
                                std::to_string(outside) + ")");
    }
    const ComplexMatrix diff = layout.to_block_order(ComplexMatrix(rho_actual.matrix() - rho_ideal.matrix()));
    ComplexMatrix u = ComplexMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    u.topLeftCorner(k, k) = u_dfs;
    return norm(u * diff * u.adjoint(), kind);
}

} // namespace dfskit
