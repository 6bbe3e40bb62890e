// tolerances.hpp: default numerical thresholds

#pragma once

namespace dfskit::tol {

// ‖m − m†‖_F relative to ‖m‖_F.
inline constexpr double hermiticity = 1e-10;
// |Tr ρ − 1| for density states.
inline constexpr double trace = 1e-10;
// Smallest admissible eigenvalue of a density state.
inline constexpr double positivity_slack = -1e-9;
// Singular values below this fraction of the largest count as zero.
inline constexpr double nullspace_rank_cut = 1e-9;
// ‖Σ E†E − I‖_F above which a Kraus set is not a channel.
inline constexpr double channel_tp = 1e-9;
// ‖Σ E E† − I‖_F above which a channel is not unital.
inline constexpr double unital = 1e-9;
// Relative residual bound used by the certificate checks.
inline constexpr double check = 1e-9;
// Eigenvalue clustering distance for candidate discovery.
inline constexpr double eigen_cluster = 1e-8;
// Trace drift that the fixed-step integrators guarantee over t ≤ 10.
inline constexpr double integrator = 1e-9;

} // namespace dfskit::tol
