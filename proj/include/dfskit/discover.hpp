// discover.hpp: DFS candidate search and decoherence-free fixed points

#pragma once

#include <map>
#include <string>
#include <vector>

#include "dfskit/channels.hpp"
#include "dfskit/linalg.hpp"
#include "dfskit/models.hpp"
#include "dfskit/tolerances.hpp"

namespace dfskit {

// A joint eigenspace of all Lindblad operators: F_α v = c_α v on span(basis).
struct DfsCandidate {
    ComplexMatrix basis;                  // orthonormal columns
    std::vector<Complex> eigen_scalars;   // c_α, in operator order
    std::map<std::string, bool> flags;    // "imperfect" / "perfect": Markov DFS verdicts

    std::size_t dim() const noexcept { return static_cast<std::size_t>(basis.cols()); }
    // Candidate first, orthogonal complement after.
    HilbertLayout layout() const;
};

struct DiscoveryOptions {
    bool include_one_dimensional = false;
    double tol = tol::check; // passed to the Hamiltonian-condition checks
};

// Sorted by dimension (descending), then by the eigenvalue tuple (lexicographic
// on real, then imaginary parts). Only true eigenvectors enter; generalized
// eigenvectors of defective operators are not considered.
std::vector<DfsCandidate> find_dfs_candidates(const LindbladModel& model, const DiscoveryOptions& options = {});

struct FixedPointStates {
    std::vector<DensityState> states;       // representative I/n first
    std::vector<ComplexMatrix> basis;       // Hermitian, Frobenius-orthonormal basis of Fix(Φ)
    double max_offdiag_block = 0.0;         // largest ‖A‖, ‖D‖ of a returned state under the layout
};

// Fixed-point states of a unital channel: the maximally mixed state plus the
// normalized spectral projections of a Hermitian basis of the fixed-point
// algebra. Throws ContractViolation for non-unital channels.
FixedPointStates df_states_of_unital_channel(const KrausSet& channel, const HilbertLayout& layout);

} // namespace dfskit
