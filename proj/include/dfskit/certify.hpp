// certify.hpp: block-structure certificates for DFS / NS decompositions
//
// Every checker partitions the operators under a HilbertLayout, fits the gauge
// data the structure conditions call for (U, c_α, C_α) and reports one residual
// per condition. Residuals over α are aggregated as root-sum-square. Verdicts
// use the relative figure: absolute / scale of the containing operators.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dfskit/channels.hpp"
#include "dfskit/linalg.hpp"
#include "dfskit/models.hpp"
#include "dfskit/tolerances.hpp"

namespace dfskit {

enum class Verdict { pass, fail };
enum class Init { perfect, imperfect };

const char* to_string(Verdict v) noexcept;
const char* to_string(Init i) noexcept;
Init parse_init(const std::string& s);

struct Residual {
    std::string label;
    double absolute;
    double relative;
    bool gating = true; // informational residuals do not enter the verdict
};

struct CheckReport {
    Verdict verdict = Verdict::fail;
    std::string regime;
    std::vector<Residual> residuals;
    std::optional<ComplexMatrix> fitted_unitary;
    std::optional<std::vector<Complex>> fitted_scalars;
    std::optional<std::vector<ComplexMatrix>> fitted_right_factors;
    double tolerance = tol::check;

    bool passed() const noexcept { return verdict == Verdict::pass; }
    // nullptr when the label is absent.
    const Residual* find(const std::string& label) const noexcept;
    // Throws std::out_of_range when the label is absent.
    const Residual& at(const std::string& label) const;
    // Labels of gating residuals above tolerance, in report order.
    std::vector<std::string> failing() const;
};

// ---- CP maps

CheckReport check_cp_dfs_imperfect(const KrausSet& channel, const HilbertLayout& layout, double tol = tol::check);
CheckReport check_cp_dfs_perfect(const KrausSet& channel, const HilbertLayout& layout, double tol = tol::check);
CheckReport check_cp_ns_imperfect(const KrausSet& channel, const HilbertLayout& layout, double tol = tol::check);
CheckReport check_cp_ns_perfect(const KrausSet& channel, const HilbertLayout& layout, double tol = tol::check);

// ---- Markovian

CheckReport check_markov_dfs(const LindbladModel& model, const HilbertLayout& layout, Init init,
                             double tol = tol::check);
CheckReport check_markov_ns(const LindbladModel& model, const HilbertLayout& layout, Init init,
                            double tol = tol::check);
// The pre-existing condition: scalar action F_α|i⟩ = c_α|i⟩ on the block plus
// a Hamiltonian that does not mix the block with its complement.
CheckReport check_markov_dfs_legacy(const LindbladModel& model, const HilbertLayout& layout,
                                    double tol = tol::check);

// ---- memory kernel

CheckReport check_nonmarkov_dfs(const MemoryKernelModel& model, const HilbertLayout& layout, Init init,
                                double tol = tol::check);
CheckReport check_nonmarkov_ns(const MemoryKernelModel& model, const HilbertLayout& layout, Init init,
                               double tol = tol::check);

// ---- shared fits

struct KroneckerSumSplit {
    ComplexMatrix h_ns;    // acts on NS
    ComplexMatrix h_in;    // traceless, acts on in
    double residual;       // ‖X − (h_ns ⊗ I + I ⊗ h_in)‖_F
};

// Orthogonal projection of X (on NS⊗in) onto {A⊗I + I⊗B}.
KroneckerSumSplit kronecker_sum_split(const ComplexMatrix& x, std::size_t ns_dim, std::size_t in_dim);

} // namespace dfskit
