#include "dfskit/discover.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dfskit/certify.hpp"
#include "dfskit/errors.hpp"

namespace dfskit {

namespace {

// Orthonormal basis of the columns v with ‖m v‖ ≤ threshold (absolute).
ComplexMatrix small_singular_space(const ComplexMatrix& m, double threshold) {
    const auto n = m.cols();
    if (m.rows() == 0 || n == 0) {
        return ComplexMatrix::Identity(n, n);
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (s(k) > threshold) {
            ++rank;
        }
    }
    return svd.matrixV().rightCols(n - rank);
}

std::vector<Complex> cluster_eigenvalues(const ComplexMatrix& f, double tol) {
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(f, false);
    std::vector<Complex> centers;
    std::vector<int> counts;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        const Complex z = solver.eigenvalues()(i);
        bool placed = false;
        for (std::size_t c = 0; c < centers.size(); ++c) {
            if (std::abs(z - centers[c]) <= tol) {
                centers[c] = (centers[c] * static_cast<double>(counts[c]) + z) / static_cast<double>(counts[c] + 1);
                ++counts[c];
                placed = true;
                break;
            }
        }
        if (!placed) {
            centers.push_back(z);
            counts.push_back(1);
        }
    }
    return centers;
}

struct Eigenspaces {
    std::vector<Complex> values;
    std::vector<ComplexMatrix> spaces;
};

Eigenspaces eigenspaces(const ComplexMatrix& f) {
    const double scale = std::max(1.0, f.norm());
    const auto n = f.rows();
    Eigenspaces out;
    for (const Complex c : cluster_eigenvalues(f, tol::eigen_cluster * scale)) {
        ComplexMatrix q = small_singular_space(f - c * ComplexMatrix::Identity(n, n), 1e-9 * scale);
        if (q.cols() > 0) {
            out.values.push_back(c);
            out.spaces.push_back(std::move(q));
        }
    }
    return out;
}

bool tuple_less(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (a[i].real() != b[i].real()) {
            return a[i].real() < b[i].real();
        }
        if (a[i].imag() != b[i].imag()) {
            return a[i].imag() < b[i].imag();
        }
    }
    return a.size() < b.size();
}

} // namespace

HilbertLayout DfsCandidate::layout() const {
    const auto n = basis.rows();
    const auto k = basis.cols();
    ComplexMatrix frame(n, n);
    frame.leftCols(k) = basis;
    frame.rightCols(n - k) = orthonormal_complement(basis);
    return HilbertLayout::from_frame(static_cast<std::size_t>(k), 1, static_cast<std::size_t>(n - k), frame);
}

std::vector<DfsCandidate> find_dfs_candidates(const LindbladModel& model, const DiscoveryOptions& options) {
    const auto& ops = model.lindblad_ops();
    const auto n = static_cast<Eigen::Index>(model.dim());

    struct Partial {
        ComplexMatrix q;
        std::vector<Complex> c;
    };
    std::vector<Partial> current{Partial{ComplexMatrix::Identity(n, n), std::vector<Complex>(ops.size())}};

    std::vector<Eigenspaces> spaces;
    spaces.reserve(ops.size());
    for (const auto& f : ops) {
        spaces.push_back(eigenspaces(f));
    }
    std::vector<std::size_t> order(ops.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return spaces[a].values.size() < spaces[b].values.size(); });

    for (std::size_t alpha : order) {
        const ComplexMatrix& f = ops[alpha];
        const double scale = std::max(1.0, f.norm());
        std::vector<Partial> next;
        for (const auto& part : current) {
            for (std::size_t e = 0; e < spaces[alpha].values.size(); ++e) {
                const Complex c = spaces[alpha].values[e];
                const ComplexMatrix restricted = (f - c * ComplexMatrix::Identity(n, n)) * part.q;
                const ComplexMatrix sub = small_singular_space(restricted, 1e-9 * scale);
                if (sub.cols() == 0) {
                    continue;
                }
                Partial p{part.q * sub, part.c};
                p.c[alpha] = c;
                next.push_back(std::move(p));
            }
        }
        current = std::move(next);
    }

    const std::size_t min_dim = options.include_one_dimensional ? 1 : 2;
    std::vector<DfsCandidate> out;
    for (auto& part : current) {
        if (static_cast<std::size_t>(part.q.cols()) < min_dim) {
            continue;
        }
        // Re-orthonormalize and refine the scalars by Rayleigh quotients.
        Eigen::HouseholderQR<ComplexMatrix> qr(part.q);
        const auto k = part.q.cols();
        DfsCandidate cand;
        cand.basis = qr.householderQ() * ComplexMatrix::Identity(n, k);
        for (std::size_t a = 0; a < ops.size(); ++a) {
            cand.eigen_scalars.push_back((cand.basis.adjoint() * ops[a] * cand.basis).trace() /
                                         static_cast<double>(k));
        }
        out.push_back(std::move(cand));
    }
    std::sort(out.begin(), out.end(), [](const DfsCandidate& a, const DfsCandidate& b) {
        if (a.dim() != b.dim()) {
            return a.dim() > b.dim();
        }
        return tuple_less(a.eigen_scalars, b.eigen_scalars);
    });
    for (auto& cand : out) {
        const HilbertLayout layout = cand.layout();
        cand.flags["imperfect"] = check_markov_dfs(model, layout, Init::imperfect, options.tol).passed();
        cand.flags["perfect"] = check_markov_dfs(model, layout, Init::perfect, options.tol).passed();
    }
    return out;
}

FixedPointStates df_states_of_unital_channel(const KrausSet& channel, const HilbertLayout& layout) {
    if (channel.dim() != layout.total_dim()) {
        throw ShapeError("df_states_of_unital_channel: channel dimension does not match layout");
    }
    const Commutant comm = fixed_point_commutant(channel);
    const auto n = static_cast<Eigen::Index>(channel.dim());

    // Real-linear span of the Hermitian and anti-Hermitian parts, orthonormalized
    // over the reals so that every basis element stays Hermitian.
    std::vector<ComplexMatrix> herm;
    for (const auto& t : comm.basis) {
        herm.push_back(0.5 * (t + t.adjoint()));
        herm.push_back(Complex(0.0, -0.5) * (t - t.adjoint()));
    }
    Eigen::MatrixXd stacked(2 * n * n, static_cast<Eigen::Index>(herm.size()));
    for (std::size_t j = 0; j < herm.size(); ++j) {
        const ComplexVector v = vec(herm[j]);
        stacked.col(static_cast<Eigen::Index>(j)) << v.real(), v.imag();
    }
    FixedPointStates out;
    if (!herm.empty()) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(stacked, Eigen::ComputeThinU);
        const RealVector& s = svd.singularValues();
        const double smax = s.size() > 0 ? s(0) : 0.0;
        for (Eigen::Index k = 0; k < s.size(); ++k) {
            if (s(k) <= tol::nullspace_rank_cut * smax) {
                break;
            }
            const Eigen::VectorXd u = svd.matrixU().col(k);
            ComplexVector v(n * n);
            v.real() = u.head(n * n);
            v.imag() = u.tail(n * n);
            ComplexMatrix h = unvec(v, static_cast<std::size_t>(n));
            out.basis.push_back(0.5 * (h + h.adjoint()));
        }
    }

    auto add_state = [&](ComplexMatrix rho) {
        for (const auto& s : out.states) {
            if ((s.matrix() - rho).norm() <= 1e-9) {
                return;
            }
        }
        const BlockPartition b = partition(rho, layout);
        out.max_offdiag_block = std::max({out.max_offdiag_block, b.a.norm(), b.d.norm()});
        out.states.push_back(DensityState::make(std::move(rho)));
    };

    add_state(ComplexMatrix::Identity(n, n) / static_cast<double>(n));
    for (const auto& h : out.basis) {
        const HermitianEigen e = hermitian_eig(h);
        const double scale = std::max(1.0, h.norm());
        Eigen::Index i = 0;
        while (i < e.values.size()) {
            Eigen::Index j = i + 1;
            while (j < e.values.size() && e.values(j) - e.values(i) <= tol::eigen_cluster * scale) {
                ++j;
            }
            const ComplexMatrix v = e.vectors.middleCols(i, j - i);
            ComplexMatrix proj = v * v.adjoint();
            proj /= static_cast<double>(j - i);
            add_state(0.5 * (proj + proj.adjoint()));
            i = j;
        }
    }
    return out;
}

} // namespace dfskit
