#include "dfskit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "dfskit/errors.hpp"
#include "dfskit/tolerances.hpp"

namespace dfskit {

namespace {

std::string dims(const ComplexMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_layout_dims(std::size_t ns, std::size_t in, std::size_t out) {
    if (ns == 0 || in == 0) {
        throw ShapeError("layout: ns_dim and in_dim must be positive");
    }
    (void)out;
}

} // namespace

// ---------------------------------------------------------------- layout

HilbertLayout::HilbertLayout(std::size_t ns_dim, std::size_t in_dim, std::size_t out_dim)
    : ns_dim_(ns_dim), in_dim_(in_dim), out_dim_(out_dim) {
    check_layout_dims(ns_dim, in_dim, out_dim);
    permutation_.resize(total_dim());
    std::iota(permutation_.begin(), permutation_.end(), std::size_t{0});
}

HilbertLayout::HilbertLayout(std::size_t ns_dim, std::size_t in_dim, std::size_t out_dim,
                             std::vector<std::size_t> permutation)
    : ns_dim_(ns_dim), in_dim_(in_dim), out_dim_(out_dim), permutation_(std::move(permutation)) {
    check_layout_dims(ns_dim, in_dim, out_dim);
    const std::size_t n = total_dim();
    if (permutation_.size() != n) {
        throw ShapeError("layout: permutation has " + std::to_string(permutation_.size()) +
                         " entries, expected " + std::to_string(n));
    }
    std::vector<bool> seen(n, false);
    for (std::size_t k : permutation_) {
        if (k >= n || seen[k]) {
            throw InvariantError("layout: basis_permutation is not a bijection of 0.." +
                                 std::to_string(n - 1));
        }
        seen[k] = true;
    }
}

HilbertLayout HilbertLayout::from_frame(std::size_t ns_dim, std::size_t in_dim, std::size_t out_dim,
                                        ComplexMatrix frame) {
    HilbertLayout layout(ns_dim, in_dim, out_dim);
    const auto n = static_cast<Eigen::Index>(layout.total_dim());
    if (frame.rows() != n || frame.cols() != n) {
        throw ShapeError("layout: frame is " + dims(frame) + ", expected " + std::to_string(n) +
                         "x" + std::to_string(n));
    }
    if (!all_finite(frame)) {
        throw InvariantError("layout: frame has non-finite entries");
    }
    const double defect = (frame.adjoint() * frame - ComplexMatrix::Identity(n, n)).norm();
    if (defect > 1e-10 * std::sqrt(static_cast<double>(n))) {
        throw InvariantError("layout: frame is not unitary (defect " + std::to_string(defect) + ")");
    }
    layout.frame_ = std::move(frame);
    return layout;
}

ComplexMatrix HilbertLayout::to_block_order(const ComplexMatrix& m) const {
    const auto n = static_cast<Eigen::Index>(total_dim());
    if (m.rows() != n || m.cols() != n) {
        throw ShapeError("layout: operator is " + dims(m) + ", layout dimension " + std::to_string(n));
    }
    if (frame_) {
        return frame_->adjoint() * m * (*frame_);
    }
    ComplexMatrix out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out(i, j) = m(static_cast<Eigen::Index>(permutation_[i]),
                          static_cast<Eigen::Index>(permutation_[j]));
        }
    }
    return out;
}

ComplexMatrix HilbertLayout::from_block_order(const ComplexMatrix& m) const {
    const auto n = static_cast<Eigen::Index>(total_dim());
    if (m.rows() != n || m.cols() != n) {
        throw ShapeError("layout: operator is " + dims(m) + ", layout dimension " + std::to_string(n));
    }
    if (frame_) {
        return (*frame_) * m * frame_->adjoint();
    }
    ComplexMatrix out(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            out(static_cast<Eigen::Index>(permutation_[i]),
                static_cast<Eigen::Index>(permutation_[j])) = m(i, j);
        }
    }
    return out;
}

ComplexVector HilbertLayout::to_block_order(const ComplexVector& v) const {
    const auto n = static_cast<Eigen::Index>(total_dim());
    if (v.size() != n) {
        throw ShapeError("layout: vector length does not match layout dimension");
    }
    if (frame_) {
        return frame_->adjoint() * v;
    }
    ComplexVector out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(i) = v(static_cast<Eigen::Index>(permutation_[i]));
    }
    return out;
}

ComplexVector HilbertLayout::from_block_order(const ComplexVector& v) const {
    const auto n = static_cast<Eigen::Index>(total_dim());
    if (v.size() != n) {
        throw ShapeError("layout: vector length does not match layout dimension");
    }
    if (frame_) {
        return (*frame_) * v;
    }
    ComplexVector out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out(static_cast<Eigen::Index>(permutation_[i])) = v(i);
    }
    return out;
}

ComplexMatrix HilbertLayout::basis_matrix() const {
    if (frame_) {
        return *frame_;
    }
    const auto n = static_cast<Eigen::Index>(total_dim());
    ComplexMatrix v = ComplexMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        v(static_cast<Eigen::Index>(permutation_[k]), k) = 1.0;
    }
    return v;
}

// ---------------------------------------------------------------- blocks

BlockPartition partition(const ComplexMatrix& op, const HilbertLayout& layout) {
    const ComplexMatrix m = layout.to_block_order(op);
    const auto k = static_cast<Eigen::Index>(layout.protected_dim());
    const auto r = static_cast<Eigen::Index>(layout.out_dim());
    return BlockPartition{m.topLeftCorner(k, k), m.topRightCorner(k, r), m.bottomLeftCorner(r, k),
                          m.bottomRightCorner(r, r)};
}

ComplexMatrix reassemble(const BlockPartition& blocks, const HilbertLayout& layout) {
    const auto k = static_cast<Eigen::Index>(layout.protected_dim());
    const auto r = static_cast<Eigen::Index>(layout.out_dim());
    if (blocks.p.rows() != k || blocks.p.cols() != k || blocks.a.rows() != k || blocks.a.cols() != r ||
        blocks.d.rows() != r || blocks.d.cols() != k || blocks.b.rows() != r || blocks.b.cols() != r) {
        throw ShapeError("reassemble: block shapes do not match the layout");
    }
    ComplexMatrix m(k + r, k + r);
    m.topLeftCorner(k, k) = blocks.p;
    m.topRightCorner(k, r) = blocks.a;
    m.bottomLeftCorner(r, k) = blocks.d;
    m.bottomRightCorner(r, r) = blocks.b;
    return layout.from_block_order(m);
}

ComplexMatrix partial_trace_in(const ComplexMatrix& op, std::size_t ns_dim, std::size_t in_dim) {
    const auto ns = static_cast<Eigen::Index>(ns_dim);
    const auto in = static_cast<Eigen::Index>(in_dim);
    if (op.rows() != ns * in || op.cols() != ns * in) {
        throw ShapeError("partial_trace_in: operator is " + dims(op) + ", expected " +
                         std::to_string(ns * in) + " square");
    }
    ComplexMatrix out = ComplexMatrix::Zero(ns, ns);
    for (Eigen::Index a = 0; a < ns; ++a) {
        for (Eigen::Index b = 0; b < ns; ++b) {
            Complex s = 0.0;
            for (Eigen::Index k = 0; k < in; ++k) {
                s += op(a * in + k, b * in + k);
            }
            out(a, b) = s;
        }
    }
    return out;
}

ComplexMatrix partial_trace_ns(const ComplexMatrix& op, std::size_t ns_dim, std::size_t in_dim) {
    const auto ns = static_cast<Eigen::Index>(ns_dim);
    const auto in = static_cast<Eigen::Index>(in_dim);
    if (op.rows() != ns * in || op.cols() != ns * in) {
        throw ShapeError("partial_trace_ns: operator is " + dims(op) + ", expected " +
                         std::to_string(ns * in) + " square");
    }
    ComplexMatrix out = ComplexMatrix::Zero(in, in);
    for (Eigen::Index a = 0; a < ns; ++a) {
        out += op.block(a * in, a * in, in, in);
    }
    return out;
}

// ---------------------------------------------------------------- spectral

ComplexMatrix matrix_exp(const ComplexMatrix& m, Complex scale) {
    require_square(m, "matrix_exp");
    if (!all_finite(m)) {
        throw ContractViolation("matrix_exp: non-finite input");
    }
    const ComplexMatrix a = scale * m;
    const auto n = a.rows();
    if (n == 0) {
        return a;
    }
    const double fro = a.norm();
    const double commutator_defect = (a * a.adjoint() - a.adjoint() * a).norm();
    if (commutator_defect <= 1e-12 * fro * fro) {
        Eigen::ComplexSchur<ComplexMatrix> schur(a);
        const ComplexMatrix& q = schur.matrixU();
        const ComplexMatrix& t = schur.matrixT();
        ComplexVector e(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            e(i) = std::exp(t(i, i));
        }
        return q * e.asDiagonal() * q.adjoint();
    }
    return a.exp();
}

HermitianEigen hermitian_eig(const ComplexMatrix& m) {
    require_square(m, "hermitian_eig");
    if (!all_finite(m)) {
        throw ContractViolation("hermitian_eig: non-finite input");
    }
    const double defect = hermiticity_defect(m);
    if (defect > tol::hermiticity) {
        throw ContractViolation("hermitian_eig: operator is not Hermitian (relative defect " +
                                std::to_string(defect) + ")");
    }
    const ComplexMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
    return HermitianEigen{solver.eigenvalues(), solver.eigenvectors()};
}

KronFactors nearest_kron_factor(const ComplexMatrix& m, std::size_t left_dim, std::size_t right_dim) {
    const auto l = static_cast<Eigen::Index>(left_dim);
    const auto r = static_cast<Eigen::Index>(right_dim);
    if (l == 0 || r == 0 || m.rows() != l * r || m.cols() != l * r) {
        throw ShapeError("nearest_kron_factor: operator is " + dims(m) + ", expected " +
                         std::to_string(l * r) + " square");
    }
    // R[(i1, j1), (i2, j2)] = m[i1 r + i2, j1 r + j2], so that m = L ⊗ R'
    // becomes the rank-one matrix vec_r(L) vec_r(R')ᵀ.
    ComplexMatrix rearranged(l * l, r * r);
    for (Eigen::Index i1 = 0; i1 < l; ++i1) {
        for (Eigen::Index j1 = 0; j1 < l; ++j1) {
            for (Eigen::Index i2 = 0; i2 < r; ++i2) {
                for (Eigen::Index j2 = 0; j2 < r; ++j2) {
                    rearranged(i1 * l + j1, i2 * r + j2) = m(i1 * r + i2, j1 * r + j2);
                }
            }
        }
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(rearranged, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ComplexVector u = svd.matrixU().col(0);
    ComplexVector v = svd.singularValues()(0) * svd.matrixV().col(0).conjugate();

    const double umax = u.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < u.size(); ++k) {
        if (std::abs(u(k)) > 1e-10 * umax) {
            const Complex phase = u(k) / std::abs(u(k));
            u /= phase;
            v *= phase;
            break;
        }
    }

    KronFactors out{ComplexMatrix(l, l), ComplexMatrix(r, r), 0.0};
    for (Eigen::Index i = 0; i < l; ++i) {
        for (Eigen::Index j = 0; j < l; ++j) {
            out.left(i, j) = u(i * l + j);
        }
    }
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < r; ++j) {
            out.right(i, j) = v(i * r + j);
        }
    }
    out.residual = (m - kron(out.left, out.right)).norm();
    return out;
}

double norm(const ComplexMatrix& m, NormKind kind) {
    switch (kind) {
    case NormKind::frobenius:
        return m.norm();
    case NormKind::trace:
    case NormKind::spectral: {
        if (m.size() == 0) {
            return 0.0;
        }
        Eigen::JacobiSVD<ComplexMatrix> svd(m);
        const RealVector& s = svd.singularValues();
        return kind == NormKind::trace ? s.sum() : s(0);
    }
    }
    return 0.0;
}

// ---------------------------------------------------------------- helpers

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
    return a * b - b * a;
}

ComplexMatrix identity(std::size_t n) {
    const auto k = static_cast<Eigen::Index>(n);
    return ComplexMatrix::Identity(k, k);
}

ComplexVector vec(const ComplexMatrix& m) {
    return Eigen::Map<const ComplexVector>(m.data(), m.size());
}

ComplexMatrix unvec(const ComplexVector& v, std::size_t rows) {
    const auto r = static_cast<Eigen::Index>(rows);
    if (r == 0 || v.size() % r != 0) {
        throw ShapeError("unvec: length " + std::to_string(v.size()) + " is not a multiple of " +
                         std::to_string(rows));
    }
    return Eigen::Map<const ComplexMatrix>(v.data(), r, v.size() / r);
}

ComplexMatrix nullspace(const ComplexMatrix& m, double rank_cut) {
    const auto n = m.cols();
    if (m.rows() == 0) {
        return ComplexMatrix::Identity(n, n);
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullV);
    const RealVector& s = svd.singularValues();
    const double smax = s.size() > 0 ? s(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        if (smax > 0.0 && s(k) > rank_cut * smax) {
            ++rank;
        }
    }
    return svd.matrixV().rightCols(n - rank);
}

ComplexMatrix polar_unitary(const ComplexMatrix& m) {
    require_square(m, "polar_unitary");
    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().adjoint();
}

ComplexMatrix orthonormal_complement(const ComplexMatrix& q) {
    const auto n = q.rows();
    const auto k = q.cols();
    if (k == 0) {
        return ComplexMatrix::Identity(n, n);
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(q);
    const ComplexMatrix full = qr.householderQ() * ComplexMatrix::Identity(n, n);
    return full.rightCols(n - k);
}

double hermiticity_defect(const ComplexMatrix& m) {
    const double scale = m.norm();
    if (scale == 0.0) {
        return 0.0;
    }
    return (m - m.adjoint()).norm() / scale;
}

bool all_finite(const ComplexMatrix& m) {
    return m.allFinite();
}

void require_square(const ComplexMatrix& m, const char* what) {
    if (m.rows() != m.cols()) {
        throw ShapeError(std::string(what) + ": operator is " + dims(m) + ", expected square");
    }
}

ComplexMatrix pauli_x() {
    ComplexMatrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

ComplexMatrix pauli_y() {
    ComplexMatrix m(2, 2);
    m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
    return m;
}

ComplexMatrix pauli_z() {
    ComplexMatrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

ComplexMatrix lowering() {
    ComplexMatrix m = ComplexMatrix::Zero(2, 2);
    m(0, 1) = 1.0;
    return m;
}

} // namespace dfskit
