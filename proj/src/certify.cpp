#include "dfskit/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dfskit/errors.hpp"

namespace dfskit {

const char* to_string(Verdict v) noexcept {
    return v == Verdict::pass ? "pass" : "fail";
}

const char* to_string(Init i) noexcept {
    return i == Init::perfect ? "perfect" : "imperfect";
}

Init parse_init(const std::string& s) {
    if (s == "perfect") {
        return Init::perfect;
    }
    if (s == "imperfect") {
        return Init::imperfect;
    }
    throw ContractViolation("unknown initialization '" + s + "' (expected perfect|imperfect)");
}

const Residual* CheckReport::find(const std::string& label) const noexcept {
    for (const auto& r : residuals) {
        if (r.label == label) {
            return &r;
        }
    }
    return nullptr;
}

const Residual& CheckReport::at(const std::string& label) const {
    if (const Residual* r = find(label)) {
        return *r;
    }
    throw std::out_of_range("CheckReport: no residual labelled '" + label + "'");
}

std::vector<std::string> CheckReport::failing() const {
    std::vector<std::string> out;
    for (const auto& r : residuals) {
        if (r.gating && !(r.relative <= tolerance)) {
            out.push_back(r.label);
        }
    }
    return out;
}

namespace {

class ReportBuilder {
public:
    ReportBuilder(std::string regime, double tol) {
        if (!(tol > 0.0) || !std::isfinite(tol)) {
            throw ContractViolation("check tolerance must be positive and finite");
        }
        report_.regime = std::move(regime);
        report_.tolerance = tol;
    }

    void add(const std::string& label, double absolute, double scale, bool gating = true) {
        const double relative = scale > 0.0 ? absolute / scale : absolute;
        report_.residuals.push_back(Residual{label, absolute, relative, gating});
    }

    CheckReport& report() { return report_; }

    CheckReport finish() {
        report_.verdict = report_.failing().empty() ? Verdict::pass : Verdict::fail;
        return std::move(report_);
    }

private:
    CheckReport report_;
};

double rss(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) {
        s += x * x;
    }
    return std::sqrt(s);
}

std::vector<BlockPartition> partition_all(const std::vector<ComplexMatrix>& ops, const HilbertLayout& layout) {
    std::vector<BlockPartition> out;
    out.reserve(ops.size());
    for (const auto& op : ops) {
        out.push_back(partition(op, layout));
    }
    return out;
}

void require_dim(std::size_t dim, const HilbertLayout& layout, const char* what) {
    if (dim != layout.total_dim()) {
        throw ShapeError(std::string(what) + ": operator dimension " + std::to_string(dim) +
                         " does not match layout dimension " + std::to_string(layout.total_dim()));
    }
}

void require_subspace(const HilbertLayout& layout, const char* what) {
    if (layout.in_dim() != 1) {
        throw ContractViolation(std::string(what) + ": DFS checks need in_dim = 1, got " +
                                std::to_string(layout.in_dim()));
    }
}

double frobenius_scale(const std::vector<ComplexMatrix>& ops) {
    double s = 0.0;
    for (const auto& op : ops) {
        s += op.squaredNorm();
    }
    return std::sqrt(s);
}

double sum_rule_residual(const std::vector<ComplexMatrix>& first, const std::vector<ComplexMatrix>& second,
                         Eigen::Index n) {
    ComplexMatrix s = ComplexMatrix::Zero(n, n);
    for (const auto& m : first) {
        s.noalias() += m.adjoint() * m;
    }
    for (const auto& m : second) {
        s.noalias() += m.adjoint() * m;
    }
    return (s - ComplexMatrix::Identity(n, n)).norm();
}

// Σ_α (I_NS ⊗ C_α†) A_α
ComplexMatrix leak_balance(const std::vector<BlockPartition>& blocks, const std::vector<ComplexMatrix>& c,
                           std::size_t ns_dim) {
    const auto k = blocks.front().a.rows();
    const auto r = blocks.front().a.cols();
    ComplexMatrix s = ComplexMatrix::Zero(k, r);
    const ComplexMatrix id_ns = identity(ns_dim);
    for (std::size_t a = 0; a < blocks.size(); ++a) {
        s.noalias() += kron(id_ns, c[a].adjoint()) * blocks[a].a;
    }
    return s;
}

// ---------------------------------------------------------------- CP fit

struct UnitaryFit {
    bool determinate = false;
    ComplexMatrix u;
    std::vector<ComplexMatrix> c;
    double fit_residual = 0.0;
    double unitarity = 0.0;
    double c_sum_rule = 0.0;
};

UnitaryFit fit_common_unitary(const std::vector<BlockPartition>& blocks, std::size_t ns_dim, std::size_t in_dim) {
    UnitaryFit fit;
    std::size_t best = 0;
    double best_norm = 0.0;
    for (std::size_t a = 0; a < blocks.size(); ++a) {
        const double n = blocks[a].p.norm();
        if (n > best_norm) {
            best_norm = n;
            best = a;
        }
    }
    if (!(best_norm > 0.0)) {
        return fit;
    }
    fit.determinate = true;
    const ComplexMatrix& pmax = blocks[best].p;
    fit.u = in_dim == 1 ? polar_unitary(pmax) : polar_unitary(nearest_kron_factor(pmax, ns_dim, in_dim).left);

    // Least squares for C_α against the fixed U: C = Tr_NS((U† ⊗ I) P) / ns.
    const ComplexMatrix ud_kron = kron(fit.u.adjoint(), identity(in_dim));
    fit.c.reserve(blocks.size());
    for (const auto& b : blocks) {
        fit.c.push_back(partial_trace_ns(ud_kron * b.p, ns_dim, in_dim) / static_cast<double>(ns_dim));
    }

    // Gauge: first nonzero entry of the first nonzero C_α real positive.
    double cmax = 0.0;
    for (const auto& c : fit.c) {
        cmax = std::max(cmax, c.norm());
    }
    for (const auto& c : fit.c) {
        if (c.norm() > 1e-12 * cmax) {
            const double emax = c.cwiseAbs().maxCoeff();
            Complex phase = 1.0;
            bool found = false;
            for (Eigen::Index i = 0; i < c.rows() && !found; ++i) {
                for (Eigen::Index j = 0; j < c.cols() && !found; ++j) {
                    if (std::abs(c(i, j)) > 1e-10 * emax) {
                        phase = c(i, j) / std::abs(c(i, j));
                        found = true;
                    }
                }
            }
            fit.u *= phase;
            for (auto& ci : fit.c) {
                ci *= std::conj(phase);
            }
            break;
        }
    }

    std::vector<double> fit_terms;
    for (std::size_t a = 0; a < blocks.size(); ++a) {
        fit_terms.push_back((blocks[a].p - kron(fit.u, fit.c[a])).norm());
    }
    fit.fit_residual = rss(fit_terms);
    fit.unitarity = (fit.u.adjoint() * fit.u - identity(ns_dim)).norm();
    fit.c_sum_rule = sum_rule_residual(fit.c, {}, static_cast<Eigen::Index>(in_dim));
    return fit;
}

CheckReport cp_check(const KrausSet& channel, const HilbertLayout& layout, Init init, double tol,
                     std::string regime) {
    require_dim(channel.dim(), layout, "cp check");
    ReportBuilder rb(std::move(regime), tol);
    const auto& ops = channel.operators();
    const auto blocks = partition_all(ops, layout);
    const double scale = frobenius_scale(ops);
    const double ns_norm = std::sqrt(static_cast<double>(layout.ns_dim()));
    const double in_norm = std::sqrt(static_cast<double>(layout.in_dim()));
    const double out_norm = std::sqrt(static_cast<double>(layout.out_dim()));
    const double n_norm = std::sqrt(static_cast<double>(layout.total_dim()));

    std::vector<double> a_terms;
    std::vector<double> d_terms;
    std::vector<ComplexMatrix> a_blocks;
    std::vector<ComplexMatrix> b_blocks;
    for (const auto& b : blocks) {
        a_terms.push_back(b.a.norm());
        d_terms.push_back(b.d.norm());
        a_blocks.push_back(b.a);
        b_blocks.push_back(b.b);
    }
    if (init == Init::imperfect) {
        rb.add("A", rss(a_terms), scale);
    }
    rb.add("D", rss(d_terms), scale);

    const UnitaryFit fit = fit_common_unitary(blocks, layout.ns_dim(), layout.in_dim());
    if (!fit.determinate) {
        rb.add("unitary-indeterminate", 1.0, 1.0);
    } else {
        rb.add("unitary-fit", fit.fit_residual, scale);
        rb.add("unitarity", fit.unitarity, ns_norm);
        rb.add("C-sum-rule", fit.c_sum_rule, in_norm);
        rb.report().fitted_unitary = fit.u;
        if (layout.in_dim() == 1) {
            std::vector<Complex> c;
            for (const auto& ci : fit.c) {
                c.push_back(ci(0, 0));
            }
            rb.report().fitted_scalars = std::move(c);
        } else {
            rb.report().fitted_right_factors = fit.c;
        }
    }

    const auto out = static_cast<Eigen::Index>(layout.out_dim());
    if (init == Init::imperfect) {
        rb.add("B-sum-rule", sum_rule_residual(b_blocks, {}, out), out_norm);
    } else {
        if (fit.determinate && !blocks.empty() && layout.out_dim() > 0) {
            rb.add("leak-balance", leak_balance(blocks, fit.c, layout.ns_dim()).norm(), scale * scale);
        } else {
            rb.add("leak-balance", 0.0, 1.0);
        }
        rb.add("out-sum-rule", sum_rule_residual(a_blocks, b_blocks, out), out_norm);
        rb.add("sum-rule", channel.tp_residual(), n_norm);
    }
    return rb.finish();
}

// ---------------------------------------------------------------- Lindblad

enum class Dynamics { markov, nonmarkov };

CheckReport lindblad_check(const LindbladModel& model, const HilbertLayout& layout, Init init, Dynamics dyn,
                           bool ns_form, double tol, std::string regime) {
    require_dim(model.dim(), layout, "lindblad check");
    ReportBuilder rb(std::move(regime), tol);
    const auto& ops = model.lindblad_ops();
    const auto blocks = partition_all(ops, layout);
    const BlockPartition h = partition(model.hamiltonian(), layout);
    const std::size_t ns = layout.ns_dim();
    const std::size_t in = layout.in_dim();
    const double f_scale = frobenius_scale(ops);
    const double h_scale = model.hamiltonian().norm();

    std::vector<double> a_terms;
    std::vector<double> d_terms;
    std::vector<double> p_terms;
    std::vector<ComplexMatrix> c;
    const ComplexMatrix id_ns = identity(ns);
    for (const auto& b : blocks) {
        a_terms.push_back(b.a.norm());
        d_terms.push_back(b.d.norm());
        ComplexMatrix ci = partial_trace_ns(b.p, ns, in) / static_cast<double>(ns);
        p_terms.push_back((b.p - kron(id_ns, ci)).norm());
        c.push_back(std::move(ci));
    }
    if (in == 1) {
        std::vector<Complex> scalars;
        for (const auto& ci : c) {
            scalars.push_back(ci(0, 0));
        }
        rb.report().fitted_scalars = std::move(scalars);
    } else {
        rb.report().fitted_right_factors = c;
    }

    if (init == Init::imperfect) {
        rb.add("A", rss(a_terms), f_scale);
    }
    rb.add("D", rss(d_terms), f_scale);
    rb.add("scalar-action", rss(p_terms), f_scale);

    KroneckerSumSplit split{ComplexMatrix(), ComplexMatrix(), 0.0};
    if (ns_form) {
        split = kronecker_sum_split(h.p, ns, in);
        rb.add("H-kron-sum", split.residual, h_scale);
    }

    const bool balanced_offdiag = init == Init::perfect && dyn == Dynamics::markov;
    if (balanced_offdiag) {
        if (ns_form) {
            const RealVector diag = split.h_in.diagonal().real();
            rb.add("H-in-diagonal", diag.maxCoeff() - diag.minCoeff(), h_scale);
            ComplexMatrix off = split.h_in;
            off.diagonal().setZero();
            rb.add("H-in-offdiag", off.norm(), h_scale, false);
        }
        ComplexMatrix balance = ComplexMatrix::Zero(h.a.rows(), h.a.cols());
        if (!blocks.empty()) {
            balance = leak_balance(blocks, c, ns);
        }
        balance -= Complex(0.0, 2.0) * h.a;
        rb.add("new-DFS-offdiag", balance.norm(), 2.0 * h_scale + f_scale * f_scale);
    } else {
        if (init == Init::perfect) {
            const double lb = blocks.empty() ? 0.0 : leak_balance(blocks, c, ns).norm();
            rb.add("leak-balance", lb, f_scale * f_scale);
        }
        rb.add("H-offdiag", h.a.norm(), h_scale);
    }
    return rb.finish();
}

std::string regime_name(const char* family, Init init) {
    return std::string(family) + "-" + to_string(init);
}

} // namespace

KroneckerSumSplit kronecker_sum_split(const ComplexMatrix& x, std::size_t ns_dim, std::size_t in_dim) {
    const double ns = static_cast<double>(ns_dim);
    const double in = static_cast<double>(in_dim);
    const ComplexMatrix a = partial_trace_in(x, ns_dim, in_dim) / in;
    const ComplexMatrix b = partial_trace_ns(x, ns_dim, in_dim) / ns;
    const Complex s = x.trace() / (ns * in);
    KroneckerSumSplit out;
    out.h_ns = a;
    out.h_in = b - s * identity(in_dim);
    out.residual = (x - kron(out.h_ns, identity(in_dim)) - kron(identity(ns_dim), out.h_in)).norm();
    return out;
}

CheckReport check_cp_dfs_imperfect(const KrausSet& channel, const HilbertLayout& layout, double tol) {
    require_subspace(layout, "check_cp_dfs_imperfect");
    return cp_check(channel, layout, Init::imperfect, tol, "cp-dfs-imperfect");
}

CheckReport check_cp_dfs_perfect(const KrausSet& channel, const HilbertLayout& layout, double tol) {
    require_subspace(layout, "check_cp_dfs_perfect");
    return cp_check(channel, layout, Init::perfect, tol, "cp-dfs-perfect");
}

CheckReport check_cp_ns_imperfect(const KrausSet& channel, const HilbertLayout& layout, double tol) {
    return cp_check(channel, layout, Init::imperfect, tol, "cp-ns-imperfect");
}

CheckReport check_cp_ns_perfect(const KrausSet& channel, const HilbertLayout& layout, double tol) {
    return cp_check(channel, layout, Init::perfect, tol, "cp-ns-perfect");
}

CheckReport check_markov_dfs(const LindbladModel& model, const HilbertLayout& layout, Init init, double tol) {
    require_subspace(layout, "check_markov_dfs");
    return lindblad_check(model, layout, init, Dynamics::markov, false, tol, regime_name("markov-dfs", init));
}

CheckReport check_markov_ns(const LindbladModel& model, const HilbertLayout& layout, Init init, double tol) {
    return lindblad_check(model, layout, init, Dynamics::markov, true, tol, regime_name("markov-ns", init));
}

CheckReport check_markov_dfs_legacy(const LindbladModel& model, const HilbertLayout& layout, double tol) {
    require_subspace(layout, "check_markov_dfs_legacy");
    // Old condition = the imperfect-regime conditions without the A_α constraint.
    CheckReport r = lindblad_check(model, layout, Init::perfect, Dynamics::nonmarkov, false, tol, "markov-dfs-legacy");
    r.residuals.erase(std::remove_if(r.residuals.begin(), r.residuals.end(),
                                     [](const Residual& x) { return x.label == "leak-balance"; }),
                      r.residuals.end());
    r.verdict = r.failing().empty() ? Verdict::pass : Verdict::fail;
    return r;
}

CheckReport check_nonmarkov_dfs(const MemoryKernelModel& model, const HilbertLayout& layout, Init init, double tol) {
    require_subspace(layout, "check_nonmarkov_dfs");
    return lindblad_check(model.base, layout, init, Dynamics::nonmarkov, false, tol,
                          regime_name("nonmarkov-dfs", init));
}

CheckReport check_nonmarkov_ns(const MemoryKernelModel& model, const HilbertLayout& layout, Init init, double tol) {
    return lindblad_check(model.base, layout, init, Dynamics::nonmarkov, true, tol, regime_name("nonmarkov-ns", init));
}

} // namespace dfskit
