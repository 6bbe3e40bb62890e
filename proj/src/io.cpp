#include "dfskit/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "dfskit/errors.hpp"

namespace dfskit {

namespace {

std::string child(const std::string& path, const std::string& key) {
    std::string escaped;
    for (char c : key) {
        if (c == '~') {
            escaped += "~0";
        } else if (c == '/') {
            escaped += "~1";
        } else {
            escaped += c;
        }
    }
    return path + "/" + escaped;
}

std::string child(const std::string& path, std::size_t index) {
    return path + "/" + std::to_string(index);
}

const Json& require(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) {
        throw SchemaError("expected an object", path.empty() ? "/" : path);
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError("missing required field '" + key + "'", child(path, key));
    }
    return *it;
}

std::size_t read_count(const Json& j, const std::string& path, std::size_t min_value) {
    if (!j.is_number_integer() || (j.is_number_integer() && j.get<long long>() < 0)) {
        throw SchemaError("expected a non-negative integer", path);
    }
    const auto v = j.get<std::size_t>();
    if (v < min_value) {
        throw SchemaError("value must be at least " + std::to_string(min_value), path);
    }
    return v;
}

double read_number(const Json& j, const std::string& path) {
    if (!j.is_number()) {
        throw SchemaError("expected a number", path);
    }
    return j.get<double>();
}

std::string read_string(const Json& j, const std::string& path) {
    if (!j.is_string()) {
        throw SchemaError("expected a string", path);
    }
    return j.get<std::string>();
}

Complex read_complex(const Json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) {
        throw SchemaError("complex entries must be [re, im] arrays", path);
    }
    return Complex(read_number(j[0], child(path, 0)), read_number(j[1], child(path, 1)));
}

ComplexMatrix read_square(const Json& j, const std::string& path, std::size_t dim) {
    ComplexMatrix m = matrix_from_json(j, path);
    if (static_cast<std::size_t>(m.rows()) != dim || static_cast<std::size_t>(m.cols()) != dim) {
        throw SchemaError("matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                              ", expected " + std::to_string(dim) + "x" + std::to_string(dim),
                          path);
    }
    return m;
}

std::vector<ComplexMatrix> read_matrix_list(const Json& j, const std::string& path, std::size_t dim) {
    if (!j.is_array()) {
        throw SchemaError("expected an array of matrices", path);
    }
    std::vector<ComplexMatrix> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(read_square(j[i], child(path, i), dim));
    }
    return out;
}

// Re-throw a domain error from a constructor as an invariant violation located at `path`.
template <typename F>
auto located(const std::string& path, F&& make) -> decltype(make()) {
    try {
        return make();
    } catch (const SchemaError&) {
        throw;
    } catch (const Error& e) {
        throw InvariantError(e.what(), e.path().empty() ? path : path + e.path());
    }
}

HilbertLayout read_layout(const Json& doc, std::size_t dim) {
    const auto it = doc.find("layout");
    if (it == doc.end()) {
        return HilbertLayout(dim, 1, 0);
    }
    const std::string path = "/layout";
    const Json& l = *it;
    const std::size_t ns = read_count(require(l, "ns_dim", path), child(path, "ns_dim"), 1);
    const std::size_t in = read_count(require(l, "in_dim", path), child(path, "in_dim"), 1);
    const std::size_t out = read_count(require(l, "out_dim", path), child(path, "out_dim"), 0);
    if (ns * in + out != dim) {
        throw SchemaError("layout ns_dim*in_dim + out_dim = " + std::to_string(ns * in + out) +
                              " does not match dim = " + std::to_string(dim),
                          path);
    }
    if (const auto b = l.find("basis"); b != l.end()) {
        ComplexMatrix frame = read_square(*b, child(path, "basis"), dim);
        return located(child(path, "basis"), [&] { return HilbertLayout::from_frame(ns, in, out, frame); });
    }
    std::vector<std::size_t> perm;
    if (const auto p = l.find("basis_permutation"); p != l.end()) {
        const std::string pp = child(path, "basis_permutation");
        if (!p->is_array()) {
            throw SchemaError("expected an array of indices", pp);
        }
        for (std::size_t i = 0; i < p->size(); ++i) {
            perm.push_back(read_count((*p)[i], child(pp, i), 0));
        }
        if (perm.size() != dim) {
            throw SchemaError("basis_permutation has " + std::to_string(perm.size()) + " entries, expected " +
                                  std::to_string(dim),
                              pp);
        }
        return located(pp, [&] { return HilbertLayout(ns, in, out, perm); });
    }
    return HilbertLayout(ns, in, out);
}

KernelSpec read_kernel(const Json& j, const std::string& path) {
    const std::string kind = read_string(require(j, "kind", path), child(path, "kind"));
    return located(path, [&]() -> KernelSpec {
        if (kind == "exponential") {
            return ExponentialKernel{read_number(require(j, "lambda", path), child(path, "lambda"))};
        }
        if (kind == "constant") {
            return ConstantKernel{read_number(require(j, "value", path), child(path, "value"))};
        }
        if (kind == "tabulated") {
            TabulatedKernel t;
            const Json& times = require(j, "times", path);
            const Json& values = require(j, "values", path);
            if (!times.is_array() || !values.is_array()) {
                throw SchemaError("times and values must be arrays", path);
            }
            for (std::size_t i = 0; i < times.size(); ++i) {
                t.times.push_back(read_number(times[i], child(child(path, "times"), i)));
            }
            for (std::size_t i = 0; i < values.size(); ++i) {
                t.values.push_back(read_number(values[i], child(child(path, "values"), i)));
            }
            return t;
        }
        throw SchemaError("unknown kernel kind '" + kind + "'", child(path, "kind"));
    });
}

Json kernel_to_json(const KernelSpec& k) {
    Json j;
    j["kind"] = k.name();
    if (const auto* e = std::get_if<ExponentialKernel>(&k.kind())) {
        j["lambda"] = e->lambda;
    } else if (const auto* c = std::get_if<ConstantKernel>(&k.kind())) {
        j["value"] = c->value;
    } else {
        const auto& t = std::get<TabulatedKernel>(k.kind());
        j["times"] = t.times;
        j["values"] = t.values;
    }
    return j;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
}

} // namespace

// ---------------------------------------------------------------- matrices

Json complex_to_json(Complex z) {
    return Json::array({z.real(), z.imag()});
}

Json matrix_to_json(const ComplexMatrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row.push_back(complex_to_json(m(i, j)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

ComplexMatrix matrix_from_json(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) {
        throw SchemaError("matrices must be non-empty arrays of rows", path);
    }
    const std::size_t rows = j.size();
    if (!j[0].is_array() || j[0].empty()) {
        throw SchemaError("matrix rows must be non-empty arrays", child(path, 0));
    }
    const std::size_t cols = j[0].size();
    ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string rp = child(path, r);
        if (!j[r].is_array() || j[r].size() != cols) {
            throw SchemaError("ragged matrix: expected " + std::to_string(cols) + " entries", rp);
        }
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = read_complex(j[r][c], child(rp, c));
        }
    }
    return m;
}

// ---------------------------------------------------------------- models

std::size_t ModelFile::dim() const {
    return layout.total_dim();
}

const char* ModelFile::kind() const noexcept {
    switch (model.index()) {
    case 0:
        return "kraus";
    case 1:
        return "lindblad";
    default:
        return "memory_kernel";
    }
}

ModelFile model_from_json(const Json& doc) {
    if (!doc.is_object()) {
        throw SchemaError("model file must be a JSON object", "/");
    }
    const std::string version = read_string(require(doc, "schema_version", ""), "/schema_version");
    if (version != schema_version) {
        throw SchemaError("unsupported schema_version '" + version + "'", "/schema_version");
    }
    const std::size_t dim = read_count(require(doc, "dim", ""), "/dim", 1);
    const std::string kind = read_string(require(doc, "kind", ""), "/kind");
    HilbertLayout layout = read_layout(doc, dim);

    std::optional<DensityState> init;
    if (const auto it = doc.find("initial_state"); it != doc.end()) {
        ComplexMatrix rho = read_square(*it, "/initial_state", dim);
        init = located("/initial_state", [&] { return DensityState::make(std::move(rho)); });
    }

    if (kind == "kraus") {
        auto ops = read_matrix_list(require(doc, "kraus", ""), "/kraus", dim);
        if (ops.empty()) {
            throw SchemaError("at least one Kraus operator is required", "/kraus");
        }
        KrausSet k = located("/kraus", [&] { return KrausSet(std::move(ops)); });
        if (!k.is_trace_preserving()) {
            throw InvariantError("Kraus operators are not trace preserving: tp_residual = " +
                                     std::to_string(k.tp_residual()),
                                 "/kraus");
        }
        return ModelFile{std::move(k), std::move(layout), std::move(init)};
    }
    if (kind == "lindblad" || kind == "memory_kernel") {
        ComplexMatrix h = read_square(require(doc, "hamiltonian", ""), "/hamiltonian", dim);
        std::vector<ComplexMatrix> ops;
        if (const auto it = doc.find("lindblad_ops"); it != doc.end()) {
            ops = read_matrix_list(*it, "/lindblad_ops", dim);
        }
        LindbladModel base = located("", [&] { return LindbladModel(std::move(h), std::move(ops)); });
        if (kind == "lindblad") {
            return ModelFile{std::move(base), std::move(layout), std::move(init)};
        }
        KernelSpec kernel = read_kernel(require(doc, "kernel", ""), "/kernel");
        return ModelFile{MemoryKernelModel{std::move(base), std::move(kernel)}, std::move(layout), std::move(init)};
    }
    throw SchemaError("unknown kind '" + kind + "' (expected kraus|lindblad|memory_kernel)", "/kind");
}

ModelFile parse_model(const std::string& text) {
    return model_from_json(parse_json(text));
}

ModelFile load_model(const std::string& path) {
    return parse_model(read_file(path));
}

Json model_to_json(const ModelFile& file) {
    Json doc;
    doc["schema_version"] = schema_version;
    doc["dim"] = file.dim();
    doc["kind"] = file.kind();
    Json layout;
    layout["ns_dim"] = file.layout.ns_dim();
    layout["in_dim"] = file.layout.in_dim();
    layout["out_dim"] = file.layout.out_dim();
    if (file.layout.frame()) {
        layout["basis"] = matrix_to_json(*file.layout.frame());
    } else {
        layout["basis_permutation"] = file.layout.permutation();
    }
    doc["layout"] = std::move(layout);

    auto write_lindblad = [&](const LindbladModel& m) {
        doc["hamiltonian"] = matrix_to_json(m.hamiltonian());
        Json ops = Json::array();
        for (const auto& f : m.lindblad_ops()) {
            ops.push_back(matrix_to_json(f));
        }
        doc["lindblad_ops"] = std::move(ops);
    };
    if (const auto* k = std::get_if<KrausSet>(&file.model)) {
        Json ops = Json::array();
        for (const auto& e : k->operators()) {
            ops.push_back(matrix_to_json(e));
        }
        doc["kraus"] = std::move(ops);
    } else if (const auto* l = std::get_if<LindbladModel>(&file.model)) {
        write_lindblad(*l);
    } else {
        const auto& m = std::get<MemoryKernelModel>(file.model);
        write_lindblad(m.base);
        doc["kernel"] = kernel_to_json(m.kernel);
    }
    if (file.initial_state) {
        doc["initial_state"] = matrix_to_json(file.initial_state->matrix());
    }
    return doc;
}

std::string serialize_model(const ModelFile& file) {
    return model_to_json(file).dump(2) + "\n";
}

void save_model(const std::string& path, const ModelFile& file) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError("cannot write file '" + path + "'");
    }
    out << serialize_model(file);
}

DensityState load_state(const std::string& path) {
    const Json doc = parse_json(read_file(path));
    if (doc.is_array()) {
        ComplexMatrix m = matrix_from_json(doc, "");
        if (m.rows() != m.cols()) {
            throw SchemaError("density matrix must be square", "/");
        }
        return located("", [&] { return DensityState::make(std::move(m)); });
    }
    if (!doc.is_object()) {
        throw SchemaError("state file must be an object or a matrix", "/");
    }
    if (const auto it = doc.find("vector"); it != doc.end()) {
        if (!it->is_array() || it->empty()) {
            throw SchemaError("vector must be a non-empty array of [re, im]", "/vector");
        }
        ComplexVector v(static_cast<Eigen::Index>(it->size()));
        for (std::size_t i = 0; i < it->size(); ++i) {
            v(static_cast<Eigen::Index>(i)) = read_complex((*it)[i], child("/vector", i));
        }
        return located("/vector", [&] { return DensityState::pure(v); });
    }
    ComplexMatrix m = matrix_from_json(require(doc, "matrix", ""), "/matrix");
    if (m.rows() != m.cols()) {
        throw SchemaError("density matrix must be square", "/matrix");
    }
    return located("/matrix", [&] { return DensityState::make(std::move(m)); });
}

ComplexMatrix load_matrix(const std::string& path) {
    const Json doc = parse_json(read_file(path));
    if (doc.is_object()) {
        return matrix_from_json(require(doc, "matrix", ""), "/matrix");
    }
    return matrix_from_json(doc, "");
}

// ---------------------------------------------------------------- reports

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

Json report_to_json(const CheckReport& report) {
    Json j;
    j["regime"] = report.regime;
    j["verdict"] = to_string(report.verdict);
    j["tolerance"] = report.tolerance;
    Json res = Json::object();
    for (const auto& r : report.residuals) {
        res[r.label] = Json{{"absolute", r.absolute}, {"relative", r.relative}, {"gating", r.gating}};
    }
    j["residuals"] = std::move(res);
    j["failing"] = report.failing();
    if (report.fitted_unitary) {
        j["fitted_unitary"] = matrix_to_json(*report.fitted_unitary);
    }
    if (report.fitted_scalars) {
        Json c = Json::array();
        for (const Complex z : *report.fitted_scalars) {
            c.push_back(complex_to_json(z));
        }
        j["fitted_scalars"] = std::move(c);
    }
    if (report.fitted_right_factors) {
        Json c = Json::array();
        for (const auto& m : *report.fitted_right_factors) {
            c.push_back(matrix_to_json(m));
        }
        j["fitted_right_factors"] = std::move(c);
    }
    return j;
}

std::string report_to_text(const CheckReport& report) {
    std::ostringstream out;
    out << "regime    " << report.regime << "\n";
    out << "verdict   " << to_string(report.verdict) << "\n";
    out << "tolerance " << format_number(report.tolerance) << "\n";
    for (const auto& r : report.residuals) {
        const bool bad = r.gating && !(r.relative <= report.tolerance);
        out << "  " << r.label << ": absolute " << format_number(r.absolute) << ", relative "
            << format_number(r.relative) << (r.gating ? "" : " (informational)") << (bad ? "  FAIL" : "") << "\n";
    }
    if (report.fitted_scalars) {
        out << "  c =";
        for (const Complex z : *report.fitted_scalars) {
            out << " (" << format_number(z.real()) << ", " << format_number(z.imag()) << ")";
        }
        out << "\n";
    }
    return out.str();
}

Json candidates_to_json(const std::vector<DfsCandidate>& candidates) {
    Json arr = Json::array();
    for (const auto& c : candidates) {
        Json j;
        j["dim"] = c.dim();
        Json scalars = Json::array();
        for (const Complex z : c.eigen_scalars) {
            scalars.push_back(complex_to_json(z));
        }
        j["eigen_scalars"] = std::move(scalars);
        Json flags = Json::object();
        for (const auto& [k, v] : c.flags) {
            flags[k] = v;
        }
        j["flags"] = std::move(flags);
        j["basis"] = matrix_to_json(c.basis);
        arr.push_back(std::move(j));
    }
    return arr;
}

Json fixed_points_to_json(const FixedPointStates& states, const UnitalityResult& unital) {
    Json j;
    j["unital"] = unital.unital;
    j["unital_residual"] = unital.residual;
    j["dimension"] = states.basis.size();
    j["max_offdiag_block"] = states.max_offdiag_block;
    Json basis = Json::array();
    for (const auto& b : states.basis) {
        basis.push_back(matrix_to_json(b));
    }
    j["basis"] = std::move(basis);
    Json arr = Json::array();
    for (const auto& s : states.states) {
        arr.push_back(matrix_to_json(s.matrix()));
    }
    j["states"] = std::move(arr);
    return j;
}

void write_trace_ndjson(const EvolutionTrace& trace, std::ostream& out, bool include_states) {
    const bool monitored = trace.dfs_unitarity_residual.size() == trace.times.size();
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        Json j;
        j["t"] = trace.times[i];
        j["trace_drift"] = trace.trace_drift[i];
        j["min_eigenvalue"] = trace.min_eigenvalue[i];
        if (monitored) {
            j["dfs_unitarity_residual"] = trace.dfs_unitarity_residual[i];
            j["dfs_block_trace"] = trace.dfs_block_trace[i];
        }
        if (include_states) {
            j["rho"] = matrix_to_json(trace.states[i].matrix());
        }
        out << j.dump() << "\n";
    }
}

} // namespace dfskit
