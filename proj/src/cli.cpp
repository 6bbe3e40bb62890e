#include "dfskit/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "dfskit/certify.hpp"
#include "dfskit/discover.hpp"
#include "dfskit/dynamics.hpp"
#include "dfskit/errors.hpp"
#include "dfskit/io.hpp"
#include "dfskit/scenarios.hpp"

namespace dfskit {

namespace {

struct GlobalOptions {
    std::string report = "text";
    std::uint64_t seed = 0;
    std::optional<double> tol;
};

double resolve_tolerance(const GlobalOptions& g) {
    if (g.tol) {
        if (!(*g.tol > 0.0) || !std::isfinite(*g.tol)) {
            throw ContractViolation("--tol must be positive and finite");
        }
        return *g.tol;
    }
    if (const char* env = std::getenv("DFSKIT_TOL"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end == env || *end != '\0' || !(v > 0.0) || !std::isfinite(v)) {
            throw ContractViolation(std::string("DFSKIT_TOL is not a positive number: '") + env + "'");
        }
        return v;
    }
    return tol::check;
}

bool json_mode(const GlobalOptions& g) {
    return g.report == "json";
}

template <typename T>
const T& expect_kind(const ModelFile& f, const char* wanted, const std::string& context) {
    if (const auto* p = std::get_if<T>(&f.model)) {
        return *p;
    }
    throw ContractViolation(context + " needs a '" + wanted + "' model, file has kind '" + f.kind() + "'");
}

const LindbladModel& lindblad_part(const ModelFile& f, const std::string& context) {
    if (const auto* l = std::get_if<LindbladModel>(&f.model)) {
        return *l;
    }
    if (const auto* m = std::get_if<MemoryKernelModel>(&f.model)) {
        return m->base;
    }
    throw ContractViolation(context + " needs a lindblad or memory_kernel model, file has kind 'kraus'");
}

// ---------------------------------------------------------------- check

int cmd_check(const GlobalOptions& g, const std::string& path, const std::string& regime, const std::string& init_s,
              std::ostream& out) {
    const double tol = resolve_tolerance(g);
    const ModelFile f = load_model(path);
    const Init init = parse_init(init_s);
    CheckReport r;
    if (regime == "cp-dfs" || regime == "cp-ns") {
        const auto& k = expect_kind<KrausSet>(f, "kraus", "--regime " + regime);
        if (regime == "cp-dfs") {
            r = init == Init::perfect ? check_cp_dfs_perfect(k, f.layout, tol) : check_cp_dfs_imperfect(k, f.layout, tol);
        } else {
            r = init == Init::perfect ? check_cp_ns_perfect(k, f.layout, tol) : check_cp_ns_imperfect(k, f.layout, tol);
        }
    } else if (regime == "markov-dfs" || regime == "markov-ns") {
        const auto& m = expect_kind<LindbladModel>(f, "lindblad", "--regime " + regime);
        r = regime == "markov-dfs" ? check_markov_dfs(m, f.layout, init, tol) : check_markov_ns(m, f.layout, init, tol);
    } else if (regime == "nonmarkov-dfs" || regime == "nonmarkov-ns") {
        const auto& m = expect_kind<MemoryKernelModel>(f, "memory_kernel", "--regime " + regime);
        r = regime == "nonmarkov-dfs" ? check_nonmarkov_dfs(m, f.layout, init, tol)
                                      : check_nonmarkov_ns(m, f.layout, init, tol);
    } else {
        throw ContractViolation("unknown regime '" + regime + "'");
    }
    if (json_mode(g)) {
        out << report_to_json(r).dump(2) << "\n";
    } else {
        out << report_to_text(r);
    }
    return r.passed() ? exit_success : exit_check_failed;
}

// ---------------------------------------------------------------- simulate

struct SimulateOptions {
    std::string model;
    double t_final = 1.0;
    double dt = 1e-3;
    std::string state;
    bool monitor = false;
    std::size_t stride = 1;
    std::string out;
    std::string method = "integrate";
    std::size_t n_traj = 1000;
    double tau = 1e-3;
};

ComplexVector pure_vector(const DensityState& s) {
    const HermitianEigen e = hermitian_eig(s.matrix());
    const auto last = e.values.size() - 1;
    if (std::abs(e.values(last) - 1.0) > 1e-9) {
        throw ContractViolation("--method jumps needs a pure initial state");
    }
    return e.vectors.col(last);
}

int cmd_simulate(const GlobalOptions& g, const SimulateOptions& o, std::ostream& out) {
    const ModelFile f = load_model(o.model);
    std::optional<DensityState> rho0;
    if (!o.state.empty()) {
        rho0 = load_state(o.state);
    } else if (f.initial_state) {
        rho0 = f.initial_state;
    } else {
        throw ContractViolation("simulate needs --state or an initial_state in the model file");
    }

    if (o.method == "jumps") {
        const LindbladModel& m = expect_kind<LindbladModel>(f, "lindblad", "--method jumps");
        const TrajectoryAverage avg = sample_trajectories(m, pure_vector(*rho0), o.t_final, o.tau, o.n_traj, g.seed);
        Json j;
        j["method"] = "jumps";
        j["n_traj"] = avg.n_traj;
        j["steps"] = avg.steps;
        j["seed"] = g.seed;
        j["rho"] = matrix_to_json(avg.average.matrix());
        j["population_std_error"] = std::vector<double>(avg.population_std_error.data(),
                                                        avg.population_std_error.data() + avg.population_std_error.size());
        out << j.dump(2) << "\n";
        return exit_success;
    }

    IntegrationOptions io;
    io.record_stride = o.stride;
    io.monitor = o.monitor;
    EvolutionTrace trace(f.layout);
    if (const auto* l = std::get_if<LindbladModel>(&f.model)) {
        trace = integrate_lindblad(*l, *rho0, o.t_final, o.dt, f.layout, io);
    } else if (const auto* m = std::get_if<MemoryKernelModel>(&f.model)) {
        trace = integrate_memory_kernel(*m, *rho0, o.t_final, o.dt, f.layout, io);
    } else {
        throw ContractViolation("simulate needs a lindblad or memory_kernel model");
    }

    Json summary;
    summary["samples"] = trace.size();
    summary["dt"] = trace.dt;
    summary["t_final"] = trace.times.back();
    summary["max_trace_drift"] = *std::max_element(trace.trace_drift.begin(), trace.trace_drift.end());
    summary["min_eigenvalue"] = *std::min_element(trace.min_eigenvalue.begin(), trace.min_eigenvalue.end());
    if (!trace.dfs_unitarity_residual.empty()) {
        summary["max_dfs_unitarity_residual"] =
            *std::max_element(trace.dfs_unitarity_residual.begin(), trace.dfs_unitarity_residual.end());
    }
    summary["warnings"] = trace.warnings;

    if (o.out.empty()) {
        write_trace_ndjson(trace, out);
        return exit_success;
    }
    std::ofstream file(o.out, std::ios::binary);
    if (!file) {
        throw ParseError("cannot write '" + o.out + "'");
    }
    write_trace_ndjson(trace, file);
    if (json_mode(g)) {
        out << summary.dump(2) << "\n";
    } else {
        for (const auto& [k, v] : summary.items()) {
            out << k << ": " << (v.is_number_float() ? format_number(v.get<double>()) : v.dump()) << "\n";
        }
    }
    return exit_success;
}

// ---------------------------------------------------------------- find / fixpoints

int cmd_find(const GlobalOptions& g, const std::string& path, bool include_1d, std::ostream& out) {
    const ModelFile f = load_model(path);
    DiscoveryOptions opts;
    opts.include_one_dimensional = include_1d;
    opts.tol = resolve_tolerance(g);
    const auto cands = find_dfs_candidates(lindblad_part(f, "find"), opts);
    if (json_mode(g)) {
        out << candidates_to_json(cands).dump(2) << "\n";
        return exit_success;
    }
    out << cands.size() << " candidate(s)\n";
    for (std::size_t i = 0; i < cands.size(); ++i) {
        const auto& c = cands[i];
        out << "[" << i << "] dim " << c.dim() << ", c =";
        for (const Complex z : c.eigen_scalars) {
            out << " (" << format_number(z.real()) << ", " << format_number(z.imag()) << ")";
        }
        out << ", imperfect " << (c.flags.at("imperfect") ? "pass" : "fail") << ", perfect "
            << (c.flags.at("perfect") ? "pass" : "fail") << "\n";
    }
    return exit_success;
}

int cmd_fixpoints(const GlobalOptions& g, const std::string& path, std::ostream& out) {
    const ModelFile f = load_model(path);
    const auto& k = expect_kind<KrausSet>(f, "kraus", "fixpoints");
    const UnitalityResult u = is_unital(k);
    const FixedPointStates fp = df_states_of_unital_channel(k, f.layout);
    if (json_mode(g)) {
        out << fixed_points_to_json(fp, u).dump(2) << "\n";
        return exit_success;
    }
    out << "unital residual " << format_number(u.residual) << "\n";
    out << "fixed-point dimension " << fp.basis.size() << "\n";
    out << "states " << fp.states.size() << "\n";
    out << "max off-diagonal block " << format_number(fp.max_offdiag_block) << "\n";
    return exit_success;
}

// ---------------------------------------------------------------- examples

int print_comparison(const GlobalOptions& g, const std::string& name, Json params, const Scenario& s,
                     std::optional<double> predicted, std::ostream& out) {
    const double tol = resolve_tolerance(g);
    const CheckReport legacy = check_markov_dfs_legacy(s.model, s.layout, tol);
    const CheckReport perfect = check_markov_dfs(s.model, s.layout, Init::perfect, tol);
    const CheckReport imperfect = check_markov_dfs(s.model, s.layout, Init::imperfect, tol);
    if (json_mode(g)) {
        Json j;
        j["scenario"] = name;
        j["params"] = std::move(params);
        j["notes"] = s.notes;
        j["checks"] = Json{{"legacy", report_to_json(legacy)},
                           {"perfect", report_to_json(perfect)},
                           {"imperfect", report_to_json(imperfect)}};
        if (predicted) {
            j["predicted_new_dfs_offdiag"] = *predicted;
        }
        out << j.dump(2) << "\n";
    } else {
        out << "scenario " << name << "\n";
        for (const auto& [k, v] : params.items()) {
            out << "  " << k << " = " << (v.is_number_float() ? format_number(v.get<double>()) : v.dump()) << "\n";
        }
        for (const auto& n : s.notes) {
            out << "note: " << n << "\n";
        }
        out << "\nold condition (scalar action, no Hamiltonian mixing)\n" << report_to_text(legacy);
        out << "\nperfect initialization\n" << report_to_text(perfect);
        out << "\nimperfect initialization\n" << report_to_text(imperfect);
        if (predicted) {
            out << "\npredicted new-DFS-offdiag 2|u11* u12||d1 - d2| = " << format_number(*predicted) << "\n";
        }
    }
    return perfect.passed() ? exit_success : exit_check_failed;
}

int cmd_three_qubit(const GlobalOptions& g, double d1, double d2, double theta, std::ostream& out) {
    const auto p = ThreeQubitExampleParams::from_eigen(d1, d2, theta);
    const Scenario s = build_three_qubit_example(p);
    const double predicted = 2.0 * std::abs(std::conj(p.u(0, 0)) * p.u(0, 1)) * std::abs(d1 - d2);
    return print_comparison(g, "three-qubit", Json{{"d1", d1}, {"d2", d2}, {"theta", theta}}, s, predicted, out);
}

int cmd_collective(const GlobalOptions& g, std::size_t n, std::ostream& out) {
    const Scenario s = build_collective_dephasing(n);
    return print_comparison(g, "collective-dephasing",
                            Json{{"n", n}, {"dfs_dim", s.layout.ns_dim()}}, s, std::nullopt, out);
}

// ---------------------------------------------------------------- leak

int cmd_leak(const GlobalOptions& g, const std::string& actual, const std::string& ideal, const std::string& u_path,
             const std::string& norm_s, const std::string& layout_path, std::ostream& out) {
    const DensityState ra = load_state(actual);
    const DensityState ri = load_state(ideal);
    const ComplexMatrix u = load_matrix(u_path);
    NormKind kind = NormKind::trace;
    if (norm_s == "frobenius") {
        kind = NormKind::frobenius;
    } else if (norm_s == "spectral") {
        kind = NormKind::spectral;
    } else if (norm_s != "trace") {
        throw ContractViolation("unknown norm '" + norm_s + "'");
    }
    std::optional<HilbertLayout> layout;
    if (!layout_path.empty()) {
        layout = load_model(layout_path).layout;
    } else {
        const auto k = static_cast<std::size_t>(u.rows());
        if (k > ra.dim()) {
            throw ShapeError("u is larger than the state");
        }
        layout.emplace(k, 1, ra.dim() - k);
    }
    const double v = delta_leak(ra, ri, u, *layout, kind);
    if (json_mode(g)) {
        out << Json{{"delta_leak", v}, {"norm", norm_s}}.dump(2) << "\n";
    } else {
        out << "delta_leak (" << norm_s << ") " << format_number(v) << "\n";
    }
    return exit_success;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"dfskit: certify decoherence-free subspaces and noiseless subsystems", "dfskit"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--report", g.report, "Report format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--seed", g.seed, "Seed for trajectory sampling");
    app.add_option("--tol", g.tol, "Relative residual tolerance (overrides DFSKIT_TOL)");

    std::string model;
    std::string regime;
    std::string init;
    auto* check = app.add_subcommand("check", "Run a structure certificate on a model file");
    check->add_option("model", model, "Model file")->required();
    check->add_option("--regime", regime, "Certificate family")
        ->required()
        ->check(CLI::IsMember({"cp-dfs", "cp-ns", "markov-dfs", "markov-ns", "nonmarkov-dfs", "nonmarkov-ns"}));
    check->add_option("--init", init, "Initialization assumption")
        ->required()
        ->check(CLI::IsMember({"perfect", "imperfect"}));

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Integrate the dynamics and monitor the protected block");
    simulate->add_option("model", sim.model, "Model file")->required();
    simulate->add_option("--t-final", sim.t_final, "Final time")->required();
    simulate->add_option("--dt", sim.dt, "Step size");
    simulate->add_option("--state", sim.state, "Initial state file");
    simulate->add_flag("--monitor-dfs", sim.monitor, "Record protected-block unitarity residuals");
    simulate->add_option("--stride", sim.stride, "Record every n-th step")->check(CLI::PositiveNumber);
    simulate->add_option("--out", sim.out, "Write the NDJSON trace here and print a summary");
    simulate->add_option("--method", sim.method, "integrate or jumps")->check(CLI::IsMember({"integrate", "jumps"}));
    simulate->add_option("--n-traj", sim.n_traj, "Trajectories for --method jumps")->check(CLI::PositiveNumber);
    simulate->add_option("--tau", sim.tau, "Jump time step for --method jumps");

    bool include_1d = false;
    auto* find = app.add_subcommand("find", "Search joint eigenspaces of the Lindblad operators");
    find->add_option("model", model, "Model file")->required();
    find->add_flag("--include-1d", include_1d, "Also report one-dimensional candidates");

    auto* fixpoints = app.add_subcommand("fixpoints", "Fixed points of a unital channel");
    fixpoints->add_option("model", model, "Model file")->required();

    auto* example = app.add_subcommand("example", "Built-in scenarios");
    example->require_subcommand(1);
    double d1 = 1.0;
    double d2 = 1.0;
    double theta = 0.7853981633974483;
    auto* three = example->add_subcommand("three-qubit", "Emission + dephasing on three qubits");
    three->add_option("--d1", d1, "First eigenvalue of the coefficient matrix");
    three->add_option("--d2", d2, "Second eigenvalue of the coefficient matrix");
    three->add_option("--theta", theta, "Rotation angle of the diagonalizing matrix");
    std::size_t n_qubits = 2;
    auto* collective = example->add_subcommand("collective-dephasing", "Collective dephasing of n qubits");
    collective->add_option("--n", n_qubits, "Number of qubits (2-4)");

    std::string actual;
    std::string ideal;
    std::string u_path;
    std::string norm_s = "trace";
    std::string layout_path;
    auto* leak = app.add_subcommand("leak", "Initialization error Delta_leak");
    leak->add_option("--actual", actual, "Actual initial state file")->required();
    leak->add_option("--ideal", ideal, "Ideal initial state file")->required();
    leak->add_option("--u", u_path, "Unitary on the protected block")->required();
    leak->add_option("--norm", norm_s, "trace, frobenius or spectral")
        ->check(CLI::IsMember({"trace", "frobenius", "spectral"}));
    leak->add_option("--layout", layout_path, "Model file whose layout to use");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_success : exit_usage;
    }

    try {
        if (check->parsed()) {
            return cmd_check(g, model, regime, init, out);
        }
        if (simulate->parsed()) {
            return cmd_simulate(g, sim, out);
        }
        if (find->parsed()) {
            return cmd_find(g, model, include_1d, out);
        }
        if (fixpoints->parsed()) {
            return cmd_fixpoints(g, model, out);
        }
        if (three->parsed()) {
            return cmd_three_qubit(g, d1, d2, theta, out);
        }
        if (collective->parsed()) {
            return cmd_collective(g, n_qubits, out);
        }
        if (leak->parsed()) {
            return cmd_leak(g, actual, ideal, u_path, norm_s, layout_path, out);
        }
    } catch (const Error& e) {
        err << "error [" << e.code() << "]";
        if (!e.path().empty()) {
            err << " at " << e.path();
        }
        err << ": " << e.what() << "\n";
        return exit_usage;
    }
    err << "no command given\n";
    return exit_usage;
}

} // namespace dfskit
