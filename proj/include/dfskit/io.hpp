// io.hpp: model/state files and report serialization
//
// Matrices are row-major nested arrays whose entries are [re, im] pairs.
// Doubles are written in shortest round-trip decimal form, so save/load is
// bit-exact.

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "dfskit/certify.hpp"
#include "dfskit/channels.hpp"
#include "dfskit/discover.hpp"
#include "dfskit/dynamics.hpp"
#include "dfskit/models.hpp"

namespace dfskit {

using Json = nlohmann::ordered_json;

inline constexpr const char* schema_version = "1.0";

using AnyModel = std::variant<KrausSet, LindbladModel, MemoryKernelModel>;

struct ModelFile {
    AnyModel model;
    HilbertLayout layout;
    std::optional<DensityState> initial_state;

    std::size_t dim() const;
    const char* kind() const noexcept;
};

// Throw ParseError (malformed JSON), SchemaError (missing / mistyped /
// inconsistently sized fields) or InvariantError (a domain invariant fails),
// each carrying a JSON pointer to the offending location.
ModelFile load_model(const std::string& path);
ModelFile parse_model(const std::string& text);
ModelFile model_from_json(const Json& doc);

Json model_to_json(const ModelFile& file);
std::string serialize_model(const ModelFile& file);
void save_model(const std::string& path, const ModelFile& file);

// A state file holds {"matrix": ...} (density matrix) or {"vector": ...}
// (pure state, [re, im] entries); the bare matrix array is accepted too.
DensityState load_state(const std::string& path);
ComplexMatrix load_matrix(const std::string& path);

Json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const Json& j, const std::string& path);
Json complex_to_json(Complex z);

// ---- reports

Json report_to_json(const CheckReport& report);
std::string report_to_text(const CheckReport& report);

Json candidates_to_json(const std::vector<DfsCandidate>& candidates);
Json fixed_points_to_json(const FixedPointStates& states, const UnitalityResult& unital);

// One JSON object per recorded time sample, newline-delimited.
void write_trace_ndjson(const EvolutionTrace& trace, std::ostream& out, bool include_states = true);

// printf("%.12g") rendering used by every text report.
std::string format_number(double x);

} // namespace dfskit
