#pragma once

// JSON forms of states, inequalities, settings, counts and reports.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "tribell/bellcore.hpp"
#include "tribell/expsim.hpp"
#include "tribell/optimizer.hpp"
#include "tribell/qstate.hpp"
#include "tribell/tomo.hpp"
#include "tribell/units.hpp"

namespace tribell {

using Json = nlohmann::json;

/// {"kind": "pure", "label": ..., "amplitudes": 8 [re, im] pairs}
Json to_json(const PureState3Q& psi);
/// {"kind": "density", "entries": 64 [re, im] pairs, row-major}
Json to_json(const DensityMatrix3Q& rho);
/// Accepts either object form above, or a bare array of 8 or 64 pairs. Pure
/// states are returned as their projector. DomainError on malformed input.
DensityMatrix3Q state_from_json(const Json& j);

/// {"name", "normalization": [num, den], "terms": [{"a", "b", "c", "coeff": [num, den]}]}
/// with null for an absent party.
Json to_json(const BellInequality& ineq);
/// Parses and, when `check_bound` is set, requires the exact local bound to
/// equal 1 (DomainError otherwise).
BellInequality inequality_from_json(const Json& j, bool check_bound = true);

/// {"angles": [12] (when available), "vectors": 6 [x, y, z]}
Json to_json(const MeasurementSettings& settings);
/// Uses "angles" when present, otherwise "vectors".
MeasurementSettings settings_from_json(const Json& j);

Json to_json(const OptimizerConfig& cfg);
/// Missing keys keep their defaults; the result is validated.
OptimizerConfig optimizer_config_from_json(const Json& j);

Json to_json(const OptimizationReport& report);

Json to_json(const CountsRecord& rec);
CountsRecord counts_from_json(const Json& j);

Json to_json(const ExperimentRun& run);
ExperimentRun run_from_json(const Json& j);

Json to_json(const StateReport& report);
Json to_json(const ReconstructionResult& result);

/// IoError with the path on failure.
Json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace tribell
