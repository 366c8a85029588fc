#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "orbitcert/chain.hpp"
#include "orbitcert/flow.hpp"
#include "orbitcert/pseudo.hpp"
#include "orbitcert/shadow.hpp"
#include "orbitcert/sysdef.hpp"
#include "orbitcert/verify.hpp"

namespace orbitcert {

// Every artifact document carries this marker so downstream readers can
// detect format drift.
inline constexpr const char* kSchemaVersion = "1";

using Json = nlohmann::ordered_json;

// Decimal rendering with 17 significant digits: enough to reproduce any
// double exactly, and the canonical form golden-file comparisons normalize to.
std::string canonical_number(double v);

// ---------------------------------------------------------------------------
// JSON documents.  Key order is fixed (insertion order), all runs of the same
// configuration produce byte-identical dumps.
// ---------------------------------------------------------------------------

Json system_json(const SystemSpec& spec);
Json trajectory_json(const Trajectory& traj);
Json pseudo_orbit_json(const PseudoOrbit& po);
Json classification_json(const ClassificationReport& report);
Json shadow_check_json(const ShadowCheck& check);
Json search_json(const ShadowResult& result);
Json certificate_json(const NonShadowCertificate& cert);
Json cover_json(const BoxCover& cover);
Json scc_json(const SccResult& comps);
Json attractor_json(const AttractorCandidate& cand);
Json transitivity_json(const TransitivityReport& report);
Json witness_json(const WitnessCheck& check);
Json theorem_json(const TheoremReport& report);

// Inverse of certificate_json; throws std::invalid_argument on missing or
// ill-typed fields (schema_version mismatch included).
NonShadowCertificate certificate_from_json(const Json& doc);

// ---------------------------------------------------------------------------
// Pseudo-orbit files: self-contained JSON with the full system definition
// text, the window origin, durations, and points.
// ---------------------------------------------------------------------------

Json pseudo_orbit_file_json(const PseudoOrbit& po);
PseudoOrbit pseudo_orbit_from_file_json(const Json& doc);

// ---------------------------------------------------------------------------
// Text artifacts
// ---------------------------------------------------------------------------

// Edge-list export: a commented cover header followed by one "P Q" line per
// transition-graph edge.
std::string graph_edge_text(const BoxGraph& graph);

// CSV with a header row; numbers rendered canonically.
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

// Write-to-temp-then-rename in the target directory; the destination is never
// observable half-written.  Throws std::runtime_error on I/O failure.
void write_text_atomic(const std::string& path, const std::string& content);
void write_json_atomic(const std::string& path, const Json& doc);

std::string read_text_file(const std::string& path);

}  // namespace orbitcert
