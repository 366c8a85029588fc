#include "orbitcert/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace orbitcert {

namespace {

// JSON has no literals for non-finite numbers; render them as tagged strings
// instead of the lossy null nlohmann would emit.
Json jnum(double v) {
    if (std::isnan(v)) return Json("nan");
    if (std::isinf(v)) return Json(v > 0 ? "inf" : "-inf");
    return Json(v);
}

Json jnum_list(const std::vector<double>& values) {
    Json arr = Json::array();
    for (double v : values) arr.push_back(jnum(v));
    return arr;
}

Json point_list(const std::vector<std::vector<double>>& points) {
    Json arr = Json::array();
    for (const std::vector<double>& p : points) arr.push_back(jnum_list(p));
    return arr;
}

const char* outcome_name(PairOutcome outcome) {
    switch (outcome) {
        case PairOutcome::hit: return "hit";
        case PairOutcome::refuted: return "refuted";
        case PairOutcome::inconclusive: return "inconclusive";
    }
    return "?";
}

Json check_json(const BoxFlowCheck& check) {
    Json doc;
    doc["box"] = check.box;
    doc["set"] = std::string(1, check.set);
    doc["worst_clearance"] = jnum(check.worst_clearance);
    doc["pass"] = check.pass;
    return doc;
}

double num_field(const Json& doc, const char* key) {
    const Json& v = doc.at(key);
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        throw std::invalid_argument(std::string("bad numeric field ") + key);
    }
    return v.get<double>();
}

void require_schema(const Json& doc) {
    if (!doc.is_object() || !doc.contains("schema_version") ||
        doc.at("schema_version").get<std::string>() != kSchemaVersion)
        throw std::invalid_argument("document schema_version mismatch");
}

}  // namespace

std::string canonical_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Json system_json(const SystemSpec& spec) {
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["name"] = spec.name;
    Json space;
    space["kind"] = spec.space.kind == SpaceKind::torus ? "torus" : "box";
    space["dim"] = spec.space.dim;
    space["lo"] = spec.space.lo;
    space["hi"] = spec.space.hi;
    doc["space"] = std::move(space);
    Json region;
    region["lo"] = spec.isolated_region.lo;
    region["hi"] = spec.isolated_region.hi;
    doc["region"] = std::move(region);
    Json field = Json::array();
    for (const ExprPtr& e : spec.field) field.push_back(print_expr(*e));
    doc["field"] = std::move(field);
    Json params = Json::object();
    for (const auto& [key, value] : spec.params) params[key] = value;
    doc["params"] = std::move(params);
    return doc;
}

Json trajectory_json(const Trajectory& traj) {
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["times"] = traj.times;
    doc["points"] = point_list(traj.points);
    return doc;
}

Json pseudo_orbit_json(const PseudoOrbit& po) {
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["system"] = po.system ? po.system->name : "";
    doc["origin"] = po.origin;
    doc["size"] = po.size();
    doc["durations"] = po.durations;
    doc["points"] = point_list(po.points);
    return doc;
}

Json classification_json(const ClassificationReport& report) {
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["kind"] = to_string(report.kind);
    doc["verdict"] = to_string(report.verdict);
    doc["delta"] = report.delta ? Json(*report.delta) : Json(nullptr);
    doc["window_N"] = report.window_N;
    doc["defect_origin"] = report.defect_origin;
    doc["defects"] = jnum_list(report.defect_sequence);
    doc["partial_averages"] = jnum_list(report.partial_averages);
    doc["tail_tol"] = report.tail_tol;
    doc["tail_fraction"] = report.tail_fraction;
    Json sides = Json::array();
    for (const SideDiagnostics& side : report.sides) {
        Json s;
        s["side"] = side.side;
        s["tail_sup"] = jnum(side.tail_sup);
        s["tail_first_half_sup"] = jnum(side.tail_first_half_sup);
        s["tail_second_half_sup"] = jnum(side.tail_second_half_sup);
        s["fitted_c"] = jnum(side.fitted_c);
        s["fitted_p"] = jnum(side.fitted_p);
        s["fit_valid"] = side.fit_valid;
        s["verdict"] = to_string(side.verdict);
        sides.push_back(std::move(s));
    }
    doc["sides"] = std::move(sides);
    doc["note"] = report.note;
    return doc;
}

Json shadow_check_json(const ShadowCheck& check) {
    Json doc;
    doc["mode"] = to_string(check.mode);
    doc["z"] = check.z;
    if (check.reparam.is_identity()) {
        doc["reparam"] = "identity";
    } else {
        Json h;
        h["knots_t"] = check.reparam.knots_t;
        h["knots_h"] = check.reparam.knots_h;
        doc["reparam"] = std::move(h);
    }
    doc["gap_k"] = check.gap_k;
    Json segments = Json::array();
    for (const SegmentCheck& seg : check.segments) {
        Json s;
        s["index"] = seg.index;
        s["length"] = seg.length;
        s["integral"] = jnum(seg.integral);
        s["sup"] = jnum(seg.sup);
        segments.push_back(std::move(s));
    }
    doc["segments"] = std::move(segments);
    doc["forward_escaped"] = check.forward_escaped;
    doc["backward_escaped"] = check.backward_escaped;
    doc["forward_statistic"] =
        check.forward_statistic ? jnum(*check.forward_statistic) : Json(nullptr);
    doc["backward_statistic"] =
        check.backward_statistic ? jnum(*check.backward_statistic) : Json(nullptr);
    doc["value"] = jnum(check.value);
    return doc;
}

Json search_json(const ShadowResult& result) {
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["evaluated"] = result.evaluated;
    doc["escaped"] = result.escaped;
    doc["z_index"] = result.z_index;
    doc["best"] = shadow_check_json(result.best);
    return doc;
}

Json certificate_json(const NonShadowCertificate& cert) {
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["system"] = cert.system_name;
    doc["depth"] = cert.depth;
    doc["epsilon0"] = cert.epsilon0;
    doc["point_b"] = cert.point_b;
    doc["attractor_boxes"] = cert.attractor_boxes;
    doc["neighborhood_boxes"] = cert.neighborhood_boxes;
    doc["complement_boxes"] = cert.complement_boxes;
    doc["basin_boxes"] = cert.basin_boxes;
    doc["lipschitz"] = jnum(cert.lipschitz);
    doc["margin"] = jnum(cert.margin);
    doc["min_gap"] = jnum(cert.min_gap);
    Json checks = Json::array();
    for (const BoxFlowCheck& check : cert.checks) checks.push_back(check_json(check));
    doc["checks"] = std::move(checks);
    doc["valid"] = cert.valid;
    doc["failure"] = cert.failure;
    doc["implied_average_bound"] = jnum(cert.implied_average_bound);
    return doc;
}

NonShadowCertificate certificate_from_json(const Json& doc) {
    require_schema(doc);
    NonShadowCertificate cert;
    cert.system_name = doc.at("system").get<std::string>();
    cert.depth = doc.at("depth").get<int>();
    cert.epsilon0 = num_field(doc, "epsilon0");
    cert.point_b = doc.at("point_b").get<std::vector<double>>();
    cert.attractor_boxes = doc.at("attractor_boxes").get<std::vector<int>>();
    cert.neighborhood_boxes = doc.at("neighborhood_boxes").get<std::vector<int>>();
    cert.complement_boxes = doc.at("complement_boxes").get<std::vector<int>>();
    cert.basin_boxes = doc.at("basin_boxes").get<std::vector<int>>();
    cert.lipschitz = num_field(doc, "lipschitz");
    cert.margin = num_field(doc, "margin");
    cert.min_gap = num_field(doc, "min_gap");
    for (const Json& c : doc.at("checks")) {
        BoxFlowCheck check;
        check.box = c.at("box").get<int>();
        const std::string set = c.at("set").get<std::string>();
        if (set.size() != 1) throw std::invalid_argument("certificate: bad check set label");
        check.set = set[0];
        check.worst_clearance = num_field(c, "worst_clearance");
        check.pass = c.at("pass").get<bool>();
        cert.checks.push_back(check);
    }
    cert.valid = doc.at("valid").get<bool>();
    cert.failure = doc.at("failure").get<std::string>();
    cert.implied_average_bound = num_field(doc, "implied_average_bound");
    return cert;
}

Json cover_json(const BoxCover& cover) {
    Json doc;
    doc["kind"] = cover.space.kind == SpaceKind::torus ? "torus" : "box";
    doc["dim"] = cover.space.dim;
    doc["region_lo"] = cover.region.lo;
    doc["region_hi"] = cover.region.hi;
    doc["depth"] = cover.depth;
    doc["per_axis"] = cover.per_axis;
    doc["boxes"] = cover.box_count();
    doc["box_width"] = cover.box_width;
    return doc;
}

Json scc_json(const SccResult& comps) {
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["count"] = comps.count;
    doc["component"] = comps.component;
    Json members = Json::array();
    for (const std::vector<int>& m : comps.members) members.push_back(m);
    doc["members"] = std::move(members);
    Json dag = Json::array();
    for (const std::vector<int>& d : comps.dag) dag.push_back(d);
    doc["dag"] = std::move(dag);
    Json recurrent = Json::array();
    for (char r : comps.recurrent) recurrent.push_back(r != 0);
    doc["recurrent"] = std::move(recurrent);
    return doc;
}

Json attractor_json(const AttractorCandidate& cand) {
    Json doc;
    doc["component"] = cand.component;
    doc["proper"] = cand.proper;
    doc["boxes"] = cand.boxes;
    doc["neighborhood"] = cand.neighborhood;
    doc["basin"] = cand.basin;
    return doc;
}

Json transitivity_json(const TransitivityReport& report) {
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["verdict"] = to_string(report.verdict);
    doc["seed"] = report.seed;
    doc["t_max"] = report.t_max;
    Json pairs = Json::array();
    for (const TransitivityPair& pair : report.pairs) {
        Json p;
        p["from_box"] = pair.from_box;
        p["to_box"] = pair.to_box;
        p["outcome"] = outcome_name(pair.outcome);
        if (pair.outcome == PairOutcome::hit) p["hit_time"] = jnum(pair.hit_time);
        if (pair.outcome == PairOutcome::refuted) p["blocking_set"] = pair.blocking_set;
        pairs.push_back(std::move(p));
    }
    doc["pairs"] = std::move(pairs);
    return doc;
}

Json witness_json(const WitnessCheck& check) {
    Json doc;
    doc["forward_rate"] = jnum(check.forward_rate);
    doc["backward_rate"] = jnum(check.backward_rate);
    doc["forward_final"] = jnum(check.forward_final);
    doc["backward_final"] = jnum(check.backward_final);
    doc["forward_escaped"] = check.forward_escaped;
    doc["backward_escaped"] = check.backward_escaped;
    doc["verdict"] = to_string(check.verdict);
    return doc;
}

Json theorem_json(const TheoremReport& report) {
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["theorem"] = report.theorem;
    doc["system"] = report.system;
    Json params = Json::object();
    for (const auto& [key, value] : report.parameters) params[key] = value;
    doc["parameters"] = std::move(params);
    doc["verdict"] = to_string(report.verdict);
    doc["notes"] = report.notes;
    if (report.chain_transitive) doc["chain_transitive"] = *report.chain_transitive;
    if (report.proper_attractors >= 0) doc["proper_attractors"] = report.proper_attractors;
    if (!report.attractors.empty()) {
        Json attractors = Json::array();
        for (const AttractorCandidate& cand : report.attractors)
            attractors.push_back(attractor_json(cand));
        doc["attractors"] = std::move(attractors);
    }
    if (report.classification) doc["classification"] = classification_json(*report.classification);
    if (report.window_bound) doc["window_bound"] = *report.window_bound;
    if (report.partial_average_deviation)
        doc["partial_average_deviation"] = jnum(*report.partial_average_deviation);
    if (report.certificate) doc["certificate"] = certificate_json(*report.certificate);
    if (report.search_minimum) doc["search_minimum"] = jnum(*report.search_minimum);
    if (report.transitivity) doc["transitivity"] = transitivity_json(*report.transitivity);
    if (!report.invariant_set_checks.empty()) {
        Json checks = Json::array();
        for (const BoxFlowCheck& check : report.invariant_set_checks)
            checks.push_back(check_json(check));
        doc["invariant_set_checks"] = std::move(checks);
    }
    if (report.witness_candidates > 0) doc["witness_candidates"] = report.witness_candidates;
    if (report.witness) {
        Json w;
        w["z"] = report.witness->z;
        w["gap_k"] = report.witness->gap_k;
        w["check"] = witness_json(report.witness->check);
        doc["witness"] = std::move(w);
    }
    if (report.functional_gap) doc["functional_gap"] = jnum(*report.functional_gap);
    return doc;
}

Json pseudo_orbit_file_json(const PseudoOrbit& po) {
    validate_pseudo_orbit(po);
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["system_text"] = print_system(*po.system);
    doc["origin"] = po.origin;
    doc["durations"] = po.durations;
    doc["points"] = point_list(po.points);
    return doc;
}

PseudoOrbit pseudo_orbit_from_file_json(const Json& doc) {
    require_schema(doc);
    PseudoOrbit po;
    po.system = std::make_shared<SystemSpec>(
        parse_system(doc.at("system_text").get<std::string>()));
    po.origin = doc.at("origin").get<int>();
    po.durations = doc.at("durations").get<std::vector<double>>();
    for (const Json& p : doc.at("points")) po.points.push_back(p.get<std::vector<double>>());
    validate_pseudo_orbit(po);
    return po;
}

std::string graph_edge_text(const BoxGraph& graph) {
    std::ostringstream out;
    const BoxCover& cover = graph.cover;
    out << "# cover kind=" << (cover.space.kind == SpaceKind::torus ? "torus" : "box")
        << " dim=" << cover.space.dim << " depth=" << cover.depth
        << " per_axis=" << cover.per_axis << " boxes=" << cover.box_count() << "\n";
    out << "# region";
    for (int k = 0; k < cover.space.dim; ++k) {
        const std::size_t a = static_cast<std::size_t>(k);
        out << " [" << canonical_number(cover.region.lo[a]) << ","
            << canonical_number(cover.region.hi[a]) << "]";
    }
    out << "\n";
    out << "# delta=" << canonical_number(graph.delta)
        << " t_edge=" << canonical_number(graph.t_edge)
        << " samples_per_box=" << graph.samples_per_box << " edges=" << graph.edge_count << "\n";
    for (std::size_t p = 0; p < graph.edges.size(); ++p)
        for (int q : graph.edges[p]) out << p << " " << q << "\n";
    return out.str();
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (k) out << ",";
        out << header[k];
    }
    out << "\n";
    for (const std::vector<double>& row : rows) {
        if (row.size() != header.size())
            throw std::invalid_argument("csv_table: row width does not match header");
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out << ",";
            out << canonical_number(row[k]);
        }
        out << "\n";
    }
    return out.str();
}

void write_text_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.parent_path() /
                         (target.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    fs::rename(tmp, target);
}

void write_json_atomic(const std::string& path, const Json& doc) {
    write_text_atomic(path, doc.dump(2) + "\n");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

}  // namespace orbitcert
