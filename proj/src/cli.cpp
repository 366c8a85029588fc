#include "orbitcert/cli.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "orbitcert/report.hpp"
#include "orbitcert/verify.hpp"

namespace orbitcert {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitRefuted = 2;
constexpr int kExitInconclusive = 3;

int verdict_exit(TheoremVerdict v) {
    switch (v) {
        case TheoremVerdict::consistent: return kExitOk;
        case TheoremVerdict::refuted: return kExitRefuted;
        case TheoremVerdict::inconclusive: return kExitInconclusive;
    }
    return kExitError;
}

int verdict_exit(Verdict v) {
    switch (v) {
        case Verdict::holds: return kExitOk;
        case Verdict::fails: return kExitRefuted;
        case Verdict::inconclusive: return kExitInconclusive;
    }
    return kExitError;
}

std::vector<double> parse_point(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(pos, comma - pos);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("cannot parse coordinate '" + item + "'");
        }
        while (used < item.size() &&
               std::isspace(static_cast<unsigned char>(item[used])))
            ++used;
        if (used != item.size())
            throw std::invalid_argument("cannot parse coordinate '" + item + "'");
        out.push_back(v);
        pos = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("empty point");
    return out;
}

// Options shared by every subcommand that loads a system.
struct SystemOptions {
    std::string system;
    std::string file;
    double alpha = 1.4142135623730951;

    void attach(CLI::App* cmd, bool required = true) {
        auto* sys = cmd->add_option("--system", system, "builtin system name (see `sys list`)");
        auto* fil = cmd->add_option("--file", file, "path to a system definition file");
        cmd->add_option("--alpha", alpha,
                        "slope parameter for torus_linear (default sqrt(2))");
        if (required) {
            sys->excludes(fil);
            fil->excludes(sys);
        }
    }

    SystemSpec load() const {
        if (!file.empty()) return parse_system(read_text_file(file));
        if (system.empty())
            throw std::invalid_argument("one of --system or --file is required");
        if (system == "torus_linear") return builtin_system(system, {{"alpha", alpha}});
        return builtin_system(system);
    }

    Json config_json() const {
        Json cfg;
        if (!file.empty())
            cfg["file"] = file;
        else
            cfg["system"] = system;
        if (system == "torus_linear") cfg["alpha"] = alpha;
        return cfg;
    }
};

struct IntegOptions {
    double step = 1e-3;

    void attach(CLI::App* cmd) {
        cmd->add_option("--step", step, "integrator micro-step (default 1e-3)");
    }
    IntegratorConfig config() const {
        IntegratorConfig integ;
        integ.step = step;
        return integ;
    }
};

void emit(const std::string& out_path, const Json& doc) {
    if (out_path.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        write_json_atomic(out_path, doc);
        std::cout << "wrote " << out_path << "\n";
    }
}

// ---------------------------------------------------------------------------
// sys
// ---------------------------------------------------------------------------

int cmd_sys_list() {
    for (const std::string& name : builtin_names()) std::cout << name << "\n";
    return kExitOk;
}

int cmd_sys_show(const SystemOptions& sysopt, const std::string& out) {
    const SystemSpec spec = sysopt.load();
    std::cout << print_system(spec);
    if (!out.empty()) {
        write_json_atomic(out, system_json(spec));
        std::cout << "wrote " << out << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// integrate
// ---------------------------------------------------------------------------

int cmd_integrate(const SystemOptions& sysopt, const IntegOptions& integopt,
                  const std::string& x0_text, double t, const std::string& out,
                  const std::string& csv) {
    const SystemSpec spec = sysopt.load();
    const std::vector<double> x0 = parse_point(x0_text);
    const Trajectory traj = flow_trace(spec, x0, t, integopt.config());
    const std::vector<double>& last = traj.points.back();
    std::cout << "flow(" << x0_text << ", " << canonical_number(t) << ") =";
    for (double v : last) std::cout << " " << canonical_number(v);
    std::cout << "\n";
    if (!out.empty()) {
        Json doc = trajectory_json(traj);
        doc["config"] = sysopt.config_json();
        doc["config"]["step"] = integopt.step;
        doc["config"]["t"] = t;
        write_json_atomic(out, doc);
        std::cout << "wrote " << out << "\n";
    }
    if (!csv.empty()) {
        std::vector<std::string> header{"t"};
        for (int k = 0; k < spec.space.dim; ++k) header.push_back("x" + std::to_string(k));
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < traj.times.size(); ++i) {
            std::vector<double> row{traj.times[i]};
            row.insert(row.end(), traj.points[i].begin(), traj.points[i].end());
            rows.push_back(std::move(row));
        }
        write_text_atomic(csv, csv_table(header, rows));
        std::cout << "wrote " << csv << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// pseudo gen / classify
// ---------------------------------------------------------------------------

int cmd_pseudo_gen(const SystemOptions& sysopt, const IntegOptions& integopt,
                   const std::string& mode, const std::string& x0_text, int n, double sigma,
                   std::uint64_t seed, const std::string& a_text, const std::string& b_text,
                   int half_len, const std::string& out) {
    const SystemSpec spec = sysopt.load();
    const IntegratorConfig integ = integopt.config();
    auto sys = std::make_shared<SystemSpec>(spec);
    PseudoOrbit po;
    if (mode == "sample" || mode == "perturb") {
        if (x0_text.empty()) throw std::invalid_argument("--x0 is required for mode " + mode);
        const std::vector<double> x0 = parse_point(x0_text);
        if (n < 1) throw std::invalid_argument("--n must be >= 1");
        if (mode == "sample") {
            po = sample_orbit(spec, x0, std::vector<double>(static_cast<std::size_t>(n), 1.0),
                              integ);
        } else {
            po = perturb_orbit(spec, x0, std::vector<double>(static_cast<std::size_t>(n), sigma),
                               seed, integ);
        }
    } else if (mode == "concat") {
        if (a_text.empty() || b_text.empty())
            throw std::invalid_argument("--a and --b are required for mode concat");
        po = make_concat_ab(spec, parse_point(a_text), parse_point(b_text), half_len, integ);
    } else {
        throw std::invalid_argument("unknown --mode '" + mode + "' (sample|perturb|concat)");
    }
    po.system = sys;
    if (out.empty()) throw std::invalid_argument("--out is required for pseudo gen");
    write_json_atomic(out, pseudo_orbit_file_json(po));
    std::cout << "wrote " << out << " (" << po.size() << " segments, window [" << po.i_min()
              << ", " << po.i_max() << "])\n";
    return kExitOk;
}

std::optional<PseudoKind> kind_from_string(const std::string& name) {
    if (name == "delta_pseudo") return PseudoKind::delta_pseudo;
    if (name == "delta_average") return PseudoKind::delta_average;
    if (name == "asymptotic_average") return PseudoKind::asymptotic_average;
    if (name == "limit") return PseudoKind::limit;
    if (name == "positive_limit") return PseudoKind::positive_limit;
    return std::nullopt;
}

int cmd_pseudo_classify(const std::string& po_path, const IntegOptions& integopt,
                        const std::string& kind_name, double delta, bool delta_set,
                        const std::string& out, const std::string& csv) {
    const PseudoOrbit po =
        pseudo_orbit_from_file_json(Json::parse(read_text_file(po_path)));
    const std::optional<PseudoKind> kind = kind_from_string(kind_name);
    if (!kind) throw std::invalid_argument("unknown --kind '" + kind_name + "'");
    const std::optional<double> maybe_delta =
        delta_set ? std::optional<double>(delta) : std::nullopt;
    const ClassificationReport report = classify(po, *kind, maybe_delta, integopt.config());
    std::cout << "classify " << to_string(*kind) << ": " << to_string(report.verdict);
    if (*kind == PseudoKind::delta_average) std::cout << " (window_N = " << report.window_N << ")";
    std::cout << "\n";
    if (!report.note.empty()) std::cout << report.note << "\n";
    if (!out.empty()) {
        Json doc = classification_json(report);
        doc["config"] = Json{{"po", po_path}, {"step", integopt.step}};
        write_json_atomic(out, doc);
        std::cout << "wrote " << out << "\n";
    }
    if (!csv.empty()) {
        std::vector<std::vector<double>> rows;
        for (std::size_t j = 0; j < report.defect_sequence.size(); ++j)
            rows.push_back({static_cast<double>(report.defect_origin + static_cast<int>(j)),
                            report.defect_sequence[j]});
        write_text_atomic(csv, csv_table({"index", "defect"}, rows));
        std::cout << "wrote " << csv << "\n";
    }
    return verdict_exit(report.verdict);
}

// ---------------------------------------------------------------------------
// shadow search / certify
// ---------------------------------------------------------------------------

Json search_csv_rows(const ShadowCheck& best, const std::string& csv) {
    std::vector<std::vector<double>> rows;
    for (const SegmentCheck& seg : best.segments)
        rows.push_back({static_cast<double>(seg.index), seg.length, seg.integral, seg.sup});
    write_text_atomic(csv, csv_table({"index", "length", "integral", "sup"}, rows));
    return Json();
}

// The attractor candidate containing point a, from a fresh box model.
std::vector<int> attractor_boxes_for(const SystemSpec& spec, const std::vector<double>& a,
                                     int depth, const IntegratorConfig& integ, int jobs) {
    const BoxCover cover = build_cover(spec.space, spec.isolated_region, depth);
    const int corners = 1 << spec.space.dim;
    const BoxGraph graph = transition_graph(spec, cover, 0.0, 2.0, corners + 5, integ, jobs);
    const long long box = cover.locate(normalize_point(spec.space, a));
    if (box < 0) throw std::invalid_argument("point lies outside the covered region");
    for (const AttractorCandidate& cand : find_attractors(graph))
        if (std::binary_search(cand.boxes.begin(), cand.boxes.end(), static_cast<int>(box)))
            return cand.boxes;
    throw std::invalid_argument("point does not lie inside an attractor candidate");
}

int cmd_shadow_search(const std::string& po_path, const IntegOptions& integopt,
                      const std::string& mode_name, int grid_points, double lambda, double gap_n,
                      double gap_step, double eps0, int depth, int jobs, const std::string& out,
                      const std::string& csv) {
    const PseudoOrbit po =
        pseudo_orbit_from_file_json(Json::parse(read_text_file(po_path)));
    const std::optional<ShadowMode> mode = shadow_mode_from_string(mode_name);
    if (!mode) throw std::invalid_argument("unknown --mode '" + mode_name + "'");
    const SystemSpec& spec = *po.system;

    ShadowSearchOptions opts;
    opts.integ = integopt.config();
    opts.lambda = lambda;
    opts.n_gap = gap_n;
    opts.gap_step = gap_step;
    opts.jobs = jobs;
    const std::vector<std::vector<double>> grid =
        uniform_grid(spec.isolated_region, grid_points);
    const ShadowResult result = search_shadowing(po, *mode, grid, opts);
    std::cout << "search " << to_string(*mode) << ": minimum " << canonical_number(result.best.value)
              << " at z =";
    for (double v : result.best.z) std::cout << " " << canonical_number(v);
    if (*mode == ShadowMode::gap) std::cout << ", K = " << canonical_number(result.best.gap_k);
    std::cout << " (" << result.evaluated << " candidates)\n";

    Json doc = search_json(result);
    doc["config"] = Json{{"po", po_path},     {"mode", to_string(*mode)},
                         {"grid", grid_points}, {"lambda", lambda},
                         {"gap_n", gap_n},     {"gap_step", gap_step},
                         {"step", integopt.step}};

    int exit_code = kExitOk;
    // Average-mode runs additionally try the structural obstruction: when the
    // window splices an attractor orbit with an outside point, a valid
    // certificate plus a searched minimum above its bound refutes average
    // trackability below epsilon0/2 for this window.
    if (*mode == ShadowMode::average && eps0 > 0.0) {
        try {
            const std::vector<double>& a = po.point(0);
            const std::vector<double> b =
                flow_to(spec, po.point(1), -1.0, opts.integ);
            const std::vector<int> attractor =
                attractor_boxes_for(spec, a, depth, opts.integ, jobs);
            const NonShadowCertificate cert = certify_average_nonshadowing(
                spec, attractor, normalize_point(spec.space, b), eps0, depth, opts.integ, jobs);
            doc["certificate"] = certificate_json(cert);
            if (cert.valid && result.best.value >= cert.implied_average_bound - 1e-6) {
                exit_code = kExitRefuted;
                std::cout << "certificate: average tracking below "
                          << canonical_number(cert.implied_average_bound)
                          << " is structurally excluded; searched minimum "
                          << canonical_number(result.best.value) << " agrees\n";
            } else if (!cert.valid) {
                std::cout << "certificate attempt failed: " << cert.failure << "\n";
            }
        } catch (const std::invalid_argument& e) {
            doc["certificate_note"] = std::string("not attempted: ") + e.what();
            std::cout << "certificate not attempted: " << e.what() << "\n";
        }
    }
    if (!out.empty()) {
        write_json_atomic(out, doc);
        std::cout << "wrote " << out << "\n";
    }
    if (!csv.empty()) {
        search_csv_rows(result.best, csv);
        std::cout << "wrote " << csv << "\n";
    }
    return exit_code;
}

int cmd_shadow_certify(const SystemOptions& sysopt, const IntegOptions& integopt,
                       const std::string& a_text, const std::string& b_text, double eps0,
                       int depth, int jobs, const std::string& recheck_path,
                       const std::string& out) {
    const IntegratorConfig integ = integopt.config();
    if (!recheck_path.empty()) {
        const NonShadowCertificate cert =
            certificate_from_json(Json::parse(read_text_file(recheck_path)));
        const SystemSpec spec = sysopt.load();
        std::string why;
        const bool ok = recheck_certificate(cert, spec, integ, &why, jobs);
        std::cout << "recheck: " << (ok ? "agrees" : ("MISMATCH: " + why)) << "\n";
        return ok ? kExitOk : kExitRefuted;
    }
    if (a_text.empty() || b_text.empty())
        throw std::invalid_argument("--a and --b are required (or --recheck <file>)");
    const SystemSpec spec = sysopt.load();
    const std::vector<double> a = parse_point(a_text);
    const std::vector<double> b = parse_point(b_text);
    const std::vector<int> attractor = attractor_boxes_for(spec, a, depth, integ, jobs);
    const NonShadowCertificate cert = certify_average_nonshadowing(
        spec, attractor, normalize_point(spec.space, b), eps0, depth, integ, jobs);
    std::cout << "certificate: " << (cert.valid ? "valid" : ("failed: " + cert.failure)) << "\n";
    if (cert.valid)
        std::cout << "implied average-error bound " << canonical_number(cert.implied_average_bound)
                  << " (min gap " << canonical_number(cert.min_gap) << ", margin "
                  << canonical_number(cert.margin) << ")\n";
    if (!out.empty()) {
        Json doc = certificate_json(cert);
        doc["config"] = sysopt.config_json();
        doc["config"]["a"] = a;
        doc["config"]["b"] = b;
        doc["config"]["eps0"] = eps0;
        doc["config"]["depth"] = depth;
        doc["config"]["step"] = integopt.step;
        write_json_atomic(out, doc);
        std::cout << "wrote " << out << "\n";
    }
    return cert.valid ? kExitOk : kExitInconclusive;
}

// ---------------------------------------------------------------------------
// chain subcommands
// ---------------------------------------------------------------------------

struct ChainContext {
    SystemSpec spec;
    BoxCover cover;
    BoxGraph graph;
};

ChainContext make_chain_context(const SystemOptions& sysopt, const IntegOptions& integopt,
                                int depth, double delta, double t_edge, int jobs) {
    ChainContext ctx{sysopt.load(), {}, {}};
    ctx.cover = build_cover(ctx.spec.space, ctx.spec.isolated_region, depth);
    const int corners = 1 << ctx.spec.space.dim;
    ctx.graph = transition_graph(ctx.spec, ctx.cover, delta, t_edge, corners + 5,
                                 integopt.config(), jobs);
    return ctx;
}

int cmd_chain_graph(const ChainContext& ctx, const std::string& out) {
    const std::string text = graph_edge_text(ctx.graph);
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text_atomic(out, text);
        std::cout << "wrote " << out << " (" << ctx.graph.edge_count << " edges over "
                  << ctx.cover.box_count() << " boxes)\n";
    }
    return kExitOk;
}

int cmd_chain_scc(const ChainContext& ctx, const std::string& out) {
    const SccResult comps = scc(ctx.graph);
    int recurrent = 0;
    for (char r : comps.recurrent) recurrent += r != 0;
    std::cout << comps.count << " components (" << recurrent << " recurrent) over "
              << ctx.cover.box_count() << " boxes\n";
    emit(out, scc_json(comps));
    return kExitOk;
}

int cmd_chain_transitive(const ChainContext& ctx, const std::string& out) {
    const ChainTransitiveReport report = chain_transitive(ctx.graph);
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["chain_transitive"] = report.transitive;
    if (!report.transitive) {
        doc["witness_from"] = report.witness_from;
        doc["witness_to"] = report.witness_to;
    }
    std::cout << "chain transitive: " << (report.transitive ? "yes" : "no") << "\n";
    emit(out, doc);
    return kExitOk;
}

int cmd_chain_attractors(const ChainContext& ctx, const std::string& out) {
    const std::vector<AttractorCandidate> candidates = find_attractors(ctx.graph);
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["cover"] = cover_json(ctx.cover);
    Json arr = Json::array();
    for (const AttractorCandidate& cand : candidates) arr.push_back(attractor_json(cand));
    doc["attractors"] = std::move(arr);
    std::cout << candidates.size() << " attractor candidates\n";
    emit(out, doc);
    return kExitOk;
}

int cmd_chain_basin(const ChainContext& ctx, const std::string& point_text,
                    const std::string& out) {
    const std::vector<double> p = parse_point(point_text);
    const long long box = ctx.cover.locate(normalize_point(ctx.spec.space, p));
    if (box < 0) throw std::invalid_argument("point lies outside the covered region");
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["query_box"] = box;
    Json arr = Json::array();
    std::size_t found = 0;
    for (const AttractorCandidate& cand : find_attractors(ctx.graph)) {
        if (!std::binary_search(cand.basin.begin(), cand.basin.end(), static_cast<int>(box)))
            continue;
        ++found;
        arr.push_back(attractor_json(cand));
        std::cout << "attractor component " << cand.component << ": " << cand.boxes.size()
                  << " boxes, basin " << cand.basin.size() << " boxes\n";
    }
    doc["attractors"] = std::move(arr);
    if (found == 0) {
        std::cout << "box " << box << " lies in no attractor candidate's basin\n";
        return kExitInconclusive;
    }
    emit(out, doc);
    return kExitOk;
}

int cmd_chain_omega(const ChainContext& ctx, const IntegOptions& integopt,
                    const std::string& x0_text, double burn_t, double obs_t,
                    const std::string& out) {
    const std::vector<double> x0 = parse_point(x0_text);
    const std::vector<int> boxes =
        omega_limit(ctx.spec, x0, burn_t, obs_t, ctx.cover, integopt.config());
    Json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["burn_t"] = burn_t;
    doc["obs_t"] = obs_t;
    doc["boxes"] = boxes;
    std::cout << "omega-limit cover: " << boxes.size() << " boxes\n";
    emit(out, doc);
    return kExitOk;
}

int cmd_transitive_test(const ChainContext& ctx, const IntegOptions& integopt, int pairs,
                        double t_max, std::uint64_t seed, int jobs, int from_box, int to_box,
                        const std::string& out) {
    if (from_box >= 0 || to_box >= 0) {
        if (from_box < 0 || to_box < 0)
            throw std::invalid_argument("--from-box and --to-box must be given together");
        const TransitivityPair pair = transitivity_pair(ctx.spec, ctx.cover, ctx.graph, from_box,
                                                        to_box, t_max, integopt.config());
        TransitivityReport report;
        report.seed = 0;
        report.t_max = t_max;
        report.pairs.push_back(pair);
        report.verdict = pair.outcome == PairOutcome::hit
                             ? Verdict::holds
                             : (pair.outcome == PairOutcome::refuted ? Verdict::fails
                                                                     : Verdict::inconclusive);
        std::cout << "pair " << from_box << " -> " << to_box << ": "
                  << (pair.outcome == PairOutcome::hit
                          ? "hit"
                          : (pair.outcome == PairOutcome::refuted ? "refuted" : "inconclusive"))
                  << "\n";
        emit(out, transitivity_json(report));
        return verdict_exit(report.verdict);
    }
    const TransitivityReport report = topologically_transitive(
        ctx.spec, ctx.cover, pairs, t_max, integopt.config(), seed, jobs);
    std::size_t hit = 0;
    for (const TransitivityPair& pair : report.pairs)
        if (pair.outcome == PairOutcome::hit) ++hit;
    std::cout << "sampled transitivity: " << hit << "/" << report.pairs.size()
              << " pairs hit, verdict " << to_string(report.verdict) << "\n";
    emit(out, transitivity_json(report));
    return verdict_exit(report.verdict);
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const SystemOptions& sysopt, const IntegOptions& integopt,
               const std::string& theorem, int depth, double t_edge, std::uint64_t seed, int jobs,
               const std::string& out) {
    const SystemSpec spec = sysopt.load();
    HarnessConfig cfg;
    cfg.integ = integopt.config();
    cfg.depth = depth;
    cfg.t_edge = t_edge;
    cfg.seed = seed;
    cfg.jobs = jobs;
    const TheoremReport report = run_theorem(theorem, spec, cfg);
    std::cout << report.theorem << " on " << report.system << ": " << to_string(report.verdict)
              << "\n";
    for (const std::string& note : report.notes) std::cout << "  " << note << "\n";
    if (!out.empty()) {
        Json doc = theorem_json(report);
        doc["config"] = sysopt.config_json();
        doc["config"]["depth"] = depth;
        doc["config"]["t_edge"] = t_edge;
        doc["config"]["seed"] = seed;
        doc["config"]["step"] = integopt.step;
        write_json_atomic(out, doc);
        std::cout << "wrote " << out << "\n";
    }
    return verdict_exit(report.verdict);
}

int run_impl(int argc, char** argv) {
    CLI::App app{
        "orbitcert: pseudo-orbit classification, shadowing search, and chain-recurrence "
        "certificates for flows on boxes and tori"};
    app.require_subcommand(1);

    // ---- sys ----
    auto* sys = app.add_subcommand("sys", "catalog browsing");
    sys->require_subcommand(1);
    sys->add_subcommand("list", "list builtin systems");
    auto* sys_show = sys->add_subcommand("show", "print a system definition");
    SystemOptions show_sys;
    sys_show->add_option("name", show_sys.system, "builtin system name")->required();
    sys_show->add_option("--alpha", show_sys.alpha,
                         "slope parameter for torus_linear (default sqrt(2))");
    std::string show_out;
    sys_show->add_option("--out", show_out, "also write the JSON form here");

    // ---- integrate ----
    auto* integrate = app.add_subcommand("integrate", "flow a point and record the trajectory");
    SystemOptions integ_sys;
    IntegOptions integ_integ;
    integ_sys.attach(integrate);
    integ_integ.attach(integrate);
    std::string integ_x0, integ_out, integ_csv;
    double integ_t = 1.0;
    integrate->add_option("--x0", integ_x0, "start point, comma-separated")->required();
    integrate->add_option("--t", integ_t, "signed flow time (default 1)");
    integrate->add_option("--out", integ_out, "trajectory JSON path");
    integrate->add_option("--csv", integ_csv, "trajectory CSV path");

    // ---- pseudo ----
    auto* pseudo = app.add_subcommand("pseudo", "pseudo-orbit generation and classification");
    pseudo->require_subcommand(1);
    auto* pgen = pseudo->add_subcommand("gen", "generate a pseudo-orbit file");
    SystemOptions pgen_sys;
    IntegOptions pgen_integ;
    pgen_sys.attach(pgen);
    pgen_integ.attach(pgen);
    std::string pgen_mode = "sample", pgen_x0, pgen_a, pgen_b, pgen_out;
    int pgen_n = 16, pgen_half_len = 33;
    double pgen_sigma = 0.0;
    std::uint64_t pgen_seed = 1;
    pgen->add_option("--mode", pgen_mode, "sample | perturb | concat (default sample)");
    pgen->add_option("--x0", pgen_x0, "start point for sample/perturb");
    pgen->add_option("--n", pgen_n, "number of unit segments (default 16)");
    pgen->add_option("--sigma", pgen_sigma, "perturbation radius for mode perturb");
    pgen->add_option("--seed", pgen_seed, "perturbation seed (default 1)");
    pgen->add_option("--a", pgen_a, "mode concat: backward-side point");
    pgen->add_option("--b", pgen_b, "mode concat: forward-side point");
    pgen->add_option("--half-len", pgen_half_len, "mode concat: half window length (default 33)");
    pgen->add_option("--out", pgen_out, "pseudo-orbit file path")->required();

    auto* pcls = pseudo->add_subcommand("classify", "classify a pseudo-orbit file");
    IntegOptions pcls_integ;
    pcls_integ.attach(pcls);
    std::string pcls_po, pcls_kind = "delta_pseudo", pcls_out, pcls_csv;
    double pcls_delta = 0.0;
    pcls->add_option("--po", pcls_po, "pseudo-orbit file")->required();
    pcls->add_option("--kind", pcls_kind,
                     "delta_pseudo | delta_average | asymptotic_average | limit | positive_limit");
    auto* pcls_delta_opt = pcls->add_option("--delta", pcls_delta, "defect bound for delta kinds");
    pcls->add_option("--out", pcls_out, "classification report path");
    pcls->add_option("--csv", pcls_csv, "defect sequence CSV path");

    // ---- shadow ----
    auto* shadow = app.add_subcommand("shadow", "shadowing search and certificates");
    shadow->require_subcommand(1);
    auto* ssearch = shadow->add_subcommand("search", "search tracking candidates for a window");
    IntegOptions ssearch_integ;
    ssearch_integ.attach(ssearch);
    std::string ssearch_po, ssearch_mode = "uniform", ssearch_out, ssearch_csv;
    int ssearch_grid = 4001, ssearch_depth = 6, ssearch_jobs = 0;
    double ssearch_lambda = 1.0, ssearch_gap_n = 4.0, ssearch_gap_step = 0.05, ssearch_eps0 = 0.5;
    ssearch->add_option("--po", ssearch_po, "pseudo-orbit file")->required();
    ssearch->add_option("--mode", ssearch_mode,
                        "uniform | average | asymptotic_average | limit | gap");
    ssearch->add_option("--grid", ssearch_grid, "candidate grid points per axis (default 4001)");
    ssearch->add_option("--lambda", ssearch_lambda,
                        "slope bound for searched time changes (default 1)");
    ssearch->add_option("--gap-n", ssearch_gap_n, "gap mode: |K| bound (default 4)");
    ssearch->add_option("--gap-step", ssearch_gap_step, "gap mode: K grid step (default 0.05)");
    ssearch->add_option("--eps0", ssearch_eps0,
                        "average mode: obstruction certificate level (0 disables; default 0.5)");
    ssearch->add_option("--depth", ssearch_depth, "certificate cover depth (default 6)");
    ssearch->add_option("--jobs", ssearch_jobs, "worker cap (0 = hardware)");
    ssearch->add_option("--out", ssearch_out, "search report path");
    ssearch->add_option("--csv", ssearch_csv, "per-segment error CSV for the best candidate");

    auto* scert = shadow->add_subcommand("certify", "build or recheck an obstruction certificate");
    SystemOptions scert_sys;
    IntegOptions scert_integ;
    scert_sys.attach(scert);
    scert_integ.attach(scert);
    std::string scert_a, scert_b, scert_recheck, scert_out;
    double scert_eps0 = 0.5;
    int scert_depth = 6, scert_jobs = 0;
    scert->add_option("--a", scert_a, "attractor point");
    scert->add_option("--b", scert_b, "outside point");
    scert->add_option("--eps0", scert_eps0, "obstruction level (default 0.5)");
    scert->add_option("--depth", scert_depth, "cover depth (default 6)");
    scert->add_option("--jobs", scert_jobs, "worker cap (0 = hardware)");
    scert->add_option("--recheck", scert_recheck, "re-verify this certificate file instead");
    scert->add_option("--out", scert_out, "certificate path");

    // ---- chain ----
    auto* chain = app.add_subcommand("chain", "box-cover chain recurrence analysis");
    chain->require_subcommand(1);
    struct ChainArgs {
        SystemOptions sys;
        IntegOptions integ;
        int depth = 6;
        double delta = 0.0;
        double t_edge = 2.0;
        int jobs = 0;
        std::string out;
        void attach(CLI::App* cmd) {
            sys.attach(cmd);
            integ.attach(cmd);
            cmd->add_option("--depth", depth, "cover depth: 2^depth boxes per axis (default 6)");
            cmd->add_option("--delta", delta, "edge slack distance (default 0)");
            cmd->add_option("--t-edge", t_edge, "largest edge sample time (default 2)");
            cmd->add_option("--jobs", jobs, "worker cap (0 = hardware)");
            cmd->add_option("--out", out, "artifact path");
        }
    };
    ChainArgs cgraph, cscc, ctrans, cattr, cbasin, comega, ctest;
    auto* chain_graph = chain->add_subcommand("graph", "export the transition graph edge list");
    cgraph.attach(chain_graph);
    auto* chain_scc = chain->add_subcommand("scc", "strongly connected components");
    cscc.attach(chain_scc);
    auto* chain_trans = chain->add_subcommand("transitive", "chain transitivity on the box model");
    ctrans.attach(chain_trans);
    auto* chain_attr = chain->add_subcommand("attractors", "attractor candidates");
    cattr.attach(chain_attr);
    auto* chain_basin = chain->add_subcommand("basin", "basin of the attractor containing a point");
    cbasin.attach(chain_basin);
    std::string cbasin_point;
    chain_basin->add_option("--point", cbasin_point, "query point, comma-separated")->required();
    auto* chain_omega = chain->add_subcommand("omega", "omega-limit box cover of a start point");
    comega.attach(chain_omega);
    std::string comega_x0;
    double comega_burn = 50.0, comega_obs = 50.0;
    chain_omega->add_option("--x0", comega_x0, "start point, comma-separated")->required();
    chain_omega->add_option("--burn", comega_burn, "burn-in time (default 50)");
    chain_omega->add_option("--obs", comega_obs, "observation time (default 50)");

    // ---- transitive-test ----
    auto* ttest = app.add_subcommand("transitive-test", "orbit-level transitivity probes");
    ctest.attach(ttest);
    int ttest_pairs = 20, ttest_from = -1, ttest_to = -1;
    double ttest_tmax = 600.0;
    std::uint64_t ttest_seed = 1;
    ttest->add_option("--pairs", ttest_pairs, "random pair budget (default 20)");
    ttest->add_option("--t-max", ttest_tmax, "per-pair time horizon (default 600)");
    ttest->add_option("--seed", ttest_seed, "pair sampling seed (default 1)");
    ttest->add_option("--from-box", ttest_from, "probe exactly one pair: source box");
    ttest->add_option("--to-box", ttest_to, "probe exactly one pair: target box");

    // ---- verify ----
    auto* verify = app.add_subcommand("verify", "run a theorem harness");
    SystemOptions verify_sys;
    IntegOptions verify_integ;
    verify_sys.attach(verify);
    verify_integ.attach(verify);
    std::string verify_id, verify_out;
    int verify_depth = 6, verify_jobs = 0;
    double verify_t_edge = 2.0;
    std::uint64_t verify_seed = 1;
    std::string id_list;
    for (const std::string& id : theorem_ids()) id_list += (id_list.empty() ? "" : " | ") + id;
    verify->add_option("theorem", verify_id, id_list)->required();
    verify->add_option("--depth", verify_depth, "cover depth (default 6)");
    verify->add_option("--t-edge", verify_t_edge, "largest edge sample time (default 2)");
    verify->add_option("--t-max", ttest_tmax,
                       "(accepted for symmetry; harnesses use their registered horizons)");
    verify->add_option("--seed", verify_seed, "sampling seed (default 1)");
    verify->add_option("--jobs", verify_jobs, "worker cap (0 = hardware)");
    verify->add_option("--out", verify_out, "theorem report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    if (sys->parsed()) {
        if (sys->get_subcommand("list")->parsed()) return cmd_sys_list();
        return cmd_sys_show(show_sys, show_out);
    }
    if (integrate->parsed())
        return cmd_integrate(integ_sys, integ_integ, integ_x0, integ_t, integ_out, integ_csv);
    if (pseudo->parsed()) {
        if (pgen->parsed())
            return cmd_pseudo_gen(pgen_sys, pgen_integ, pgen_mode, pgen_x0, pgen_n, pgen_sigma,
                                  pgen_seed, pgen_a, pgen_b, pgen_half_len, pgen_out);
        return cmd_pseudo_classify(pcls_po, pcls_integ, pcls_kind, pcls_delta,
                                   pcls_delta_opt->count() > 0, pcls_out, pcls_csv);
    }
    if (shadow->parsed()) {
        if (ssearch->parsed())
            return cmd_shadow_search(ssearch_po, ssearch_integ, ssearch_mode, ssearch_grid,
                                     ssearch_lambda, ssearch_gap_n, ssearch_gap_step, ssearch_eps0,
                                     ssearch_depth, ssearch_jobs, ssearch_out, ssearch_csv);
        return cmd_shadow_certify(scert_sys, scert_integ, scert_a, scert_b, scert_eps0,
                                  scert_depth, scert_jobs, scert_recheck, scert_out);
    }
    if (chain->parsed()) {
        if (chain_graph->parsed())
            return cmd_chain_graph(make_chain_context(cgraph.sys, cgraph.integ, cgraph.depth,
                                                      cgraph.delta, cgraph.t_edge, cgraph.jobs),
                                   cgraph.out);
        if (chain_scc->parsed())
            return cmd_chain_scc(make_chain_context(cscc.sys, cscc.integ, cscc.depth, cscc.delta,
                                                    cscc.t_edge, cscc.jobs),
                                 cscc.out);
        if (chain_trans->parsed())
            return cmd_chain_transitive(
                make_chain_context(ctrans.sys, ctrans.integ, ctrans.depth, ctrans.delta,
                                   ctrans.t_edge, ctrans.jobs),
                ctrans.out);
        if (chain_attr->parsed())
            return cmd_chain_attractors(
                make_chain_context(cattr.sys, cattr.integ, cattr.depth, cattr.delta, cattr.t_edge,
                                   cattr.jobs),
                cattr.out);
        if (chain_basin->parsed())
            return cmd_chain_basin(
                make_chain_context(cbasin.sys, cbasin.integ, cbasin.depth, cbasin.delta,
                                   cbasin.t_edge, cbasin.jobs),
                cbasin_point, cbasin.out);
        return cmd_chain_omega(make_chain_context(comega.sys, comega.integ, comega.depth,
                                                  comega.delta, comega.t_edge, comega.jobs),
                               comega.integ, comega_x0, comega_burn, comega_obs, comega.out);
    }
    if (ttest->parsed())
        return cmd_transitive_test(
            make_chain_context(ctest.sys, ctest.integ, ctest.depth, ctest.delta, ctest.t_edge,
                               ctest.jobs),
            ctest.integ, ttest_pairs, ttest_tmax, ttest_seed, ctest.jobs, ttest_from, ttest_to,
            ctest.out);
    if (verify->parsed())
        return cmd_verify(verify_sys, verify_integ, verify_id, verify_depth, verify_t_edge,
                          verify_seed, verify_jobs, verify_out);
    return kExitError;
}

}  // namespace

int run_cli(int argc, char** argv) {
    try {
        return run_impl(argc, argv);
    } catch (const ParseError& e) {
        std::cerr << "parse error (line " << e.line << ", col " << e.col << "): " << e.what()
                  << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
}

}  // namespace orbitcert
