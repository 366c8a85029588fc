#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "orbitcert/report.hpp"

using namespace orbitcert;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

std::string cli_path() { return ORBITCERT_CLI_PATH; }
std::string data_dir() { return ORBITCERT_DATA_DIR; }

RunResult run(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) result.out.append(buf.data(), got);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() /
                     ("orbitcert_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("number canonicalization keeps seventeen significant digits") {
    CHECK(canonical_number(0.5) == "0.5");
    CHECK(canonical_number(-2.0) == "-2");
    CHECK(canonical_number(1.0 / 3.0) == "0.33333333333333331");
    CHECK(canonical_number(1.4142135623730951) == "1.4142135623730951");
    // round-trip exactness: parse(print(x)) == x bitwise
    for (double v : {0.1, -1e-17, 3.5e300, 123456.789}) {
        CHECK(std::stod(canonical_number(v)) == v);
    }
}

TEST_CASE("JSON numbers degrade to tagged strings only when non-finite") {
    Json t = trajectory_json(Trajectory{{0.0}, {{1.0}}});
    CHECK(t.at("times")[0].is_number());
    Trajectory weird{{0.0}, {{std::numeric_limits<double>::infinity()}}};
    const Json w = trajectory_json(weird);
    CHECK(w.at("points")[0][0].get<std::string>() == "inf");
    Trajectory nan_t{{0.0}, {{std::nan("")}}};
    CHECK(trajectory_json(nan_t).at("points")[0][0].get<std::string>() == "nan");
}

TEST_CASE("csv tables demand rectangular data") {
    const std::string text = csv_table({"a", "b"}, {{1.0, 2.0}, {3.0, 4.5}});
    CHECK(text == "a,b\n1,2\n3,4.5\n");
    CHECK_THROWS_AS(csv_table({"a"}, {{1.0, 2.0}}), std::invalid_argument);
}

TEST_CASE("atomic writes land complete files in fresh directories") {
    const fs::path target = scratch_dir() / "nested" / "artifact.json";
    write_json_atomic(target.string(), Json{{"k", 1}});
    CHECK(slurp(target) == "{\n  \"k\": 1\n}\n");
    CHECK(!fs::exists(target.string() + ".tmp" + std::to_string(::getpid())));
}

TEST_CASE("usage errors and help exit as documented") {
    CHECK(run("--help").exit_code == 0);
    CHECK(run("bogus-subcommand").exit_code == 1);
    CHECK(run("sys show nosuchsystem").exit_code == 1);
    CHECK(run("integrate --system pitchfork1d").exit_code == 1);  // missing --x0
    CHECK(run("verify nosuchtheorem --system pitchfork1d").exit_code == 1);
    CHECK(run("pseudo classify --po /nonexistent.po").exit_code == 1);
}

TEST_CASE("every stable flag is documented in some help screen") {
    const std::vector<std::string> screens = {
        run("--help").out,
        run("sys show --help").out,
        run("integrate --help").out,
        run("pseudo gen --help").out,
        run("pseudo classify --help").out,
        run("shadow search --help").out,
        run("shadow certify --help").out,
        run("chain graph --help").out,
        run("transitive-test --help").out,
        run("verify --help").out,
    };
    for (const std::string flag :
         {"--system", "--file", "--depth", "--delta", "--eps0", "--gap-n", "--half-len",
          "--step", "--t-edge", "--t-max", "--seed", "--jobs", "--out"}) {
        bool found = false;
        for (const std::string& screen : screens)
            if (screen.find(flag) != std::string::npos) found = true;
        INFO("flag ", flag);
        CHECK(found);
    }
}

TEST_CASE("catalog listing and definition dump match the golden copies") {
    const RunResult list = run("sys list");
    CHECK(list.exit_code == 0);
    CHECK(list.out == "pitchfork1d\ncircle_ns\ntorus_linear\nsaddle2d\n");
    const RunResult show = run("sys show pitchfork1d");
    CHECK(show.exit_code == 0);
    CHECK(show.out == slurp(fs::path(data_dir()) / "sys_show_pitchfork.txt"));
}

TEST_CASE("trajectory CSV export reproduces the golden file byte for byte") {
    const fs::path csv = scratch_dir() / "traj.csv";
    const RunResult r =
        run("integrate --system pitchfork1d --x0 0.5 --t 2 --csv " + csv.string());
    CHECK(r.exit_code == 0);
    CHECK(slurp(csv) == slurp(fs::path(data_dir()) / "integrate_pitchfork.csv"));
}

TEST_CASE("transition graph export reproduces the golden file byte for byte") {
    const RunResult r = run("chain graph --system pitchfork1d --depth 3");
    CHECK(r.exit_code == 0);
    CHECK(r.out == slurp(fs::path(data_dir()) / "chain_graph_d3.txt"));
}

TEST_CASE("pseudo-orbit generation is deterministic and classification exits by verdict") {
    const fs::path po_a = scratch_dir() / "a.po";
    const fs::path po_b = scratch_dir() / "b.po";
    CHECK(run("pseudo gen --system pitchfork1d --mode perturb --x0 0.5 --n 10 --sigma 0.02 "
              "--seed 7 --out " + po_a.string()).exit_code == 0);
    CHECK(run("pseudo gen --system pitchfork1d --mode perturb --x0 0.5 --n 10 --sigma 0.02 "
              "--seed 7 --out " + po_b.string()).exit_code == 0);
    CHECK(slurp(po_a) == slurp(po_b));

    CHECK(run("pseudo classify --po " + po_a.string() + " --kind delta_pseudo --delta 0.05")
              .exit_code == 0);
    CHECK(run("pseudo classify --po " + po_a.string() + " --kind delta_pseudo --delta 1e-9")
              .exit_code == 2);

    const fs::path splice = scratch_dir() / "splice.po";
    CHECK(run("pseudo gen --system pitchfork1d --mode concat --a 1 --b -1 --half-len 33 --out " +
              splice.string()).exit_code == 0);
    const RunResult cls =
        run("pseudo classify --po " + splice.string() + " --kind delta_average --delta 0.1");
    CHECK(cls.exit_code == 0);
    CHECK(cls.out.find("window_N = 21") != std::string::npos);
    // asymptotic kind on a finite window: inconclusive maps to exit three
    CHECK(run("pseudo classify --po " + splice.string() + " --kind asymptotic_average")
              .exit_code == 3);
}

TEST_CASE("average-mode search attaches the obstruction certificate and exits two") {
    const fs::path splice = scratch_dir() / "ab.po";
    REQUIRE(run("pseudo gen --system pitchfork1d --mode concat --a 1 --b -1 --half-len 33 "
                "--out " + splice.string()).exit_code == 0);
    const fs::path out = scratch_dir() / "search.json";
    const RunResult r = run("shadow search --po " + splice.string() +
                            " --mode average --grid 401 --out " + out.string());
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("structurally excluded") != std::string::npos);
    const Json doc = Json::parse(slurp(out));
    CHECK(doc.at("certificate").at("valid").get<bool>());
    CHECK(doc.at("certificate").at("implied_average_bound").get<double>() == 0.25);
    CHECK(doc.at("best").at("value").get<double>() >= 0.25);
    // disabling the certificate turns the same search into a plain artifact run
    CHECK(run("shadow search --po " + splice.string() + " --mode average --grid 401 --eps0 0")
              .exit_code == 0);
}

TEST_CASE("certificates round-trip through the recheck subcommand") {
    const fs::path cert = scratch_dir() / "cert.json";
    const RunResult make = run("shadow certify --system pitchfork1d --a 1 --b -1 --out " +
                               cert.string());
    CHECK(make.exit_code == 0);
    CHECK(make.out.find("valid") != std::string::npos);
    CHECK(run("shadow certify --system pitchfork1d --recheck " + cert.string()).exit_code == 0);

    // damaging the stored neighborhood set must flip the recheck outcome
    Json doc = Json::parse(slurp(cert));
    doc["neighborhood_boxes"].erase(0);
    const fs::path bad = scratch_dir() / "cert_bad.json";
    write_json_atomic(bad.string(), doc);
    CHECK(run("shadow certify --system pitchfork1d --recheck " + bad.string()).exit_code == 2);
}

TEST_CASE("reachability subcommands exit by verdict") {
    CHECK(run("transitive-test --system pitchfork1d --from-box 48 --to-box 16").exit_code == 2);
    CHECK(run("transitive-test --system pitchfork1d --from-box 40 --to-box 48").exit_code == 0);
    CHECK(run("chain transitive --system pitchfork1d").exit_code == 0);
    CHECK(run("chain basin --system pitchfork1d --point 0.9").exit_code == 0);
    CHECK(run("chain basin --system pitchfork1d --point 2.5").exit_code == 1);  // outside
}

TEST_CASE("verify subcommand exits by verdict and writes identical reports") {
    const fs::path out1 = scratch_dir() / "v1.json";
    const fs::path out2 = scratch_dir() / "v2.json";
    CHECK(run("verify prop3 --system torus_linear --alpha 1.4142135623730951 --depth 4")
              .exit_code == 0);
    CHECK(run("verify prop3 --system pitchfork1d --out " + out1.string()).exit_code == 0);
    CHECK(run("verify prop3 --system pitchfork1d --out " + out2.string()).exit_code == 0);
    CHECK(slurp(out1) == slurp(out2));

    const fs::path custom = scratch_dir() / "custom.sys";
    {
        std::ofstream f(custom);
        f << "name = decay\nspace = box(-1, 1)\ndx0 = 0 - x0\n";
    }
    CHECK(run("verify lem_nonempty --file " + custom.string()).exit_code == 3);
}

}  // TEST_SUITE
