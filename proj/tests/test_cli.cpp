#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"

#include "json.hpp"

#include "degma/output.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("degma_cli_" + name);
    fs::remove_all(d);
    return d;
}

// Runs the CLI with stdout and stderr captured in `log`; returns the exit status.
int run(const std::string& args, std::string* log = nullptr) {
    fs::path out = fs::temp_directory_path() / "degma_cli_log.txt";
    std::string cmd = std::string(DEGMA_BINARY) + " " + args + " > " + out.string() + " 2>&1";
    int st = std::system(cmd.c_str());
    if (log) {
        std::ifstream in(out);
        std::stringstream ss;
        ss << in.rdbuf();
        *log = ss.str();
    }
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

json load(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
}

// Every file in the directory is listed in the manifest, with a matching hash.
void check_manifest(const fs::path& dir) {
    json m = load(dir / "manifest.json");
    std::set<std::string> listed;
    for (const json& f : m["files"]) {
        std::string rel = f["path"];
        listed.insert(rel);
        CHECK(degma::sha256_file((dir / rel).string()) == f["sha256"].get<std::string>());
        CHECK(fs::file_size(dir / rel) == f["bytes"].get<std::uintmax_t>());
    }
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string rel = fs::relative(e.path(), dir).generic_string();
        if (rel == "manifest.json") continue;
        CHECK_MESSAGE(listed.count(rel), rel, " is missing from the manifest");
    }
}

std::string hash_of(const json& manifest, const std::string& path) {
    for (const json& f : manifest["files"])
        if (f["path"] == path) return f["sha256"];
    return "";
}

}  // namespace

TEST_CASE("radial command") {
    fs::path dir = scratch("radial");
    std::string log;
    CHECK(run("radial --p 1 --rho 1 --R 2 --out " + dir.string(), &log) == 0);
    json s = load(dir / "summary.json");
    CHECK(s["A"].get<double>() == doctest::Approx(0.055556).epsilon(1e-5));
    CHECK(s["gprime"].get<double>() == doctest::Approx(0.793701).epsilon(1e-6));
    CHECK(s["pass"] == true);
    std::ifstream prof(dir / "profile.csv");
    std::string header;
    std::getline(prof, header);
    CHECK(header == "r,f,fprime,g,gprime");
    check_manifest(dir);
    json m = load(dir / "manifest.json");
    CHECK(m["command"] == "radial");
    CHECK(m["status"] == 0);

    fs::path again = scratch("radial2");
    CHECK(run("radial --p 1 --rho 1 --R 2 --out " + again.string()) == 0);
    json m2 = load(again / "manifest.json");
    CHECK(hash_of(m, "profile.csv") == hash_of(m2, "profile.csv"));
    CHECK(hash_of(m, "summary.json") == hash_of(m2, "summary.json"));
    fs::remove_all(dir);
    fs::remove_all(again);
}

TEST_CASE("solve, diagnose and determinism") {
    fs::path a = scratch("solve_a"), b = scratch("solve_b");
    CHECK(run("solve --n 129 --out " + a.string()) == 0);
    CHECK(run("solve --n 129 --out " + b.string()) == 0);
    for (const char* f : {"solution.csv", "interface.csv", "interface_plot.csv", "residual_heatmap.csv", "convergence.json",
                          "report.json", "config.ini"})
        CHECK_MESSAGE(fs::exists(a / f), f);
    check_manifest(a);
    json ma = load(a / "manifest.json"), mb = load(b / "manifest.json");
    for (const char* f : {"solution.csv", "interface.csv", "residual_heatmap.csv"}) CHECK(hash_of(ma, f) == hash_of(mb, f));
    CHECK(load(a / "convergence.json")["converged"] == true);

    fs::path d = scratch("diagnose");
    std::string log;
    CHECK(run("diagnose --n 129 --input " + (a / "solution.csv").string() + " --out " + d.string(), &log) == 0);
    json rep = load(d / "report.json");
    CHECK(rep["classification"]["classification"] == "solution");
    check_manifest(d);
    // a grid mismatch is an operational error
    CHECK(run("diagnose --n 65 --input " + (a / "solution.csv").string() + " --out " + d.string()) == 1);
    for (const fs::path& p : {a, b, d}) fs::remove_all(p);
}

TEST_CASE("continuation that stops short exits 2 with the last accepted state in the ledger") {
    fs::path dir = scratch("cont");
    std::string log;
    // at n = 65 the default patch width outgrows the region late in the march
    CHECK(run("continuation --n 65 --out " + dir.string(), &log) == 2);
    json s = load(dir / "continuation.json");
    CHECK(s["reached"] == false);
    double tmax = s["t_max"];
    CHECK(tmax > 0.0);
    CHECK(tmax < 1.0);
    std::ifstream in(dir / "ledger.jsonl");
    std::string line;
    double last_accepted = -1.0;
    while (std::getline(in, line)) {
        json r = json::parse(line);
        if (r["accepted"] == true) last_accepted = r["t"];
    }
    CHECK(last_accepted == tmax);
    check_manifest(dir);
    CHECK(load(dir / "manifest.json")["status"] == 2);
    fs::remove_all(dir);
}

TEST_CASE("usage errors exit 1 with field-level messages") {
    fs::path dir = scratch("usage");
    std::string log;
    CHECK(run("radial --set problem.q=1 --out " + dir.string(), &log) == 1);
    CHECK(log.find("problem.q") != std::string::npos);
    CHECK(run("radial --p 3 --out " + dir.string(), &log) == 1);
    CHECK(log.find("problem.p") != std::string::npos);
    CHECK(run("radial --set nonsense --out " + dir.string(), &log) == 1);
    CHECK(run("", &log) == 1);
    CHECK(run("bogus", &log) == 1);
    CHECK(run("radial --config /nonexistent.ini", &log) == 1);
    CHECK(run("diagnose --out " + dir.string(), &log) == 1);
    CHECK(log.find("diagnose.input") != std::string::npos);
    CHECK(run("--help", &log) == 0);
    fs::remove_all(dir);
}

TEST_CASE("config file plus overrides, and a rerun from the written config") {
    fs::path dir = scratch("cfg");
    fs::create_directories(dir);
    std::ofstream(dir / "run.ini") << "schema = 1\n[problem]\np = 0.5\n[radial]\nR = 2.5\n";
    fs::path out = dir / "out";
    CHECK(run("radial --config " + (dir / "run.ini").string() + " --out " + out.string()) == 0);
    json s = load(out / "summary.json");
    CHECK(s["p"].get<double>() == 0.5);
    CHECK(s["R"].get<double>() == 2.5);
    fs::path rerun = dir / "rerun";
    CHECK(run("radial --config " + (out / "config.ini").string() + " --out " + rerun.string()) == 0);
    CHECK(hash_of(load(out / "manifest.json"), "profile.csv") == hash_of(load(rerun / "manifest.json"), "profile.csv"));
    fs::remove_all(dir);
}
