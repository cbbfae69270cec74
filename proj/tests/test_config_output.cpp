#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "json.hpp"

#include "degma/config.hpp"
#include "degma/output.hpp"
#include "degma/radial.hpp"
#include "degma/transforms.hpp"

using namespace degma;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    fs::path d = fs::temp_directory_path() / ("degma_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int count_lines(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

}  // namespace

TEST_CASE("config defaults and parsing") {
    RunConfig d = parse_config_text("");
    CHECK(d.p == 1.0);
    CHECK(d.solver.n == 129);
    CHECK(d.domain.kind == DomainKind::disk);
    CHECK(d.domain.radius == 2.0);
    CHECK(d.boundary.kind == BoundaryKind::radial);
    CHECK(d.delta0 == 0.1);
    CHECK(d.delta_min == 1e-3);

    RunConfig c = parse_config_text(R"(schema = 1
command = solve
seed = 7
out = results

[problem]
p = 0.5
h = 2

[domain]
kind = polygon
vertices = -1 -1; 1 -1; 1 1; -1 1

[boundary]
kind = constant
value = 0.3

[grid]
n = 65

[continuation]
checkpoints = 0.25, 0.5
)");
    CHECK(c.command == "solve");
    CHECK(c.seed == 7);
    CHECK(c.out == "results");
    CHECK(c.p == 0.5);
    CHECK(c.h0 == 2.0);
    CHECK(c.domain.kind == DomainKind::polygon);
    CHECK(c.domain.vertices.size() == 4);
    CHECK(c.boundary.kind == BoundaryKind::constant);
    CHECK(c.solver.n == 65);
    REQUIRE(c.checkpoints.size() == 2);
    CHECK(c.checkpoints[1] == 0.5);
    CHECK(c.domain.build().area() == doctest::Approx(4.0));

    RunConfig o = parse_config_text("[grid]\nn = 65\n", {{"grid.n", "33"}, {"problem.p", "1.5"}});
    CHECK(o.solver.n == 33);
    CHECK(o.p == 1.5);
}

TEST_CASE("config errors name the field") {
    CHECK_THROWS_WITH(parse_config_text("[problem]\nq = 1\n"), doctest::Contains("config field 'problem.q'"));
    CHECK_THROWS_WITH(parse_config_text("[problem]\np = 3\n"), doctest::Contains("config field 'problem.p'"));
    CHECK_THROWS_WITH(parse_config_text("[problem]\np = abc\n"), doctest::Contains("expected a number"));
    CHECK_THROWS_WITH(parse_config_text("schema = 2\n"), doctest::Contains("config field 'schema'"));
    CHECK_THROWS_WITH(parse_config_text("[grid]\nn = 8\n"), doctest::Contains("config field 'grid.n'"));
    CHECK_THROWS_WITH(parse_config_text("command = fly\n"), doctest::Contains("config field 'command'"));
    CHECK_THROWS_WITH(parse_config_text("[domain]\nkind = polygon\n"), doctest::Contains("domain.vertices"));
    CHECK_THROWS_WITH(parse_config_text("", {{"continuation.delta0", "0"}}), doctest::Contains("delta0"));
    CHECK_THROWS(load_config("/nonexistent/degma.ini"));
}

TEST_CASE("effective config round-trips through INI text") {
    RunConfig c = parse_config_text("", {{"problem.p", "0.75"}, {"domain.kind", "ellipse"}, {"domain.semi_y", "1.25"},
                                         {"grid.n", "97"}, {"seed", "42"}, {"continuation.checkpoints", "0.3"}});
    RunConfig r = parse_config_text(to_ini(c));
    CHECK(r.p == c.p);
    CHECK(r.domain.kind == DomainKind::ellipse);
    CHECK(r.domain.semi_y == 1.25);
    CHECK(r.solver.n == 97);
    CHECK(r.seed == 42);
    CHECK(r.checkpoints == c.checkpoints);
    CHECK(to_ini(r) == to_ini(c));
}

TEST_CASE("boundary specifications") {
    ExponentPack pk = ExponentPack::from_p(1.0);
    ConvexDomain dom = ConvexDomain::disk({0, 0}, 2.0);
    BoundarySpec radial;
    BoundaryData br = radial.build(dom, pk, 1.0);
    RadialSolution rs = solve_radial(1.0, 1.0, 1.0, 2.0);
    CHECK(br.density({2, 0}) == doctest::Approx(rs.f_outer()).epsilon(1e-9));

    fs::path dir = scratch("table");
    std::ofstream(dir / "t.csv") << "angle,value\n0,1\n3.14159265358979,3\n";
    BoundarySpec tab;
    tab.kind = BoundaryKind::table;
    tab.table = (dir / "t.csv").string();
    BoundaryData bt = tab.build(dom, pk, 1.0);
    CHECK(bt.density({2, 0}) == doctest::Approx(1.0));
    CHECK(bt.density({0, 2}) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(bt.density({0, -2}) == doctest::Approx(2.0).epsilon(1e-6));  // periodic wrap
    fs::remove_all(dir);

    BoundarySpec too_big;
    too_big.rho = 3.0;
    CHECK_THROWS_WITH(too_big.build(dom, pk, 1.0), doctest::Contains("boundary.rho"));
}

TEST_CASE("solution CSV round trip and grid validation") {
    fs::path dir = scratch("csv");
    ConvexDomain dom = ConvexDomain::disk({0, 0}, 1.0);
    ScalarField2D f = make_grid(dom, 33);
    for (int j = 0; j < 33; ++j)
        for (int i = 0; i < 33; ++i) f(i, j) = std::max(0.0, norm(f.node(i, j)) - 0.4) / 3.0;
    ExponentPack pk = ExponentPack::from_p(1.0);
    ScalarField2D g = pressure_from_density(f, pk);
    std::string path = (dir / "s.csv").string();
    write_solution_csv(f, g, path);
    CHECK(slurp(path).rfind("x,y,f,g,mask\n", 0) == 0);
    CHECK(count_lines(path) == 1 + 33 * 33);
    ScalarField2D back = read_solution_csv(path, dom, 33);
    for (std::size_t k = 0; k < f.size(); ++k) CHECK(back[k] == f[k]);
    CHECK_THROWS_WITH(read_solution_csv(path, dom, 65), doctest::Contains("configured grid"));
    {
        std::string head = slurp(path);
        std::ofstream((dir / "short.csv").string()) << head.substr(0, head.rfind('\n', head.size() / 2) + 1);
    }
    CHECK_THROWS_WITH(read_solution_csv((dir / "short.csv").string(), dom, 33), doctest::Contains("fewer rows"));
    CHECK_THROWS_WITH(read_solution_csv(path, ConvexDomain::disk({0.5, 0}, 1.0), 33), doctest::Contains("does not match"));
    fs::remove_all(dir);
}

TEST_CASE("plot files and the manifest") {
    fs::path dir = scratch("plots");
    Interface I;
    I.vertices = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    write_interface_polyline(I, (dir / "i.csv").string());
    std::string txt = slurp(dir / "i.csv");
    CHECK(txt.rfind("x,y\n1,0\n", 0) == 0);
    CHECK(txt.substr(txt.size() - 4) == "1,0\n");
    CHECK(count_lines(dir / "i.csv") == 6);

    ScalarField2D f = make_grid(ConvexDomain::disk({0, 0}, 1.0), 17).filled(2.0);
    write_heatmap(f, (dir / "h.csv").string());
    int interior = 0;
    for (std::size_t k = 0; k < f.size(); ++k) interior += f.kind(k) == NodeKind::interior;
    CHECK(count_lines(dir / "h.csv") == 1 + interior);

    std::vector<std::string> ledger = {R"({"t":0.0,"accepted":true,"residual":0.5})",
                                       R"({"t":0.1,"accepted":false,"residual":9.0})",
                                       R"({"t":0.05,"accepted":true,"residual":1e-12})"};
    write_ledger_series(ledger, (dir / "l.csv").string());
    CHECK(slurp(dir / "l.csv") == "t,residual\n0,0.5\n0.050000000000000003,9.9999999999999998e-13\n");

    std::ofstream(dir / "abc.txt") << "abc";
    CHECK(sha256_file((dir / "abc.txt").string()) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

    Manifest m(dir.string());
    m.add(m.path("abc.txt"), "data");
    m.add(m.path("i.csv"), "plot");
    m.write("radial", 0);
    nlohmann::json j = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(j["schema"] == kReportSchema);
    CHECK(j["command"] == "radial");
    CHECK(j["status"] == 0);
    REQUIRE(j["files"].size() == 2);
    CHECK(j["files"][0]["path"] == "abc.txt");
    CHECK(j["files"][0]["bytes"] == 3);
    CHECK(j["files"][0]["sha256"] == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    fs::remove_all(dir);
}

TEST_CASE("report JSON") {
    EstimateReport rep;
    nlohmann::ordered_json j = to_json(rep);
    CHECK(j["schema"] == kReportSchema);
    CHECK(j["empty"] == true);
    CHECK(j["grad"].is_null());
    CHECK(j.contains("holder_max"));
    ClassifyResult c;
    c.kind = Classification::supersolution;
    CHECK(to_json(c)["classification"] == "supersolution");
}
