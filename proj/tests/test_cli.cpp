#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "arboreal/cli.hpp"

using namespace arboreal;
using arboreal::cli::run;
using json = nlohmann::ordered_json;

namespace {

struct RunResult {
    int code;
    std::string out;
    std::string err;
    json report() const { return json::parse(out); }
};

RunResult invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string strip_timing(std::string text) {
    json j = json::parse(text);
    j["timing_ms"] = 0;
    return j.dump();
}

} // namespace

TEST_CASE("gen emits the graph text format") {
    auto r = invoke({"gen", "--gen", "complete:4"});
    CHECK(r.code == 0);
    Multigraph g = parse_graph(r.out);
    CHECK(g.n_vertices() == 4);
    CHECK(g.n_edges() == 6);
}

TEST_CASE("trees subcommand") {
    auto r = invoke({"trees", "--gen", "complete:4"});
    REQUIRE(r.code == 0);
    json rep = r.report();
    CHECK(rep["results"]["tree_count"] == "16");
    CHECK(rep["command"] == "trees");
    CHECK(rep.contains("input"));
    CHECK(rep.contains("params"));
    CHECK(rep.contains("verdicts"));
    CHECK(rep.contains("witnesses"));
    CHECK(rep.contains("timing_ms"));
    CHECK(rep["version"] == "0.1.0");
}

TEST_CASE("resistance and flow") {
    auto r = invoke({"resistance", "--gen", "complete:4", "--u", "0", "--v", "1"});
    REQUIRE(r.code == 0);
    CHECK(r.report()["results"]["r_eff"] == "1/2");

    auto f = invoke({"flow", "--gen", "cycle:4", "--u", "0", "--v", "1"});
    REQUIRE(f.code == 0);
    json rep = f.report();
    CHECK(rep["results"]["r_eff"] == "3/4");
    CHECK(rep["results"]["energy"] == "3/4");
    CHECK(rep["results"]["edge_currents"][0]["current"] == "3/4");
}

TEST_CASE("nc-pair symbolic on the K4 disjoint pair") {
    auto r = invoke({"nc-pair", "--gen", "complete:4", "--beta", "symbolic",
                     "--e1", "0", "--e2", "5"});
    REQUIRE(r.code == 0);
    json rep = r.report();
    CHECK(rep["results"]["leading_coeff"] == "0");
    CHECK(rep["results"]["second_coeff"] == "4");
    CHECK(rep["verdicts"]["nc"] == "holds");
    CHECK(rep["results"]["margin"]["coeffs"] == json::array({"0", "0", "2", "4"}));
}

TEST_CASE("nc-pair numeric mode") {
    auto r = invoke({"nc-pair", "--gen", "complete:3", "--beta", "1", "--e1", "0", "--e2", "1"});
    REQUIRE(r.code == 0);
    json rep = r.report();
    CHECK(rep["results"]["margin"] == "2"); // 3*3 - 1*7 in mu scale
    CHECK(rep["results"]["mu_1"] == "7");
    CHECK(rep["verdicts"]["nc"] == "holds");
}

TEST_CASE("nc-sets and nc-all") {
    auto s = invoke({"nc-sets", "--gen", "complete:3", "--s1", "0", "--s2", "1"});
    REQUIRE(s.code == 0);
    CHECK(s.report()["results"]["prob_margin"] == "2/49");

    auto a = invoke({"nc-all", "--gen", "complete:3"});
    REQUIRE(a.code == 0);
    json rep = a.report();
    CHECK(rep["results"]["min_margin"] == "2/49");
    CHECK(rep["verdicts"]["nc_all_pairs"] == "holds");
}

TEST_CASE("poly with events") {
    auto r = invoke({"poly", "--gen", "complete:3", "--beta", "symbolic", "--require", "0"});
    REQUIRE(r.code == 0);
    CHECK(r.report()["results"]["mu"]["coeffs"] == json::array({"1", "2"}));
}

TEST_CASE("reduce on a ladder") {
    auto r = invoke({"reduce", "--gen", "ladder:4"});
    REQUIRE(r.code == 0);
    json rep = r.report();
    REQUIRE(rep["results"]["components"].size() == 1);
    Multigraph reduced = parse_graph(rep["results"]["components"][0].get<std::string>());
    CHECK(is_isomorphic(reduced, generate(GraphKind::ladder, {2}, Rational(1))));

    SUBCASE("explain emits one line per step") {
        auto e = invoke({"reduce", "--gen", "ladder:4", "--explain"});
        REQUIRE(e.code == 0);
        CHECK(e.out.find("suppress_vertex") != std::string::npos);
        CHECK(e.out.find("merge_parallel") != std::string::npos);
        CHECK(e.out.find("beta_tilde=1/3") != std::string::npos);
    }

    SUBCASE("fixpoint continues past re-created degree-2 vertices") {
        auto f = invoke({"reduce", "--gen", "ladder:3", "--fixpoint"});
        REQUIRE(f.code == 0);
        // One pass leaves a single edge; fixpoint mode deletes it as a bridge.
        CHECK(parse_graph(f.report()["results"]["reduced"].get<std::string>()).n_edges() == 0);
    }
}

TEST_CASE("kn analyses") {
    auto r = invoke({"kn", "--n", "6"});
    REQUIRE(r.code == 0);
    json rep = r.report();
    CHECK(rep["results"]["t1"] == "1296");
    CHECK(rep["results"]["a_k"][0] == "12960");
    CHECK(rep["results"]["sum_i"] == "4/5");
    CHECK(rep["results"]["second_coeff_from_cases"] == "5184");

    auto b = invoke({"kn", "--bound-scan", "40"});
    REQUIRE(b.code == 0);
    CHECK(b.report()["results"]["threshold_n"] == 5);
}

TEST_CASE("sample subcommands") {
    auto w = invoke({"sample", "--gen", "complete:4", "--method", "wilson", "--n", "200",
                     "--seed", "5"});
    REQUIRE(w.code == 0);
    CHECK(w.report()["results"]["edge_frequencies"].size() == 6);

    auto rj = invoke({"sample", "--gen", "path:4", "--method", "rejection", "--n", "500",
                      "--beta", "1", "--seed", "5"});
    REQUIRE(rj.code == 0);
    CHECK(rj.report()["results"]["acceptance_rate"] == "1");

    auto pr = invoke({"sample", "--gen", "complete:3", "--method", "probe", "--n", "2000",
                      "--beta", "1", "--seed", "5", "--e1", "0", "--e2", "1"});
    REQUIRE(pr.code == 0);
    CHECK(pr.report()["results"].contains("stderr"));
}

TEST_CASE("scan small graphs") {
    auto r = invoke({"scan", "--n-max", "4", "--beta", "1/2,1", "--workers", "2"});
    REQUIRE(r.code == 0);
    json rep = r.report();
    CHECK(rep["results"]["graphs"] == 9);
    CHECK(rep["verdicts"]["violations"] == 0);
    CHECK(rep["verdicts"]["confirmed_violation"] == false);
    CHECK(rep["results"].contains("min_margin"));
    CHECK(rep["results"]["margin_distribution"]["negative"] == 0);
    // 9 graphs x 2 betas, minus the pairless single-edge class.
    CHECK(rep["results"]["per_graph_min"].size() == 16);
    CHECK(rep["params"]["beta_grid"] == json::array({"1/2", "1"}));

    // Trees carry exactly-zero margins; the triangle is strictly positive.
    auto tri = invoke({"nc-all", "--gen", "complete:3", "--beta", "1"});
    json trirep = tri.report();
    CHECK(Rational::from_string(trirep["results"]["min_margin"].get<std::string>()).sign() > 0);

    SUBCASE("labeled mode counts every connected graph") {
        auto l = invoke({"scan", "--n-max", "3", "--beta", "1", "--no-dedup"});
        REQUIRE(l.code == 0);
        CHECK(l.report()["results"]["graphs"] == 5); // 1 + 4 labeled
    }

    SUBCASE("scan output is deterministic across worker counts") {
        auto a = invoke({"scan", "--n-max", "4", "--beta", "1", "--workers", "1"});
        auto b = invoke({"scan", "--n-max", "4", "--beta", "1", "--workers", "4"});
        json ja = json::parse(a.out), jb = json::parse(b.out);
        ja["timing_ms"] = jb["timing_ms"] = 0;
        ja["params"]["workers"] = jb["params"]["workers"] = 0;
        CHECK(ja.dump() == jb.dump());
    }
}

TEST_CASE("exit codes") {
    SUBCASE("input errors exit 2") {
        auto r = invoke({"trees", "--input", "/nonexistent/zz.graph"});
        CHECK(r.code == 2);
        auto b = invoke({"trees", "--gen", "complete:4", "--gen2"});
        CHECK(b.code == 2);
        auto both = invoke({"trees", "--gen", "complete:4", "--input", "x"});
        CHECK(both.code == 2);
        auto badbeta = invoke({"trees", "--gen", "complete:4", "--beta", "-1"});
        CHECK(badbeta.code == 2);
    }

    SUBCASE("size limits exit 3") {
        auto r = invoke({"scan", "--n-max", "8"});
        CHECK(r.code == 3);
    }

    SUBCASE("parse errors carry line info") {
        char path[] = "/tmp/arboreal_bad_XXXXXX";
        int fd = mkstemp(path);
        REQUIRE(fd >= 0);
        {
            std::ofstream f(path);
            f << "vertices 2\n0 9 1/2\n";
        }
        auto r = invoke({"trees", "--input", path});
        CHECK(r.code == 2);
        CHECK(r.err.find("line 2") != std::string::npos);
        std::remove(path);
    }
}

TEST_CASE("graph files round trip through the cli") {
    char path[] = "/tmp/arboreal_rt_XXXXXX";
    int fd = mkstemp(path);
    REQUIRE(fd >= 0);
    {
        auto gen = invoke({"gen", "--gen", "ladder:3"});
        std::ofstream f(path);
        f << gen.out;
    }
    auto r = invoke({"trees", "--input", path});
    REQUIRE(r.code == 0);
    // Ladder 3 spanning trees: matrix-tree on the 6-cycle-with-rung shape.
    auto direct = tree_count(generate(GraphKind::ladder, {3}, Rational(1)),
                             Conductances::unit(generate(GraphKind::ladder, {3}, Rational(1))));
    CHECK(r.report()["results"]["tree_count"] == direct.to_string());
    std::remove(path);
}

TEST_CASE("output determinism modulo timing") {
    std::vector<std::string> args{"nc-pair", "--gen", "complete:4", "--beta", "symbolic",
                                  "--e1", "0", "--e2", "3"};
    auto a = invoke(args);
    auto b = invoke(args);
    REQUIRE(a.code == 0);
    CHECK(strip_timing(a.out) == strip_timing(b.out));

    auto s1 = invoke({"sample", "--gen", "complete:3", "--method", "rejection", "--n", "100",
                      "--beta", "1", "--seed", "99"});
    auto s2 = invoke({"sample", "--gen", "complete:3", "--method", "rejection", "--n", "100",
                      "--beta", "1", "--seed", "99"});
    CHECK(strip_timing(s1.out) == strip_timing(s2.out));
}

TEST_CASE("formats") {
    SUBCASE("csv for scalar reports") {
        auto r = invoke({"trees", "--gen", "complete:4", "--format", "csv"});
        REQUIRE(r.code == 0);
        CHECK(r.out == "tree_count\n16\n");
    }

    SUBCASE("csv rejected for structured reports") {
        auto r = invoke({"poly", "--gen", "complete:3", "--beta", "symbolic", "--format", "csv"});
        CHECK(r.code == 2);
    }

    SUBCASE("text renders flattened keys") {
        auto r = invoke({"trees", "--gen", "complete:4", "--format", "text"});
        REQUIRE(r.code == 0);
        CHECK(r.out.find("results.tree_count = 16") != std::string::npos);
    }
}

TEST_CASE("worker environment variable") {
    setenv(cli::kWorkersEnv, "3", 1);
    auto r = invoke({"scan", "--n-max", "3", "--beta", "1"});
    REQUIRE(r.code == 0);
    CHECK(r.report()["params"]["workers"] == 3);
    auto o = invoke({"scan", "--n-max", "3", "--beta", "1", "--workers", "2"});
    CHECK(o.report()["params"]["workers"] == 2);
    unsetenv(cli::kWorkersEnv);
}

TEST_CASE("rational serialization in reports uses ratio strings") {
    auto r = invoke({"resistance", "--gen", "cycle:5", "--u", "0", "--v", "2"});
    REQUIRE(r.code == 0);
    std::string v = r.report()["results"]["r_eff"].get<std::string>();
    CHECK(v == "6/5");
}
