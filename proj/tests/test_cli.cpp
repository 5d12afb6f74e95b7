#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "cli.hpp"
#include "qiopa/errors.hpp"
#include "qiopa/fock.hpp"
#include "qiopa/io.hpp"

using namespace qiopa;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "qiopa");
    std::ostringstream o, e;
    int c = cli::run(args, o, e);
    return {c, o.str(), e.str()};
}

CsvDocument csv(const std::string& s) {
    std::istringstream is(s);
    return read_csv(is);
}

nlohmann::json doc(const std::string& s) {
    std::istringstream is(s);
    return read_json(is);
}

fs::path scratch(const std::string& name) {
    auto d = fs::temp_directory_path() / "qiopa_cli_tests";
    fs::create_directories(d);
    return d / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

TEST_CASE("format_double is shortest round-trip and locale free") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 2000; ++i) {
        double x = u(rng) * std::pow(10.0, int(rng() % 40) - 20);
        auto s = format_double(x);
        CHECK(s.find(',') == std::string::npos);
        CHECK(parse_double(s) == x);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1.0) == "1");
    CHECK(std::isnan(parse_double(format_double(std::nan("")))));
    CHECK(parse_double(format_double(-INFINITY)) == -INFINITY);
    CHECK_THROWS_AS(parse_double("1,5"), ValidationError);
    CHECK_THROWS_AS(parse_double(""), ValidationError);
}

TEST_CASE("CSV round trip, quoting and schema errors") {
    CsvTable t({"name", "x"});
    t.add_row({"plain", 1.5});
    t.add_row({"with,comma", -2.0});
    t.add_row({"say \"hi\"", 1e-300});
    CHECK_THROWS_AS(t.add_row({"short"}), LayoutMismatchError);
    std::ostringstream os;
    auto prov = provenance("demo", {{"a", 1}});
    t.write(os, prov, {{"note", "m"}});
    auto d = csv(os.str());
    CHECK(d.provenance == prov);
    CHECK(d.metadata["note"] == "m");
    REQUIRE(d.rows.size() == 3);
    CHECK(d.rows[1][0] == "with,comma");
    CHECK(d.rows[2][0] == "say \"hi\"");
    CHECK(d.number(2, "x") == 1e-300);
    CHECK_THROWS_AS(d.column("y"), ValidationError);
    CHECK_THROWS_AS(d.number(7, "x"), OutOfRangeError);

    CHECK_THROWS_AS(csv("a,b\n1,2\n"), ValidationError);  // no provenance
    CHECK_THROWS_AS(csv("# provenance: {}\na,b\n1,2,3\n"), LayoutMismatchError);
    CHECK_THROWS_AS(csv("# provenance: {}\na,b\n\"1,2\n"), ValidationError);
    CHECK_THROWS_AS(csv("# provenance: {}\n"), ValidationError);
}

TEST_CASE("JSON documents and matrices round trip") {
    Eigen::MatrixXcd m(2, 3);
    m << cplx(1, 2), cplx(0.1, 0), cplx(-3, 1e-17), cplx(0, 0), cplx(5, -5), cplx(1e300, 0);
    std::ostringstream os;
    write_json(os, provenance("x", {}), {{"m", matrix_json(m)}});
    auto j = doc(os.str());
    CHECK(matrix_from_json(j["m"]) == m);
    CHECK(j["provenance"]["version"] == library_version());
    CHECK_THROWS_AS(write_json(os, {}, nlohmann::json::array()), ValidationError);
    CHECK_THROWS_AS(write_json(os, {}, {{"provenance", 1}}), ValidationError);
    CHECK_THROWS_AS(doc("{\"a\": 1}"), ValidationError);
    CHECK_THROWS_AS(doc("{oops"), ValidationError);
    CHECK_THROWS_AS(matrix_from_json({{"re", {{1, 2}}}, {"im", {{1}}}}), LayoutMismatchError);
}

TEST_CASE("fringe: visibility column matches closed form") {
    auto r = invoke({"fringe", "--config", "collinear", "--g", "1.0"});
    REQUIRE(r.code == 0);
    auto d = csv(r.out);
    CHECK(d.provenance["command"] == "fringe");
    CHECK(d.provenance["version"] == library_version());
    CHECK(d.provenance["config"]["g"] == 1.0);
    const double m = std::sinh(1.0) * std::sinh(1.0);
    REQUIRE(d.rows.size() == 24);
    for (std::size_t i = 0; i < d.rows.size(); ++i)
        CHECK(std::abs(d.number(i, "visibility") - (2 * m + 1) / (4 * m + 1)) < 1e-3);
    CHECK(d.number(0, "phase_rad") == 0.0);

    auto z = invoke({"fringe", "--config", "noncollinear", "--g", "0"});
    REQUIRE(z.code == 0);
    auto dz = csv(z.out);
    for (std::size_t i = 0; i < dz.rows.size(); ++i) {
        CHECK(std::abs(dz.number(i, "visibility") - 1) < 1e-12);
        CHECK(std::abs(dz.number(i, "M_plus") + dz.number(i, "M_minus") - 1) < 1e-12);
    }
}

TEST_CASE("exit codes") {
    auto bad = invoke({"fringe", "--g", "-1"});
    CHECK(bad.code == cli::kValidation);
    CHECK(bad.err.find("fringe") != std::string::npos);
    CHECK(bad.out.empty());
    CHECK(invoke({"fringe", "--config", "sideways"}).code == cli::kValidation);
    CHECK(invoke({"fringe", "--g", "abc"}).code == cli::kValidation);
    CHECK(invoke({"fringe", "--phases", "2"}).code == cli::kValidation);
    CHECK(invoke({"werner", "--eta", "1"}).code == cli::kValidation);
    CHECK(invoke({"clone-tables", "--flavor", "phase-covariant", "--n", "2"}).code == cli::kValidation);
    CHECK(invoke({"--epsilon-trunc", "0", "werner"}).code == cli::kValidation);
    CHECK(invoke({}).code == cli::kValidation);
    CHECK(invoke({"frobnicate"}).code == cli::kValidation);
    CHECK(invoke({"--out", "/nonexistent-dir/x.csv", "clone-tables"}).code == cli::kValidation);
    CHECK(invoke({"--help"}).code == 0);
    auto v = invoke({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find(library_version()) != std::string::npos);

    // numerical guards: a window that misses most of the state, a budget the
    // closed form cannot meet within the term guard
    auto tail = invoke({"wigner", "--g", "0.5", "--window", "-0.1,0.1,-0.1,0.1", "--points", "5"});
    CHECK(tail.code == cli::kNumericalGuard);
    CHECK(tail.err.find("numerical guard") != std::string::npos);
    CHECK(invoke({"wigner", "--g", "12", "--points", "5"}).code == cli::kNumericalGuard);
}

TEST_CASE("bures: three curves, PC above coherent") {
    auto r = invoke({"bures", "--kinds", "pc,universal,coherent", "--nbar", "12.5", "--x-points", "7"});
    REQUIRE(r.code == 0);
    auto d = csv(r.out);
    REQUIRE(d.rows.size() == 21);
    const auto kind = d.column("kind");
    std::map<std::string, std::vector<double>> D;
    for (std::size_t i = 0; i < d.rows.size(); ++i) D[d.rows[i][kind]].push_back(d.number(i, "D"));
    REQUIRE(D.size() == 3);
    REQUIRE(D["pc"].size() == 7);
    REQUIRE(D["coherent"].size() == 7);
    for (std::size_t i = 1; i < 7; ++i) CHECK(D["pc"][i] > D["coherent"][i]);
    CHECK(std::abs(d.number(14 + 2, "D") - 0.0959) < 1e-3);  // coherent, x = 1
    CHECK(invoke({"bures", "--kinds", "pc", "--x-max", "20"}).code == cli::kValidation);
    CHECK(invoke({"bures", "--kinds", "squeezed"}).code == cli::kValidation);
}

TEST_CASE("werner and clone-tables examples") {
    auto w = invoke({"werner", "--g", "3", "--eta", "0.0001"});
    REQUIRE(w.code == 0);
    auto j = doc(w.out);
    CHECK(std::abs(j["p"].get<double>() - 0.3364) < 1e-3);
    auto rho = matrix_from_json(j["rho"]);
    CHECK(std::abs(rho.trace() - cplx(1, 0)) < 1e-12);
    CHECK(j["ppt"]["entangled"] == true);
    CHECK_FALSE(j.contains("oracle"));

    auto o = invoke({"werner", "--g", "0.5", "--eta", "0.3", "--oracle"});
    REQUIRE(o.code == 0);
    CHECK(doc(o.out)["oracle"]["max_abs_diff"].get<double>() < 1e-6);

    auto c = invoke({"clone-tables", "--flavor", "universal", "--n", "1", "--m-max", "10"});
    REQUIRE(c.code == 0);
    auto d = csv(c.out);
    REQUIRE(d.rows.size() == 9);
    CHECK(d.rows[0][d.column("n")] == "1");
    CHECK(d.rows[0][d.column("m")] == "2");
    CHECK(std::abs(d.number(0, "fidelity") - 0.833333) < 1e-6);
    auto u = csv(invoke({"clone-tables", "--flavor", "unot", "--n", "1,2"}).out);
    CHECK(u.number(0, "fidelity") == doctest::Approx(2.0 / 3));
}

TEST_CASE("witness sweep and pseudo-spin") {
    auto r = invoke({"witness", "--g", "0.3", "--eta", "1,0.5", "--k", "0,1"});
    REQUIRE(r.code == 0);
    auto d = csv(r.out);
    REQUIRE(d.rows.size() == 4);
    CHECK(d.columns == std::vector<std::string>{"g", "eta", "k", "V1", "V2", "V3", "S", "conclusive_fraction"});
    // eta = 1, k = 1: counts differ by exactly one photon, nothing is conclusive
    CHECK(std::isnan(d.number(1, "S")));
    CHECK(d.number(1, "conclusive_fraction") == 0);
    CHECK(d.number(0, "S") > 1);

    auto p = csv(invoke({"witness", "--mode", "pseudo-spin", "--g", "0"}).out);
    CHECK(std::abs(p.number(0, "S") - 3) < 1e-9);
    CHECK(invoke({"witness", "--mode", "pseudo-spin", "--config", "noncollinear"}).code == cli::kValidation);
    CHECK(invoke({"witness", "--mode", "tomography"}).code == cli::kValidation);
}

TEST_CASE("nosignal: exact marginals and seeded Monte Carlo") {
    auto r = invoke({"nosignal", "--g", "0.8", "--alice2", "0.7,1.9", "--k", "1", "--eta", "0.6"});
    REQUIRE(r.code == 0);
    CHECK(doc(r.out)["exact"]["max_deviation"].get<double>() < 1e-12);

    auto a = invoke({"--seed", "42", "nosignal", "--samples", "5000"});
    auto b = invoke({"nosignal", "--samples", "5000", "--seed", "42"});
    auto c = invoke({"nosignal", "--samples", "5000", "--seed", "43"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(doc(a.out)["monte_carlo"]["p_first"] != doc(c.out)["monte_carlo"]["p_first"]);
    CHECK(invoke({"nosignal", "--alice1", "0.1"}).code == cli::kValidation);
    CHECK(invoke({"nosignal", "--observable", "clicks"}).code == cli::kValidation);
}

TEST_CASE("wigner: CSV plus JSON header") {
    auto csv_path = scratch("w.csv");
    fs::remove(scratch("w.json"));
    auto r = invoke({"--out", csv_path.string(), "wigner", "--g", "0.5", "--points", "41"});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream f(csv_path);
    auto d = read_csv(f);
    std::ifstream jf(scratch("w.json"));
    auto j = read_json(jf);
    CHECK(j["provenance"] == d.provenance);
    CHECK(j["integral"] == d.metadata["integral"]);
    CHECK(std::abs(j["integral"].get<double>() - 1) < 1e-3);
    REQUIRE(d.rows.size() == 41 * 41);
    // centre of the odd grid is the origin
    const std::size_t mid = 20 * 41 + 20;
    CHECK(d.number(mid, "re") == 0);
    CHECK(std::abs(d.number(mid, "W") + 2 / M_PI) < 1e-6);
    CHECK(std::abs(j["wigner_origin"].get<double>() + 2 / M_PI) < 1e-6);
    CHECK(j["grid"]["re_points"] == 41);
    CHECK(j.contains("tail_mass"));
    CHECK(j["epsilon_grid"] == 1e-3);

    CHECK(invoke({"--out", scratch("x.json").string(), "wigner", "--points", "5"}).code == cli::kValidation);
    CHECK(invoke({"wigner", "--window", "1,2,3"}).code == cli::kValidation);
    CHECK(invoke({"wigner", "--R", "1.5"}).code == cli::kValidation);
}

TEST_CASE("determinism: byte-identical files for equal configs") {
    auto p1 = scratch("d1.csv"), p2 = scratch("d2.csv");
    for (const auto& p : {p1, p2})
        REQUIRE(invoke({"--out", p.string(), "fringe", "--config", "noncollinear", "--g", "0.7"}).code == 0);
    CHECK(slurp(p1) == slurp(p2));
    CHECK(invoke({"werner", "--g", "1.3", "--eta", "0.2"}).out == invoke({"werner", "--eta", "0.2", "--g", "1.3"}).out);
}

TEST_CASE("config file: merging, override, echo round trip") {
    auto cfg = scratch("run.json");
    {
        std::ofstream f(cfg);
        f << R"({"command": "werner", "g": 2.0, "eta": 0.01, "epsilon_trunc": 1e-9})";
    }
    auto file_only = invoke({"--config-file", cfg.string()});
    REQUIRE(file_only.code == 0);
    auto j = doc(file_only.out);
    CHECK(j["provenance"]["config"]["g"] == 2.0);
    CHECK(j["provenance"]["config"]["epsilon-trunc"] == 1e-9);

    auto over = doc(invoke({"werner", "--config-file", cfg.string(), "--g", "3"}).out);
    CHECK(over["provenance"]["config"]["g"] == 3.0);
    CHECK(over["provenance"]["config"]["eta"] == 0.01);
    CHECK(over["p"] != j["p"]);

    // the echoed config is itself a valid config file reproducing the output
    auto echo = scratch("echo.json");
    {
        std::ofstream f(echo);
        f << over["provenance"]["config"].dump();
    }
    CHECK(invoke({"--config-file", echo.string()}).out == invoke({"werner", "--config-file", cfg.string(), "--g", "3"}).out);

    auto put = [&](const std::string& text) {
        std::ofstream f(cfg);
        f << text;
    };
    put(R"({"command": "werner", "bogus": 1})");
    CHECK(invoke({"--config-file", cfg.string()}).code == cli::kValidation);
    put(R"({"g": "three"})");
    CHECK(invoke({"werner", "--config-file", cfg.string()}).code == cli::kValidation);
    put(R"({"command": "werner"})");
    CHECK(invoke({"fringe", "--config-file", cfg.string()}).code == cli::kValidation);
    put(R"([1, 2])");
    CHECK(invoke({"werner", "--config-file", cfg.string()}).code == cli::kValidation);
    put(R"({"command": "werner", "g": 1)");
    CHECK(invoke({"--config-file", cfg.string()}).code == cli::kValidation);
    CHECK(invoke({"werner", "--config-file", scratch("missing.json").string()}).code == cli::kValidation);
    put(R"({"command": "witness", "k": [0, 1], "eta": [1.0], "g": [0.2]})");
    auto wi = invoke({"--config-file", cfg.string()});
    REQUIRE(wi.code == 0);
    CHECK(csv(wi.out).rows.size() == 2);
}
