#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "magtrace/cli.hpp"
#include "magtrace/errors.hpp"
#include "magtrace/serialization.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace magtrace;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run_cli(std::vector<std::string> const& args)
{
    std::ostringstream out;
    std::ostringstream err;
    Result r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

fs::path scratch()
{
    auto const dir = fs::temp_directory_path() / "magtrace_cli_test";
    fs::create_directories(dir);
    return dir;
}

std::string write_file(std::string const& name, std::string const& body)
{
    auto const path = scratch() / name;
    std::ofstream(path) << body;
    return path.string();
}

std::string const pi0_json = R"({"entries": [{"j": 0, "k": 0, "re": 1.0, "im": 0.0}], "class": "L1"})";

} // namespace

TEST_CASE("trace diag prints tau")
{
    auto const op = write_file("pi0.json", pi0_json);
    auto const r = run_cli({"trace", "diag", "--op", op});
    CHECK(r.code == 0);
    auto const doc = Json::parse(r.out);
    CHECK(doc["results"]["tau"][0].get<double>() == 1.0);
    CHECK(doc["format_version"] == cli::kReportVersion);
    CHECK(doc["command"] == "trace diag");
    CHECK(r.err.find("wall time") != std::string::npos);
    auto const csv = run_cli({"trace", "diag", "--op", op, "--format", "csv"});
    CHECK(csv.out == "1.0\n");
}

TEST_CASE("domain errors exit 2 with a diagnostic")
{
    auto const op = write_file("pi0.json", pi0_json);
    auto const r = run_cli({"trace", "residue", "--op", op, "--lambda", "-1"});
    CHECK(r.code == cli::kExitDomain);
    CHECK(r.err.find("lambda must exceed -1") != std::string::npos);
    CHECK(r.err.find("invertible") != std::string::npos);
    CHECK(r.out.empty());

    auto const dup = write_file("dup.json", R"({"entries": [{"j": 0, "k": 0, "re": 1}, {"j": 0, "k": 0, "re": 2}]})");
    CHECK(run_cli({"trace", "diag", "--op", dup}).code == cli::kExitDomain);
    auto const bad = write_file("bad.json", "{not json");
    CHECK(run_cli({"trace", "diag", "--op", bad}).code == cli::kExitDomain);
    CHECK(run_cli({"trace", "diag", "--op", (scratch() / "missing.json").string()}).code == cli::kExitDomain);
    CHECK(run_cli({"dos", "idos", "--J", "0"}).code == cli::kExitDomain);
}

TEST_CASE("usage errors exit 64")
{
    CHECK(run_cli({"trace", "diag", "--bogus"}).code == cli::kExitUsage);
    CHECK(run_cli({"nonsense"}).code == cli::kExitUsage);
    CHECK(run_cli({}).code == cli::kExitUsage);
    CHECK(run_cli({"trace"}).code == cli::kExitUsage);
    CHECK(run_cli({"trace", "diag"}).code == cli::kExitUsage);
    CHECK(run_cli({"--format", "xml", "dos", "idos"}).code == cli::kExitUsage);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("compare on pi0")
{
    auto const op = write_file("pi0.json", pi0_json);
    auto const r = run_cli({"compare", "--op", op});
    CHECK(r.code == 0);
    auto const doc = Json::parse(r.out);
    CHECK(doc["results"]["max_gap"].get<double>() <= 1e-2);
    int found = 0;
    for (auto const& row : doc["results"]["rows"]) {
        if (row["engine"] == "tau_ordered_basis_doubled") {
            CHECK(std::abs(row["value"][0].get<double>() - 1.0) <= 5e-2);
            ++found;
        }
        if (row["engine"] == "tau_shell_accelerated") {
            CHECK(row["value"][0].get<double>() == 1.0);
            ++found;
        }
    }
    CHECK(found == 2);
}

TEST_CASE("compare on the zero operator")
{
    auto const op = write_file("zero.json", R"({"entries": []})");
    auto const r = run_cli({"compare", "--op", op});
    CHECK(r.code == 0);
    for (auto const& row : Json::parse(r.out)["results"]["rows"]) {
        CHECK(row["value"][0].get<double>() == 0.0);
        CHECK(row["value"][1].get<double>() == 0.0);
    }
}

TEST_CASE("reports are deterministic and round-trip byte for byte")
{
    auto const op = write_file("mix.json",
                               R"({"entries": [{"j": 0, "k": 0, "re": 0.1}, {"j": 1, "k": 1, "re": 0.7},)"
                               R"( {"j": 2, "k": 2, "re": 1.0000000000000002}], "class": "L1"})");
    auto const a = run_cli({"trace", "residue", "--op", op, "--xgrid", "0.1,0.01,0.001"});
    auto const b = run_cli({"trace", "residue", "--op", op, "--xgrid", "0.1,0.01,0.001"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    std::string const body = a.out.substr(0, a.out.size() - 1);
    CHECK(canonical_dump(Json::parse(body)) == body);

    auto const c = run_cli({"compare", "--op", op});
    std::string const cbody = c.out.substr(0, c.out.size() - 1);
    CHECK(canonical_dump(Json::parse(cbody)) == cbody);
}

TEST_CASE("out file and csv tables")
{
    auto const op = write_file("pi0.json", pi0_json);
    auto const path = (scratch() / "shell.csv").string();
    // N = 10 leaves the raw log-inverse fit outside tolerance
    CHECK(run_cli({"trace", "shell", "--op", op, "--Ngrid", "10,100,1000"}).code == cli::kExitNotConverged);
    auto const r = run_cli({"--format", "csv", "--out", path, "trace", "shell", "--op", op, "--Ngrid", "100,1000,10000"});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "param,raw_re,raw_im,accelerated_re,accelerated_im,extrapolated_re,extrapolated_im,residual");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 3);
}

TEST_CASE("global flags after the subcommand")
{
    auto const r = run_cli({"dos", "idos", "--eps", "1.0", "--ell", "0.5"});
    CHECK(r.code == 0);
    CHECK(Json::parse(r.out)["results"]["idos"].get<double>() == doctest::Approx(2.0 / std::numbers::pi));
}

TEST_CASE("op subcommands")
{
    auto const a = write_file("y01.json", R"({"entries": [{"j": 0, "k": 1, "re": 1}], "class": "L1"})");
    auto const b = write_file("y20.json", R"({"entries": [{"j": 2, "k": 0, "re": 1}], "class": "L1"})");
    auto const r = run_cli({"op", "compose", "--in", a, "--in2", b});
    CHECK(r.code == 0);
    auto const prod = operator_from_json(Json::parse(r.out)["results"]["operator"]);
    CHECK(prod == CoefficientOperator::transition(2, 1));
    auto const adj = operator_from_json(Json::parse(run_cli({"op", "adjoint", "--in", a}).out)["results"]["operator"]);
    CHECK(adj == CoefficientOperator::transition(1, 0));
    auto const norm = Json::parse(run_cli({"op", "norm", "--in", a, "--p", "inf"}).out);
    CHECK(norm["results"]["norm"].get<double>() == 1.0);
    CHECK(run_cli({"op", "norm", "--in", a, "--p", "0.5"}).code == cli::kExitDomain);
    auto const block = Json::parse(run_cli({"op", "block", "--in", a, "--m", "0", "--N", "2"}).out);
    CHECK(block["results"]["matrix"][1][0][0].get<double>() == 1.0);
}

TEST_CASE("basis, kernel, dixmier and dos subcommands")
{
    auto const op = write_file("pi0.json", pi0_json);
    auto const e = Json::parse(run_cli({"basis", "eval", "--n", "0", "--m", "0"}).out);
    CHECK(e["results"]["psi"][0].get<double>() == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)));
    auto const g = run_cli({"basis", "gram", "--max-index", "2", "--format", "csv"});
    CHECK(g.code == 0);
    CHECK(g.out.rfind("a_n,a_m,b_n,b_m,deviation", 0) == 0);

    CHECK(Json::parse(run_cli({"kernel", "eval", "--op", op}).out)["results"]["kernel"][0].get<double>()
          == doctest::Approx(1.0));
    CHECK(Json::parse(run_cli({"kernel", "folner", "--op", op, "--R", "3"}).out)["results"]["gap"].get<double>() <= 1e-10);
    auto const comm = run_cli({"kernel", "commutant", "--op", op, "--a1", "1", "--a2", "0.5", "--nodes", "61"});
    CHECK(comm.code == 0);
    CHECK(Json::parse(comm.out)["results"]["residual"].get<double>() <= 1e-5);

    auto const est = run_cli({"dixmier", "estimate", "--shells", "400"});
    CHECK(est.code == 0);
    CHECK(std::abs(Json::parse(est.out)["results"]["table"]["extrapolated"][0].get<double>() - 0.5) <= 1e-2);
    auto const spec = Json::parse(run_cli({"dixmier", "spectrum", "--op", op, "--shells", "10", "--limit", "3"}).out);
    CHECK(spec["results"]["values"].size() == 3);
    CHECK(spec["results"]["length"] == 10);
    CHECK(run_cli({"dixmier", "gamma", "--op", op, "--shells", "100"}).code == 0);
    CHECK(run_cli({"dixmier", "tauberian", "--shells", "200"}).code == 0);
    CHECK(run_cli({"dixmier", "estimate", "--op", op, "--lambda", "-1"}).code == cli::kExitDomain);

    auto const f = write_file("hat.json", R"({"nodes": [[0.25, 0], [0.5, 1], [1.5, 0.25], [1.75, 0]]})");
    auto const sp = Json::parse(run_cli({"dos", "spectral", "--f", f}).out);
    CHECK(sp["results"]["lhs"].get<double>() == doctest::Approx(1.25));
    CHECK(sp["results"]["gap"].get<double>() <= 1e-12);
    auto const dd = Json::parse(run_cli({"dos", "dixmier", "--f", f, "--form", "split", "--lambda", "2", "--shells", "20000"}).out);
    CHECK(dd["results"]["gap"].get<double>() <= 2e-2);
    auto const ap = run_cli({"dos", "approx", "--eps", "2", "--Ngrid", "10,100,1000"});
    CHECK(Json::parse(ap.out)["results"]["idos"].get<double>() == doctest::Approx(1.0 / std::numbers::pi));
    auto const me = Json::parse(run_cli({"dos", "measure", "--J", "3"}).out);
    CHECK(me["results"]["atoms"].size() == 3);
}

TEST_CASE("canonical dump")
{
    Json const doc = {{"b", 0.1}, {"a", {1, 2.5, nullptr}}, {"c", "x"}, {"d", 3.0}};
    auto const s = canonical_dump(doc);
    CHECK(s == R"({"a":[1,2.5,null],"b":0.10000000000000001,"c":"x","d":3.0})");
    CHECK(canonical_dump(Json::parse(s)) == s);
    CHECK(canonical_dump(Json(std::nan(""))) == "null");
}
