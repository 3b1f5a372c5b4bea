#include <catch2/catch_amalgamated.hpp>

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ffradon/cli.hpp"

using namespace ffradon;
using nlohmann::json;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<json> parse_lines(const std::string& text) {
    std::vector<json> rows;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
        if (!line.empty()) rows.push_back(json::parse(line));
    return rows;
}

} // namespace

TEST_CASE("transform of a point mass from the command line") {
    auto res = run({"transform", "--q", "3", "--d", "2", "--k", "1", "--indicator", "0,0"});
    REQUIRE(res.code == 0);
    auto rows = parse_lines(res.out);
    REQUIRE(rows.size() == 12);
    int thirds = 0, zeros = 0;
    for (const auto& row : rows) {
        CHECK(row["schema"] == "ffradon/1");
        CHECK(row["cmd"] == "transform");
        CHECK(row["q"] == 3);
        double v = row["value"].get<double>();
        if (std::abs(v - 1.0 / 3) < 1e-12) ++thirds;
        if (std::abs(v) < 1e-12) ++zeros;
    }
    CHECK(thirds == 4);
    CHECK(zeros == 8);
}

TEST_CASE("transform of the constant function") {
    std::string values;
    for (int x = 0; x < 3; ++x)
        for (int y = 0; y < 3; ++y) {
            if (!values.empty()) values += ";";
            values += std::to_string(x) + "," + std::to_string(y) + ":1";
        }
    auto res = run({"transform", "--q", "3", "--d", "2", "--k", "1", "--values", values});
    REQUIRE(res.code == 0);
    for (const auto& row : parse_lines(res.out))
        CHECK(row["value"].get<double>() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("malformed point literals are configuration errors") {
    auto res = run({"transform", "--q", "3", "--d", "2", "--k", "1", "--indicator", "0,x"});
    CHECK(res.code == 2);
    CHECK(res.err.find("ParseError") != std::string::npos);
    CHECK(res.err.find("line 1") != std::string::npos);

    auto res2 = run({"transform", "--q", "3", "--d", "2", "--k", "1", "--indicator", "0,0;5,1"});
    CHECK(res2.code == 2);
    CHECK(res2.err.find("line 2") != std::string::npos);
}

TEST_CASE("scan emits one row per (q, method) plus a spread summary") {
    auto res = run({"scan", "--q", "2,3", "--d", "2", "--k", "1", "--vertex", "--trials", "50",
                    "--seed", "0"});
    REQUIRE(res.code == 0);
    auto rows = parse_lines(res.out);
    REQUIRE(rows.size() == 7); // 3 methods x 2 fields + summary
    for (const auto& row : rows) {
        for (const char* key : {"schema", "cmd", "q", "d", "k", "p", "r", "method", "value",
                                "witness", "exhaustive", "seed", "elapsed_ms", "config_hash",
                                "build"})
            REQUIRE(row.contains(key));
        CHECK(row["p"] == "3/2");
        CHECK(row["r"] == "3");
        CHECK(row["elapsed_ms"].get<double>() == 0.0); // deterministic default
    }
    CHECK(rows.back()["method"] == "spread");
    CHECK(rows.back()["value"].get<double>() <= 1.25);
}

TEST_CASE("scan rejects fields above the cap with exit 2") {
    auto res = run({"scan", "--q", "2,4096", "--d", "2", "--k", "1", "--trials", "5"});
    CHECK(res.code == 2);
    CHECK(res.err.find("SizeCapExceeded") != std::string::npos);
}

TEST_CASE("scan output is byte-identical across thread counts") {
    std::vector<std::string> base = {"scan", "--q",     "2,3", "--d",    "2",  "--k",
                                     "1",    "--trials", "40",  "--seed", "7"};
    auto one = base;
    one.push_back("--threads");
    one.push_back("1");
    auto eight = base;
    eight.push_back("--threads");
    eight.push_back("8");
    auto r1 = run(one);
    auto r8 = run(eight);
    REQUIRE(r1.code == 0);
    REQUIRE(r8.code == 0);
    CHECK(r1.out == r8.out);
}

TEST_CASE("csv projection carries the documented column order") {
    auto res = run({"scan", "--q", "2", "--d", "2", "--k", "1", "--trials", "10", "--format",
                    "csv"});
    REQUIRE(res.code == 0);
    std::istringstream is(res.out);
    std::string header;
    std::getline(is, header);
    CHECK(header ==
          "schema,cmd,q,d,k,p,r,method,value,witness,exhaustive,seed,elapsed_ms,config_hash,"
          "build");
    std::string row;
    std::getline(is, row);
    CHECK(row.rfind("ffradon/1,scan,2,2,1,3/2,3,", 0) == 0);
}

TEST_CASE("lemmas single-set mode reproduces the worked example") {
    auto res = run({"lemmas", "--q", "3", "--d", "2", "--set", "0,0"});
    REQUIRE(res.code == 0);
    auto rows = parse_lines(res.out);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["method"] == "lemma");
    CHECK(rows[0]["value"].get<double>() >= 0.0);
    std::string witness = rows[0]["witness"].get<std::string>();
    CHECK(witness.find("|E|=1") != std::string::npos);
    CHECK(witness.find("pass=1") != std::string::npos);
}

TEST_CASE("lemmas batch exits 0") {
    auto res = run({"lemmas", "--q", "3", "--d", "2", "--trials", "100", "--seed", "0"});
    CHECK(res.code == 0);
    CHECK(parse_lines(res.out).size() == 100);
}

TEST_CASE("incidence batch exits 0 and mc rows report stderr") {
    auto res = run({"incidence", "--q", "2,3", "--d", "2", "--trials", "25", "--seed", "0",
                    "--mc", "2000"});
    REQUIRE(res.code == 0);
    auto rows = parse_lines(res.out);
    REQUIRE(rows.size() == 100); // (exact + mc) x 25 x 2 fields
    for (const auto& row : rows) {
        if (row["method"] == "incidence") CHECK(row["value"].get<double>() == 1.0);
        if (row["method"] == "incidence-mc")
            CHECK(row["witness"].get<std::string>().find("stderr=") != std::string::npos);
    }
}

TEST_CASE("coarse sharpness grid is coherent") {
    auto res = run({"sharpness", "--q", "3,5,7", "--d", "2", "--k", "1", "--grid", "3"});
    REQUIRE(res.code == 0);
    auto rows = parse_lines(res.out);
    REQUIRE(rows.size() == 9 * 3 + 1);
    CHECK(rows.back()["method"] == "coherence");
    CHECK(rows.back()["value"].get<double>() == 0.0);
    // the outside point (1, 0) must be certified by the point-mass witness
    bool found = false;
    for (const auto& row : rows) {
        if (row["method"] == "delta" && row["p"] == "1" && row["r"] == "inf") {
            found = true;
            CHECK(row["value"].get<double>() == Catch::Approx(1.0).margin(0.01));
            CHECK(row["witness"].get<std::string>().find("hull=outside") != std::string::npos);
        }
    }
    CHECK(found);
}

TEST_CASE("sharpness needs at least three field sizes") {
    auto res = run({"sharpness", "--q", "3,5", "--d", "2", "--k", "1", "--grid", "3"});
    CHECK(res.code == 2);
    CHECK(res.err.find("TooFewPoints") != std::string::npos);
}

TEST_CASE("transform reads functions from a file with line-numbered errors") {
    {
        std::ofstream f("/tmp/ffradon_fn.txt");
        f << "# heavy point plus a line\n0,0:2.5\n1,0\n2,0\n";
    }
    auto res = run({"transform", "--q", "3", "--d", "2", "--k", "1", "--function-file",
                    "/tmp/ffradon_fn.txt"});
    REQUIRE(res.code == 0);
    auto rows = parse_lines(res.out);
    REQUIRE(rows.size() == 12);
    double top = 0;
    for (const auto& row : rows) top = std::max(top, row["value"].get<double>());
    CHECK(top == Catch::Approx((2.5 + 1 + 1) / 3.0).margin(1e-12)); // the x-axis line

    {
        std::ofstream f("/tmp/ffradon_bad.txt");
        f << "0,0:1\n\n1,zebra:2\n";
    }
    auto bad = run({"transform", "--q", "3", "--d", "2", "--k", "1", "--function-file",
                    "/tmp/ffradon_bad.txt"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("line 3") != std::string::npos);
}

TEST_CASE("scan covers the hyperplane case end to end") {
    auto res = run({"scan", "--q", "2,3", "--d", "3", "--k", "2", "--vertex", "--trials", "50",
                    "--seed", "0"});
    REQUIRE(res.code == 0);
    auto rows = parse_lines(res.out);
    REQUIRE(rows.size() == 7);
    CHECK(rows.back()["method"] == "spread");
    CHECK(rows.back()["value"].get<double>() <= 1.25);
    for (const auto& row : rows)
        if (row["method"] != "spread") CHECK(row["value"].get<double>() >= 1.0 - 1e-9);
}

TEST_CASE("timings flag populates elapsed_ms") {
    auto res = run({"lemmas", "--q", "3", "--d", "2", "--set", "0,0", "--timings"});
    REQUIRE(res.code == 0);
    auto rows = parse_lines(res.out);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["elapsed_ms"].get<double>() > 0.0);
}
