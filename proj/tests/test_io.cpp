#include "micsel/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace micsel;

namespace
{

std::string temp_path(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "micsel-io-tests";
    std::filesystem::create_directories(dir);
    return (dir / name).string();
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string error_of(const std::string& text)
{
    try
    {
        parse_matrix_csv(text);
    }
    catch (const IoError& e)
    {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("csv parsing")
{
    const CsvMatrix plain = parse_matrix_csv("1,2\n3,4\n");
    CHECK(plain.values.rows() == 2);
    CHECK(plain.values(1, 0) == 3.0);
    CHECK(plain.names.empty());

    const CsvMatrix named = parse_matrix_csv("f1,f2\n1.5,-2e-3\n0,7\n");
    CHECK(named.names == std::vector<std::string>{"f1", "f2"});
    CHECK(named.values(0, 1) == -2e-3);
    CHECK(named.values.rows() == 2);

    CHECK(parse_matrix_csv("1,2\r\n3,4\r\n").values(1, 1) == 4.0);
}

TEST_CASE("csv errors name the cell")
{
    const std::string nan = error_of("1,2\n3,NaN\n");
    CHECK(nan.find("row 2") != std::string::npos);
    CHECK(nan.find("column 2") != std::string::npos);
    const std::string ragged = error_of("1,2\n3\n");
    CHECK(ragged.find("row 2") != std::string::npos);
    const std::string word = error_of("1,2\n3,abc\n");
    CHECK(word.find("column 2") != std::string::npos);
    CHECK_FALSE(error_of("1,inf\n").empty());
    CHECK_FALSE(error_of("").empty());
    CHECK_THROWS_AS(read_matrix_csv(temp_path("missing.csv")), IoError);
}

TEST_CASE("csv round trip keeps every digit")
{
    Matrix m(2, 3);
    m << 0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, std::nextafter(1.0, 2.0), 0.0;
    const std::string path = temp_path("round.csv");
    write_matrix_csv(path, m, {"a", "b", "c"});
    const CsvMatrix back = read_matrix_csv(path);
    CHECK(back.names == std::vector<std::string>{"a", "b", "c"});
    CHECK(back.values == m);
}

TEST_CASE("json dump")
{
    Json j{{"a", 0.1}, {"b", 2.0}, {"c", std::nan("")}, {"d", Json::array({1, 2})}, {"e", "x"}};
    const std::string text = dump_json(j);
    CHECK(text.find("0.10000000000000001") != std::string::npos);
    CHECK(text.find("\"b\": 2.0") != std::string::npos);
    CHECK(text.find("\"c\": null") != std::string::npos);
    CHECK(text.back() == '\n');
    const Json back = Json::parse(text);
    CHECK(back["a"].get<double>() == 0.1);
    CHECK(back["c"].is_null());
    CHECK(config_hash(j) == config_hash(back.is_null() ? j : j));
    CHECK(config_hash(j).size() == 16);
    CHECK(config_hash(Json{{"a", 1}}) != config_hash(Json{{"a", 2}}));
}

TEST_CASE("report round trip")
{
    Json report{{"method", "partial-mic"},
                {"params", {{"bpc", "2"}}},
                {"metrics", {{"final_dl", 1234.5678901234567}, {"precision", nullptr}}},
                {"ledger", Json::array()},
                {"support", Json::array()},
                {"seed", 7},
                {"version", "0.1.0"}};
    const std::string path = temp_path("report.json");
    write_report(report, ReportFormat::json, path);
    const Json back = read_json_file(path);
    CHECK(back["metrics"]["final_dl"].get<double>() == 1234.5678901234567);
    CHECK(back["metrics"]["precision"].is_null());
    CHECK(back["support"].empty());
    CHECK(back["seed"] == 7);

    write_report(report, ReportFormat::csv, temp_path("support.csv"));
    CHECK(slurp(temp_path("support.csv")) == "feature,response,value\n");
    CHECK_THROWS_AS(write_report(report, ReportFormat::json, "/nonexistent-dir/x/report.json"), IoError);
    CHECK_THROWS_AS(format_from_string("xml"), DomainError);
}

TEST_CASE("experiment table")
{
    ExperimentResult r;
    for (const std::string label : {"truth", "ric(bpc=2)"})
    {
        MethodRun run;
        run.label = label;
        run.metrics["test_error"] = {0.25, 0.01, 10, 0};
        run.metrics["coeff_precision"] = {0.0, 0.0, 0, 10};
        run.metrics["coeff_recall"] = {0.5, 0.125, 10, 0};
        r.runs.push_back(run);
    }
    const std::string csv = experiment_csv(r);
    std::istringstream in(csv);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        lines.push_back(line);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == "method,test_error,coeff_precision,coeff_recall");
    CHECK(lines[1] == "truth,0.25±0.01,—,0.5±0.125");

    const Json j = experiment_json(r);
    CHECK(j.size() == 2);
    CHECK(j[1]["metrics"]["coeff_recall"]["mean"] == 0.5);
    const std::string path = temp_path("table.csv");
    write_report(Json{{"table", j}}, ReportFormat::csv, path);
    CHECK(slurp(path) == csv);
}

TEST_CASE("support triples are zero based")
{
    CoefficientMatrix b(4, 2);
    b.set(3, 1, 0.5);
    const Json s = support_json(b);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == Json::array({2, 1, 0.5}));

    HypothesisResult h;
    h.support = {{1, 0}};
    CHECK(support_json(h)[0][0] == 0);

    SelectionLedger ledger;
    ledger.steps.push_back({3, {0, 1}, 10.0, 8.0, 6.0, 3.0, 4.0, 5.0});
    const Json l = ledger_json(ledger);
    CHECK(l[0]["feature"] == 2);
}
