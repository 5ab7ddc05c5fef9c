#include "micsel/io.hpp"

#include "micsel/rng.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace micsel
{

namespace
{

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ','))
    {
        cells.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',')
    {
        cells.emplace_back();
    }
    return cells;
}

// Parses the whole cell as a double; nan/inf spellings parse too and are
// rejected by the caller.
bool parse_double(const std::string& cell, double& out)
{
    if (cell.empty())
        return false;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (*begin == '+')
        ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // keep floats recognizable as floats
    if (s.find_first_of(".eEn") == std::string::npos)
        s += ".0";
    return s;
}

void dump_value(const Json& v, std::string& out, int indent)
{
    const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent), ' ');
    switch (v.type())
    {
    case Json::value_t::object:
    {
        if (v.empty())
        {
            out += "{}";
            return;
        }
        out += "{\n";
        bool first = true;
        for (auto it = v.begin(); it != v.end(); ++it)
        {
            if (!first)
                out += ",\n";
            first = false;
            out += pad + Json(it.key()).dump() + ": ";
            dump_value(it.value(), out, indent + 2);
        }
        out += "\n" + close_pad + "}";
        return;
    }
    case Json::value_t::array:
    {
        if (v.empty())
        {
            out += "[]";
            return;
        }
        // short arrays of scalars stay on one line
        const bool flat = std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_primitive(); });
        if (flat)
        {
            out += "[";
            for (std::size_t i = 0; i < v.size(); ++i)
            {
                if (i)
                    out += ", ";
                dump_value(v[i], out, indent + 2);
            }
            out += "]";
            return;
        }
        out += "[\n";
        for (std::size_t i = 0; i < v.size(); ++i)
        {
            if (i)
                out += ",\n";
            out += pad;
            dump_value(v[i], out, indent + 2);
        }
        out += "\n" + close_pad + "]";
        return;
    }
    case Json::value_t::number_float:
    {
        const double d = v.get<double>();
        out += std::isfinite(d) ? format_double(d) : "null";
        return;
    }
    default:
        out += v.dump();
        return;
    }
}

Json optional_json(const std::optional<double>& v)
{
    return v ? Json(*v) : Json(nullptr);
}

std::string format_cell(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

std::string table_csv(const Json& table)
{
    // columns follow the first row's metrics
    std::vector<std::string> names;
    if (!table.empty())
        for (auto it = table.front().at("metrics").begin(); it != table.front().at("metrics").end(); ++it)
            names.push_back(it.key());
    std::string out = "method";
    for (const std::string& name : names)
        out += "," + name;
    out += "\n";
    for (const Json& row : table)
    {
        out += csv_escape(row.at("label").get<std::string>());
        for (const std::string& name : names)
        {
            const Json& metrics = row.at("metrics");
            if (!metrics.contains(name) || metrics.at(name).at("count").get<Index>() == 0)
                out += ",—";
            else
                out += "," + format_cell(metrics.at(name).at("mean").get<double>()) + "±" +
                       format_cell(metrics.at(name).at("stderr").get<double>());
        }
        out += "\n";
    }
    return out;
}

} // namespace

CsvMatrix parse_matrix_csv(const std::string& text, const std::string& source)
{
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    CsvMatrix out;
    std::size_t width = 0;
    Index line_no = 0;
    bool first = true;
    while (std::getline(in, line))
    {
        ++line_no;
        if (trim(line).empty())
            continue;
        const std::vector<std::string> cells = split_row(line);
        std::vector<double> values(cells.size());
        bool numeric = true;
        std::size_t bad = 0;
        for (std::size_t c = 0; c < cells.size(); ++c)
        {
            if (!parse_double(cells[c], values[c]))
            {
                numeric = false;
                bad = c;
                break;
            }
        }
        if (first && !numeric)
        {
            out.names = cells;
            width = cells.size();
            first = false;
            continue;
        }
        if (first)
            width = cells.size();
        first = false;
        if (cells.size() != width)
        {
            throw IoError(source + ": row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                          " columns, expected " + std::to_string(width));
        }
        if (!numeric)
        {
            throw IoError(source + ": non-numeric cell '" + cells[bad] + "' at row " + std::to_string(line_no) +
                          ", column " + std::to_string(bad + 1));
        }
        for (std::size_t c = 0; c < values.size(); ++c)
        {
            if (!std::isfinite(values[c]))
            {
                throw IoError(source + ": non-finite value '" + cells[c] + "' at row " + std::to_string(line_no) +
                              ", column " + std::to_string(c + 1));
            }
        }
        rows.push_back(std::move(values));
    }
    if (rows.empty())
    {
        throw IoError(source + ": no data rows");
    }
    out.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t c = 0; c < width; ++c)
            out.values(Index(i), Index(c)) = rows[i][c];
    return out;
}

CsvMatrix read_matrix_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw IoError("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_matrix_csv(buf.str(), path);
}

void write_matrix_csv(const std::string& path, const Matrix& values, const std::vector<std::string>& names)
{
    std::string out;
    if (!names.empty())
    {
        for (std::size_t c = 0; c < names.size(); ++c)
            out += (c ? "," : "") + csv_escape(names[c]);
        out += "\n";
    }
    char buf[40];
    for (Index i = 0; i < values.rows(); ++i)
    {
        for (Index j = 0; j < values.cols(); ++j)
        {
            std::snprintf(buf, sizeof buf, "%.17g", values(i, j));
            if (j)
                out += ",";
            out += buf;
        }
        out += "\n";
    }
    write_text_file(path, out);
}

std::string dump_json(const Json& value)
{
    std::string out;
    dump_value(value, out, 0);
    out += "\n";
    return out;
}

Json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw IoError("cannot open '" + path + "'");
    }
    try
    {
        return Json::parse(in);
    }
    catch (const Json::parse_error& e)
    {
        throw IoError(path + ": " + e.what());
    }
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw IoError("cannot write '" + path + "'");
    }
    out << text;
    if (!out)
    {
        throw IoError("write to '" + path + "' failed");
    }
}

std::string config_hash(const Json& params)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(dump_json(params))));
    return buf;
}

Json ledger_json(const SelectionLedger& ledger)
{
    Json steps = Json::array();
    for (const LedgerStep& s : ledger.steps)
    {
        Json responses = Json::array();
        for (Index r : s.responses)
            responses.push_back(r);
        steps.push_back(Json{{"feature", s.feature - 1},
                             {"responses", responses},
                             {"dl_before", s.dl_before},
                             {"dl_after", s.dl_after},
                             {"residual_before", s.residual_before},
                             {"residual_after", s.residual_after},
                             {"model_before", s.model_before},
                             {"model_after", s.model_after}});
    }
    return steps;
}

Json support_json(const CoefficientMatrix& beta)
{
    Json out = Json::array();
    for (const auto& e : beta.support())
    {
        out.push_back(Json::array({e.feature - 1, e.response, e.value}));
    }
    return out;
}

Json support_json(const HypothesisResult& result)
{
    Json out = Json::array();
    for (const auto& [j, r] : result.support)
    {
        out.push_back(Json::array({j - 1, r}));
    }
    return out;
}

Json metric_report_json(const MetricReport& report)
{
    Json per_response = Json::array();
    for (std::size_t r = 0; r < report.response_precision.size(); ++r)
    {
        Json row{{"precision", optional_json(report.response_precision[r])},
                 {"recall", optional_json(report.response_recall[r])}};
        if (r < report.test_error.size())
            row["test_error"] = report.test_error[r];
        per_response.push_back(row);
    }
    return Json{{"coeff_precision", optional_json(report.coeff_precision)},
                {"coeff_recall", report.coeff_recall},
                {"feat_precision", optional_json(report.feat_precision)},
                {"feat_recall", report.feat_recall},
                {"n_coeff_selected", report.n_coeff_selected},
                {"n_feat_selected", report.n_feat_selected},
                {"per_response", per_response}};
}

Json experiment_json(const ExperimentResult& result)
{
    Json methods = Json::array();
    for (const MethodRun& run : result.runs)
    {
        Json metrics = Json::object();
        for (const std::string& name : metric_names())
        {
            if (!run.metrics.count(name))
                continue;
            const Aggregate& a = run.metrics.at(name);
            metrics[name] = Json{{"mean", a.count ? Json(a.mean) : Json(nullptr)},
                                 {"stderr", a.count ? Json(a.stderr_) : Json(nullptr)},
                                 {"count", a.count},
                                 {"missing", a.missing}};
        }
        methods.push_back(Json{{"label", run.label}, {"metrics", metrics}, {"failures", run.failures}});
    }
    return methods;
}

std::string experiment_csv(const ExperimentResult& result)
{
    return table_csv(experiment_json(result));
}

ReportFormat format_from_string(const std::string& name)
{
    if (name == "json")
        return ReportFormat::json;
    if (name == "csv")
        return ReportFormat::csv;
    throw DomainError("unknown report format '" + name + "' (expected json or csv)");
}

void write_report(const Json& report, ReportFormat format, const std::string& path)
{
    if (format == ReportFormat::json)
    {
        write_text_file(path, dump_json(report));
        return;
    }
    if (report.contains("table"))
    {
        write_text_file(path, table_csv(report.at("table")));
        return;
    }
    std::string out = "feature,response,value\n";
    if (report.contains("support"))
    {
        for (const Json& t : report.at("support"))
        {
            out += t.at(0).dump() + "," + t.at(1).dump();
            out += t.size() > 2 ? "," + format_double(t.at(2).get<double>()) : ",";
            out += "\n";
        }
    }
    write_text_file(path, out);
}

} // namespace micsel
