#ifndef MICSEL_IO_HPP
#define MICSEL_IO_HPP

// CSV matrices and JSON/CSV reports.

#include "micsel/harness.hpp"
#include "micsel/regression.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace micsel
{

using Json = nlohmann::ordered_json;

struct IoError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct CsvMatrix
{
    Matrix values;
    /// Column names from the header row; empty when the file has none.
    std::vector<std::string> names;
};

/// Rectangular numeric CSV. A first row with any non-numeric cell is taken as
/// the header. Ragged rows, non-numeric or non-finite cells raise IoError
/// naming the 1-based row and column.
CsvMatrix read_matrix_csv(const std::string& path);
CsvMatrix parse_matrix_csv(const std::string& text, const std::string& source = "<text>");

void write_matrix_csv(const std::string& path, const Matrix& values, const std::vector<std::string>& names = {});

/// Numbers with 17 significant digits, two-space indent, trailing newline.
/// Non-finite floats become null.
std::string dump_json(const Json& value);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/// 64-bit FNV-1a of the dumped JSON, as 16 hex digits.
std::string config_hash(const Json& params);

Json ledger_json(const SelectionLedger& ledger);
/// [feature, response, value] triples with 0-based feature (intercept excluded) and response.
Json support_json(const CoefficientMatrix& beta);
Json support_json(const HypothesisResult& result);
Json metric_report_json(const MetricReport& report);
Json experiment_json(const ExperimentResult& result);

/// One row per method, one "mean±stderr" cell per metric ("—" when undefined).
std::string experiment_csv(const ExperimentResult& result);

enum class ReportFormat
{
    json,
    csv
};

ReportFormat format_from_string(const std::string& name);

/// JSON reports are dumped as is. CSV renders report["table"] when present,
/// otherwise report["support"] as feature,response,value rows.
void write_report(const Json& report, ReportFormat format, const std::string& path);

} // namespace micsel

#endif // MICSEL_IO_HPP
