#ifndef MICSEL_CLI_HPP
#define MICSEL_CLI_HPP

// Command-line front end. Values are merged with precedence
// command-line flag > MICSEL_* environment variable > JSON config file > default.

#include "micsel/harness.hpp"
#include "micsel/io.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace micsel
{

/// Bad invocation; the process exits with status 2.
struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

enum class Command
{
    select,
    test,
    generate,
    experiment,
    sweep
};

std::string to_string(Command c);

struct RunConfig
{
    Command command = Command::select;
    std::string x_path;
    std::string y_path;
    std::string out_path;
    ReportFormat format = ReportFormat::json;

    SchemeKind scheme = SchemeKind::partial_mic;
    double bpc = 2.0;
    CovSpec cov;
    Index top_t = 75;
    std::optional<Index> max_steps;
    bool prefilter = true;
    bool short_circuit = true;
    bool standardize = false;

    /// Method of `test`, reference of `sweep`.
    MethodSpec method;
    double alpha = 0.05;

    // generators
    std::string generator = "scenario";
    ScenarioSpec scenario;
    YeastSimSpec yeast;
    std::string x_source;
    std::string y_source;
    std::string cov_source;

    // experiments
    std::vector<MethodSpec> methods;
    int replicates = 5;
    std::optional<Index> test_size;
    TaskKind task = TaskKind::regression;
    MethodSpec sweep_method;
    std::vector<double> grid;

    std::uint64_t seed = 1;
    int threads = 0;

    /// Every resolved key and its final value, in table order.
    Json params;
};

/// Parses argv (argv[0] is the program name) against the environment map.
/// Throws UsageError on unknown keys, bad values or missing files; help output
/// is signalled by UsageError too, with the usage text as its message.
RunConfig parse_and_validate(const std::vector<std::string>& args, const std::map<std::string, std::string>& env);

/// Environment variables carrying the MICSEL_ prefix.
std::map<std::string, std::string> micsel_environment();

/// Usage text listing commands, options and environment overrides.
std::string usage_text();

/// Executes a validated configuration; returns the report that was written.
Json run_command(const RunConfig& config, std::ostream& out);

/// Full program: parse, run, map failures to exit codes (0 ok, 2 usage, 1 runtime).
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Parses "name" or "name:param" into a method spec.
MethodSpec parse_method(const std::string& text);

} // namespace micsel

#endif // MICSEL_CLI_HPP
