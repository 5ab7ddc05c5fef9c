#include "micsel/cli.hpp"

#include "micsel/kernels.hpp"
#include "micsel/synthgen.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

extern char** environ;

#ifndef MICSEL_VERSION
#define MICSEL_VERSION "0.0.0"
#endif

namespace micsel
{

namespace
{

struct Key
{
    std::string name;
    std::string fallback;
    std::string help;
    bool flag = false;
};

// Every configurable key, in the order reports list them.
const std::vector<Key>& keys()
{
    static const std::vector<Key> table{
        {"x", "", "feature matrix CSV, one column per feature, no intercept column"},
        {"y", "", "response matrix CSV, one column per response"},
        {"out", "", "output file (directory for generate); stdout when empty"},
        {"format", "json", "report format: json or csv"},
        {"scheme", "partial-mic", "coding scheme for select: partial-mic, full-mic or ric"},
        {"bpc", "2", "bits per coefficient"},
        {"cov", "diagonal", "noise covariance: diagonal, full or shrunken"},
        {"lambda", "0.5", "diagonal weight of the shrunken covariance, in [0, 1]"},
        {"top-t", "75", "features kept for the response-subset search"},
        {"max-steps", "", "cap on features per response (default min(n/2, m))"},
        {"prefilter", "true", "rank features and keep top-t before the subset search"},
        {"short-circuit", "true", "skip subset sizes that a lower bound rules out"},
        {"standardize", "false", "scale feature columns to mean 0, sd 1 before selection", true},
        {"method", "", "test procedure, or reference method of sweep (name or name:param)"},
        {"alpha", "0.05", "significance level for p-value procedures"},
        {"generator", "scenario", "data generator: scenario or yeast"},
        {"scenario", "partial", "scenario kind: partial, full or independent"},
        {"m", "", "number of features (scenario 2000, yeast 526)"},
        {"h", "20", "number of responses"},
        {"n", "100", "training observations"},
        {"n-test", "10000", "test observations"},
        {"k", "4", "nonzero features per response in scenarios"},
        {"noise-var", "", "noise variance (scenario 0.1, yeast 0.0004)"},
        {"f", "0.05", "yeast: probability that a row has nonzeros"},
        {"a", "1.3", "yeast: Poisson rate of nonzeros per active row"},
        {"mu-beta", "-0.12", "yeast: mean of nonzero coefficients"},
        {"sigma-beta", "0.2", "yeast: sd of nonzero coefficients"},
        {"cov-variant", "diag", "yeast: diag, half, full or original_x"},
        {"target-nonzeros", "33", "yeast: target number of nonzero coefficients"},
        {"x-source", "", "yeast: CSV of source features"},
        {"y-source", "", "yeast: CSV of source responses (sets the noise variances)"},
        {"cov-source", "", "yeast: CSV of an m x m feature covariance"},
        {"methods", "truth,partial-mic,full-mic,ric", "experiment methods, comma separated, name or name:param"},
        {"replicates", "5", "experiment replicates"},
        {"test-size", "", "override the generator's test size"},
        {"task", "regression", "experiment task: regression or classification"},
        {"sweep-method", "bonferroni", "method whose parameter is swept"},
        {"grid", "", "comma-separated sweep parameter values"},
        {"seed", "1", "seed for all randomness"},
        {"threads", "0", "OpenMP worker threads (0 = runtime default)"},
    };
    return table;
}

bool known_key(const std::string& name)
{
    return std::any_of(keys().begin(), keys().end(), [&](const Key& k) { return k.name == name; });
}

std::string env_name(const std::string& key)
{
    std::string out = "MICSEL_";
    for (char c : key)
        out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string json_scalar_text(const Json& v, const std::string& key)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_boolean())
        return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer() || v.is_number_unsigned())
        return v.dump();
    if (v.is_number_float())
    {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    if (v.is_array())
    {
        std::string out;
        for (std::size_t i = 0; i < v.size(); ++i)
        {
            if (i)
                out += ",";
            out += json_scalar_text(v[i], key);
        }
        return out;
    }
    throw UsageError("config key '" + key + "' must be a string, number, boolean or array");
}

class Values
{
public:
    explicit Values(std::map<std::string, std::string> v) : v_(std::move(v)) {}

    const std::string& str(const std::string& key) const { return v_.at(key); }
    bool empty(const std::string& key) const { return v_.at(key).empty(); }

    double real(const std::string& key) const
    {
        const std::string& s = str(key);
        try
        {
            std::size_t used = 0;
            const double d = std::stod(s, &used);
            if (used != s.size() || !std::isfinite(d))
                throw std::invalid_argument(s);
            return d;
        }
        catch (const std::exception&)
        {
            throw UsageError("invalid value '" + s + "' for key '" + key + "': expected a finite number");
        }
    }

    std::int64_t integer(const std::string& key) const
    {
        const std::string& s = str(key);
        try
        {
            std::size_t used = 0;
            const long long v = std::stoll(s, &used);
            if (used != s.size())
                throw std::invalid_argument(s);
            return v;
        }
        catch (const std::exception&)
        {
            throw UsageError("invalid value '" + s + "' for key '" + key + "': expected an integer");
        }
    }

    std::uint64_t unsigned_integer(const std::string& key) const
    {
        const std::string& s = str(key);
        try
        {
            std::size_t used = 0;
            if (!s.empty() && s[0] == '-')
                throw std::invalid_argument(s);
            const unsigned long long v = std::stoull(s, &used);
            if (used != s.size())
                throw std::invalid_argument(s);
            return v;
        }
        catch (const std::exception&)
        {
            throw UsageError("invalid value '" + s + "' for key '" + key + "': expected a nonnegative integer");
        }
    }

    bool boolean(const std::string& key) const
    {
        const std::string& s = str(key);
        if (s == "true" || s == "1" || s == "yes" || s == "on")
            return true;
        if (s == "false" || s == "0" || s == "no" || s == "off")
            return false;
        throw UsageError("invalid value '" + s + "' for key '" + key + "': expected true or false");
    }

    std::int64_t at_least(const std::string& key, std::int64_t lo) const
    {
        const std::int64_t v = integer(key);
        if (v < lo)
            throw UsageError("key '" + key + "' must be at least " + std::to_string(lo) + ", got " + str(key));
        return v;
    }

    double positive(const std::string& key) const
    {
        const double v = real(key);
        if (!(v > 0.0))
            throw UsageError("key '" + key + "' must be positive, got " + str(key));
        return v;
    }

    template <class F>
    auto parsed(const std::string& key, F&& f) const
    {
        try
        {
            return f(str(key));
        }
        catch (const DomainError& e)
        {
            throw UsageError("invalid value for key '" + key + "': " + e.what());
        }
    }

private:
    std::map<std::string, std::string> v_;
};

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ','))
    {
        const auto b = item.find_first_not_of(' ');
        const auto e = item.find_last_not_of(' ');
        if (b != std::string::npos)
            out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

void require_file(const Values& v, const std::string& key)
{
    if (v.empty(key))
        throw UsageError("key '" + key + "' is required for this command");
    if (!std::filesystem::is_regular_file(v.str(key)))
        throw UsageError("key '" + key + "': file '" + v.str(key) + "' does not exist");
}

void optional_file(const Values& v, const std::string& key)
{
    if (!v.empty(key) && !std::filesystem::is_regular_file(v.str(key)))
        throw UsageError("key '" + key + "': file '" + v.str(key) + "' does not exist");
}

Command command_from_string(const std::string& s)
{
    for (Command c : {Command::select, Command::test, Command::generate, Command::experiment, Command::sweep})
        if (to_string(c) == s)
            return c;
    throw UsageError("unknown command '" + s + "'");
}

Matrix standardized(const Matrix& x)
{
    Matrix out = x;
    for (Index j = 0; j < x.cols(); ++j)
    {
        const double mean = x.col(j).mean();
        const double sd = std::sqrt((x.col(j).array() - mean).square().sum() / double(std::max<Index>(1, x.rows() - 1)));
        if (sd > 0.0)
            out.col(j) = (x.col(j).array() - mean) / sd;
    }
    return out;
}

Matrix design_of(const Matrix& raw)
{
    Matrix x(raw.rows(), raw.cols() + 1);
    x.col(0).setOnes();
    x.rightCols(raw.cols()) = raw;
    return x;
}

Json base_report(const RunConfig& c, const std::string& method)
{
    return Json{{"method", method},
                {"params", c.params},
                {"metrics", Json::object()},
                {"ledger", Json::array()},
                {"support", Json::array()},
                {"seed", c.seed},
                {"config_hash", config_hash(c.params)},
                {"version", MICSEL_VERSION}};
}

void emit(const Json& report, const RunConfig& c, std::ostream& out)
{
    if (!c.out_path.empty())
    {
        write_report(report, c.format, c.out_path);
        return;
    }
    if (c.format == ReportFormat::json)
    {
        out << dump_json(report);
        return;
    }
    const auto tmp = std::filesystem::temp_directory_path() / ("micsel-" + config_hash(c.params) + ".csv");
    write_report(report, c.format, tmp.string());
    std::ifstream in(tmp);
    out << in.rdbuf();
    std::filesystem::remove(tmp);
}

std::pair<Matrix, Matrix> load_xy(const RunConfig& c)
{
    Matrix x = read_matrix_csv(c.x_path).values;
    Matrix y = read_matrix_csv(c.y_path).values;
    if (x.rows() != y.rows())
        throw IoError("X has " + std::to_string(x.rows()) + " rows but Y has " + std::to_string(y.rows()));
    if (c.standardize)
        x = standardized(x);
    return {design_of(x), y};
}

ExperimentPlan plan_of(const RunConfig& c)
{
    ExperimentPlan plan;
    if (c.generator == "scenario")
    {
        plan.generator = c.scenario;
    }
    else
    {
        YeastPlan y;
        y.spec = c.yeast;
        if (!c.x_source.empty())
            y.sources.x = read_matrix_csv(c.x_source).values;
        if (!c.y_source.empty())
            y.sources.y = read_matrix_csv(c.y_source).values;
        if (!c.cov_source.empty())
            y.sources.cov = read_matrix_csv(c.cov_source).values;
        plan.generator = std::move(y);
    }
    plan.methods = c.methods;
    plan.replicates = c.replicates;
    plan.test_size = c.test_size;
    plan.task = c.task;
    plan.seed = c.seed;
    return plan;
}

Json run_select(const RunConfig& c)
{
    const auto [x, y] = load_xy(c);
    SearchConfig sc;
    sc.scheme.kind = c.scheme;
    sc.scheme.bits_per_coefficient = c.bpc;
    sc.scheme.m = x.cols() - 1;
    sc.scheme.h = y.cols();
    sc.cov = c.cov;
    sc.top_t = c.top_t;
    sc.max_steps = c.max_steps;
    sc.prefilter = c.prefilter;
    sc.short_circuit = c.short_circuit;
    const Selection sel = stepwise_select(x, y, sc);

    Json report = base_report(c, to_string(c.scheme));
    report["metrics"] = Json{{"final_dl", sel.ledger.final_dl},
                             {"n_coeff_selected", sel.beta.support_size()},
                             {"n_feat_selected", sel.beta.selected_features().size()},
                             {"steps", sel.ledger.steps.size()},
                             {"evaluations", sel.ledger.stats.evaluations},
                             {"bound_skips", sel.ledger.stats.bound_skips},
                             {"prefiltered", sel.ledger.stats.prefiltered}};
    report["ledger"] = ledger_json(sel.ledger);
    report["notes"] = sel.ledger.notes;
    report["support"] = support_json(sel.beta);
    return report;
}

Json run_test(const RunConfig& c)
{
    const auto [x, y] = load_xy(c);
    const Index m = x.cols() - 1;
    const PValueMatrix p = pvalue_matrix(x, y);
    CodingScheme scheme;
    scheme.kind = c.scheme == SchemeKind::ric ? SchemeKind::partial_mic : c.scheme;
    scheme.bits_per_coefficient = c.bpc;
    scheme.m = m;
    scheme.h = y.cols();
    HypothesisResult result;
    const double alpha = c.method.param.value_or(c.alpha);
    switch (c.method.kind)
    {
    case MethodKind::bonferroni:
        result = bonferroni_select(p, alpha);
        break;
    case MethodKind::bonferroni_matrix:
        result = bonferroni_matrix_select(p, alpha);
        break;
    case MethodKind::bh:
        result = bh_select(p, alpha, false);
        break;
    case MethodKind::bh_matrix:
        result = bh_select(p, alpha, true);
        break;
    case MethodKind::bonf_mic:
        result = bonferroni_mic(x, y, scheme, c.cov);
        break;
    case MethodKind::bh_mic:
        result = bh_mic(x, y, scheme, c.cov);
        break;
    default:
        throw UsageError("key 'method': '" + to_string(c.method.kind) + "' is not a hypothesis test");
    }
    Json report = base_report(c, result.procedure);
    Json support = Json::array();
    for (const auto& [j, r] : result.support)
        support.push_back(Json::array({j - 1, r, p.p(j - 1, r)}));
    report["support"] = support;
    report["metrics"] = Json{{"n_coeff_selected", result.support.size()},
                             {"n_feat_selected", result.selected_features().size()}};
    if (result.q_star)
        report["metrics"]["q_star"] = *result.q_star;
    if (!result.scores.empty())
        report["metrics"]["scores"] = result.scores;
    Json constant = Json::array();
    for (Index j : p.constant_features)
        constant.push_back(j - 1);
    report["constant_features"] = constant;
    return report;
}

Json run_generate(const RunConfig& c)
{
    SyntheticInstance inst;
    if (c.generator == "scenario")
    {
        inst = gen_scenario(c.scenario);
    }
    else
    {
        YeastSources src;
        if (!c.x_source.empty())
            src.x = read_matrix_csv(c.x_source).values;
        if (!c.y_source.empty())
            src.y = read_matrix_csv(c.y_source).values;
        if (!c.cov_source.empty())
            src.cov = read_matrix_csv(c.cov_source).values;
        inst = gen_yeast_sim(c.yeast, src);
    }
    Json report = base_report(c, "generate-" + c.generator);
    report["support"] = support_json(inst.beta_true);
    report["metrics"] = Json{{"n", inst.x_train.rows()},
                             {"n_test", inst.x_test.rows()},
                             {"m", inst.x_train.cols() - 1},
                             {"h", inst.y_train.cols()},
                             {"nonzeros", inst.beta_true.support_size()}};
    if (!c.out_path.empty())
    {
        const std::filesystem::path dir(c.out_path);
        std::filesystem::create_directories(dir);
        const Index m = inst.x_train.cols() - 1;
        write_matrix_csv((dir / "x_train.csv").string(), inst.x_train.rightCols(m));
        write_matrix_csv((dir / "y_train.csv").string(), inst.y_train);
        write_matrix_csv((dir / "x_test.csv").string(), inst.x_test.rightCols(m));
        write_matrix_csv((dir / "y_test.csv").string(), inst.y_test);
        write_report(report, ReportFormat::csv, (dir / "beta_true.csv").string());
        write_report(report, ReportFormat::json, (dir / "report.json").string());
    }
    return report;
}

Json run_experiment_command(const RunConfig& c)
{
    const ExperimentResult result = run_experiment(plan_of(c));
    Json report = base_report(c, "experiment");
    report["metrics"] = Json{{"replicates", c.replicates}, {"methods", c.methods.size()}};
    report["table"] = experiment_json(result);
    report["replicate_seeds"] = result.replicate_seeds;
    return report;
}

Json run_sweep(const RunConfig& c)
{
    const SweepResult s = precision_matched_sweep(plan_of(c), c.method, c.sweep_method, c.grid);
    Json report = base_report(c, "sweep");
    Json precisions = Json::array();
    for (const auto& p : s.precisions)
        precisions.push_back(p ? Json(*p) : Json(nullptr));
    report["metrics"] = Json{{"chosen", s.chosen},
                             {"chosen_precision", s.chosen_precision ? Json(*s.chosen_precision) : Json(nullptr)},
                             {"reference_precision",
                              s.reference_precision ? Json(*s.reference_precision) : Json(nullptr)},
                             {"flagged", s.flagged},
                             {"grid", s.grid},
                             {"precisions", precisions}};
    report["table"] = experiment_json(s.experiment);
    report["replicate_seeds"] = s.experiment.replicate_seeds;
    return report;
}

} // namespace

std::string to_string(Command c)
{
    switch (c)
    {
    case Command::select:
        return "select";
    case Command::test:
        return "test";
    case Command::generate:
        return "generate";
    case Command::experiment:
        return "experiment";
    case Command::sweep:
        return "sweep";
    }
    return "?";
}

MethodSpec parse_method(const std::string& text)
{
    MethodSpec m;
    const auto colon = text.find(':');
    m.kind = method_from_string(text.substr(0, colon));
    if (colon != std::string::npos)
    {
        const std::string p = text.substr(colon + 1);
        try
        {
            std::size_t used = 0;
            m.param = std::stod(p, &used);
            if (used != p.size())
                throw std::invalid_argument(p);
        }
        catch (const std::invalid_argument&)
        {
            throw DomainError("method parameter '" + p + "' is not a number");
        }
    }
    return m;
}

std::string usage_text()
{
    std::ostringstream os;
    os << "usage: micsel <command> [options]\n\n"
       << "commands:\n"
       << "  select      stepwise description-length feature selection on --x/--y\n"
       << "  test        multiple-testing selection (--method bonferroni, bh, bonferroni-matrix,\n"
       << "              bh-matrix, bonf-mic, bh-mic) on --x/--y\n"
       << "  generate    write a synthetic instance to the --out directory\n"
       << "  experiment  run --methods on --replicates generated instances\n"
       << "  sweep       pick the --sweep-method parameter from --grid whose precision\n"
       << "              matches the reference --method\n\n"
       << "options (each also settable as MICSEL_<NAME> in the environment, with dashes\n"
       << "as underscores, or as a key of the JSON object given by --config; precedence\n"
       << "is flag > environment > config file > default):\n";
    for (const Key& k : keys())
    {
        std::string left = "  --" + k.name;
        if (left.size() < 22)
            left.resize(22, ' ');
        else
            left += " ";
        os << left << k.help;
        if (!k.fallback.empty())
            os << " [" << k.fallback << "]";
        os << "\n";
    }
    os << "  --config, --plan    JSON config file\n"
       << "  --help              this text\n\n"
       << "exit status: 0 success, 2 usage error, 1 runtime error\n";
    return os.str();
}

std::map<std::string, std::string> micsel_environment()
{
    std::map<std::string, std::string> out;
    for (char** e = environ; e && *e; ++e)
    {
        const std::string entry(*e);
        if (entry.rfind("MICSEL_", 0) != 0)
            continue;
        const auto eq = entry.find('=');
        if (eq != std::string::npos)
            out[entry.substr(0, eq)] = entry.substr(eq + 1);
    }
    return out;
}

RunConfig parse_and_validate(const std::vector<std::string>& args, const std::map<std::string, std::string>& env)
{
    if (args.size() <= 1)
        throw UsageError(usage_text());

    CLI::App app{"micsel", "micsel"};
    app.set_help_flag();
    app.allow_extras(false);
    std::string command;
    app.add_option("command", command)->required();
    bool help = false;
    app.add_flag("--help", help);
    std::string config_path;
    auto* config_opt = app.add_option("--config,--plan", config_path);
    std::map<std::string, std::string> given;
    std::map<std::string, CLI::Option*> options;
    for (const Key& k : keys())
    {
        if (k.flag)
        {
            options[k.name] = app.add_flag("--" + k.name);
        }
        else
        {
            std::string names = "--" + k.name;
            if (k.name == "x" || k.name == "y")
                names += ",--" + std::string(1, static_cast<char>(std::toupper(k.name[0])));
            options[k.name] = app.add_option(names, given[k.name]);
        }
    }

    std::vector<std::string> rest(args.begin() + 1, args.end());
    std::reverse(rest.begin(), rest.end());
    try
    {
        app.parse(rest);
    }
    catch (const CLI::ParseError& e)
    {
        if (help)
            throw UsageError(usage_text());
        throw UsageError(std::string(e.what()) + "\n\n" + usage_text());
    }
    if (help)
        throw UsageError(usage_text());

    RunConfig c;
    c.command = command_from_string(command);

    // defaults, then config file, then environment, then flags
    std::map<std::string, std::string> merged;
    for (const Key& k : keys())
        merged[k.name] = k.fallback;

    std::string cfg = config_opt->count() ? config_path : "";
    if (cfg.empty() && env.count("MICSEL_CONFIG"))
        cfg = env.at("MICSEL_CONFIG");
    if (!cfg.empty())
    {
        if (!std::filesystem::is_regular_file(cfg))
            throw UsageError("key 'config': file '" + cfg + "' does not exist");
        Json file;
        try
        {
            file = read_json_file(cfg);
        }
        catch (const IoError& e)
        {
            throw UsageError(std::string("key 'config': ") + e.what());
        }
        if (!file.is_object())
            throw UsageError("key 'config': file must hold a JSON object");
        for (auto it = file.begin(); it != file.end(); ++it)
        {
            std::string key = it.key();
            std::replace(key.begin(), key.end(), '_', '-');
            if (!known_key(key))
                throw UsageError("unknown config key '" + it.key() + "' in " + cfg);
            merged[key] = json_scalar_text(it.value(), it.key());
        }
    }
    for (const auto& [name, value] : env)
    {
        if (name == "MICSEL_CONFIG")
            continue;
        bool found = false;
        for (const Key& k : keys())
        {
            if (env_name(k.name) == name)
            {
                merged[k.name] = value;
                found = true;
            }
        }
        if (!found)
            throw UsageError("unknown environment variable '" + name + "'");
    }
    for (const Key& k : keys())
    {
        if (options[k.name]->count() > 0)
            merged[k.name] = k.flag ? "true" : given[k.name];
    }

    const Values v(merged);
    const bool yeast = v.str("generator") == "yeast";
    if (v.str("generator") != "scenario" && !yeast)
        throw UsageError("invalid value '" + v.str("generator") + "' for key 'generator': expected scenario or yeast");
    c.generator = v.str("generator");

    c.x_path = v.str("x");
    c.y_path = v.str("y");
    c.out_path = v.str("out");
    c.format = v.parsed("format", format_from_string);
    c.scheme = v.parsed("scheme", scheme_from_string);
    c.bpc = v.real("bpc");
    if (c.bpc < 0.0)
        throw UsageError("key 'bpc' must be nonnegative, got " + v.str("bpc"));
    const double lambda = v.real("lambda");
    c.cov = v.parsed("cov", [&](const std::string& s) { return cov_from_string(s, lambda); });
    c.top_t = v.at_least("top-t", 1);
    if (!v.empty("max-steps"))
        c.max_steps = v.at_least("max-steps", 1);
    c.prefilter = v.boolean("prefilter");
    c.short_circuit = v.boolean("short-circuit");
    c.standardize = v.boolean("standardize");
    c.alpha = v.positive("alpha");
    c.seed = v.unsigned_integer("seed");
    c.threads = static_cast<int>(v.at_least("threads", 0));

    c.scenario.kind = v.parsed("scenario", scenario_from_string);
    c.scenario.m = v.empty("m") ? 2000 : v.at_least("m", 2);
    c.scenario.h = v.at_least("h", 1);
    c.scenario.n = v.at_least("n", 3);
    c.scenario.n_test = v.at_least("n-test", 1);
    c.scenario.k_per_response = v.at_least("k", 1);
    c.scenario.noise_var = v.empty("noise-var") ? 0.1 : v.positive("noise-var");
    c.scenario.seed = c.seed;

    c.yeast.m = v.empty("m") ? 526 : v.at_least("m", 1);
    c.yeast.h = c.scenario.h;
    c.yeast.n = c.scenario.n;
    c.yeast.n_test = c.scenario.n_test;
    c.yeast.f = v.real("f");
    c.yeast.a = v.positive("a");
    c.yeast.mu_beta = v.real("mu-beta");
    c.yeast.sigma_beta = v.real("sigma-beta");
    c.yeast.cov_variant = v.parsed("cov-variant", cov_variant_from_string);
    c.yeast.target_nonzeros = v.at_least("target-nonzeros", 1);
    c.yeast.noise_var = v.empty("noise-var") ? 4e-4 : v.positive("noise-var");
    c.yeast.seed = c.seed;
    c.x_source = v.str("x-source");
    c.y_source = v.str("y-source");
    c.cov_source = v.str("cov-source");

    auto method_list = [&](const std::string& key) {
        std::vector<MethodSpec> out;
        for (const std::string& item : split_list(v.str(key)))
        {
            MethodSpec m = v.parsed(key, [&](const std::string&) { return parse_method(item); });
            m.cov = c.cov;
            m.top_t = c.top_t;
            try
            {
                m.validate();
            }
            catch (const DomainError& e)
            {
                throw UsageError("invalid value for key '" + key + "': " + e.what());
            }
            out.push_back(m);
        }
        return out;
    };
    c.methods = method_list("methods");
    c.replicates = static_cast<int>(v.at_least("replicates", 1));
    if (!v.empty("test-size"))
        c.test_size = v.at_least("test-size", 1);
    c.task = v.parsed("task", task_from_string);
    const std::vector<MethodSpec> sweep = method_list("sweep-method");
    if (sweep.size() != 1)
        throw UsageError("key 'sweep-method' must name exactly one method");
    c.sweep_method = sweep.front();
    for (const std::string& item : split_list(v.str("grid")))
    {
        try
        {
            std::size_t used = 0;
            const double g = std::stod(item, &used);
            if (used != item.size() || !std::isfinite(g))
                throw std::invalid_argument(item);
            c.grid.push_back(g);
        }
        catch (const std::exception&)
        {
            throw UsageError("invalid value '" + item + "' in key 'grid': expected numbers");
        }
    }

    // command-specific requirements
    std::string method_text = v.str("method");
    switch (c.command)
    {
    case Command::select:
        require_file(v, "x");
        require_file(v, "y");
        break;
    case Command::test:
        require_file(v, "x");
        require_file(v, "y");
        if (method_text.empty())
            method_text = "bonf-mic";
        if (c.scheme == SchemeKind::ric)
            throw UsageError("key 'scheme': MIC tests need full-mic or partial-mic");
        break;
    case Command::generate:
    case Command::experiment:
    case Command::sweep:
        if (c.methods.empty() && c.command == Command::experiment)
            throw UsageError("key 'methods' is empty");
        if (c.command == Command::sweep && c.grid.empty())
            throw UsageError("key 'grid' is required for sweep");
        if (method_text.empty())
            method_text = "partial-mic";
        optional_file(v, "x-source");
        optional_file(v, "y-source");
        optional_file(v, "cov-source");
        if (yeast && c.yeast.cov_variant == CovVariant::original_x && c.x_source.empty())
            throw UsageError("key 'x-source' is required for the original_x variant");
        if (yeast && c.yeast.cov_variant != CovVariant::original_x && c.x_source.empty() && c.cov_source.empty())
            throw UsageError("key 'cov-source' or 'x-source' is required for the yeast generator");
        try
        {
            if (yeast)
                c.yeast.validate();
            else
                c.scenario.validate();
        }
        catch (const DomainError& e)
        {
            throw UsageError(std::string("invalid generator settings: ") + e.what());
        }
        break;
    }
    if (method_text.empty())
        method_text = "partial-mic";
    try
    {
        c.method = parse_method(method_text);
    }
    catch (const DomainError& e)
    {
        throw UsageError("invalid value for key 'method': " + std::string(e.what()));
    }
    c.method.cov = c.cov;
    c.method.top_t = c.top_t;
    if (c.method.kind == MethodKind::truth && c.command == Command::sweep)
        throw UsageError("key 'method': the sweep reference cannot be truth");

    c.params = Json::object();
    c.params["command"] = to_string(c.command);
    for (const Key& k : keys())
        c.params[k.name] = merged[k.name];
    c.params["method"] = method_text;
    return c;
}

Json run_command(const RunConfig& config, std::ostream& out)
{
    kernels::set_thread_count(config.threads);
    Json report;
    switch (config.command)
    {
    case Command::select:
        report = run_select(config);
        break;
    case Command::test:
        report = run_test(config);
        break;
    case Command::generate:
        report = run_generate(config);
        if (!config.out_path.empty())
        {
            out << dump_json(report);
            return report;
        }
        break;
    case Command::experiment:
        report = run_experiment_command(config);
        break;
    case Command::sweep:
        report = run_sweep(config);
        break;
    }
    emit(report, config, out);
    return report;
}

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err)
{
    std::vector<std::string> args(argv, argv + argc);
    RunConfig config;
    try
    {
        config = parse_and_validate(args, micsel_environment());
    }
    catch (const UsageError& e)
    {
        err << e.what();
        if (std::string_view(e.what()).back() != '\n')
            err << "\n";
        return 2;
    }
    try
    {
        run_command(config, out);
    }
    catch (const std::exception& e)
    {
        err << "micsel: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace micsel
