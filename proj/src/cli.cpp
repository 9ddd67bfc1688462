// Copyright 2026 The resilsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "resilsim/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "resilsim/errors.hpp"
#include "resilsim/graph.hpp"
#include "resilsim/live.hpp"
#include "resilsim/oracle.hpp"
#include "resilsim/scenario.hpp"
#include "resilsim/sim.hpp"

#ifndef RESILSIM_VERSION
#define RESILSIM_VERSION "0.0.0"
#endif

namespace resilsim {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kSeedEnv = "RESILSIM_SEED";

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    auto doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ParseError("'" + path.string() + "' is not valid JSON");
    return doc;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string render(const json& doc) { return doc.dump(2) + "\n"; }

/// Everything about a run that is not part of its analytical output.
struct RunManifest {
    std::string command;
    json config;
    std::optional<std::uint64_t> master_seed;
    unsigned workers = 1;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> outputs;

    json to_json() const {
        json j{{"tool", "resilsim"},
               {"version", RESILSIM_VERSION},
               {"command", command},
               {"started_at", started_at},
               {"finished_at", finished_at},
               {"workers", workers},
               {"outputs", outputs}};
        if (!config.is_null()) j["config"] = config;
        if (master_seed) j["master_seed"] = *master_seed;
        return j;
    }
};

RunManifest start_manifest(std::string command, unsigned workers = 1) {
    RunManifest m;
    m.command = std::move(command);
    m.workers = workers;
    m.started_at = utc_now();
    return m;
}

fs::path manifest_path_for(const fs::path& output) {
    return fs::path(output.string() + ".manifest.json");
}

/// Writes `text` to `output` (or `out` when empty) and the sidecar manifest.
void emit(const std::string& text, const std::string& output, RunManifest manifest,
          std::ostream& out) {
    manifest.finished_at = utc_now();
    if (output.empty()) {
        out << text;
        return;
    }
    manifest.outputs.push_back(output);
    write_text(output, text);
    write_text(manifest_path_for(output), render(manifest.to_json()));
}

/// `builtin-norepl`, `builtin-repl`, a config file, or a previous run's
/// manifest/report (anything carrying a "config" object).
ScenarioConfig resolve_config(const std::string& arg) {
    if (arg == "builtin-norepl" || arg == "norepl") return builtin_config("norepl");
    if (arg == "builtin-repl" || arg == "repl") return builtin_config("repl");
    const fs::path path(arg);
    if (!fs::exists(path)) throw ConfigError("config: '" + arg + "' does not exist");
    auto doc = read_json_file(path);
    if (doc.is_object() && doc.contains("config") && doc["config"].is_object()) {
        doc = doc["config"];
    }
    return load_scenario(doc, path.parent_path());
}

std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv(kSeedEnv);
    if (v == nullptr || *v == '\0') return std::nullopt;
    try {
        std::size_t used = 0;
        auto s = std::stoull(v, &used, 0);
        if (used != std::char_traits<char>::length(v)) throw std::invalid_argument(v);
        return s;
    } catch (const std::exception&) {
        throw ConfigError(std::string(kSeedEnv) + ": not an unsigned integer: '" + v + "'");
    }
}

void apply_exclusions(ScenarioConfig& c, const std::vector<std::string>& excluded) {
    for (const auto& s : excluded) c.scenario.excluded.insert(s);
    validate_scenario(c.graph, c.scenario, c.profiles, c.failure);
}

unsigned default_workers() {
    auto hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1U : hw;
}

/// A numeric series from a file (JSON array, simulate report, comparison,
/// analyze-live output, or one number per line) or an inline "a,b,c" list.
std::vector<double> load_series(const std::string& arg) {
    if (fs::exists(arg)) {
        std::ifstream in(arg);
        std::stringstream buf;
        buf << in.rdbuf();
        auto doc = json::parse(buf.str(), nullptr, false);
        if (!doc.is_discarded()) {
            try {
                if (doc.is_array()) return doc.get<std::vector<double>>();
                if (doc.is_object()) {
                    if (doc.contains("report")) return doc["report"].at("round_values").get<std::vector<double>>();
                    if (doc.contains("round_values")) return doc["round_values"].get<std::vector<double>>();
                    if (doc.contains("values")) return doc["values"].get<std::vector<double>>();
                    if (doc.contains("live")) return {doc["live"].at("r_live").get<double>()};
                    if (doc.contains("r_live")) return {doc["r_live"].get<double>()};
                }
            } catch (const json::exception& e) {
                throw ParseError("'" + arg + "': " + e.what());
            }
            throw ParseError("'" + arg + "': no numeric series found");
        }
        std::vector<double> values;
        std::istringstream lines(buf.str());
        std::string line;
        while (std::getline(lines, line)) {
            if (line.empty() || line[0] == '#') continue;
            try {
                values.push_back(std::stod(line));
            } catch (const std::exception&) {
                throw ParseError("'" + arg + "': bad value '" + line + "'");
            }
        }
        return values;
    }
    std::vector<double> values;
    std::stringstream ss(arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ParseError("'" + arg + "' is neither a file nor a comma-separated number list");
        }
    }
    return values;
}

TimeWindow parse_window(const std::string& s) {
    auto comma = s.find(',');
    if (comma == std::string::npos) throw ConfigError("--window: expected START,END");
    try {
        TimeWindow w{std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
        if (!(w.end > w.start)) throw ConfigError("--window: END must exceed START");
        return w;
    } catch (const std::logic_error&) {
        throw ConfigError("--window: expected numeric START,END");
    }
}

std::string fmt(double v, int precision = 5) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << v;
    return os.str();
}

// ---- subcommands ------------------------------------------------------------

struct DiscoverArgs {
    std::string url;
    std::string input;
    std::string output;
    std::string entry{kSocialNetworkEntry};
    std::int64_t lookback_ms = 3'600'000;
    std::optional<std::int64_t> end_ts_ms;
};

int cmd_discover(const DiscoverArgs& a, std::ostream& out, std::ostream& err) {
    auto manifest = start_manifest("discover");
    json document;
    if (!a.url.empty()) {
        const auto end = a.end_ts_ms.value_or(std::chrono::duration_cast<std::chrono::milliseconds>(
                                                  std::chrono::system_clock::now().time_since_epoch())
                                                  .count());
        document = fetch_dependencies(a.url, a.lookback_ms, end);
    } else {
        document = read_json_file(a.input);
    }
    const auto graph = parse_dependencies(document);
    const auto diag = validate_graph(graph, a.entry);

    std::ostream& report = a.output.empty() ? err : out;
    report << "nodes: " << graph.node_count() << " edges: " << graph.edge_count() << "\n";
    if (diag.missing_entry) err << "error: entry '" << a.entry << "' is not in the graph\n";
    for (const auto& n : diag.unreachable_nodes) {
        if (!diag.missing_entry) err << "warning: '" << n << "' is unreachable from the entry\n";
    }
    if (diag.cycles_present) err << "warning: dependency graph contains a cycle\n";

    emit(render(serialize_dependencies(graph)), a.output, manifest, out);
    return diag.missing_entry ? kExitConfig : kExitOk;
}

struct SimulateArgs {
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned workers = default_workers();
    std::string output;
    std::optional<std::uint64_t> samples;
    std::optional<std::uint32_t> rounds;
    std::optional<double> p_fail;
    std::vector<std::string> exclude;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    auto manifest = start_manifest("simulate", a.workers);
    auto c = resolve_config(a.config);
    if (auto s = a.seed ? a.seed : env_seed()) c.failure.master_seed = *s;
    if (a.samples) c.failure.samples_per_round = *a.samples;
    if (a.rounds) c.failure.rounds = *a.rounds;
    if (a.p_fail) c.failure.p_fail = *a.p_fail;
    apply_exclusions(c, a.exclude);

    const auto report = run_monte_carlo(c.graph, c.scenario, c.profiles, c.failure, a.workers);
    const auto snapshot = serialize_scenario(c);
    manifest.config = snapshot;
    manifest.master_seed = c.failure.master_seed;

    json doc{{"config", snapshot},
             {"report", report_to_json(report)},
             {"run", {{"tool", "resilsim"}, {"version", RESILSIM_VERSION},
                      {"master_seed", c.failure.master_seed}}}};
    std::ostream& log = a.output.empty() ? err : out;
    log << "scenario " << (c.name.empty() ? "custom" : c.name) << ": fleet " << report.fleet_size
        << ", killed " << report.kill_count << ", " << c.failure.rounds << " x "
        << c.failure.samples_per_round << " samples\n";
    for (const auto& e : report.per_endpoint) {
        log << "  " << e.endpoint << ": " << fmt(e.availability) << " (weight " << e.weight << ")\n";
    }
    log << "R_model = " << fmt(report.mean) << " +/- " << fmt(report.sd) << "\n";
    emit(render(doc), a.output, manifest, out);
    return kExitOk;
}

struct ExactArgs {
    std::string config;
    std::uint64_t state_limit = kDefaultStateLimit;
    unsigned workers = 1;
    std::string output;
    std::optional<double> p_fail;
    std::vector<std::string> exclude;
};

int cmd_exact(const ExactArgs& a, std::ostream& out, std::ostream& err) {
    auto manifest = start_manifest("exact", a.workers);
    auto c = resolve_config(a.config);
    if (a.p_fail) c.failure.p_fail = *a.p_fail;
    apply_exclusions(c, a.exclude);

    ExactResult result;
    try {
        result = exact_resilience(c.graph, c.scenario, c.profiles, c.failure.p_fail, a.state_limit,
                                  a.workers);
    } catch (const StateLimitError& e) {
        err << "error: " << e.what() << "\n";
        return kExitResourceLimit;
    }
    const auto snapshot = serialize_scenario(c);
    manifest.config = snapshot;
    json doc{{"config", snapshot},
             {"exact", exact_to_json(result)},
             {"run", {{"tool", "resilsim"}, {"version", RESILSIM_VERSION}}}};

    std::ostream& log = a.output.empty() ? err : out;
    log << "scenario " << (c.name.empty() ? "custom" : c.name) << ": fleet " << result.fleet_size
        << ", killed " << result.kill_count << ", " << result.kill_sets << " kill sets\n";
    for (const auto& e : result.per_endpoint) {
        log << "  " << e.endpoint << ": " << fmt(e.availability, 6) << "\n";
    }
    log << "R_model_exact = " << fmt(result.r_model_exact, 6) << "\n";
    emit(render(doc), a.output, manifest, out);
    return kExitOk;
}

struct AnalyzeArgs {
    std::string log;
    std::string window;
    bool drop_4xx = false;
    std::string output;
};

int cmd_analyze_live(const AnalyzeArgs& a, std::ostream& out, std::ostream& err) {
    auto manifest = start_manifest("analyze-live");
    std::ifstream in(a.log);
    if (!in) throw std::runtime_error("cannot open '" + a.log + "'");
    const auto records = parse_request_log(in);
    LiveOptions opts;
    opts.drop_4xx = a.drop_4xx;
    if (!a.window.empty()) opts.window = parse_window(a.window);
    const auto live = analyze_request_log(records, opts);

    json doc{{"live", live_to_json(live)},
             {"options", {{"drop_4xx", a.drop_4xx}, {"window", a.window.empty() ? json(nullptr) : json(a.window)}}},
             {"run", {{"tool", "resilsim"}, {"version", RESILSIM_VERSION}}}};
    (a.output.empty() ? err : out) << "R_live = " << fmt(live.r_live) << " (" << live.failed
                                   << " failed of " << live.total << ")\n";
    emit(render(doc), a.output, manifest, out);
    return kExitOk;
}

struct CompareArgs {
    std::vector<std::string> model;
    std::vector<std::string> live;
    std::vector<std::string> scenario;
    std::string denominator = "model";
    std::string output;
    std::string csv;
};

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
    auto manifest = start_manifest("compare");
    if (a.model.size() != a.live.size()) {
        throw ConfigError("compare: --model and --live must be given the same number of times");
    }
    if (!a.scenario.empty() && a.scenario.size() != a.model.size()) {
        throw ConfigError("compare: give one --scenario per --model/--live pair");
    }
    const auto denominator = parse_denominator(a.denominator);

    std::vector<ComparisonRow> rows;
    auto rows_json = json::array();
    for (std::size_t i = 0; i < a.model.size(); ++i) {
        const auto name = a.scenario.empty() ? "scenario-" + std::to_string(i + 1) : a.scenario[i];
        rows.push_back(compare(load_series(a.model[i]), load_series(a.live[i]), name, denominator));
        rows_json.push_back(comparison_to_json(rows.back()));
    }

    std::ostream& log = a.output.empty() ? err : out;
    for (const auto& r : rows) {
        log << r.scenario << ": model " << fmt(r.model_mean) << " live " << fmt(r.live_mean)
            << " delta " << std::showpos << fmt(r.delta) << std::noshowpos << " rel.err "
            << (r.relative_error ? fmt(*r.relative_error, 4) : std::string("n/a")) << " ["
            << to_string(r.verdict) << "]\n";
    }
    if (!a.csv.empty()) {
        write_text(a.csv, comparison_csv(rows));
        manifest.outputs.push_back(a.csv);
    }
    json doc{{"rows", rows_json}, {"run", {{"tool", "resilsim"}, {"version", RESILSIM_VERSION}}}};
    emit(render(doc), a.output, manifest, out);
    return kExitOk;
}

struct PlotArgs {
    std::vector<std::string> reports;
    std::string output;
};

int cmd_emit_plot(const PlotArgs& a, std::ostream& out, std::ostream&) {
    auto manifest = start_manifest("emit-plot");
    std::ostringstream csv;
    csv << std::setprecision(17);
    csv << "scenario,trial,source,value\n";
    auto series = [&](const std::string& scenario, const char* source,
                      const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            csv << scenario << ',' << i + 1 << ',' << source << ',' << values[i] << '\n';
        }
    };
    for (const auto& path : a.reports) {
        const auto doc = read_json_file(path);
        if (doc.contains("rows")) {
            for (const auto& r : doc["rows"]) {
                const auto row = comparison_from_json(r);
                series(row.scenario, "model", row.model_values);
                series(row.scenario, "live", row.live_values);
            }
        } else if (doc.contains("report")) {
            const auto report = report_from_json(doc["report"]);
            const auto name = doc.contains("config") ? doc["config"].value("name", std::string{})
                                                     : std::string{};
            series(name.empty() ? fs::path(path).stem().string() : name, "model",
                   report.round_values);
        } else {
            throw ParseError("'" + path + "': expected a compare or simulate output");
        }
    }
    if (a.output.empty()) {
        out << csv.str();
        return kExitOk;
    }
    emit(csv.str(), a.output, manifest, out);
    return kExitOk;
}

struct CheckArgs {
    std::string exact;
    std::string simulation;
    std::string output;
};

int cmd_check(const CheckArgs& a, std::ostream& out, std::ostream& err) {
    auto manifest = start_manifest("check");
    auto exact_doc = read_json_file(a.exact);
    auto mc_doc = read_json_file(a.simulation);
    const auto exact = exact_from_json(exact_doc.contains("exact") ? exact_doc["exact"] : exact_doc);
    const auto mc = report_from_json(mc_doc.contains("report") ? mc_doc["report"] : mc_doc);
    const auto cmp = exact_vs_mc_report(exact, mc);
    std::ostream& log = a.output.empty() ? err : out;
    for (const auto& d : cmp.endpoints) {
        log << d.endpoint << ": exact " << fmt(d.exact, 6) << " mc " << fmt(d.estimate, 6) << " z "
            << fmt(d.z, 2) << (d.pass ? " pass" : " FAIL") << "\n";
    }
    emit(render(oracle_comparison_to_json(cmp)), a.output, manifest, out);
    return cmp.all_pass ? kExitOk : kExitRuntime;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monte-Carlo and exact resilience analysis of microservice dependency graphs",
                 "resilsim"};
    app.set_version_flag("--version", RESILSIM_VERSION);
    app.require_subcommand(1);

    DiscoverArgs discover;
    auto* d = app.add_subcommand("discover", "Fetch or load a dependencies document and validate it");
    auto* d_url = d->add_option("--url", discover.url, "Tracing backend base URL");
    auto* d_in = d->add_option("--input", discover.input, "Dependencies JSON file")->check(CLI::ExistingFile);
    d_url->excludes(d_in);
    d->add_option("--output,-o", discover.output, "Normalized dependencies file");
    d->add_option("--entry", discover.entry, "Entry service")->capture_default_str();
    d->add_option("--lookback", discover.lookback_ms, "Lookback in milliseconds")->capture_default_str();
    d->add_option("--end-ts", discover.end_ts_ms, "End timestamp in epoch milliseconds");

    SimulateArgs simulate;
    auto* s = app.add_subcommand("simulate", "Monte-Carlo resilience estimate");
    s->add_option("--config,-c", simulate.config, "Config file, builtin-norepl or builtin-repl")->required();
    s->add_option("--seed", simulate.seed, "Master seed (overrides RESILSIM_SEED and the config)");
    s->add_option("--workers,-j", simulate.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--output,-o", simulate.output, "Report file");
    s->add_option("--samples", simulate.samples, "Samples per round")->check(CLI::PositiveNumber);
    s->add_option("--rounds", simulate.rounds, "Rounds")->check(CLI::PositiveNumber);
    s->add_option("--p-fail", simulate.p_fail, "Container failure fraction")->check(CLI::Range(0.0, 1.0));
    s->add_option("--exclude-service", simulate.exclude, "Service never killed (repeatable)");

    ExactArgs exact;
    auto* x = app.add_subcommand("exact", "Exact resilience by exhaustive enumeration");
    x->add_option("--config,-c", exact.config, "Config file, builtin-norepl or builtin-repl")->required();
    x->add_option("--state-limit", exact.state_limit, "Refuse above this many states")->capture_default_str();
    x->add_option("--workers,-j", exact.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    x->add_option("--output,-o", exact.output, "Result file");
    x->add_option("--p-fail", exact.p_fail, "Container failure fraction")->check(CLI::Range(0.0, 1.0));
    x->add_option("--exclude-service", exact.exclude, "Service never killed (repeatable)");

    AnalyzeArgs analyze;
    auto* l = app.add_subcommand("analyze-live", "Measured resilience from a request log");
    l->add_option("--log", analyze.log, "Request log (timestamp,outcome[,endpoint])")->required()->check(CLI::ExistingFile);
    l->add_option("--window", analyze.window, "START,END epoch seconds, half-open");
    l->add_flag("--drop-4xx", analyze.drop_4xx, "Exclude 4xx responses from the denominator");
    l->add_option("--output,-o", analyze.output, "Result file");

    CompareArgs cmp;
    auto* c = app.add_subcommand("compare", "Compare model predictions against live measurements");
    c->add_option("--model", cmp.model, "Model series: file or comma list (repeatable)")->required();
    c->add_option("--live", cmp.live, "Live series: file or comma list (repeatable)")->required();
    c->add_option("--scenario", cmp.scenario, "Scenario label (repeatable)");
    c->add_option("--denominator", cmp.denominator, "Relative-error denominator")
        ->check(CLI::IsMember({"model", "live"}))
        ->capture_default_str();
    c->add_option("--output,-o", cmp.output, "Comparison JSON");
    c->add_option("--csv", cmp.csv, "Also write the rows as CSV");

    PlotArgs plot;
    auto* p = app.add_subcommand("emit-plot", "Per-trial CSV for predicted vs measured plots");
    p->add_option("--reports", plot.reports, "compare or simulate outputs")->required()->check(CLI::ExistingFile);
    p->add_option("--output,-o", plot.output, "CSV file");

    CheckArgs check;
    auto* k = app.add_subcommand("check", "Test a Monte-Carlo report against an exact result");
    k->add_option("--exact", check.exact, "exact output")->required()->check(CLI::ExistingFile);
    k->add_option("--simulation", check.simulation, "simulate output")->required()->check(CLI::ExistingFile);
    k->add_option("--output,-o", check.output, "Comparison JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (d->parsed()) {
            if (discover.url.empty() == discover.input.empty()) {
                err << "error: discover needs exactly one of --url or --input\n";
                return kExitConfig;
            }
            return cmd_discover(discover, out, err);
        }
        if (s->parsed()) return cmd_simulate(simulate, out, err);
        if (x->parsed()) return cmd_exact(exact, out, err);
        if (l->parsed()) return cmd_analyze_live(analyze, out, err);
        if (c->parsed()) return cmd_compare(cmp, out, err);
        if (p->parsed()) return cmd_emit_plot(plot, out, err);
        if (k->parsed()) return cmd_check(check, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StateLimitError& e) {
        err << "error: " << e.what() << "\n";
        return kExitResourceLimit;
    } catch (const std::invalid_argument& e) {
        err << "invalid argument: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitRuntime;
}

}  // namespace resilsim
