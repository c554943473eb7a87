#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mecq/experiments.hpp"
#include "mecq/report.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitBadConfig = 2;
constexpr int kExitIoFailure = 3;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

std::string sanitize(std::string name) {
    for (char& c : name)
        if (c == '/') c = '_';
    return name;
}

std::string default_outdir() {
    if (const char* env = std::getenv("MECQ_OUTDIR")) return env;
    return ".";
}

struct RunOptions {
    std::string scenario;
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int replications = 0;
    std::string outdir = default_outdir();
    std::vector<std::string> formats = {"csv", "json"};
    bool debug_events = false;
};

mecq::ScenarioConfig resolve_config(const RunOptions& opt) {
    if (opt.scenario.empty() == opt.config_path.empty())
        throw std::invalid_argument("exactly one of --scenario or --config is required");
    mecq::ScenarioConfig config;
    if (!opt.scenario.empty()) {
        config = mecq::builtin_scenario(opt.scenario);
    } else {
        std::ifstream in(opt.config_path);
        if (!in) throw IoError("cannot open config file " + opt.config_path);
        nlohmann::json j;
        in >> j;
        config = mecq::scenario_from_json(j);
    }
    if (opt.seed_set) config.master_seed = opt.seed;
    if (opt.replications > 0) config.replications = opt.replications;
    config.validate();
    return config;
}

bool wants(const RunOptions& opt, const std::string& format) {
    for (const auto& f : opt.formats)
        if (f == format) return true;
    return false;
}

int cmd_run(const RunOptions& opt) {
    const mecq::ScenarioConfig config = resolve_config(opt);
    const std::string name = !opt.scenario.empty() ? opt.scenario : opt.config_path;

    const mecq::KpiSummary kpi = mecq::run_monte_carlo(config);

    fs::create_directories(opt.outdir);
    const fs::path dir(opt.outdir);
    if (wants(opt, "json"))
        write_file(dir / "kpi.json", mecq::kpi_to_json(name, kpi).dump(2) + "\n");
    if (wants(opt, "csv")) {
        write_file(dir / "report.csv", mecq::compare_report_csv({{name, kpi}}));
        write_file(dir / "ecdf.csv", mecq::ecdf_csv(kpi));
    }
    if (wants(opt, "svg")) write_file(dir / "ecdf.svg", mecq::ecdf_svg(name, kpi));
    if (opt.debug_events) {
        // Per-replication event logs; the KPI pools replications, the raw
        // streams stay separate.
        std::string ndjson;
        for (int rep = 0; rep < config.replications; ++rep) {
            const auto result = mecq::run_simulation(
                config, mecq::derive_seed(config.master_seed, static_cast<std::uint64_t>(rep)));
            ndjson += mecq::events_ndjson(result.events);
        }
        write_file(dir / "events.ndjson", ndjson);
    }

    nlohmann::json line = mecq::kpi_to_json(name, kpi);
    line.erase("ecdf");
    std::cout << line.dump() << "\n";
    return 0;
}

int cmd_bench(const std::string& table, const RunOptions& opt) {
    const auto configs = mecq::bench_table(table);
    std::vector<mecq::NamedKpi> rows;
    rows.reserve(configs.size());

    fs::create_directories(opt.outdir);
    const fs::path dir(opt.outdir);
    auto combined = nlohmann::json::array();
    for (const auto& [name, base] : configs) {
        mecq::ScenarioConfig config = base;
        if (opt.seed_set) config.master_seed = opt.seed;
        if (opt.replications > 0) config.replications = opt.replications;
        const mecq::KpiSummary kpi = mecq::run_monte_carlo(config);
        rows.push_back({name, kpi});
        combined.push_back(mecq::kpi_to_json(name, kpi));
        if (wants(opt, "csv"))
            write_file(dir / ("ecdf_" + sanitize(name) + ".csv"), mecq::ecdf_csv(kpi));
        if (wants(opt, "svg"))
            write_file(dir / ("ecdf_" + sanitize(name) + ".svg"), mecq::ecdf_svg(name, kpi));
        std::cerr << "done: " << name << "\n";
    }

    if (wants(opt, "csv")) write_file(dir / "report.csv", mecq::compare_report_csv(rows));
    if (wants(opt, "json")) write_file(dir / "report.json", combined.dump(2) + "\n");
    std::cout << mecq::compare_report_text(rows);
    return 0;
}

int cmd_list_scenarios() {
    for (const auto& name : mecq::scenario_names()) std::cout << name << "\n";
    return 0;
}

// Reads back a debug event log and summarizes counts. Time may reset where
// one replication's stream ends and the next begins; those are counted.
int cmd_replay(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::map<std::string, long> counts;
    double last_t = -std::numeric_limits<double>::infinity();
    long stream_resets = 0;
    long n = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json j = nlohmann::json::parse(line);
        const double t = j.at("t").get<double>();
        if (j.at("queue_len").get<long>() < 0)
            throw std::invalid_argument("replay: negative queue length");
        if (t < last_t) ++stream_resets;
        last_t = t;
        ++counts[j.at("kind").get<std::string>()];
        ++n;
    }
    nlohmann::json out;
    out["events"] = n;
    out["counts"] = counts;
    out["stream_resets"] = stream_resets;
    std::cout << out.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"risk-based impatient queuing simulator for MEC task offloading"};
    app.require_subcommand(1);

    RunOptions opt;
    std::string bench_name;
    std::string replay_path;

    CLI::App* run = app.add_subcommand("run", "run one scenario and write KPI artifacts");
    run->add_option("--scenario", opt.scenario, "builtin scenario name, e.g. poisson-low/R10");
    run->add_option("--config", opt.config_path, "JSON scenario config file");
    run->add_option("--seed", opt.seed, "master seed override")
        ->each([&opt](const std::string&) { opt.seed_set = true; });
    run->add_option("--replications", opt.replications, "replication count override");
    run->add_option("--outdir", opt.outdir, "output directory (env MECQ_OUTDIR)");
    run->add_option("--formats", opt.formats, "subset of csv,json,svg")->delimiter(',');
    run->add_flag("--debug-events", opt.debug_events, "also write events.ndjson");

    CLI::App* bench = app.add_subcommand("bench", "run a full benchmark table");
    bench->add_option("table", bench_name, "table2 | table3 | table4")->required();
    bench->add_option("--seed", opt.seed, "master seed override")
        ->each([&opt](const std::string&) { opt.seed_set = true; });
    bench->add_option("--replications", opt.replications, "replication count override");
    bench->add_option("--outdir", opt.outdir, "output directory (env MECQ_OUTDIR)");
    bench->add_option("--formats", opt.formats, "subset of csv,json,svg")->delimiter(',');

    CLI::App* list = app.add_subcommand("list-scenarios", "print the scenario catalog");
    (void)list;

    CLI::App* replay = app.add_subcommand("replay", "summarize a debug event log");
    replay->add_option("file", replay_path, "events.ndjson path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitBadConfig;
    }

    try {
        if (run->parsed()) return cmd_run(opt);
        if (bench->parsed()) return cmd_bench(bench_name, opt);
        if (app.get_subcommand("list-scenarios")->parsed()) return cmd_list_scenarios();
        if (replay->parsed()) return cmd_replay(replay_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoFailure;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
    return kExitBadConfig;
}
