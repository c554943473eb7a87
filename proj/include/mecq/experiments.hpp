#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mecq/sim.hpp"

namespace mecq {

struct KpiSummary {
    bool valid = false;  // false when no tasks were generated
    long task_count = 0;
    double admission_rate = 0.0;  // fraction completed at the MEC server
    double avg_utility = 0.0;
    double median_utility = 0.0;  // lower midpoint for even counts
    std::vector<std::pair<double, double>> ecdf;  // (utility, cumulative fraction)
    long balk_count = 0;
    long renege_count = 0;
    long preempt_count = 0;
    long mec_served_count = 0;
    bool has_observation_stats = false;
    double mean_observations_per_task = 0.0;  // over tasks that entered the queue
    // Spread of the per-replication average utility, for tolerance checks.
    double rep_avg_min = 0.0;
    double rep_avg_max = 0.0;
};

KpiSummary kpi_from_tasks(const std::vector<Task>& tasks);

// Runs `replications` independent simulations with seeds derived from the
// master seed, pools every task, and summarizes. Replications execute
// concurrently; results are identical to sequential execution.
KpiSummary run_monte_carlo(const ScenarioConfig& config, bool parallel = true);

// Catalog of the documented experiment parameterizations, keyed
// "<family>/<method>", e.g. "poisson-low/R10" or "imperfect-high/optlearn".
ScenarioConfig builtin_scenario(const std::string& name);
std::vector<std::string> scenario_names();

// Configurations of one benchmark table: "table2" (Poisson, perfect QSI),
// "table3" (MMP, perfect QSI), "table4" (Poisson, imperfect QSI).
std::vector<std::pair<std::string, ScenarioConfig>> bench_table(const std::string& table);

struct NamedKpi {
    std::string name;
    KpiSummary kpi;
};

// Side-by-side method comparison. CSV uses round-trip decimal formatting;
// the text form is aligned for reading.
std::string compare_report_csv(const std::vector<NamedKpi>& rows);
std::string compare_report_text(const std::vector<NamedKpi>& rows);

}  // namespace mecq
