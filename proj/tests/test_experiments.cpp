#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mecq/experiments.hpp"
#include "mecq/report.hpp"

using namespace mecq;

namespace {

Task make_task(int id, double end_utility, ServedBy served) {
    Task task;
    task.id = id;
    task.arrival_time = 0.0;
    task.completion_time = 1.0;
    task.end_utility = end_utility;
    task.served_by = served;
    return task;
}

}  // namespace

TEST_CASE("kpi_from_tasks: hand-computed aggregates") {
    const std::vector<Task> tasks = {
        make_task(0, 0.1, ServedBy::MecServer),
        make_task(1, 0.2, ServedBy::MecServer),
        make_task(2, 0.3, ServedBy::LocalDevice),
        make_task(3, 0.4, ServedBy::LocalAfterRenege),
    };
    const KpiSummary kpi = kpi_from_tasks(tasks);
    CHECK(kpi.valid);
    CHECK(kpi.admission_rate == doctest::Approx(0.5));
    CHECK(kpi.avg_utility == doctest::Approx(0.25));
    CHECK(kpi.median_utility == doctest::Approx(0.2));  // lower midpoint of an even count
    CHECK(kpi.balk_count == 1);
    CHECK(kpi.renege_count == 1);
    CHECK(kpi.mec_served_count == 2);
    CHECK(kpi.ecdf.back().second == doctest::Approx(1.0));
}

TEST_CASE("kpi_from_tasks: single task and empty input") {
    const KpiSummary one = kpi_from_tasks({make_task(0, 0.7, ServedBy::MecServer)});
    CHECK(one.admission_rate == doctest::Approx(1.0));
    CHECK(one.avg_utility == doctest::Approx(0.7));
    CHECK(one.median_utility == doctest::Approx(0.7));

    const KpiSummary none = kpi_from_tasks({});
    CHECK_FALSE(none.valid);
    CHECK(none.task_count == 0);
    CHECK(std::isnan(none.avg_utility));
}

TEST_CASE("kpi_from_tasks: ecdf is a distribution function") {
    std::vector<Task> tasks;
    for (int i = 0; i < 100; ++i)
        tasks.push_back(make_task(i, (i * 37 % 10) / 10.0, ServedBy::MecServer));
    const KpiSummary kpi = kpi_from_tasks(tasks);
    double prev_u = -1.0, prev_f = 0.0;
    for (const auto& [u, f] : kpi.ecdf) {
        CHECK(u > prev_u);
        CHECK(f > prev_f);
        prev_u = u;
        prev_f = f;
    }
    CHECK(kpi.ecdf.back().second == doctest::Approx(1.0));
}

TEST_CASE("builtin_scenario: catalog entries") {
    const ScenarioConfig high_r = builtin_scenario("poisson-high/R0.1");
    CHECK(high_r.policy.kind == Policy::Kind::RiskPerfect);
    CHECK(high_r.policy.outage == doctest::Approx(0.001));
    CHECK(high_r.server.rate == doctest::Approx(1.0));
    CHECK(high_r.arrival_rate == doctest::Approx(1.5));

    const ScenarioConfig b_t10 = builtin_scenario("mmpB/T10");
    CHECK(b_t10.policy.kind == Policy::Kind::Truncate);
    CHECK(b_t10.policy.max_queue_len == 10);
    CHECK(b_t10.server.kind == ServerProcess::Kind::Mmp);
    CHECK(b_t10.server.mmp.transition[0][0] == doctest::Approx(0.7));
    CHECK(b_t10.server.mmp.transition[1][0] == doctest::Approx(0.3));

    const ScenarioConfig model2 = builtin_scenario("mmpC-model2/R10");
    CHECK(model2.local_model.lo == doctest::Approx(4.0));
    CHECK(model2.local_model.hi == doctest::Approx(15.0));

    const ScenarioConfig fixed6 = builtin_scenario("imperfect-high/fixed6");
    CHECK(fixed6.policy.kind == Policy::Kind::RiskImperfect);
    CHECK(fixed6.policy.stopping == StoppingRule::FixedMinimum);
    CHECK(fixed6.policy.min_observations == 6);

    bool threw = false;
    try {
        builtin_scenario("bogus");
    } catch (const std::out_of_range& e) {
        threw = true;
        // the error message lists the valid catalog
        CHECK(std::string(e.what()).find("poisson-low/R10") != std::string::npos);
    }
    CHECK(threw);
}

TEST_CASE("scenario_names covers the bench tables") {
    const auto names = scenario_names();
    CHECK(names.size() > 40);
    for (const auto& table : {"table2", "table3", "table4"}) {
        for (const auto& [name, cfg] : bench_table(table)) {
            (void)cfg;
            CHECK(std::find(names.begin(), names.end(), name) != names.end());
        }
    }
    CHECK(bench_table("table2").size() == 12);
    CHECK(bench_table("table3").size() == 24);
    CHECK(bench_table("table4").size() == 12);
    CHECK_THROWS_AS(bench_table("table9"), std::out_of_range);
}

TEST_CASE("run_monte_carlo: patient admission is exactly one") {
    for (const char* name : {"poisson-low/patient", "mmpC/patient"}) {
        ScenarioConfig cfg = builtin_scenario(name);
        cfg.replications = 3;
        cfg.horizon = 100.0;
        const KpiSummary kpi = run_monte_carlo(cfg);
        CHECK(kpi.valid);
        CHECK(kpi.admission_rate == 1.0);
        CHECK(kpi.balk_count == 0);
        CHECK(kpi.renege_count == 0);
    }
}

TEST_CASE("run_monte_carlo: patient M/M/1 matches the sojourn transform") {
    // For a patient M/M/1 queue the stationary sojourn is Exp(mu - lambda),
    // so E[exp(-beta T)] = (mu - lambda) / (mu - lambda + beta): a closed-form
    // oracle for the whole engine + utility pipeline. Here 0.5 / 0.6.
    ScenarioConfig cfg = builtin_scenario("poisson-low/patient");
    cfg.replications = 20;
    const KpiSummary kpi = run_monte_carlo(cfg);
    CHECK(kpi.avg_utility == doctest::Approx(0.5 / 0.6).epsilon(0.02));
}

TEST_CASE("run_monte_carlo: deterministic and parallel-equals-sequential") {
    ScenarioConfig cfg = builtin_scenario("poisson-high/R10");
    cfg.replications = 4;
    cfg.horizon = 80.0;
    const KpiSummary a = run_monte_carlo(cfg, true);
    const KpiSummary b = run_monte_carlo(cfg, false);
    CHECK(a.task_count == b.task_count);
    CHECK(a.avg_utility == b.avg_utility);
    CHECK(a.median_utility == b.median_utility);
    CHECK(a.admission_rate == b.admission_rate);
    CHECK(a.rep_avg_min == b.rep_avg_min);
    CHECK(a.rep_avg_max == b.rep_avg_max);
    REQUIRE(a.ecdf.size() == b.ecdf.size());
    for (std::size_t i = 0; i < a.ecdf.size(); ++i) {
        CHECK(a.ecdf[i].first == b.ecdf[i].first);
        CHECK(a.ecdf[i].second == b.ecdf[i].second);
    }
    CHECK(a.rep_avg_min <= a.avg_utility);
    CHECK(a.rep_avg_max >= a.avg_utility);
}

TEST_CASE("run_monte_carlo: degenerate horizon yields the sentinel") {
    ScenarioConfig cfg = builtin_scenario("poisson-low/R10");
    cfg.horizon = 1e-9;
    cfg.replications = 2;
    const KpiSummary kpi = run_monte_carlo(cfg);
    CHECK_FALSE(kpi.valid);
    CHECK(kpi.task_count == 0);
}

TEST_CASE("compare_report: csv round-trips numeric values") {
    ScenarioConfig cfg = builtin_scenario("poisson-low/T5");
    cfg.replications = 2;
    cfg.horizon = 60.0;
    const KpiSummary kpi = run_monte_carlo(cfg);
    const std::string csv = compare_report_csv({{"poisson-low/T5", kpi}});

    std::istringstream in(csv);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header.substr(0, 6) == "method");
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row_in(row);
    while (std::getline(row_in, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 12);
    CHECK(cells[0] == "poisson-low/T5");
    CHECK(std::strtod(cells[2].c_str(), nullptr) == kpi.admission_rate);
    CHECK(std::strtod(cells[3].c_str(), nullptr) == kpi.avg_utility);
    CHECK(std::strtod(cells[4].c_str(), nullptr) == kpi.median_utility);

    const std::string text = compare_report_text({{"poisson-low/T5", kpi}});
    CHECK(text.find("poisson-low/T5") != std::string::npos);
}

TEST_CASE("scenario json round-trip") {
    for (const auto& name :
         {"poisson-low/R10", "mmpC/P3", "imperfect-high/optlearn", "imperfect-low/fixed3"}) {
        const ScenarioConfig cfg = builtin_scenario(name);
        const ScenarioConfig back = scenario_from_json(scenario_to_json(cfg));
        CHECK(back.arrival_rate == cfg.arrival_rate);
        CHECK(back.policy.kind == cfg.policy.kind);
        CHECK(back.policy.outage == cfg.policy.outage);
        CHECK(back.server.kind == cfg.server.kind);
        CHECK(back.horizon == cfg.horizon);
        CHECK(back.master_seed == cfg.master_seed);
        if (cfg.server.kind == ServerProcess::Kind::Mmp) {
            CHECK(back.server.mmp.rates == cfg.server.mmp.rates);
            CHECK(back.server.mmp.transition == cfg.server.mmp.transition);
        }
        if (cfg.policy.kind == Policy::Kind::RiskImperfect) {
            CHECK(back.policy.stopping == cfg.policy.stopping);
            CHECK(back.policy.min_observations == cfg.policy.min_observations);
        }
    }
}

TEST_CASE("ecdf_csv and svg emission") {
    ScenarioConfig cfg = builtin_scenario("poisson-low/R10");
    cfg.replications = 1;
    cfg.horizon = 40.0;
    const KpiSummary kpi = run_monte_carlo(cfg);
    const std::string csv = ecdf_csv(kpi);
    CHECK(csv.substr(0, 21) == "utility,cum_fraction\n");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(kpi.ecdf.size()) + 1);
    const std::string svg = ecdf_svg("poisson-low/R10", kpi);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<path") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}
