#include "mecq/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace mecq {

namespace {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

KpiSummary kpi_from_tasks(const std::vector<Task>& tasks) {
    KpiSummary kpi;
    kpi.task_count = static_cast<long>(tasks.size());
    if (tasks.empty()) {
        kpi.avg_utility = kpi.median_utility = kpi.admission_rate =
            std::numeric_limits<double>::quiet_NaN();
        return kpi;
    }
    kpi.valid = true;

    std::vector<double> utilities;
    utilities.reserve(tasks.size());
    long entered = 0;
    long observations = 0;
    for (const Task& task : tasks) {
        utilities.push_back(task.end_utility);
        switch (task.served_by) {
            case ServedBy::MecServer: ++kpi.mec_served_count; break;
            case ServedBy::LocalDevice: ++kpi.balk_count; break;
            case ServedBy::LocalAfterRenege: ++kpi.renege_count; break;
            case ServedBy::LocalAfterPreempt: ++kpi.preempt_count; break;
        }
        if (task.observation_count > 0) {
            ++entered;
            observations += task.observation_count;
        }
    }
    std::sort(utilities.begin(), utilities.end());

    const std::size_t n = utilities.size();
    double sum = 0.0;
    for (double u : utilities) sum += u;
    kpi.avg_utility = sum / static_cast<double>(n);
    kpi.median_utility = n % 2 == 1 ? utilities[n / 2] : utilities[n / 2 - 1];
    kpi.admission_rate =
        static_cast<double>(kpi.mec_served_count) / static_cast<double>(kpi.task_count);

    kpi.ecdf.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double frac = static_cast<double>(i + 1) / static_cast<double>(n);
        if (!kpi.ecdf.empty() && kpi.ecdf.back().first == utilities[i])
            kpi.ecdf.back().second = frac;
        else
            kpi.ecdf.emplace_back(utilities[i], frac);
    }

    if (entered > 0) {
        kpi.has_observation_stats = true;
        kpi.mean_observations_per_task =
            static_cast<double>(observations) / static_cast<double>(entered);
    }
    kpi.rep_avg_min = kpi.rep_avg_max = kpi.avg_utility;
    return kpi;
}

KpiSummary run_monte_carlo(const ScenarioConfig& config, bool parallel) {
    config.validate();

    std::vector<std::vector<Task>> per_rep(static_cast<std::size_t>(config.replications));
    const auto run_rep = [&config](int rep) {
        return run_simulation(config, derive_seed(config.master_seed,
                                                  static_cast<std::uint64_t>(rep)))
            .tasks;
    };

    if (parallel && config.replications > 1) {
        std::vector<std::future<std::vector<Task>>> futures;
        futures.reserve(per_rep.size());
        for (int rep = 0; rep < config.replications; ++rep)
            futures.push_back(std::async(std::launch::async, run_rep, rep));
        for (int rep = 0; rep < config.replications; ++rep)
            per_rep[static_cast<std::size_t>(rep)] = futures[static_cast<std::size_t>(rep)].get();
    } else {
        for (int rep = 0; rep < config.replications; ++rep)
            per_rep[static_cast<std::size_t>(rep)] = run_rep(rep);
    }

    std::vector<Task> pooled;
    double rep_min = std::numeric_limits<double>::infinity();
    double rep_max = -std::numeric_limits<double>::infinity();
    bool any_rep_stats = false;
    for (const auto& tasks : per_rep) {
        if (!tasks.empty()) {
            double sum = 0.0;
            for (const Task& task : tasks) sum += task.end_utility;
            const double avg = sum / static_cast<double>(tasks.size());
            rep_min = std::min(rep_min, avg);
            rep_max = std::max(rep_max, avg);
            any_rep_stats = true;
        }
        pooled.insert(pooled.end(), tasks.begin(), tasks.end());
    }

    KpiSummary kpi = kpi_from_tasks(pooled);
    if (any_rep_stats) {
        kpi.rep_avg_min = rep_min;
        kpi.rep_avg_max = rep_max;
    }
    return kpi;
}

namespace {

MmpSpec mmp_scenario(char which) {
    MmpSpec spec;
    spec.rates = {2.0, 1.0};
    spec.period = 1.0;
    switch (which) {
        case 'A': spec.transition = {{0.9, 0.1}, {0.8, 0.2}}; break;
        case 'B': spec.transition = {{0.7, 0.3}, {0.3, 0.7}}; break;
        case 'C': spec.transition = {{0.2, 0.8}, {0.1, 0.9}}; break;
        default: throw std::logic_error("unknown MMP scenario");
    }
    return spec;
}

struct Family {
    ServerProcess server;
    LocalModel local;
    bool imperfect_set;  // uses the learning method keys instead of R/T/P
};

std::map<std::string, Family> family_catalog() {
    const LocalModel model1{2.0, 10.0};
    const LocalModel model2{4.0, 15.0};
    const auto poisson = [](double rate) {
        ServerProcess s;
        s.kind = ServerProcess::Kind::Poisson;
        s.rate = rate;
        return s;
    };
    const auto mmp = [](char which) {
        ServerProcess s;
        s.kind = ServerProcess::Kind::Mmp;
        s.mmp = mmp_scenario(which);
        s.initial_state = 0;
        return s;
    };

    std::map<std::string, Family> fams;
    fams["poisson-low"] = Family{poisson(2.0), model1, false};
    fams["poisson-high"] = Family{poisson(1.0), model1, false};
    fams["mmpA"] = Family{mmp('A'), model1, false};
    fams["mmpB"] = Family{mmp('B'), model1, false};
    fams["mmpC"] = Family{mmp('C'), model1, false};
    fams["mmpC-model2"] = Family{mmp('C'), model2, false};
    fams["imperfect-low"] = Family{poisson(2.0), model1, true};
    fams["imperfect-high"] = Family{poisson(1.0), model1, true};
    fams["imperfect-high-model2"] = Family{poisson(1.0), model2, true};
    return fams;
}

// Method keys use the table row labels: R rows name the outage percentage,
// so R0.1 means P_o = 0.001 and R10 means P_o = 0.1.
Policy perfect_method(const std::string& key) {
    Policy policy;
    if (key == "R0.1" || key == "R10") {
        policy.kind = Policy::Kind::RiskPerfect;
        policy.outage = key == "R0.1" ? 0.001 : 0.1;
    } else if (key == "T5" || key == "T10") {
        policy.kind = Policy::Kind::Truncate;
        policy.max_queue_len = key == "T5" ? 5 : 10;
    } else if (key == "P3" || key == "P6") {
        policy.kind = Policy::Kind::Preempt;
        policy.preempt_timeout = key == "P3" ? 3.0 : 6.0;
    } else if (key == "patient") {
        policy.kind = Policy::Kind::PatientFcfs;
    } else {
        throw std::out_of_range("unknown method key: " + key);
    }
    return policy;
}

Policy imperfect_method(const std::string& key) {
    Policy policy;
    policy.outage = 0.1;
    if (key == "optlearn") {
        policy.kind = Policy::Kind::RiskImperfect;
        policy.stopping = StoppingRule::Optimal;
    } else if (key == "fixed3" || key == "fixed6") {
        policy.kind = Policy::Kind::RiskImperfect;
        policy.stopping = StoppingRule::FixedMinimum;
        policy.min_observations = key == "fixed3" ? 3 : 6;
    } else if (key == "perfect") {
        policy.kind = Policy::Kind::RiskPerfect;
    } else {
        throw std::out_of_range("unknown method key: " + key);
    }
    return policy;
}

const std::vector<std::string>& perfect_keys() {
    static const std::vector<std::string> keys = {"R0.1", "R10", "T5",
                                                  "T10",  "P3",  "P6", "patient"};
    return keys;
}

const std::vector<std::string>& imperfect_keys() {
    static const std::vector<std::string> keys = {"optlearn", "fixed3", "fixed6", "perfect"};
    return keys;
}

}  // namespace

std::vector<std::string> scenario_names() {
    std::vector<std::string> names;
    for (const auto& [fam, info] : family_catalog()) {
        const auto& keys = info.imperfect_set ? imperfect_keys() : perfect_keys();
        for (const auto& key : keys) names.push_back(fam + "/" + key);
    }
    return names;
}

ScenarioConfig builtin_scenario(const std::string& name) {
    const auto slash = name.find('/');
    if (slash == std::string::npos) {
        std::string msg = "unknown scenario '" + name + "'; valid names:";
        for (const auto& n : scenario_names()) msg += "\n  " + n;
        throw std::out_of_range(msg);
    }
    const std::string fam = name.substr(0, slash);
    const std::string key = name.substr(slash + 1);

    const auto fams = family_catalog();
    const auto it = fams.find(fam);
    try {
        if (it == fams.end()) throw std::out_of_range("unknown family: " + fam);
        const Family& family = it->second;

        ScenarioConfig cfg;
        cfg.arrival_rate = 1.5;
        cfg.local_model = family.local;
        cfg.offload_overhead = 0.0;
        cfg.server = family.server;
        cfg.policy = family.imperfect_set ? imperfect_method(key) : perfect_method(key);
        cfg.utility = UtilitySpec{1.0, 0.1};
        cfg.horizon = 300.0;
        cfg.period = 1.0;
        cfg.replications = 10;
        cfg.master_seed = 12345;
        return cfg;
    } catch (const std::out_of_range&) {
        std::string msg = "unknown scenario '" + name + "'; valid names:";
        for (const auto& n : scenario_names()) msg += "\n  " + n;
        throw std::out_of_range(msg);
    }
}

std::vector<std::pair<std::string, ScenarioConfig>> bench_table(const std::string& table) {
    std::vector<std::string> names;
    const std::vector<std::string> methods = {"R0.1", "R10", "T5", "T10", "P3", "P6"};
    if (table == "table2") {
        for (const auto& fam : {"poisson-low", "poisson-high"})
            for (const auto& m : methods) names.push_back(std::string(fam) + "/" + m);
    } else if (table == "table3") {
        for (const auto& fam : {"mmpA", "mmpB", "mmpC", "mmpC-model2"})
            for (const auto& m : methods) names.push_back(std::string(fam) + "/" + m);
    } else if (table == "table4") {
        for (const auto& fam : {"imperfect-low", "imperfect-high", "imperfect-high-model2"})
            for (const auto& m : imperfect_keys()) names.push_back(std::string(fam) + "/" + m);
    } else {
        throw std::out_of_range("unknown bench table '" + table +
                                "'; valid: table2, table3, table4");
    }

    std::vector<std::pair<std::string, ScenarioConfig>> configs;
    configs.reserve(names.size());
    for (const auto& name : names) configs.emplace_back(name, builtin_scenario(name));
    return configs;
}

std::string compare_report_csv(const std::vector<NamedKpi>& rows) {
    std::string out =
        "method,tasks,admission_rate,avg_utility,median_utility,balk,renege,preempt,"
        "mec_served,mean_obs_per_task,rep_avg_min,rep_avg_max\n";
    for (const auto& row : rows) {
        const KpiSummary& k = row.kpi;
        out += row.name;
        out += ',' + std::to_string(k.task_count);
        out += ',' + fmt_double(k.admission_rate);
        out += ',' + fmt_double(k.avg_utility);
        out += ',' + fmt_double(k.median_utility);
        out += ',' + std::to_string(k.balk_count);
        out += ',' + std::to_string(k.renege_count);
        out += ',' + std::to_string(k.preempt_count);
        out += ',' + std::to_string(k.mec_served_count);
        out += ',' + (k.has_observation_stats ? fmt_double(k.mean_observations_per_task)
                                              : std::string("nan"));
        out += ',' + fmt_double(k.rep_avg_min);
        out += ',' + fmt_double(k.rep_avg_max);
        out += '\n';
    }
    return out;
}

std::string compare_report_text(const std::vector<NamedKpi>& rows) {
    std::ostringstream out;
    std::size_t width = 8;
    for (const auto& row : rows) width = std::max(width, row.name.size());
    out << std::left;
    out.width(static_cast<std::streamsize>(width + 2));
    out << "method";
    out << "    Adm      Avg      Med     tasks\n";
    char line[128];
    for (const auto& row : rows) {
        const KpiSummary& k = row.kpi;
        out.width(static_cast<std::streamsize>(width + 2));
        out << row.name;
        std::snprintf(line, sizeof(line), "%6.2f%%  %7.4f  %7.4f  %8ld\n",
                      k.admission_rate * 100.0, k.avg_utility, k.median_utility, k.task_count);
        out << line;
    }
    return out.str();
}

}  // namespace mecq
