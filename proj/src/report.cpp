#include "mecq/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace mecq {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

nlohmann::json kpi_to_json(const std::string& name, const KpiSummary& kpi) {
    nlohmann::json j;
    j["method"] = name;
    j["valid"] = kpi.valid;
    j["task_count"] = kpi.task_count;
    if (kpi.valid) {
        j["admission_rate"] = kpi.admission_rate;
        j["avg_utility"] = kpi.avg_utility;
        j["median_utility"] = kpi.median_utility;
        j["balk_count"] = kpi.balk_count;
        j["renege_count"] = kpi.renege_count;
        j["preempt_count"] = kpi.preempt_count;
        j["mec_served_count"] = kpi.mec_served_count;
        j["rep_avg_min"] = kpi.rep_avg_min;
        j["rep_avg_max"] = kpi.rep_avg_max;
        if (kpi.has_observation_stats)
            j["mean_observations_per_task"] = kpi.mean_observations_per_task;
        auto ecdf = nlohmann::json::array();
        for (const auto& [u, f] : kpi.ecdf) ecdf.push_back({u, f});
        j["ecdf"] = std::move(ecdf);
    }
    return j;
}

std::string ecdf_csv(const KpiSummary& kpi) {
    std::string out = "utility,cum_fraction\n";
    for (const auto& [u, f] : kpi.ecdf) {
        out += fmt_double(u);
        out += ',';
        out += fmt_double(f);
        out += '\n';
    }
    return out;
}

std::string ecdf_svg(const std::string& title, const KpiSummary& kpi) {
    constexpr int width = 640;
    constexpr int height = 420;
    constexpr int margin = 50;
    const int plot_w = width - 2 * margin;
    const int plot_h = height - 2 * margin;

    double x_max = 1.0;
    for (const auto& [u, f] : kpi.ecdf) x_max = std::max(x_max, u);

    const auto px = [&](double u) { return margin + u / x_max * plot_w; };
    const auto py = [&](double f) { return height - margin - f * plot_h; };

    std::string svg;
    char buf[256];
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"420\" "
           "viewBox=\"0 0 640 420\">\n";
    svg += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">%s</text>\n",
                  margin, title.c_str());
    svg += buf;
    // axes
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", margin,
                  height - margin, width - margin, height - margin);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", margin,
                  margin, margin, height - margin);
    svg += buf;
    for (int tick = 0; tick <= 4; ++tick) {
        const double f = tick / 4.0;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%d\" y=\"%.0f\" font-family=\"sans-serif\" font-size=\"11\" "
                      "text-anchor=\"end\">%.2f</text>\n",
                      margin - 6, py(f) + 4, f);
        svg += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.0f\" y=\"%d\" font-family=\"sans-serif\" font-size=\"11\" "
                      "text-anchor=\"middle\">%.2f</text>\n",
                      px(f * x_max), height - margin + 16, f * x_max);
        svg += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"12\" "
                  "text-anchor=\"middle\">end utility</text>\n",
                  width / 2, height - 10);
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"16\" y=\"%d\" font-family=\"sans-serif\" font-size=\"12\" "
                  "transform=\"rotate(-90 16 %d)\" text-anchor=\"middle\">CDF</text>\n",
                  height / 2, height / 2);
    svg += buf;

    if (!kpi.ecdf.empty()) {
        // Step function: vertical rise at each distinct utility value.
        std::string path;
        double prev_f = 0.0;
        for (const auto& [u, f] : kpi.ecdf) {
            std::snprintf(buf, sizeof(buf), "%s%.2f %.2f L%.2f %.2f", path.empty() ? "M" : " L",
                          px(u), py(prev_f), px(u), py(f));
            path += buf;
            prev_f = f;
        }
        svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::string events_ndjson(const std::vector<EventRecord>& events) {
    std::string out;
    for (const EventRecord& ev : events) {
        nlohmann::json j;
        j["t"] = ev.time;
        j["kind"] = to_string(ev.kind);
        j["task"] = ev.task;
        j["queue_len"] = ev.queue_len_after;
        out += j.dump();
        out += '\n';
    }
    return out;
}

nlohmann::json scenario_to_json(const ScenarioConfig& config) {
    nlohmann::json j;
    j["arrival_rate"] = config.arrival_rate;
    j["local_model"] = {{"lo", config.local_model.lo}, {"hi", config.local_model.hi}};
    j["offload_overhead"] = config.offload_overhead;

    nlohmann::json server;
    if (config.server.kind == ServerProcess::Kind::Poisson) {
        server["kind"] = "poisson";
        server["rate"] = config.server.rate;
    } else {
        server["kind"] = "mmp";
        server["rates"] = config.server.mmp.rates;
        server["transition"] = config.server.mmp.transition;
        server["period"] = config.server.mmp.period;
        server["initial_state"] = config.server.initial_state;
    }
    j["server"] = std::move(server);

    nlohmann::json policy;
    switch (config.policy.kind) {
        case Policy::Kind::RiskPerfect:
            policy["kind"] = "risk-perfect";
            policy["outage"] = config.policy.outage;
            break;
        case Policy::Kind::RiskImperfect:
            policy["kind"] = "risk-imperfect";
            policy["outage"] = config.policy.outage;
            policy["stopping"] =
                config.policy.stopping == StoppingRule::Optimal ? "optimal" : "fixed";
            if (config.policy.stopping == StoppingRule::FixedMinimum)
                policy["min_observations"] = config.policy.min_observations;
            if (config.policy.prior_rate) policy["prior_rate"] = *config.policy.prior_rate;
            break;
        case Policy::Kind::Truncate:
            policy["kind"] = "truncate";
            policy["max_queue_len"] = config.policy.max_queue_len;
            break;
        case Policy::Kind::Preempt:
            policy["kind"] = "preempt";
            policy["timeout"] = config.policy.preempt_timeout;
            break;
        case Policy::Kind::PatientFcfs:
            policy["kind"] = "patient";
            break;
    }
    j["policy"] = std::move(policy);

    j["utility"] = {{"u0", config.utility.u0}, {"beta", config.utility.beta}};
    j["horizon"] = config.horizon;
    j["period"] = config.period;
    j["replications"] = config.replications;
    j["master_seed"] = config.master_seed;
    return j;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    ScenarioConfig config;
    config.arrival_rate = j.at("arrival_rate").get<double>();
    if (j.contains("local_model")) {
        config.local_model.lo = j.at("local_model").at("lo").get<double>();
        config.local_model.hi = j.at("local_model").at("hi").get<double>();
    }
    config.offload_overhead = j.value("offload_overhead", 0.0);

    const nlohmann::json& server = j.at("server");
    const std::string server_kind = server.at("kind").get<std::string>();
    if (server_kind == "poisson") {
        config.server.kind = ServerProcess::Kind::Poisson;
        config.server.rate = server.at("rate").get<double>();
    } else if (server_kind == "mmp") {
        config.server.kind = ServerProcess::Kind::Mmp;
        config.server.mmp.rates = server.at("rates").get<std::vector<double>>();
        config.server.mmp.transition =
            server.at("transition").get<std::vector<std::vector<double>>>();
        config.server.mmp.period = server.value("period", 1.0);
        config.server.initial_state = server.value("initial_state", 0);
    } else {
        throw std::invalid_argument("scenario: unknown server kind '" + server_kind + "'");
    }

    const nlohmann::json& policy = j.at("policy");
    const std::string policy_kind = policy.at("kind").get<std::string>();
    if (policy_kind == "risk-perfect") {
        config.policy.kind = Policy::Kind::RiskPerfect;
        config.policy.outage = policy.at("outage").get<double>();
    } else if (policy_kind == "risk-imperfect") {
        config.policy.kind = Policy::Kind::RiskImperfect;
        config.policy.outage = policy.at("outage").get<double>();
        const std::string stopping = policy.value("stopping", "optimal");
        if (stopping == "optimal") {
            config.policy.stopping = StoppingRule::Optimal;
        } else if (stopping == "fixed") {
            config.policy.stopping = StoppingRule::FixedMinimum;
            config.policy.min_observations = policy.at("min_observations").get<int>();
        } else {
            throw std::invalid_argument("scenario: unknown stopping rule '" + stopping + "'");
        }
        if (policy.contains("prior_rate"))
            config.policy.prior_rate = policy.at("prior_rate").get<double>();
    } else if (policy_kind == "truncate") {
        config.policy.kind = Policy::Kind::Truncate;
        config.policy.max_queue_len = policy.at("max_queue_len").get<int>();
    } else if (policy_kind == "preempt") {
        config.policy.kind = Policy::Kind::Preempt;
        config.policy.preempt_timeout = policy.at("timeout").get<double>();
    } else if (policy_kind == "patient") {
        config.policy.kind = Policy::Kind::PatientFcfs;
    } else {
        throw std::invalid_argument("scenario: unknown policy kind '" + policy_kind + "'");
    }

    if (j.contains("utility")) {
        config.utility.u0 = j.at("utility").value("u0", 1.0);
        config.utility.beta = j.at("utility").value("beta", 0.1);
    }
    config.horizon = j.value("horizon", 300.0);
    config.period = j.value("period", 1.0);
    config.replications = j.value("replications", 10);
    config.master_seed = j.value("master_seed", std::uint64_t{12345});
    config.validate();
    return config;
}

}  // namespace mecq
