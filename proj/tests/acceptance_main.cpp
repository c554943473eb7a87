// Acceptance suite: one pass/fail line per criterion check, nonzero exit on
// any failure. Benchmarks run at full scale (10 replications x 300 periods),
// so the whole suite takes a few minutes.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mecq/experiments.hpp"
#include "mecq/learner.hpp"
#include "mecq/report.hpp"

using namespace mecq;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& label, const std::string& detail) {
    std::printf("[%s] %s — %s\n", ok ? "PASS" : "FAIL", label.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// ---- criterion 1: no reneging with perfect QSI in Poisson queues ----

void criterion1() {
    const auto start = std::chrono::steady_clock::now();
    long total_reneges = 0;
    for (int i = 0; i < 50; ++i) {
        ScenarioConfig cfg = builtin_scenario(i % 2 == 0 ? "poisson-low/R10"
                                                         : "poisson-high/R0.1");
        const SimResult result =
            run_simulation(cfg, derive_seed(777, static_cast<std::uint64_t>(i)));
        for (const Task& task : result.tasks)
            if (task.served_by == ServedBy::LocalAfterRenege) ++total_reneges;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                            .count();
    check(total_reneges == 0, "criterion 1: zero reneges across 50 perfect-QSI Poisson runs",
          std::to_string(total_reneges) + " reneges, " + num(secs) + " s (target < 30 s)");
    check(secs < 30.0, "criterion 1: runtime", num(secs) + " s");
}

// ---- criterion 2: Erlang machinery against sampling and round-trip ----

void criterion2() {
    double worst_ks = 0.0;
    Rng rng(31337);
    for (int k : {1, 3, 8}) {
        for (double mu : {1.0, 2.0}) {
            std::vector<double> sums(100000);
            for (double& s : sums) {
                double acc = 0.0;
                for (int i = 0; i < k; ++i) acc += rng.exponential_rate(mu);
                s = acc;
            }
            std::sort(sums.begin(), sums.end());
            const double n = static_cast<double>(sums.size());
            double ks = 0.0;
            for (std::size_t i = 0; i < sums.size(); ++i) {
                const double f = erlang_cdf(ErlangDist{k, mu}, sums[i]);
                ks = std::max(ks, std::abs(f - (i + 1) / n));
                ks = std::max(ks, std::abs(f - i / n));
            }
            worst_ks = std::max(worst_ks, ks);
        }
    }
    check(worst_ks <= 0.02, "criterion 2: erlang_cdf vs 1e5-sample oracle",
          "worst KS " + num(worst_ks) + " (limit 0.02)");

    double worst_rt = 0.0;
    for (int k = 1; k <= 50; ++k)
        for (double mu : {0.5, 1.0, 2.0})
            for (double q : {0.001, 0.5, 0.9, 0.999}) {
                const double x = erlang_quantile(ErlangDist{k, mu}, q);
                worst_rt = std::max(worst_rt, std::abs(erlang_cdf(ErlangDist{k, mu}, x) - q));
            }
    check(worst_rt <= 1e-8, "criterion 2: quantile round-trip on the grid",
          "worst |cdf(quantile(q)) - q| = " + std::to_string(worst_rt));
}

// ---- criteria 3-5: benchmark table reproduction ----

std::map<std::string, KpiSummary> run_bench(const std::string& table) {
    std::map<std::string, KpiSummary> out;
    for (const auto& [name, cfg] : bench_table(table)) {
        out[name] = run_monte_carlo(cfg);
        std::fprintf(stderr, "  bench %s done\n", name.c_str());
    }
    return out;
}

void criterion3(const std::map<std::string, KpiSummary>& t2) {
    const KpiSummary& low_r10 = t2.at("poisson-low/R10");
    check(std::abs(low_r10.admission_rate - 0.9718) <= 0.03,
          "criterion 3: poisson-low/R10 admission 97.18% +/- 3pp",
          "measured " + num(low_r10.admission_rate * 100.0) + "%");
    check(std::abs(low_r10.avg_utility - 0.4222) <= 0.04,
          "criterion 3: poisson-low/R10 avg utility 0.4222 +/- 0.04",
          "measured " + num(low_r10.avg_utility));
    check(std::abs(low_r10.median_utility - 0.4029) <= 0.05,
          "criterion 3: poisson-low/R10 median utility 0.4029 +/- 0.05",
          "measured " + num(low_r10.median_utility));

    const KpiSummary& high_p3 = t2.at("poisson-high/P3");
    check(high_p3.avg_utility <= 0.15, "criterion 3: poisson-high/P3 avg <= 0.15",
          "measured " + num(high_p3.avg_utility));
    check(high_p3.median_utility <= 0.05, "criterion 3: poisson-high/P3 median <= 0.05",
          "measured " + num(high_p3.median_utility));

    const double r_avg =
        0.5 * (t2.at("poisson-high/R0.1").avg_utility + t2.at("poisson-high/R10").avg_utility);
    const double t_avg =
        0.5 * (t2.at("poisson-high/T5").avg_utility + t2.at("poisson-high/T10").avg_utility);
    const double p_avg =
        0.5 * (t2.at("poisson-high/P3").avg_utility + t2.at("poisson-high/P6").avg_utility);
    check(r_avg >= t_avg + 0.05,
          "criterion 3: high-load ordering R > T by >= 0.05 (family averages)",
          "R " + num(r_avg) + " vs T " + num(t_avg));
    check(t_avg >= p_avg + 0.05,
          "criterion 3: high-load ordering T > P by >= 0.05 (family averages)",
          "T " + num(t_avg) + " vs P " + num(p_avg));
}

void criterion4(const std::map<std::string, KpiSummary>& t3) {
    check(t3.at("mmpC/R0.1").avg_utility >= 0.38 && t3.at("mmpC/R10").avg_utility >= 0.38,
          "criterion 4: scenario C reneging avg >= 0.38 (both P_o)",
          "R0.1 " + num(t3.at("mmpC/R0.1").avg_utility) + ", R10 " +
              num(t3.at("mmpC/R10").avg_utility));
    check(t3.at("mmpC/P3").avg_utility <= 0.10 && t3.at("mmpC/P6").avg_utility <= 0.10,
          "criterion 4: scenario C preemption avg <= 0.10",
          "P3 " + num(t3.at("mmpC/P3").avg_utility) + ", P6 " +
              num(t3.at("mmpC/P6").avg_utility));

    const double r_avg = 0.5 * (t3.at("mmpA/R0.1").avg_utility + t3.at("mmpA/R10").avg_utility);
    const double t_avg = 0.5 * (t3.at("mmpA/T5").avg_utility + t3.at("mmpA/T10").avg_utility);
    const double p_avg = 0.5 * (t3.at("mmpA/P3").avg_utility + t3.at("mmpA/P6").avg_utility);
    const double spread =
        std::max({r_avg, t_avg, p_avg}) - std::min({r_avg, t_avg, p_avg});
    check(spread <= 0.07, "criterion 4: scenario A family averages within 0.07",
          "R " + num(r_avg) + ", T " + num(t_avg) + ", P " + num(p_avg) + ", spread " +
              num(spread));
}

void criterion5(const std::map<std::string, KpiSummary>& t4) {
    const double opt_high = t4.at("imperfect-high/optlearn").avg_utility;
    const double f3_high = t4.at("imperfect-high/fixed3").avg_utility;
    const double f6_high = t4.at("imperfect-high/fixed6").avg_utility;
    const double perfect_high = t4.at("imperfect-high/perfect").avg_utility;
    check(opt_high >= 1.15 * f6_high,
          "criterion 5: high-load optimal learning >= 1.15x fixed-6",
          "opt " + num(opt_high) + " vs fixed6 " + num(f6_high));
    const double worst_ratio = perfect_high / std::max({opt_high, f3_high, f6_high});
    check(worst_ratio >= 4.0,
          "criterion 5: high-load perfect QSI >= 4x any imperfect variant",
          "perfect " + num(perfect_high) + ", best imperfect " +
              num(std::max({opt_high, f3_high, f6_high})) + ", ratio " + num(worst_ratio));

    const double opt_low = t4.at("imperfect-low/optlearn").avg_utility;
    const double perfect_low = t4.at("imperfect-low/perfect").avg_utility;
    check(std::abs(opt_low - perfect_low) <= 0.05,
          "criterion 5: low-load optimal learning within 0.05 of perfect QSI",
          "opt " + num(opt_low) + " vs perfect " + num(perfect_low));
}

// ---- criterion 6: estimator properties ----

void criterion6() {
    int worst_hits = 1000000;
    for (double mu : {1.0, 2.0}) {
        int hits = 0;
        for (int seed = 0; seed < 200; ++seed) {
            Rng rng(derive_seed(6000, static_cast<std::uint64_t>(seed) * 2 +
                                          (mu > 1.5 ? 1 : 0)));
            ObservationLog log;
            double t = 0.0;
            const int n = 10000;
            for (int i = 0; i < n; ++i) {
                log.record(n - i, t);
                t += rng.exponential_rate(mu);
            }
            if (std::abs(estimate_rate(log) - mu) / mu <= 0.05) ++hits;
        }
        worst_hits = std::min(worst_hits, hits);
    }
    check(worst_hits >= 180,
          "criterion 6: estimator within 5% at N=1e4 with frequency >= 0.9",
          std::to_string(worst_hits) + "/200 seeds in band (need >= 180)");

    ObservationLog one;
    one.record(5, 0.0);
    const bool case1 = std::isinf(estimate_rate(one));
    ObservationLog two = one;
    two.record(4, 0.5);
    const bool case2 = estimate_rate(two) == 2.0;
    ObservationLog five;
    five.record(9, 0.0);
    five.record(8, 0.5);
    five.record(7, 1.0);
    five.record(6, 1.5);
    five.record(5, 2.0);
    const bool case3 = std::abs(estimate_rate(five) - 4.0 / 3.0) < 1e-12;
    check(case1 && case2 && case3, "criterion 6: estimator case arithmetic",
          std::string("N=1 inf: ") + (case1 ? "ok" : "BAD") +
              ", N=2 -> 2.0: " + (case2 ? "ok" : "BAD") +
              ", N=5 -> 4/3: " + (case3 ? "ok" : "BAD"));
}

// ---- criterion 7: MMP machinery ----

void criterion7() {
    MmpSpec spec;
    spec.rates = {2.0, 1.0};
    spec.transition = {{0.2, 0.8}, {0.1, 0.9}};
    spec.period = 1.0;

    Rng rng(70707);
    const int k = 2;
    std::vector<double> samples(100000);
    for (double& sample : samples) {
        std::size_t state = 1;
        double t = 0.0;
        int remaining = k;
        while (remaining > 0) {
            const double gap = rng.exponential_rate(spec.rates[state]);
            const double boundary = std::floor(t) + 1.0;
            if (t + gap < boundary) {
                t += gap;
                --remaining;
            } else {
                t = boundary;
                state = rng.pick(spec.transition[state]);
            }
        }
        sample = t;
    }
    std::sort(samples.begin(), samples.end());
    const MmpBelief belief{k, {0.0, 1.0}, &spec};
    const double n = static_cast<double>(samples.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = mmp_waiting_cdf(belief, samples[i]);
        ks = std::max(ks, std::abs(f - (i + 1) / n));
        ks = std::max(ks, std::abs(f - i / n));
    }
    check(ks <= 0.02, "criterion 7: mmp_waiting_cdf vs event-driven oracle (scenario C)",
          "KS " + num(ks) + " (limit 0.02)");

    ScenarioConfig poisson_cfg = builtin_scenario("poisson-low/R10");
    poisson_cfg.replications = 4;
    ScenarioConfig degenerate_cfg = poisson_cfg;
    degenerate_cfg.server.kind = ServerProcess::Kind::Mmp;
    degenerate_cfg.server.mmp.rates = {2.0};
    degenerate_cfg.server.mmp.transition = {{1.0}};
    degenerate_cfg.server.mmp.period = 1.0;
    degenerate_cfg.server.initial_state = 0;

    const KpiSummary a = run_monte_carlo(poisson_cfg);
    const KpiSummary b = run_monte_carlo(degenerate_cfg);
    const bool identical = a.task_count == b.task_count && a.avg_utility == b.avg_utility &&
                           a.median_utility == b.median_utility &&
                           a.admission_rate == b.admission_rate && a.ecdf == b.ecdf &&
                           a.balk_count == b.balk_count;
    check(identical, "criterion 7: degenerate MMP matches Poisson KPIs bit-for-bit",
          "avg " + num(a.avg_utility) + " vs " + num(b.avg_utility));
}

// ---- criterion 8: determinism and conservation ----

void criterion8() {
    const fs::path base = fs::temp_directory_path() / "mecq_acceptance_c8";
    fs::remove_all(base);
    fs::create_directories(base);
    const std::string cli = MECQ_CLI_PATH;
    bool ran = true;
    for (const char* tag : {"a", "b"}) {
        const std::string cmd = cli + " bench table2 --seed 1 --outdir " +
                                (base / tag).string() + " >/dev/null 2>&1";
        if (std::system(cmd.c_str()) != 0) ran = false;
    }
    bool identical = ran;
    std::size_t compared = 0;
    if (ran) {
        for (const auto& entry : fs::directory_iterator(base / "a")) {
            const fs::path peer = base / "b" / entry.path().filename();
            std::ifstream fa(entry.path(), std::ios::binary);
            std::ifstream fb(peer, std::ios::binary);
            std::ostringstream sa, sb;
            sa << fa.rdbuf();
            sb << fb.rdbuf();
            if (sa.str() != sb.str() || sa.str().empty()) identical = false;
            ++compared;
        }
    }
    check(identical && compared >= 14,
          "criterion 8: repeated bench table2 --seed 1 is byte-identical",
          std::to_string(compared) + " artifacts compared");
    fs::remove_all(base);

    bool conserved = true;
    for (const char* name : {"poisson-high/R10", "poisson-high/T5", "poisson-high/P3",
                             "poisson-low/patient", "mmpC/R10", "imperfect-high/fixed3"}) {
        ScenarioConfig cfg = builtin_scenario(name);
        cfg.horizon = name == std::string("imperfect-high/fixed3") ? 150.0 : 300.0;
        const SimResult result = run_simulation(cfg, 8);
        long balk = 0, renege = 0, preempted = 0, served = 0;
        for (const Task& task : result.tasks) {
            switch (task.served_by) {
                case ServedBy::LocalDevice: ++balk; break;
                case ServedBy::LocalAfterRenege: ++renege; break;
                case ServedBy::LocalAfterPreempt: ++preempted; break;
                case ServedBy::MecServer: ++served; break;
            }
        }
        if (balk + renege + preempted + served != static_cast<long>(result.tasks.size()))
            conserved = false;
    }
    check(conserved, "criterion 8: balk + renege + preempt + served == arrivals",
          "checked across 6 policy/server combinations");
}

}  // namespace

int main() {
    std::printf("== acceptance suite ==\n");
    criterion1();
    criterion2();

    std::fprintf(stderr, "running bench table2...\n");
    const auto t2 = run_bench("table2");
    criterion3(t2);

    std::fprintf(stderr, "running bench table3...\n");
    const auto t3 = run_bench("table3");
    criterion4(t3);

    std::fprintf(stderr, "running bench table4...\n");
    const auto t4 = run_bench("table4");
    criterion5(t4);

    criterion6();
    criterion7();
    criterion8();

    std::printf("== %s: %d failure(s) ==\n", g_failures == 0 ? "PASS" : "FAIL", g_failures);
    return g_failures == 0 ? 0 : 1;
}
