#pragma once

#include <vector>

#include "mecq/dist.hpp"

namespace mecq {

// Remaining-sojourn model for a task at position `position` in a queue with
// constant Poisson service. `offload_overhead` applies only at entrance.
struct PoissonBelief {
    int position = 1;              // completions remaining, own included; >= 1
    double rate = 1.0;             // service rate, > 0
    double offload_overhead = 0.0; // tau_s, >= 0

    void validate() const;
};

// Quantile of the entrance-time sojourn: tau_s + Erlang(position, rate)
// inverted at probability 1 - outage.
double entrance_quantile(const PoissonBelief& belief, double outage);

// Same with the entrance overhead dropped: the in-queue remaining wait.
double waiting_quantile(const PoissonBelief& belief, double outage);

enum class Choice { Local, Cloud };

// Risk-quantile offloading rule; ties go to Local.
Choice decide_offload(double local_quantile, double cloud_quantile);

// Markov-modulated Poisson service: D rates selected by a discrete-time
// state chain that transitions once per period.
struct MmpSpec {
    std::vector<double> rates;                    // per-state service rates, > 0
    std::vector<std::vector<double>> transition;  // DxD row-stochastic matrix
    double period = 1.0;                          // T0

    std::size_t states() const { return rates.size(); }
    void validate() const;
};

using StatePmf = std::vector<double>;

// Applies y <- y * P (row-vector convention) `steps` times.
StatePmf mmp_evolve(StatePmf pmf, const MmpSpec& spec, long steps);

struct MmpBelief {
    int position = 1;
    StatePmf state_pmf;
    const MmpSpec* spec = nullptr;

    void validate() const;
};

// Expected completions over (now, now + horizon): the per-period mean rate
// rates . y accumulated piecewise, with y advanced one transition per period
// and the final fractional period held at its period's rate.
double mmp_cumulative_rate(const MmpBelief& belief, double horizon);

// CDF of the remaining wait at `position`: the Poisson tail sum evaluated at
// the cumulative expected rate. Reduces exactly to erlang_cdf when D = 1.
double mmp_waiting_cdf(const MmpBelief& belief, double x);

// Bisection inverse of mmp_waiting_cdf at probability 1 - outage.
double mmp_waiting_quantile(const MmpBelief& belief, double outage);

}  // namespace mecq
