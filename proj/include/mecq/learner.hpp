#pragma once

#include <cstddef>
#include <vector>

#include "mecq/dist.hpp"

namespace mecq {

struct Observation {
    int position;  // queue position at observation time
    double time;
};

// Timestamped queue-position observations for one task. Times are strictly
// increasing and positions non-increasing; violations throw.
class ObservationLog {
public:
    void record(int position, double time);

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const Observation& front() const { return entries_.front(); }
    const Observation& back() const { return entries_.back(); }
    const std::vector<Observation>& entries() const { return entries_; }

    // t_N - t_1: total observed span; the entrance observation contributes
    // no interval.
    double span() const;

    ObservationLog without_last() const;

private:
    std::vector<Observation> entries_;
};

// Coefficient c(N) of the rate estimate c(N) / (t_N - t_1). The
// bias-corrected form (N-1)(N-3)/(N-2) vanishes at N = 3, which would read
// two observed service intervals as a dead server; the maximum-likelihood
// coefficient N-1 covers N <= 3 and the corrected form applies from N = 4.
double estimator_coefficient(std::size_t n_observations);

// Service-rate estimate from the log: +infinity with a single observation,
// otherwise estimator_coefficient(N) / span.
double estimate_rate(const ObservationLog& log);

// Service rate at which the Erlang(position) risk quantile equals the local
// quantile: the indifference point of the offloading rule.
double critical_rate(int position, double local_quantile, double outage);

// Sampling density of the rate estimate c/S with S ~ Erlang(N-1,
// plug_in_rate), by change of variables: f(x) = f_S(c/x) * c / x^2.
double estimator_density(const ObservationLog& log, double plug_in_rate, double x);

// Per-task learning state for the imperfect-QSI reneging policy.
struct LearnerState {
    ObservationLog log;
    double mu_hat;       // estimate_rate(log), kept in sync by record()
    double outage;       // P_o
    ExpDist local_dist;  // this task's local-latency model
    UtilitySpec utility;

    LearnerState(double outage_risk, ExpDist local, UtilitySpec u);

    void record(int position, double time);

    LearnerState with_log(ObservationLog replacement) const;
};

// Expected utility loss from a decision error at `position`, with the true
// rate replaced by the plug-in estimate. Two branches split at the critical
// rate: estimate above it integrates the error mass below (waiting looks
// right, the estimate may wrongly say renege), otherwise the mass above.
// Clamped to >= 0.
double expected_loss(int position, double t, const LearnerState& state);

// expected_loss / u(t): the u0 and common decay factor cancel, leaving a
// time-free quantity that stays finite at large t. No clamp.
double normalized_loss_unclamped(int position, const LearnerState& state);

// Loss reduction from the newest observation: loss at the old position with
// the old log minus loss at the new position with the updated log.
double learning_gain(int position, double t, const LearnerState& before,
                     const LearnerState& after);

// Utility decay over one expected inter-service interval, u(t) - u(t + 1/mu).
// Zero when the estimate is infinite; independent of position.
double learning_cost(double t, const LearnerState& state);

// Stopping rule: renege iff the normalized learning gain no longer exceeds
// the normalized cost AND the local risk quantile does not exceed the cloud
// one at the estimated rate. False until three observations are logged.
bool should_renege(int position, double t, const LearnerState& state);

}  // namespace mecq
