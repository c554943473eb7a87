#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mecq/belief.hpp"
#include "mecq/dist.hpp"
#include "mecq/learner.hpp"
#include "mecq/rng.hpp"

namespace mecq {

enum class ServedBy { MecServer, LocalDevice, LocalAfterRenege, LocalAfterPreempt };

struct Task {
    int id = 0;
    double arrival_time = 0.0;
    double local_mean = 0.0;  // per-task mean local latency, drawn once
    std::vector<std::pair<double, Choice>> decision_trace;
    ServedBy served_by = ServedBy::LocalDevice;
    double completion_time = -1.0;
    double end_utility = 0.0;
    int observation_count = 0;  // logged QSI observations (imperfect policy)
};

struct ServerProcess {
    enum class Kind { Poisson, Mmp };
    Kind kind = Kind::Poisson;
    double rate = 1.0;  // Poisson service rate
    MmpSpec mmp;
    int initial_state = 0;

    void validate() const;
};

enum class StoppingRule { Optimal, FixedMinimum };

struct Policy {
    enum class Kind { RiskPerfect, RiskImperfect, Truncate, Preempt, PatientFcfs };
    Kind kind = Kind::PatientFcfs;
    double outage = 0.1;           // risk policies
    int max_queue_len = 1;         // Truncate: balk when waiting + in-service == this
    double preempt_timeout = 1.0;  // Preempt: max MEC service time
    StoppingRule stopping = StoppingRule::Optimal;  // RiskImperfect
    int min_observations = 3;                       // FixedMinimum stopping
    std::optional<double> prior_rate;               // optional entry belief mu0

    void validate() const;
};

enum class EventKind {
    Arrival,
    ServiceStart,
    ServiceComplete,
    Renege,
    Balk,
    Preempt,
    StateSwitch,
    QsiUpdate
};

struct EventRecord {
    double time = 0.0;
    EventKind kind = EventKind::Arrival;
    int task = -1;  // -1 when not task-bound (StateSwitch)
    int queue_len_after = 0;
};

// Uniform bounds for the per-task mean local latency.
struct LocalModel {
    double lo = 2.0;
    double hi = 10.0;

    void validate() const;
};

struct ScenarioConfig {
    double arrival_rate = 1.5;
    LocalModel local_model;
    double offload_overhead = 0.0;
    ServerProcess server;
    Policy policy;
    UtilitySpec utility;
    double horizon = 300.0;
    double period = 1.0;  // T0; MMP state transitions once per period
    int replications = 10;
    std::uint64_t master_seed = 12345;

    void validate() const;
};

struct SimResult {
    std::vector<Task> tasks;
    std::vector<EventRecord> events;
};

// One seeded run: Poisson arrivals over [0, horizon], then a drain phase
// until every generated task has completed somewhere. Identical
// (scenario, seed) pairs produce identical output.
SimResult run_simulation(const ScenarioConfig& scenario, std::uint64_t seed);

// ---- policy decision points, exposed for direct testing ----

struct BeliefContext {
    const ServerProcess* server = nullptr;
    int server_state = 0;  // realized MMP state at decision time
    double offload_overhead = 0.0;
    UtilitySpec utility;
};

enum class ArrivalDecision { EnterQueue, Balk };

// Entry decision for a task finding `queue_len` tasks in the system.
ArrivalDecision on_arrival(const Policy& policy, int queue_len, double local_mean,
                           const BeliefContext& ctx);

enum class UpdateDecision { Stay, Renege };

// Reaction of a waiting task to a delivered QSI update at position
// `new_position`. For RiskImperfect the observation is recorded into
// `learner` as a side effect before the stopping rule runs.
UpdateDecision on_position_update(const Policy& policy, double local_mean,
                                  LearnerState* learner, int new_position, double t,
                                  const BeliefContext& ctx);

enum class ServiceTick { Continue, PreemptToLocal };

// Preemption check for the in-service task; a no-op for every other policy.
ServiceTick on_service_tick(const Policy& policy, double service_elapsed);

// Completion instant of a service starting at time t. MMP states are
// realized period by period (boundaries on the global T0 grid) with a fresh
// exponential after each boundary; memorylessness makes this the piecewise-
// hazard law. `state` is advanced along the realized path.
double draw_service_completion(const ServerProcess& server, double t, int& state, Rng& rng);

const char* to_string(EventKind kind);
const char* to_string(ServedBy served);

}  // namespace mecq
