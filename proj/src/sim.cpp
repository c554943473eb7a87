#include "mecq/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>

namespace mecq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void ServerProcess::validate() const {
    if (kind == Kind::Poisson) {
        if (!(rate > 0.0)) throw std::invalid_argument("ServerProcess: rate must be > 0");
        return;
    }
    mmp.validate();
    if (initial_state < 0 || static_cast<std::size_t>(initial_state) >= mmp.states())
        throw std::invalid_argument("ServerProcess: initial_state out of range");
}

void Policy::validate() const {
    switch (kind) {
        case Kind::RiskPerfect:
        case Kind::RiskImperfect:
            if (!(outage > 0.0 && outage < 1.0))
                throw std::invalid_argument("Policy: outage must be in (0, 1)");
            if (kind == Kind::RiskImperfect) {
                if (stopping == StoppingRule::FixedMinimum && min_observations < 1)
                    throw std::invalid_argument("Policy: min_observations must be >= 1");
                if (prior_rate && !(*prior_rate > 0.0))
                    throw std::invalid_argument("Policy: prior_rate must be > 0");
            }
            break;
        case Kind::Truncate:
            if (max_queue_len < 1)
                throw std::invalid_argument("Policy: max_queue_len must be >= 1");
            break;
        case Kind::Preempt:
            if (!(preempt_timeout > 0.0))
                throw std::invalid_argument("Policy: preempt_timeout must be > 0");
            break;
        case Kind::PatientFcfs:
            break;
    }
}

void LocalModel::validate() const {
    if (!(lo > 0.0 && hi > lo))
        throw std::invalid_argument("LocalModel: bounds must satisfy 0 < lo < hi");
}

void ScenarioConfig::validate() const {
    if (!(arrival_rate > 0.0))
        throw std::invalid_argument("ScenarioConfig: arrival_rate must be > 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("ScenarioConfig: horizon must be > 0");
    if (!(period > 0.0)) throw std::invalid_argument("ScenarioConfig: period must be > 0");
    if (replications < 1)
        throw std::invalid_argument("ScenarioConfig: replications must be >= 1");
    if (!(offload_overhead >= 0.0))
        throw std::invalid_argument("ScenarioConfig: offload_overhead must be >= 0");
    local_model.validate();
    utility.validate();
    server.validate();
    policy.validate();
    if (server.kind == ServerProcess::Kind::Mmp) {
        if (std::abs(server.mmp.period - period) > 1e-12)
            throw std::invalid_argument("ScenarioConfig: MMP period must match T0");
        if (policy.kind == Policy::Kind::RiskImperfect)
            throw std::invalid_argument(
                "ScenarioConfig: imperfect-QSI learning supports Poisson service only");
    }
}

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::Arrival: return "arrival";
        case EventKind::ServiceStart: return "service_start";
        case EventKind::ServiceComplete: return "service_complete";
        case EventKind::Renege: return "renege";
        case EventKind::Balk: return "balk";
        case EventKind::Preempt: return "preempt";
        case EventKind::StateSwitch: return "state_switch";
        case EventKind::QsiUpdate: return "qsi_update";
    }
    return "unknown";
}

const char* to_string(ServedBy served) {
    switch (served) {
        case ServedBy::MecServer: return "mec_server";
        case ServedBy::LocalDevice: return "local_device";
        case ServedBy::LocalAfterRenege: return "local_after_renege";
        case ServedBy::LocalAfterPreempt: return "local_after_preempt";
    }
    return "unknown";
}

namespace {

double local_quantile(double local_mean, double outage) {
    return exp_quantile(ExpDist{local_mean}, 1.0 - outage);
}

double cloud_entrance_quantile(int position, const BeliefContext& ctx, double outage) {
    const ServerProcess& server = *ctx.server;
    if (server.kind == ServerProcess::Kind::Poisson)
        return entrance_quantile(PoissonBelief{position, server.rate, ctx.offload_overhead},
                                 outage);
    StatePmf pmf(server.mmp.states(), 0.0);
    pmf[static_cast<std::size_t>(ctx.server_state)] = 1.0;
    return ctx.offload_overhead +
           mmp_waiting_quantile(MmpBelief{position, std::move(pmf), &server.mmp}, outage);
}

double cloud_waiting_quantile(int position, const BeliefContext& ctx, double outage) {
    const ServerProcess& server = *ctx.server;
    if (server.kind == ServerProcess::Kind::Poisson)
        return waiting_quantile(PoissonBelief{position, server.rate, 0.0}, outage);
    StatePmf pmf(server.mmp.states(), 0.0);
    pmf[static_cast<std::size_t>(ctx.server_state)] = 1.0;
    return mmp_waiting_quantile(MmpBelief{position, std::move(pmf), &server.mmp}, outage);
}

}  // namespace

ArrivalDecision on_arrival(const Policy& policy, int queue_len, double local_mean,
                           const BeliefContext& ctx) {
    if (queue_len < 0) throw std::invalid_argument("on_arrival: queue_len must be >= 0");
    switch (policy.kind) {
        case Policy::Kind::PatientFcfs:
        case Policy::Kind::Preempt:
            return ArrivalDecision::EnterQueue;
        case Policy::Kind::Truncate:
            return queue_len >= policy.max_queue_len ? ArrivalDecision::Balk
                                                     : ArrivalDecision::EnterQueue;
        case Policy::Kind::RiskPerfect: {
            const double lq = local_quantile(local_mean, policy.outage);
            const double cq = cloud_entrance_quantile(queue_len + 1, ctx, policy.outage);
            return decide_offload(lq, cq) == Choice::Local ? ArrivalDecision::Balk
                                                           : ArrivalDecision::EnterQueue;
        }
        case Policy::Kind::RiskImperfect: {
            if (!policy.prior_rate) return ArrivalDecision::EnterQueue;  // mu_hat = +inf
            const double lq = local_quantile(local_mean, policy.outage);
            const double cq =
                ctx.offload_overhead +
                erlang_quantile(ErlangDist{queue_len + 1, *policy.prior_rate},
                                1.0 - policy.outage);
            return decide_offload(lq, cq) == Choice::Local ? ArrivalDecision::Balk
                                                           : ArrivalDecision::EnterQueue;
        }
    }
    return ArrivalDecision::EnterQueue;
}

UpdateDecision on_position_update(const Policy& policy, double local_mean,
                                  LearnerState* learner, int new_position, double t,
                                  const BeliefContext& ctx) {
    if (new_position < 1)
        throw std::invalid_argument("on_position_update: position must be >= 1");
    switch (policy.kind) {
        case Policy::Kind::PatientFcfs:
        case Policy::Kind::Truncate:
        case Policy::Kind::Preempt:
            return UpdateDecision::Stay;
        case Policy::Kind::RiskPerfect: {
            // Poisson service: the waiting-time belief is time-invariant and
            // falls with every advance, so a task that entered never leaves.
            if (ctx.server->kind == ServerProcess::Kind::Poisson) return UpdateDecision::Stay;
            const double lq = local_quantile(local_mean, policy.outage);
            const double cq = cloud_waiting_quantile(new_position, ctx, policy.outage);
            return decide_offload(lq, cq) == Choice::Local ? UpdateDecision::Renege
                                                           : UpdateDecision::Stay;
        }
        case Policy::Kind::RiskImperfect: {
            if (learner == nullptr)
                throw std::invalid_argument("on_position_update: learner state required");
            learner->record(new_position, t);
            if (policy.stopping == StoppingRule::Optimal)
                return should_renege(new_position, t, *learner) ? UpdateDecision::Renege
                                                                : UpdateDecision::Stay;
            // Fixed-minimum baseline: the saturation test is replaced by an
            // observation-count floor; the risk conjunct is unchanged.
            if (learner->log.size() < static_cast<std::size_t>(policy.min_observations))
                return UpdateDecision::Stay;
            if (std::isinf(learner->mu_hat)) return UpdateDecision::Stay;
            const double lq = local_quantile(local_mean, policy.outage);
            const double cq =
                unit_erlang_quantile(new_position, 1.0 - policy.outage) / learner->mu_hat;
            return lq <= cq ? UpdateDecision::Renege : UpdateDecision::Stay;
        }
    }
    return UpdateDecision::Stay;
}

ServiceTick on_service_tick(const Policy& policy, double service_elapsed) {
    if (policy.kind == Policy::Kind::Preempt && service_elapsed >= policy.preempt_timeout)
        return ServiceTick::PreemptToLocal;
    return ServiceTick::Continue;
}

double draw_service_completion(const ServerProcess& server, double t, int& state, Rng& rng) {
    server.validate();
    if (server.kind == ServerProcess::Kind::Poisson) return t + rng.exponential_rate(server.rate);

    const MmpSpec& mmp = server.mmp;
    double now = t;
    for (;;) {
        const double rate = mmp.rates[static_cast<std::size_t>(state)];
        const double gap = rng.exponential_rate(rate);
        // Next boundary on the global grid strictly after `now`.
        const double boundary = (std::floor(now / mmp.period) + 1.0) * mmp.period;
        if (now + gap < boundary) return now + gap;
        now = boundary;
        state = static_cast<int>(rng.pick(mmp.transition[static_cast<std::size_t>(state)]));
    }
}

// ---------------------------------------------------------------------------
// engine
// ---------------------------------------------------------------------------

namespace {

enum class EvType { ServiceComplete = 0, PreemptTimeout = 1, StateSwitch = 2, Arrival = 3 };

struct Ev {
    double time;
    EvType type;  // enum value doubles as the same-timestamp rank
    std::uint64_t seq;
    long session = 0;  // service identity for completion/timeout validity
    long version = 0;  // completion redraw identity
};

struct EvLater {
    bool operator()(const Ev& a, const Ev& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.type != b.type) return static_cast<int>(a.type) > static_cast<int>(b.type);
        return a.seq > b.seq;
    }
};

class Engine {
public:
    Engine(const ScenarioConfig& cfg, std::uint64_t seed)
        : cfg_(cfg),
          arrivals_rng_(derive_seed(seed, 1)),
          local_mean_rng_(derive_seed(seed, 2)),
          local_draw_rng_(derive_seed(seed, 3)),
          service_rng_(derive_seed(seed, 4)),
          mmp_rng_(derive_seed(seed, 5)),
          is_mmp_(cfg.server.kind == ServerProcess::Kind::Mmp),
          server_state_(is_mmp_ ? cfg.server.initial_state : 0) {}

    SimResult run() {
        schedule_next_arrival(0.0);
        if (is_mmp_) push(Ev{cfg_.period, EvType::StateSwitch, next_seq_++});

        while (!fel_.empty()) {
            const Ev ev = fel_.top();
            fel_.pop();
            clock_ = ev.time;
            switch (ev.type) {
                case EvType::Arrival: handle_arrival(); break;
                case EvType::ServiceComplete: handle_service_complete(ev); break;
                case EvType::PreemptTimeout: handle_preempt_timeout(ev); break;
                case EvType::StateSwitch: handle_state_switch(ev); break;
            }
        }
        if (!queue_.empty()) throw std::logic_error("simulation ended with queued tasks");
        for (std::size_t i = 0; i < tasks_.size(); ++i) {
            if (tasks_[i].completion_time < tasks_[i].arrival_time)
                throw std::logic_error("simulation ended with an incomplete task");
            if (rt_[i].learner)
                tasks_[i].observation_count = static_cast<int>(rt_[i].learner->log.size());
        }
        return SimResult{std::move(tasks_), std::move(events_)};
    }

private:
    struct Runtime {
        int last_position = 0;
        std::optional<LearnerState> learner;
    };

    void push(Ev ev) { fel_.push(ev); }

    void record(EventKind kind, int task, int queue_len) {
        events_.push_back(EventRecord{clock_, kind, task, queue_len});
    }

    BeliefContext ctx() const {
        return BeliefContext{&cfg_.server, server_state_, cfg_.offload_overhead, cfg_.utility};
    }

    int queue_len() const { return static_cast<int>(queue_.size()); }

    void schedule_next_arrival(double from) {
        const double t = from + arrivals_rng_.exponential_rate(cfg_.arrival_rate);
        if (t <= cfg_.horizon) {
            next_arrival_pending_ = true;
            push(Ev{t, EvType::Arrival, next_seq_++});
        } else {
            next_arrival_pending_ = false;
        }
    }

    void finish_locally(Task& task, ServedBy how) {
        task.served_by = how;
        task.decision_trace.emplace_back(clock_, Choice::Local);
        task.completion_time = clock_ + local_draw_rng_.exponential_mean(task.local_mean);
        task.end_utility = utility(cfg_.utility, task.completion_time - task.arrival_time);
    }

    void handle_arrival() {
        const int id = static_cast<int>(tasks_.size());
        tasks_.push_back(Task{});
        rt_.push_back(Runtime{});
        Task& task = tasks_.back();
        task.id = id;
        task.arrival_time = clock_;
        task.local_mean = local_mean_rng_.uniform(cfg_.local_model.lo, cfg_.local_model.hi);

        schedule_next_arrival(clock_);

        const ArrivalDecision decision =
            on_arrival(cfg_.policy, queue_len(), task.local_mean, ctx());
        if (decision == ArrivalDecision::Balk) {
            finish_locally(task, ServedBy::LocalDevice);
            record(EventKind::Balk, id, queue_len());
            return;
        }

        queue_.push_back(id);
        const int position = queue_len();
        rt_[id].last_position = position;
        task.decision_trace.emplace_back(clock_, Choice::Cloud);
        record(EventKind::Arrival, id, position);

        if (cfg_.policy.kind == Policy::Kind::RiskImperfect) {
            rt_[id].learner.emplace(cfg_.policy.outage, ExpDist{task.local_mean}, cfg_.utility);
            rt_[id].learner->record(position, clock_);
            record(EventKind::QsiUpdate, id, position);
        }

        if (!server_busy_) start_service();
    }

    void start_service() {
        if (queue_.empty() || server_busy_) return;
        const int id = queue_.front();
        server_busy_ = true;
        ++session_;
        ++version_;
        const double rate = is_mmp_
                                ? cfg_.server.mmp.rates[static_cast<std::size_t>(server_state_)]
                                : cfg_.server.rate;
        const double completion = clock_ + service_rng_.exponential_rate(rate);
        push(Ev{completion, EvType::ServiceComplete, next_seq_++, session_, version_});
        if (cfg_.policy.kind == Policy::Kind::Preempt)
            push(Ev{clock_ + cfg_.policy.preempt_timeout, EvType::PreemptTimeout, next_seq_++,
                    session_});
        record(EventKind::ServiceStart, id, queue_len());
    }

    void handle_service_complete(const Ev& ev) {
        if (!server_busy_ || ev.session != session_ || ev.version != version_) return;
        const int id = queue_.front();
        queue_.pop_front();
        server_busy_ = false;
        Task& task = tasks_[id];
        task.served_by = ServedBy::MecServer;
        task.completion_time = clock_;
        task.end_utility = utility(cfg_.utility, clock_ - task.arrival_time);
        record(EventKind::ServiceComplete, id, queue_len());
        deliver_position_updates();
        start_service();
    }

    void handle_preempt_timeout(const Ev& ev) {
        if (!server_busy_ || ev.session != session_) return;
        const int id = queue_.front();
        queue_.pop_front();
        server_busy_ = false;
        finish_locally(tasks_[id], ServedBy::LocalAfterPreempt);
        record(EventKind::Preempt, id, queue_len());
        deliver_position_updates();
        start_service();
    }

    void handle_state_switch(const Ev&) {
        const std::size_t state = static_cast<std::size_t>(server_state_);
        const int next = static_cast<int>(mmp_rng_.pick(cfg_.server.mmp.transition[state]));
        const bool changed = next != server_state_;
        server_state_ = next;
        if (changed) {
            record(EventKind::StateSwitch, -1, queue_len());
            if (server_busy_) {
                // Memoryless service: the remaining time restarts at the new
                // rate from the boundary.
                ++version_;
                const double rate =
                    cfg_.server.mmp.rates[static_cast<std::size_t>(server_state_)];
                push(Ev{clock_ + service_rng_.exponential_rate(rate), EvType::ServiceComplete,
                        next_seq_++, session_, version_});
            }
            deliver_state_reevals();
        }
        if (!queue_.empty() || next_arrival_pending_)
            push(Ev{clock_ + cfg_.period, EvType::StateSwitch, next_seq_++});
    }

    bool policy_reacts_to_updates() const {
        if (cfg_.policy.kind == Policy::Kind::RiskImperfect) return true;
        if (cfg_.policy.kind == Policy::Kind::RiskPerfect) return true;
        return false;
    }

    // Delivers the net position change to each waiting task, front to back,
    // at the current instant. A renege during the walk shifts the tasks
    // behind it before their own delivery, so every task sees exactly one
    // observation per event time.
    void deliver_position_updates() {
        if (!policy_reacts_to_updates()) {
            for (std::size_t i = 0; i < queue_.size(); ++i)
                rt_[queue_[i]].last_position = static_cast<int>(i) + 1;
            return;
        }
        std::size_t i = 0;
        while (i < queue_.size()) {
            const int id = queue_[i];
            const int new_k = static_cast<int>(i) + 1;
            if (new_k == rt_[id].last_position) {
                ++i;
                continue;
            }
            rt_[id].last_position = new_k;
            if (deliver_update(id, new_k))
                renege_at(i);
            else
                ++i;
        }
    }

    // State deliveries re-evaluate waiting tasks behind the in-service head;
    // the head's ongoing service is non-preemptive under risk policies.
    void deliver_state_reevals() {
        if (cfg_.policy.kind != Policy::Kind::RiskPerfect) return;
        std::size_t i = 1;
        while (i < queue_.size()) {
            const int id = queue_[i];
            rt_[id].last_position = static_cast<int>(i) + 1;
            if (deliver_update(id, static_cast<int>(i) + 1))
                renege_at(i);
            else
                ++i;
        }
    }

    // Returns true when the task reneges upon this delivery.
    bool deliver_update(int id, int new_k) {
        const Policy& policy = cfg_.policy;
        if (policy.kind == Policy::Kind::RiskImperfect) {
            record(EventKind::QsiUpdate, id, queue_len());
            return on_position_update(policy, tasks_[id].local_mean, &*rt_[id].learner, new_k,
                                      clock_, ctx()) == UpdateDecision::Renege;
        }
        if (policy.kind == Policy::Kind::RiskPerfect) {
            if (is_mmp_) {
                record(EventKind::QsiUpdate, id, queue_len());
                return mmp_reeval_wants_renege(id, new_k);
            }
            return on_position_update(policy, tasks_[id].local_mean, nullptr, new_k, clock_,
                                      ctx()) == UpdateDecision::Renege;
        }
        return false;
    }

    // Cached point-mass MMP waiting quantile; equivalent to the
    // on_position_update evaluation but memoized per (position, state).
    bool mmp_reeval_wants_renege(int id, int position) {
        const auto key = std::make_pair(position, server_state_);
        auto it = mmp_quantile_cache_.find(key);
        if (it == mmp_quantile_cache_.end()) {
            StatePmf pmf(cfg_.server.mmp.states(), 0.0);
            pmf[static_cast<std::size_t>(server_state_)] = 1.0;
            const double q = mmp_waiting_quantile(
                MmpBelief{position, std::move(pmf), &cfg_.server.mmp}, cfg_.policy.outage);
            it = mmp_quantile_cache_.emplace(key, q).first;
        }
        const double lq =
            exp_quantile(ExpDist{tasks_[id].local_mean}, 1.0 - cfg_.policy.outage);
        return decide_offload(lq, it->second) == Choice::Local;
    }

    void renege_at(std::size_t index) {
        const int id = queue_[static_cast<std::ptrdiff_t>(index)];
        queue_.erase(queue_.begin() + static_cast<std::ptrdiff_t>(index));
        finish_locally(tasks_[id], ServedBy::LocalAfterRenege);
        record(EventKind::Renege, id, queue_len());
    }

    const ScenarioConfig& cfg_;
    Rng arrivals_rng_;
    Rng local_mean_rng_;
    Rng local_draw_rng_;
    Rng service_rng_;
    Rng mmp_rng_;
    const bool is_mmp_;

    double clock_ = 0.0;
    std::vector<Task> tasks_;
    std::vector<Runtime> rt_;
    std::vector<EventRecord> events_;
    std::deque<int> queue_;

    int server_state_ = 0;
    bool server_busy_ = false;
    long session_ = 0;
    long version_ = 0;
    bool next_arrival_pending_ = false;
    std::uint64_t next_seq_ = 0;

    std::priority_queue<Ev, std::vector<Ev>, EvLater> fel_;
    std::map<std::pair<int, int>, double> mmp_quantile_cache_;
};

}  // namespace

SimResult run_simulation(const ScenarioConfig& scenario, std::uint64_t seed) {
    scenario.validate();
    Engine engine(scenario, seed);
    return engine.run();
}

}  // namespace mecq
