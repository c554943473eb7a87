#include "mecq/belief.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mecq {

void PoissonBelief::validate() const {
    if (position < 1) throw std::invalid_argument("PoissonBelief: position must be >= 1");
    if (!(rate > 0.0)) throw std::invalid_argument("PoissonBelief: rate must be > 0");
    if (!(offload_overhead >= 0.0))
        throw std::invalid_argument("PoissonBelief: offload_overhead must be >= 0");
}

namespace {

void check_outage(double outage) {
    if (!(outage > 0.0 && outage < 1.0))
        throw std::domain_error("outage risk must be in (0, 1)");
}

}  // namespace

double entrance_quantile(const PoissonBelief& belief, double outage) {
    belief.validate();
    check_outage(outage);
    return belief.offload_overhead +
           erlang_quantile(ErlangDist{belief.position, belief.rate}, 1.0 - outage);
}

double waiting_quantile(const PoissonBelief& belief, double outage) {
    belief.validate();
    check_outage(outage);
    return erlang_quantile(ErlangDist{belief.position, belief.rate}, 1.0 - outage);
}

Choice decide_offload(double local_quantile, double cloud_quantile) {
    return local_quantile <= cloud_quantile ? Choice::Local : Choice::Cloud;
}

void MmpSpec::validate() const {
    const std::size_t d = rates.size();
    if (d < 1) throw std::invalid_argument("MmpSpec: at least one state required");
    for (double r : rates)
        if (!(r > 0.0)) throw std::invalid_argument("MmpSpec: rates must be > 0");
    if (transition.size() != d) throw std::invalid_argument("MmpSpec: transition must be DxD");
    for (const auto& row : transition) {
        if (row.size() != d) throw std::invalid_argument("MmpSpec: transition must be DxD");
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument("MmpSpec: transition entries must be in [0, 1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("MmpSpec: transition rows must sum to 1");
    }
    if (!(period > 0.0)) throw std::invalid_argument("MmpSpec: period must be > 0");
}

namespace {

void check_pmf(const StatePmf& pmf, std::size_t d) {
    if (pmf.size() != d) throw std::domain_error("state pmf has wrong dimension");
    double sum = 0.0;
    for (double p : pmf) {
        if (!(p >= 0.0)) throw std::domain_error("state pmf entries must be >= 0");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::domain_error("state pmf must sum to 1");
}

StatePmf evolve_once(const StatePmf& pmf, const MmpSpec& spec) {
    const std::size_t d = spec.states();
    StatePmf next(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) next[j] += pmf[i] * spec.transition[i][j];
    return next;
}

double mean_rate(const StatePmf& pmf, const MmpSpec& spec) {
    double mu = 0.0;
    for (std::size_t i = 0; i < spec.states(); ++i) mu += pmf[i] * spec.rates[i];
    return mu;
}

}  // namespace

StatePmf mmp_evolve(StatePmf pmf, const MmpSpec& spec, long steps) {
    spec.validate();
    check_pmf(pmf, spec.states());
    if (steps < 0) throw std::domain_error("mmp_evolve: steps must be >= 0");
    for (long s = 0; s < steps; ++s) pmf = evolve_once(pmf, spec);
    return pmf;
}

void MmpBelief::validate() const {
    if (spec == nullptr) throw std::invalid_argument("MmpBelief: spec must be set");
    spec->validate();
    if (position < 1) throw std::invalid_argument("MmpBelief: position must be >= 1");
    check_pmf(state_pmf, spec->states());
}

double mmp_cumulative_rate(const MmpBelief& belief, double horizon) {
    belief.validate();
    if (horizon < 0.0) throw std::domain_error("mmp_cumulative_rate: horizon must be >= 0");
    const MmpSpec& spec = *belief.spec;
    if (spec.states() == 1) return spec.rates[0] * horizon;  // exact degenerate reduction

    const double t0 = spec.period;
    double remaining = horizon;
    double acc = 0.0;
    StatePmf pmf = belief.state_pmf;
    while (remaining > 0.0) {
        const double span = remaining >= t0 ? t0 : remaining;
        acc += mean_rate(pmf, spec) * span;
        remaining -= span;
        if (remaining > 0.0) pmf = evolve_once(pmf, spec);
    }
    return acc;
}

double mmp_waiting_cdf(const MmpBelief& belief, double x) {
    belief.validate();
    if (x < 0.0) throw std::domain_error("mmp_waiting_cdf: x must be >= 0");
    if (belief.spec->states() == 1)
        return erlang_cdf(ErlangDist{belief.position, belief.spec->rates[0]}, x);
    return poisson_tail_cdf(belief.position, mmp_cumulative_rate(belief, x));
}

double mmp_waiting_quantile(const MmpBelief& belief, double outage) {
    belief.validate();
    check_outage(outage);
    if (belief.spec->states() == 1)
        return erlang_quantile(ErlangDist{belief.position, belief.spec->rates[0]}, 1.0 - outage);

    const double q = 1.0 - outage;
    double min_rate = belief.spec->rates[0];
    for (double r : belief.spec->rates) min_rate = std::min(min_rate, r);
    double hi = belief.position / min_rate;
    while (mmp_waiting_cdf(belief, hi) < q) {
        hi *= 2.0;
        if (hi > 1e300) return std::numeric_limits<double>::infinity();
    }
    double lo = 0.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mmp_waiting_cdf(belief, mid) < q)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace mecq
