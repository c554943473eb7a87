#include "mecq/dist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

namespace mecq {

double utility(const UtilitySpec& spec, double delta_t) {
    spec.validate();
    if (delta_t < 0.0) throw std::domain_error("utility: delta_t must be >= 0");
    return spec.u0 * std::exp(-spec.beta * delta_t);
}

double exp_quantile(const ExpDist& dist, double q) {
    dist.validate();
    if (!(q >= 0.0 && q < 1.0)) throw std::domain_error("exp_quantile: q must be in [0, 1)");
    return dist.mean * std::log(1.0 / (1.0 - q));
}

double poisson_tail_cdf(int shape, double cumulative_rate) {
    if (shape < 1) throw std::invalid_argument("poisson_tail_cdf: shape must be >= 1");
    if (cumulative_rate < 0.0) throw std::domain_error("poisson_tail_cdf: negative rate");
    if (cumulative_rate == 0.0) return 0.0;

    // Each term is a Poisson pmf value in [0, 1]; computing it as
    // exp(i*log(L) - L - lgamma(i+1)) avoids overflow of L^i and i!.
    const double log_rate = std::log(cumulative_rate);
    double head = 0.0;
    for (int i = 0; i < shape; ++i) {
        head += std::exp(i * log_rate - cumulative_rate - std::lgamma(i + 1.0));
    }
    if (head > 1.0) head = 1.0;  // guard against summed rounding
    return 1.0 - head;
}

double erlang_pdf(const ErlangDist& dist, double x) {
    dist.validate();
    if (x < 0.0) throw std::domain_error("erlang_pdf: x must be >= 0");
    if (x == 0.0) return dist.shape == 1 ? dist.rate : 0.0;
    const double log_pdf = dist.shape * std::log(dist.rate) + (dist.shape - 1) * std::log(x) -
                           dist.rate * x - std::lgamma(static_cast<double>(dist.shape));
    return std::exp(log_pdf);
}

double erlang_cdf(const ErlangDist& dist, double x) {
    dist.validate();
    if (x < 0.0) throw std::domain_error("erlang_cdf: x must be >= 0");
    return poisson_tail_cdf(dist.shape, dist.rate * x);
}

namespace {

// Bracketing + bisection inverse of a monotone CDF. The bracket is doubled
// from the seed until the CDF exceeds q, then bisected to an interval
// narrower than both the absolute tolerance and 1e-9 in CDF value.
double bisect_quantile(double q, double seed_upper, const auto& cdf) {
    if (q <= 0.0) return 0.0;
    double hi = seed_upper > 0.0 ? seed_upper : 1.0;
    while (cdf(hi) < q) {
        hi *= 2.0;
        if (hi > 1e300) return std::numeric_limits<double>::infinity();
    }
    double lo = 0.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < q)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double erlang_quantile(const ErlangDist& dist, double q) {
    dist.validate();
    if (!(q >= 0.0 && q < 1.0)) throw std::domain_error("erlang_quantile: q must be in [0, 1)");
    const double seed = dist.shape / dist.rate;
    return bisect_quantile(q, seed, [&](double x) { return erlang_cdf(dist, x); });
}

double unit_erlang_quantile(int shape, double q) {
    // Memoized: policy code asks for the same (shape, q) pairs on every
    // decision and the rate-scaled quantile g_k(q)/mu reuses them.
    thread_local std::map<std::pair<int, double>, double> cache;
    const auto key = std::make_pair(shape, q);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    const double value = erlang_quantile(ErlangDist{shape, 1.0}, q);
    cache.emplace(key, value);
    return value;
}

}  // namespace mecq
