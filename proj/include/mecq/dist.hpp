#pragma once

#include <stdexcept>

namespace mecq {

// Latency-discounted task reward: u(dt) = u0 * exp(-beta * dt).
struct UtilitySpec {
    double u0 = 1.0;    // reward at zero delay, > 0
    double beta = 0.1;  // decay exponent per time unit, >= 0

    void validate() const {
        if (!(u0 > 0.0)) throw std::invalid_argument("UtilitySpec: u0 must be > 0");
        if (!(beta >= 0.0)) throw std::invalid_argument("UtilitySpec: beta must be >= 0");
    }
};

double utility(const UtilitySpec& spec, double delta_t);

// Exponential holding time, parameterized by its mean.
struct ExpDist {
    double mean = 1.0;

    void validate() const {
        if (!(mean > 0.0)) throw std::invalid_argument("ExpDist: mean must be > 0");
    }
};

double exp_quantile(const ExpDist& dist, double q);

// Sum of `shape` iid exponentials with the given rate. Shape is the queue
// position: completions remaining, including the task's own.
struct ErlangDist {
    int shape = 1;
    double rate = 1.0;

    void validate() const {
        if (shape < 1) throw std::invalid_argument("ErlangDist: shape must be >= 1");
        if (!(rate > 0.0)) throw std::invalid_argument("ErlangDist: rate must be > 0");
    }
};

double erlang_pdf(const ErlangDist& dist, double x);
double erlang_cdf(const ErlangDist& dist, double x);
double erlang_quantile(const ErlangDist& dist, double q);

// Quantile of the unit-rate Erlang(shape); erlang_quantile(k, mu, q) equals
// unit_erlang_quantile(k, q) / mu since the family is closed under scaling.
double unit_erlang_quantile(int shape, double q);

// Poisson tail sum 1 - sum_{i=0}^{shape-1} L^i e^{-L} / i!, evaluated in
// log space so cumulative-rate arguments up to several hundred stay stable.
double poisson_tail_cdf(int shape, double cumulative_rate);

}  // namespace mecq
