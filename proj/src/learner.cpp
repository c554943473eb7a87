#include "mecq/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace mecq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void ObservationLog::record(int position, double time) {
    if (position < 1) throw std::invalid_argument("ObservationLog: position must be >= 1");
    if (!entries_.empty()) {
        if (!(time > entries_.back().time))
            throw std::invalid_argument("ObservationLog: times must be strictly increasing");
        if (position > entries_.back().position)
            throw std::invalid_argument("ObservationLog: positions must be non-increasing");
    }
    entries_.push_back(Observation{position, time});
}

double ObservationLog::span() const {
    if (entries_.empty()) throw std::logic_error("ObservationLog: empty log has no span");
    return entries_.back().time - entries_.front().time;
}

ObservationLog ObservationLog::without_last() const {
    if (entries_.empty()) throw std::logic_error("ObservationLog: empty log");
    ObservationLog trimmed;
    trimmed.entries_.assign(entries_.begin(), entries_.end() - 1);
    return trimmed;
}

double estimator_coefficient(std::size_t n) {
    if (n < 2) throw std::invalid_argument("estimator_coefficient: needs >= 2 observations");
    if (n <= 3) return static_cast<double>(n - 1);
    const double nd = static_cast<double>(n);
    return (nd - 1.0) * (nd - 3.0) / (nd - 2.0);
}

double estimate_rate(const ObservationLog& log) {
    if (log.empty()) throw std::invalid_argument("estimate_rate: empty log");
    if (log.size() == 1) return kInf;
    return estimator_coefficient(log.size()) / log.span();
}

double critical_rate(int position, double local_quantile, double outage) {
    if (position < 1) throw std::invalid_argument("critical_rate: position must be >= 1");
    if (!(local_quantile > 0.0))
        throw std::domain_error("critical_rate: local_quantile must be > 0");
    if (!(outage > 0.0 && outage < 1.0))
        throw std::domain_error("critical_rate: outage must be in (0, 1)");
    return unit_erlang_quantile(position, 1.0 - outage) / local_quantile;
}

double estimator_density(const ObservationLog& log, double plug_in_rate, double x) {
    if (log.size() < 3)
        throw std::invalid_argument("estimator_density: needs >= 3 observations");
    if (!(plug_in_rate > 0.0))
        throw std::domain_error("estimator_density: plug_in_rate must be > 0");
    if (!(x > 0.0)) throw std::domain_error("estimator_density: x must be > 0");
    const double c = estimator_coefficient(log.size());
    const int shape = static_cast<int>(log.size()) - 1;
    const double s = c / x;
    return erlang_pdf(ErlangDist{shape, plug_in_rate}, s) * c / (x * x);
}

LearnerState::LearnerState(double outage_risk, ExpDist local, UtilitySpec u)
    : mu_hat(kInf), outage(outage_risk), local_dist(local), utility(u) {
    if (!(outage > 0.0 && outage < 1.0))
        throw std::invalid_argument("LearnerState: outage must be in (0, 1)");
    local_dist.validate();
    utility.validate();
}

void LearnerState::record(int position, double time) {
    log.record(position, time);
    mu_hat = estimate_rate(log);
}

LearnerState LearnerState::with_log(ObservationLog replacement) const {
    LearnerState copy = *this;
    copy.log = std::move(replacement);
    copy.mu_hat = copy.log.empty() ? kInf : estimate_rate(copy.log);
    return copy;
}

namespace {

// Adaptive Simpson with Richardson correction. `tol` is absolute for the
// current segment and halves per split.
template <class F>
double simpson_segment(const F& f, double a, double fa, double b, double fb, double m,
                       double fm, double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_segment(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_segment(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

template <class F>
double simpson_on(const F& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_segment(f, a, fa, b, fb, m, fm, whole, tol, 40);
}

// Integrates f over [a, b] with interior knots forced at the density's mass
// region; a plain adaptive pass can step over a narrow peak entirely.
template <class F>
double integrate_with_knots(const F& f, double a, double b, const std::vector<double>& knots,
                            double rel_tol) {
    std::vector<double> pts;
    pts.push_back(a);
    for (double k : knots)
        if (k > a && k < b) pts.push_back(k);
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());

    double coarse = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double mid = 0.5 * (pts[i] + pts[i + 1]);
        coarse += std::abs(f(mid)) * (pts[i + 1] - pts[i]);
    }
    const double tol = std::max(1e-14, rel_tol * std::max(coarse, 1e-6));

    double total = 0.0;
    const double seg_tol = tol / static_cast<double>(pts.size());
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        total += simpson_on(f, pts[i], pts[i + 1], seg_tol);
    return total;
}

constexpr double kQuadRelTol = 1e-5;

// Integral of exp(-beta * k / x) * f_mu(x) over (0, upper).
double error_mass_below(const LearnerState& state, int position, double upper) {
    if (!(upper > 0.0)) return 0.0;
    const double beta = state.utility.beta;
    const double mu = state.mu_hat;
    const auto integrand = [&](double x) {
        if (x <= 0.0) return 0.0;
        return std::exp(-beta * position / x) * estimator_density(state.log, mu, x);
    };
    std::vector<double> knots;
    for (double m : {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) knots.push_back(mu * m);
    return integrate_with_knots(integrand, 0.0, upper, knots, kQuadRelTol);
}

// Same integrand over (lower, +inf), via x = lower / (1 - s) on s in [0, 1).
double error_mass_above(const LearnerState& state, int position, double lower) {
    const double beta = state.utility.beta;
    const double mu = state.mu_hat;
    const auto integrand = [&](double s) {
        if (s >= 1.0) return 0.0;
        const double x = lower / (1.0 - s);
        const double jacobian = lower / ((1.0 - s) * (1.0 - s));
        return std::exp(-beta * position / x) * estimator_density(state.log, mu, x) * jacobian;
    };
    std::vector<double> knots;
    for (double m : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        const double x = mu * m;
        if (x > lower) knots.push_back(1.0 - lower / x);
    }
    return integrate_with_knots(integrand, 0.0, 1.0, knots, kQuadRelTol);
}

}  // namespace

double normalized_loss_unclamped(int position, const LearnerState& state) {
    if (position < 1) throw std::invalid_argument("expected_loss: position must be >= 1");
    if (state.log.size() < 3)
        throw std::invalid_argument("expected_loss: needs >= 3 observations");

    const double local_q = exp_quantile(state.local_dist, 1.0 - state.outage);
    const double mu_c = critical_rate(position, local_q, state.outage);
    const double local_term = std::exp(-state.utility.beta * state.local_dist.mean);

    if (state.mu_hat > mu_c)
        return local_term - error_mass_below(state, position, mu_c);
    return error_mass_above(state, position, mu_c) - local_term;
}

double expected_loss(int position, double t, const LearnerState& state) {
    const double unclamped = normalized_loss_unclamped(position, state);
    return utility(state.utility, t) * std::max(0.0, unclamped);
}

double learning_gain(int position, double t, const LearnerState& before,
                     const LearnerState& after) {
    if (after.log.size() != before.log.size() + 1)
        throw std::invalid_argument("learning_gain: after must extend before by one entry");
    const Observation& newest = after.log.back();
    if (newest.position != position || newest.time != t)
        throw std::invalid_argument("learning_gain: newest observation mismatch");
    for (std::size_t i = 0; i < before.log.size(); ++i) {
        const Observation& a = before.log.entries()[i];
        const Observation& b = after.log.entries()[i];
        if (a.position != b.position || a.time != b.time)
            throw std::invalid_argument("learning_gain: histories diverge");
    }
    return expected_loss(position + 1, t, before) - expected_loss(position, t, after);
}

double learning_cost(double t, const LearnerState& state) {
    if (!(state.mu_hat > 0.0)) throw std::domain_error("learning_cost: estimate must be > 0");
    if (std::isinf(state.mu_hat)) return 0.0;
    const double u_now = utility(state.utility, t);
    return u_now * (1.0 - std::exp(-state.utility.beta / state.mu_hat));
}

bool should_renege(int position, double t, const LearnerState& state) {
    (void)t;  // normalized forms cancel the common decay factor
    if (state.log.size() < 3) return false;
    if (std::isinf(state.mu_hat)) return false;  // cloud quantile 0: stay

    const double local_q = exp_quantile(state.local_dist, 1.0 - state.outage);
    const double cloud_q = unit_erlang_quantile(position, 1.0 - state.outage) / state.mu_hat;
    if (!(local_q <= cloud_q)) return false;  // risk conjunct: cloud still looks better

    // Normalized stopping test: G' <= C'.
    const double cost_norm = 1.0 - std::exp(-state.utility.beta / state.mu_hat);
    const LearnerState before = state.with_log(state.log.without_last());
    if (before.log.size() < 3) return false;  // prior loss undefined: keep learning
    const double gain_norm = std::max(0.0, normalized_loss_unclamped(position + 1, before)) -
                             std::max(0.0, normalized_loss_unclamped(position, state));
    return gain_norm <= cost_norm;
}

}  // namespace mecq
