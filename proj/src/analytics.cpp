#include "bats/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "bats/normal.hpp"

namespace bats {

void NetworkParams::validate() const {
    auto fail = [](const char* field, const char* why) {
        throw std::invalid_argument(std::string(field) + ": " + why);
    };
    if (k < 1) fail("k", "must be >= 1");
    if (!(p0 >= 0.0 && p0 < 1.0)) fail("p0", "must lie in [0, 1)");
    if (!(p1 > 0.0 && p1 < 1.0)) fail("p1", "must lie in (0, 1)");
    if (!(p2 >= 0.0 && p2 < 1.0)) fail("p2", "must lie in [0, 1)");
    if (p2 > p1) fail("p2", "must not exceed p1");
    if (batch_size < 1) fail("batch_size", "must be >= 1");
    if (file_packets < 1) fail("file_packets", "must be >= 1");
    if (!(eta >= 0.0)) fail("eta", "must be >= 0");
    if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon", "must lie in (0, 1)");
}

namespace analytics {

namespace {

Eigen::VectorXd binomial_pmf(long trials, double p) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(trials + 1);
    if (p <= 0.0) {
        out(0) = 1.0;
        return out;
    }
    if (p >= 1.0) {
        out(trials) = 1.0;
        return out;
    }
    const double lp = std::log(p);
    const double lq = std::log1p(-p);
    const double lg_n = std::lgamma(static_cast<double>(trials) + 1.0);
    for (long i = 0; i <= trials; ++i) {
        const double lc = lg_n - std::lgamma(static_cast<double>(i) + 1.0) -
                          std::lgamma(static_cast<double>(trials - i) + 1.0);
        out(i) = std::exp(lc + static_cast<double>(i) * lp + static_cast<double>(trials - i) * lq);
    }
    return out;
}

}  // namespace

double effective_erasure(const NetworkParams& p) {
    return 1.0 - (1.0 - p.p0) * (1.0 - std::pow(p.p1, p.k));
}

double user_erasure(const NetworkParams& p) { return p.p0 + p.p1 - p.p0 * p.p1; }

double delta_parameter(const NetworkParams& p) { return (1.0 - std::pow(p.p1, p.k - 1)) * user_erasure(p); }

double min_order_quantile(int k) { return normal::quantile(0.625 / (k + 0.25)); }

double min_batches_real(const NetworkParams& p) {
    const double f = p.target_packets();
    const double pb = effective_erasure(p);
    const double alpha = normal::quantile(p.epsilon);  // Q^{-1}(1 - eps), negative for eps < 1/2
    return (2.0 * f - alpha * std::sqrt(4.0 * pb * f)) / (2.0 * p.batch_size * (1.0 - pb));
}

int min_batches(const NetworkParams& p) { return static_cast<int>(std::ceil(min_batches_real(p))); }

double max_batches_real(const NetworkParams& p) {
    const double f = p.target_packets();
    const double ph = user_erasure(p);
    const double b2 = std::pow(min_order_quantile(p.k), 2);
    return (2.0 * f + ph * b2 + std::sqrt(4.0 * ph * b2 * f + ph * b2 * b2)) / (2.0 * p.batch_size * (1.0 - ph));
}

int max_batches(const NetworkParams& p) { return static_cast<int>(std::ceil(max_batches_real(p))); }

double expected_peer_receptions(double t, const NetworkParams& p) {
    return (1.0 - p.p2) * (p.k - 1) * t / p.k;
}

Eigen::VectorXd delta_distribution(const NetworkParams& p) { return binomial_pmf(p.batch_size, delta_parameter(p)); }

Eigen::VectorXd y1_distribution(const NetworkParams& p) {
    return binomial_pmf(p.batch_size, (1.0 - p.p0) * (1.0 - p.p1));
}

Eigen::VectorXd z_given_y1(int y1, const NetworkParams& p) {
    const int m = p.batch_size;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m + 1);
    const Eigen::VectorXd extra = binomial_pmf(m - y1, 1.0 - std::pow(p.p1, p.k - 1));
    out.segment(y1, m - y1 + 1) = extra;
    return out;
}

Eigen::VectorXd y2_distribution(long trials, int n) { return binomial_pmf(trials, 1.0 / n); }

long y2_trials(double t, const NetworkParams& p) { return std::lround(expected_peer_receptions(t, p)); }

double redundancy(double t, int n, const NetworkParams& p) {
    const double pt = delta_parameter(p);
    const double per_batch = expected_peer_receptions(t, p) / n;
    const double mu = per_batch - p.batch_size * pt;
    const double var = per_batch * (1.0 - 1.0 / n) + p.batch_size * pt * (1.0 - pt);
    if (var <= 0.0) return n * std::max(mu, 0.0);
    const double sd = std::sqrt(var);
    return n * std::sqrt(var / (2.0 * std::numbers::pi)) * std::exp(-mu * mu / (2.0 * var)) +
           mu * n * normal::q(-mu / sd);
}

StoppingTerms stopping_terms(double t, int n, const NetworkParams& p) {
    const double nm = static_cast<double>(n) * p.batch_size;
    const double ph = user_erasure(p);
    const double recv = (1.0 - p.p0) * (1.0 - p.p1);
    StoppingTerms s;
    s.mu_d = recv * nm + expected_peer_receptions(t, p) - redundancy(t, n, p);
    s.sigma_d = std::sqrt(nm * recv * ph + t * (p.k - 1) / p.k * (1.0 - p.p2) * p.p2);
    s.margin = s.mu_d + s.sigma_d * min_order_quantile(p.k) - p.target_packets();
    return s;
}

std::optional<std::int64_t> stopping_time(int n, const NetworkParams& p) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    auto f = [&](double t) { return stopping_terms(t, n, p).margin; };
    if (f(0.0) >= 0.0) return 0;

    double tl = 0.0;
    double tu = static_cast<double>(n) * p.batch_size;
    double fl = f(tl);
    double fu = f(tu);
    for (int widen = 0; fu <= 0.0; ++widen) {
        if (widen == 20) return std::nullopt;
        tl = tu;
        fl = fu;
        tu *= 2.0;
        fu = f(tu);
    }
    while (fu - fl > 1.0) {
        const double t = 0.5 * (tl + tu);
        const double ft = f(t);
        if (ft > 0.0) {
            tu = t;
            fu = ft;
        } else {
            tl = t;
            fl = ft;
        }
    }
    // Integer boundary inside the final bracket.
    auto lo = static_cast<std::int64_t>(std::floor(tl));
    auto hi = static_cast<std::int64_t>(std::ceil(tu));
    if (f(static_cast<double>(lo)) >= 0.0) return lo;
    while (hi - lo > 1) {
        const auto mid = lo + (hi - lo) / 2;
        if (f(static_cast<double>(mid)) >= 0.0) hi = mid;
        else lo = mid;
    }
    return hi;
}

Eigen::VectorXd rank_distribution(int n, double t, const NetworkParams& p) {
    const int m = p.batch_size;
    const long trials = y2_trials(t, p);
    const Eigen::VectorXd y1 = y1_distribution(p);
    const Eigen::VectorXd y2 = y2_distribution(trials, n);
    // tail(j) = Pr(Y2 >= j)
    Eigen::VectorXd tail = Eigen::VectorXd::Zero(trials + 2);
    for (long j = trials; j >= 0; --j) tail(j) = tail(j + 1) + y2(j);
    auto y2_at = [&](long j) { return (j >= 0 && j <= trials) ? y2(j) : 0.0; };
    auto tail_at = [&](long j) { return j <= 0 ? 1.0 : (j > trials ? 0.0 : tail(j)); };

    Eigen::VectorXd pr = Eigen::VectorXd::Zero(m + 1);
    for (int i = 0; i <= m; ++i) {
        const Eigen::VectorXd z = z_given_y1(i, p);
        for (int r = i; r <= m; ++r) {
            // Group holds more than r, the user has exactly r in hand.
            const double z_above = z.tail(m - r).sum();
            pr(r) += z_above * y1(i) * y2_at(r - i);
            // Group holds exactly r, the user has received at least r.
            pr(r) += z(r) * y1(i) * tail_at(r - i);
        }
    }
    return pr;
}

Eigen::VectorXd rank_distribution_approx(const NetworkParams& p) {
    const double pk = std::pow(p.p1, p.k);
    const double pb = p.p0 + pk - p.p0 * pk;
    return binomial_pmf(p.batch_size, 1.0 - pb);
}

const PlanPoint& PlanResult::at(int n) const {
    if (n < n_min || n > n_max) throw std::out_of_range("n outside the planned range");
    return curve[static_cast<std::size_t>(n - n_min)];
}

PlanResult optimize_batches(const NetworkParams& p) {
    p.validate();
    PlanResult plan;
    plan.n_min = std::max(1, min_batches(p));
    plan.n_max = std::max(plan.n_min, max_batches(p));
    double best = std::numeric_limits<double>::infinity();
    plan.n_opt = plan.n_max;
    for (int n = plan.n_min; n <= plan.n_max; ++n) {
        PlanPoint pt;
        pt.n = n;
        pt.t = stopping_time(n, p);
        pt.total = pt.t ? static_cast<double>(n) * p.batch_size + static_cast<double>(*pt.t)
                        : std::numeric_limits<double>::infinity();
        if (pt.total < best) {
            best = pt.total;
            plan.n_opt = n;
        }
        plan.curve.push_back(pt);
    }
    return plan;
}

void write_plan_csv(std::ostream& out, const PlanResult& plan, const std::string& comment) {
    out << "# " << comment << '\n';
    out << "n,T,total\n";
    for (const auto& pt : plan.curve) {
        out << pt.n << ',';
        if (pt.t) out << *pt.t << ',' << static_cast<std::int64_t>(pt.total);
        else out << "inf,inf";
        out << '\n';
    }
}

}  // namespace analytics
}  // namespace bats
