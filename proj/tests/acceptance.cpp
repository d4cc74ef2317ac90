// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "bats/analytics.hpp"
#include "bats/decoder.hpp"
#include "bats/experiment.hpp"
#include "bats/sched.hpp"
#include "bats/sim.hpp"
#include "oracles.hpp"

using namespace bats;
using experiment::run_seeds;
using experiment::tv_distance;

namespace {

// Tolerances.
constexpr double kMatrixTol = 5e-5 + 1e-12;  // half a unit in the fourth printed decimal
constexpr double kMatrixSeconds = 1.0;
constexpr int kNstarTol = 3;
constexpr int kNlTolExample2 = 1;
constexpr int kNminTolExperiment = 2;
constexpr double kTTol = 10;
constexpr double kRTol = 10;
constexpr double kPlannerSeconds = 10.0;
constexpr double kConvolutionTol = 1e-10;
constexpr double kSurplusTv = 0.01;
constexpr int kSurplusSamples = 1000000;
constexpr double kLemmaSeconds = 30.0;
constexpr double kRankTv = 0.05;
constexpr double kRankApproxTv = 0.07;
constexpr int kRankSeeds = 100;
constexpr double kRankSeconds = 300.0;
constexpr double kTotalRel = 0.05;
constexpr double kOverheadMax = 0.01;
constexpr int kTotalSeeds = 50;
constexpr double kTotalSeconds = 300.0;
constexpr double kCollapseRel = 0.02;
constexpr int kCollapseSeeds = 200;
constexpr double kSavingRel = 0.10;
constexpr double kRobustMax = 0.05;
constexpr int kRobustSeeds = 30;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Criterion {
    Criterion(int i, std::string n) : id(i), name(std::move(n)) {}

    int id;
    std::string name;
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass &= ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [x]");
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

NetworkParams channel(int f, int k, double p0, double p1, double p2) {
    NetworkParams p;
    p.file_packets = f;
    p.k = k;
    p.p0 = p0;
    p.p1 = p1;
    p.p2 = p2;
    return p;
}

double mean_of(const std::vector<sim::SimReport>& rs, const std::function<double(const sim::SimReport&)>& f) {
    double s = 0.0;
    for (const auto& r : rs) s += f(r);
    return s / static_cast<double>(rs.size());
}

std::vector<sim::SimReport> simulate(const NetworkParams& p, int n, int runs, std::uint64_t seed = 1) {
    sim::SimConfig cfg;
    cfg.params = p;
    cfg.n = n;
    cfg.seed = seed;
    return run_seeds(cfg, runs);
}

bool all_succeeded(const std::vector<sim::SimReport>& rs) {
    for (const auto& r : rs)
        if (!r.success) return false;
    return true;
}

Criterion usefulness_matrix() {
    Criterion c{1, "usefulness matrix and queue for the five-batch illustration"};
    const auto t0 = Clock::now();
    const double printed[4][5] = {
        {0.7500, 0.5000, 0.8750, 0.9375, 0.7500},
        {0.3000, 0.0500, 0.5375, 0.7125, 0.3000},
        {0.0525, 0.0050, 0.2000, 0.3862, 0.0525},
        {0.0075, 0.0005, 0.0448, 0.1410, 0.0075},
    };
    const std::vector<int> counts{2, 1, 3, 4, 2};
    const auto s = sched::build_matrix(counts, 0.5, 0.1, 4);
    double worst = 0.0;
    for (int u = 0; u < 4; ++u)
        for (int i = 0; i < 5; ++i) worst = std::max(worst, std::abs(s(u, i) - printed[u][i]));
    c.require(worst <= kMatrixTol, fmt("max |S - printed| = %.2e", worst));
    const auto q = sched::build_queue(s);
    std::string prefix;
    for (int i = 0; i < 6; ++i) prefix += std::to_string(q[i] + 1) + (i < 5 ? "," : "");
    c.require(prefix == "4,3,1,5,4,3", "queue prefix (1-based) " + prefix);
    const double secs = seconds_since(t0);
    c.require(secs < kMatrixSeconds, fmt("%.3fs", secs));
    return c;
}

Criterion planner() {
    Criterion c{2, "planner headline numbers"};
    const auto t0 = Clock::now();
    const auto five = channel(5000, 5, 0.05, 0.5, 0.1);
    const auto plan5 = analytics::optimize_batches(five);
    c.require(plan5.n_min == 351, fmt("five-user n_l=%d (351)", plan5.n_min));
    c.require(plan5.n_max == 673, fmt("n_u=%d (673)", plan5.n_max));
    c.require(std::abs(plan5.n_opt - 402) <= kNstarTol, fmt("n*=%d (402+-%d)", plan5.n_opt, kNstarTol));

    const int nl3 = analytics::min_batches(channel(1600, 3, 0.05, 0.5, 0.1));
    c.require(std::abs(nl3 - 129) <= kNlTolExample2, fmt("three-user n_l=%d (129+-%d)", nl3, kNlTolExample2));

    const auto lab = channel(2083, 3, 0.05, 0.5, 0.2);
    const auto plan = analytics::optimize_batches(lab);
    c.require(std::abs(plan.n_min - 167) <= kNminTolExperiment, fmt("testbed n_min=%d (167+-%d)", plan.n_min, kNminTolExperiment));
    c.require(std::abs(plan.n_opt - 211) <= kNstarTol, fmt("n*=%d (211+-%d)", plan.n_opt, kNstarTol));
    const auto t211 = analytics::stopping_time(211, lab);
    c.require(t211 && std::abs(static_cast<double>(*t211) - 956) <= kTTol, fmt("T(211)=%lld (956+-%g)", t211 ? static_cast<long long>(*t211) : -1LL, kTTol));
    const auto t167 = analytics::stopping_time(167, lab);
    const double r167 = t167 ? analytics::redundancy(static_cast<double>(*t167), 167, lab) : -1.0;
    c.require(std::abs(r167 - 325) <= kRTol, fmt("R(167)=%.1f (325+-%g)", r167, kRTol));
    const double secs = seconds_since(t0);
    c.require(secs < kPlannerSeconds, fmt("%.2fs", secs));
    return c;
}

Criterion surplus_lemma() {
    Criterion c{3, "group surplus is binomial"};
    const auto t0 = Clock::now();
    Rng rng(301);
    double worst = 0.0;
    for (int m : {4, 8, 16, 32})
        for (int i = 0; i < 100; ++i) {
            NetworkParams p;
            p.batch_size = m;
            p.k = 2 + static_cast<int>(rng.below(15));
            p.p0 = 0.5 * rng.uniform();
            p.p1 = 0.01 + 0.98 * rng.uniform();
            const auto d = analytics::delta_distribution(p);
            for (int delta = 0; delta <= m; ++delta)
                worst = std::max(worst, std::abs(d(delta) - oracle::delta_convolution(delta, m, p.k, p.p0, p.p1)));
        }
    c.require(worst < kConvolutionTol, fmt("max convolution gap %.2e", worst));

    const auto p = channel(1600, 3, 0.05, 0.5, 0.1);
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(17);
    const double keep_user = (1 - p.p0) * (1 - p.p1);
    const double keep_group = 1 - std::pow(p.p1, p.k - 1);
    for (int i = 0; i < kSurplusSamples; ++i) {
        int y1 = 0, extra = 0;
        for (int u = 0; u < 16; ++u) y1 += rng.bernoulli(keep_user);
        for (int u = y1; u < 16; ++u) extra += rng.bernoulli(keep_group);
        hist(extra) += 1.0;
    }
    const double tv = tv_distance(hist / kSurplusSamples, analytics::delta_distribution(p));
    c.require(tv < kSurplusTv, fmt("sampled TV %.4f", tv));
    const double secs = seconds_since(t0);
    c.require(secs < kLemmaSeconds, fmt("%.2fs", secs));
    return c;
}

void rank_check(Criterion& c, const char* label, const NetworkParams& p, int n) {
    const auto rs = simulate(p, n, kRankSeeds);
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(p.batch_size + 1);
    for (const auto& r : rs) hist += r.final_rank_histogram;
    hist /= hist.sum();
    const auto t = analytics::stopping_time(n, p);
    const auto model = analytics::rank_distribution(n, t ? static_cast<double>(*t) : 0.0, p);
    const auto approx = analytics::rank_distribution_approx(p);
    const double tv = tv_distance(hist, model);
    const double tva = tv_distance(hist, approx);
    c.require(all_succeeded(rs), fmt("%s all decoded", label));
    c.require(tv <= kRankTv, fmt("%s TV(model)=%.4f", label, tv));
    c.require(tva <= kRankApproxTv, fmt("%s TV(approx)=%.4f", label, tva));
}

Criterion rank_distribution() {
    Criterion c{4, "decode-time rank distribution"};
    const auto t0 = Clock::now();
    rank_check(c, "three users n=129", channel(1600, 3, 0.05, 0.5, 0.1), 129);
    const auto five = channel(5000, 5, 0.05, 0.5, 0.1);
    rank_check(c, "five users n*", five, analytics::optimize_batches(five).n_opt);
    const double secs = seconds_since(t0);
    c.require(secs < kRankSeconds, fmt("%.1fs", secs));
    return c;
}

Criterion testbed_totals() {
    Criterion c{5, "testbed totals"};
    const auto t0 = Clock::now();
    const auto lab = channel(2083, 3, 0.05, 0.5, 0.2);
    const auto low = simulate(lab, 167, kTotalSeeds);
    const auto opt = simulate(lab, 211, kTotalSeeds);
    const double total167 = mean_of(low, [](auto& r) { return static_cast<double>(r.total_tx); });
    const double phase2 = mean_of(opt, [](auto& r) { return static_cast<double>(r.phase2_tx); });
    const double total211 = mean_of(opt, [](auto& r) { return static_cast<double>(r.total_tx); });
    double overhead = 0.0;
    for (const auto* set : {&low, &opt}) overhead += mean_of(*set, [](auto& r) { return r.mean_overhead(2083); });
    overhead /= 2;
    c.require(all_succeeded(low) && all_succeeded(opt), "all decoded");
    c.require(std::abs(total167 / 4939 - 1) <= kTotalRel, fmt("n=167 total %.0f (4939)", total167));
    c.require(std::abs(phase2 / 968 - 1) <= kTotalRel, fmt("n=211 phase 2 %.0f (968)", phase2));
    c.require(std::abs(total211 / 4344 - 1) <= kTotalRel, fmt("n=211 total %.0f (4344)", total211));
    c.require(overhead <= kOverheadMax, fmt("overhead %.4f", overhead));
    const double secs = seconds_since(t0);
    c.require(secs < kTotalSeconds, fmt("%.1fs", secs));
    return c;
}

double single_phase_mean(const NetworkParams& p, int runs) {
    double s = 0.0;
    for (int i = 0; i < runs; ++i) s += static_cast<double>(sim::run_single_phase(p, 1000 + static_cast<std::uint64_t>(i)).total_tx);
    return s / runs;
}

Criterion single_phase() {
    Criterion c{6, "single-phase comparison"};
    for (double p1 : {0.4, 0.5}) {
        for (int k : {3, 6, 9}) {
            const auto p = channel(2000, k, 0.0, p1, p1);
            const auto plan = analytics::optimize_batches(p);
            const double two = plan.at(plan.n_opt).total;
            const double single = single_phase_mean(p, kCollapseSeeds);
            c.require(plan.n_opt == plan.n_max, fmt("p1=p2=%.1f k=%d n*=%d n_u=%d", p1, k, plan.n_opt, plan.n_max));
            c.require(std::abs(two / single - 1) <= kCollapseRel, fmt("two-phase %.0f vs single %.0f", two, single));
        }
    }
    const struct { double p1, p2, saving; } points[] = {{0.5, 0.1, 563}, {0.4, 0.2, 108}};
    for (const auto& pt : points) {
        const auto p = channel(2000, 9, 0.0, pt.p1, pt.p2);
        const auto plan = analytics::optimize_batches(p);
        const double saving = static_cast<double>(plan.n_max) * p.batch_size - plan.at(plan.n_opt).total;
        c.require(std::abs(saving / pt.saving - 1) <= kSavingRel, fmt("k=9 p1=%.1f p2=%.1f saving %.0f (%.0f)", pt.p1, pt.p2, saving, pt.saving));
    }
    return c;
}

Criterion robustness() {
    Criterion c{7, "robustness to extra users"};
    const auto p = channel(2083, 9, 0.05, 0.5, 0.1);
    sim::SimConfig cfg;
    cfg.params = p;
    double designed = 0.0, ideal = 0.0;
    int n_designed = 0, n_ideal = 0;
    bool ok = true;
    for (int i = 0; i < kRobustSeeds; ++i) {
        cfg.seed = 500 + static_cast<std::uint64_t>(i);
        const auto a = sim::run_robustness(3, 9, cfg);
        const auto b = sim::run_robustness(9, 9, cfg);
        ok &= a.sim.success && b.sim.success;
        designed += static_cast<double>(a.sim.total_tx);
        ideal += static_cast<double>(b.sim.total_tx);
        n_designed = a.n;
        n_ideal = b.n;
    }
    const double deg = designed / ideal - 1;
    c.require(ok, "all decoded");
    c.require(deg <= kRobustMax, fmt("design k=3 (n=%d) %.0f vs ideal k=9 (n=%d) %.0f: %+.2f%%", n_designed,
                                     designed / kRobustSeeds, n_ideal, ideal / kRobustSeeds, 100 * deg));
    return c;
}

Criterion oracle_suites() {
    Criterion c{8, "oracle suites"};
    Rng rng(801);

    int axiom_failures = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto a = rng.byte(), b = rng.byte(), d = rng.byte();
        axiom_failures += gf::mul(a, b) != oracle::mul(a, b);
        axiom_failures += gf::mul(a, gf::mul(b, d)) != gf::mul(gf::mul(a, b), d);
        axiom_failures += gf::mul(a, b ^ d) != (gf::mul(a, b) ^ gf::mul(a, d));
        axiom_failures += a != 0 && gf::mul(a, gf::inv(a)) != 1;
    }
    c.require(axiom_failures == 0, fmt("field axioms %d failures", axiom_failures));

    int decoder_failures = 0;
    for (int trial = 0; trial < 200; ++trial) {
        CodeParams cp;
        cp.file_packets = 1 + static_cast<std::uint32_t>(rng.below(64));
        cp.batch_size = 1 + static_cast<int>(rng.below(8));
        cp.seed = rng.next();
        const int dmax = 1 + static_cast<int>(rng.below(24));
        cp.degrees = DegreeDistribution::point_mass(dmax);
        BatsCode code(cp);
        const int n = 1 + static_cast<int>(rng.below(16));
        const auto file = gf::random_matrix(cp.file_packets, 4, [&] { return rng.byte(); });
        std::vector<BatchState> batches;
        const double erasure = 0.6 * rng.uniform();
        for (int i = 0; i < n; ++i) {
            BatchState st(static_cast<std::uint32_t>(i), cp.batch_size, 4);
            for (const auto& pk : code.encode_batch(file, static_cast<std::uint32_t>(i)))
                if (!rng.bernoulli(erasure)) st.absorb(pk);
            batches.push_back(std::move(st));
        }
        const int r = oracle::rank(oracle::global_system(code, batches));
        const auto res = decode(code, batches, 4);
        decoder_failures += res.success != (r == static_cast<int>(cp.file_packets));
        decoder_failures += res.unresolved != cp.file_packets - static_cast<std::size_t>(r);
        if (res.success) decoder_failures += !(res.file == file);
    }
    c.require(decoder_failures == 0, fmt("decoder vs elimination %d failures", decoder_failures));

    int sched_failures = 0;
    for (int draw = 0; draw < 1000; ++draw) {
        const int m = 1 + static_cast<int>(rng.below(16));
        const int n = 1 + static_cast<int>(rng.below(12));
        const double p1 = 0.05 + 0.9 * rng.uniform(), p2 = 0.05 + 0.9 * rng.uniform();
        std::vector<int> counts(static_cast<std::size_t>(n));
        for (auto& x : counts) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(m + 1)));
        const auto s = sched::build_matrix(counts, p1, p2, m);
        auto above = [](double hi, double lo) { return hi > lo || (hi == lo && hi > 1.0 - 1e-12); };
        for (int i = 0; i < n; ++i) {
            if (counts[i] > 0)
                for (int u = 0; u + 1 < m; ++u) sched_failures += !above(s(u, i), s(u + 1, i));
            for (int j = 0; j < n; ++j)
                if (counts[i] > counts[j])
                    for (int u = 0; u < m; ++u) sched_failures += !above(s(u, i), s(u, j));
        }
    }
    c.require(sched_failures == 0, fmt("usefulness monotonicity/dominance %d failures", sched_failures));

    double worst_norm = 0.0;
    for (int i = 0; i < 500; ++i) {
        NetworkParams p;
        p.k = 2 + static_cast<int>(rng.below(10));
        p.p0 = 0.3 * rng.uniform();
        p.p1 = 0.05 + 0.9 * rng.uniform();
        p.p2 = p.p1 * rng.uniform();
        p.batch_size = 1 + static_cast<int>(rng.below(32));
        const auto r = analytics::rank_distribution(1 + static_cast<int>(rng.below(400)), 5000 * rng.uniform(), p);
        worst_norm = std::max(worst_norm, std::abs(r.sum() - 1.0));
    }
    c.require(worst_norm < 1e-9, fmt("rank distribution normalization %.1e", worst_norm));

    sim::SimConfig cfg;
    cfg.params = channel(500, 4, 0.05, 0.5, 0.1);
    cfg.n = 50;
    cfg.seed = 42;
    cfg.trace = true;
    const auto a = sim::run(cfg), b = sim::run(cfg);
    bool same = a.total_tx == b.total_tx && a.decode_slot == b.decode_slot && a.trace.size() == b.trace.size();
    for (std::size_t i = 0; same && i < a.trace.size(); ++i)
        same = a.trace[i].batch_id == b.trace[i].batch_id && a.trace[i].delivered == b.trace[i].delivered;
    c.require(same, "seeded runs identical");
    return c;
}

}  // namespace

int main() {
    const std::vector<std::function<Criterion()>> criteria = {
        usefulness_matrix, planner, surplus_lemma, rank_distribution,
        testbed_totals,    single_phase, robustness, oracle_suites};
    int failed = 0;
    for (const auto& run : criteria) {
        const auto t0 = Clock::now();
        const auto c = run();
        failed += !c.pass;
        std::printf("%s criterion %d: %s (%.1fs) -- %s\n", c.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    seconds_since(t0), c.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed;
}
