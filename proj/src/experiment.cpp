#include "bats/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

namespace bats::experiment {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = first + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) throw ConfigError(key, "cannot parse '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "no") return false;
    throw ConfigError(key, "expected true or false, got '" + value + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
std::vector<T> parallel_map(int count, const std::function<T(int)>& fn) {
    std::vector<T> out(static_cast<std::size_t>(count));
    const int workers = std::max(1, std::min<int>(count, static_cast<int>(std::thread::hardware_concurrency())));
    std::atomic<int> next{0};
    auto work = [&] {
        for (int i = next++; i < count; i = next++) out[static_cast<std::size_t>(i)] = fn(i);
    };
    if (workers == 1) {
        work();
        return out;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    return out;
}

std::ofstream open_csv(const ExperimentConfig& cfg, const std::string& name) {
    std::ofstream out(cfg.out_dir / name);
    if (!out) throw std::runtime_error("cannot write " + (cfg.out_dir / name).string());
    out << std::setprecision(10);
    return out;
}

std::string comment_line(const ExperimentConfig& cfg) {
    std::string s = cfg.describe();
    std::replace(s.begin(), s.end(), '\n', ' ');
    return trim(s);
}

double mean_of(const std::vector<sim::SimReport>& rs, const std::function<double(const sim::SimReport&)>& f) {
    std::vector<double> xs;
    for (const auto& r : rs) xs.push_back(f(r));
    return summarize(xs).mean;
}

}  // namespace

const char* to_string(Mode m) {
    switch (m) {
    case Mode::kPlan: return "plan";
    case Mode::kSimulate: return "simulate";
    case Mode::kSweep: return "sweep";
    case Mode::kRobustness: return "robustness";
    case Mode::kSinglePhase: return "single-phase";
    }
    return "?";
}

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "mode",   "k",         "p0",         "p1",    "p2",       "batch_size",     "file_packets",
        "eta",    "epsilon",   "n",          "seed",  "runs",     "degree_file",    "out_dir",
        "access", "slot_cap",  "trace",      "k_min", "k_max",    "sweep_simulate", "design_k",
        "actual_k"};
    return keys;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (key == "mode") {
        if (value == "plan") mode = Mode::kPlan;
        else if (value == "simulate") mode = Mode::kSimulate;
        else if (value == "sweep") mode = Mode::kSweep;
        else if (value == "robustness") mode = Mode::kRobustness;
        else if (value == "single-phase" || value == "single_phase") mode = Mode::kSinglePhase;
        else throw ConfigError(key, "unknown mode '" + value + "'");
    } else if (key == "k") params.k = parse_number<int>(key, value);
    else if (key == "p0") params.p0 = parse_number<double>(key, value);
    else if (key == "p1") params.p1 = parse_number<double>(key, value);
    else if (key == "p2") params.p2 = parse_number<double>(key, value);
    else if (key == "batch_size") params.batch_size = parse_number<int>(key, value);
    else if (key == "file_packets") params.file_packets = parse_number<int>(key, value);
    else if (key == "eta") params.eta = parse_number<double>(key, value);
    else if (key == "epsilon") params.epsilon = parse_number<double>(key, value);
    else if (key == "n") n = parse_number<int>(key, value);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "runs") runs = parse_number<int>(key, value);
    else if (key == "degree_file") degree_file = value;
    else if (key == "out_dir") out_dir = value;
    else if (key == "access") {
        if (value == "round_robin" || value == "round-robin") access = sim::Access::kRoundRobin;
        else if (value == "random") access = sim::Access::kRandom;
        else throw ConfigError(key, "expected round_robin or random");
    } else if (key == "slot_cap") slot_cap = parse_number<std::int64_t>(key, value);
    else if (key == "trace") trace = parse_bool(key, value);
    else if (key == "k_min") k_min = parse_number<int>(key, value);
    else if (key == "k_max") k_max = parse_number<int>(key, value);
    else if (key == "sweep_simulate") sweep_simulate = parse_bool(key, value);
    else if (key == "design_k") design_k = parse_number<int>(key, value);
    else if (key == "actual_k") actual_k = parse_number<int>(key, value);
    else throw ConfigError(key, "unknown key");
    explicit_keys.insert(key);
}

void ExperimentConfig::validate() const {
    std::vector<std::string> required = {"file_packets", "p0", "p1"};
    switch (mode) {
    case Mode::kPlan:
    case Mode::kSimulate:
        required.insert(required.end(), {"k", "p2"});
        break;
    case Mode::kSinglePhase: required.push_back("k"); break;
    case Mode::kSweep: required.push_back("p2"); break;
    case Mode::kRobustness: required.insert(required.end(), {"p2", "design_k", "actual_k"}); break;
    }
    for (const auto& key : required)
        if (!explicit_keys.count(key)) throw ConfigError(key, std::string("required in ") + to_string(mode) + " mode");

    try {
        params.validate();
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        const auto colon = msg.find(':');
        throw ConfigError(msg.substr(0, colon), colon == std::string::npos ? msg : trim(msg.substr(colon + 1)));
    }
    if (runs < 1) throw ConfigError("runs", "must be >= 1");
    if (n && *n < 1) throw ConfigError("n", "must be >= 1");
    if (slot_cap < 0) throw ConfigError("slot_cap", "must be >= 0");
    if (mode == Mode::kSweep && (k_min < 1 || k_max < k_min)) throw ConfigError("k_max", "needs 1 <= k_min <= k_max");
    if (mode == Mode::kRobustness) {
        if (design_k < 1) throw ConfigError("design_k", "must be >= 1");
        if (actual_k < design_k) throw ConfigError("actual_k", "must be >= design_k");
    }
}

std::string ExperimentConfig::describe() const {
    std::ostringstream o;
    o << std::setprecision(10);
    o << "mode=" << to_string(mode) << '\n'
      << "k=" << params.k << '\n'
      << "p0=" << params.p0 << '\n'
      << "p1=" << params.p1 << '\n'
      << "p2=" << params.p2 << '\n'
      << "batch_size=" << params.batch_size << '\n'
      << "file_packets=" << params.file_packets << '\n'
      << "eta=" << params.eta << '\n'
      << "epsilon=" << params.epsilon << '\n';
    if (n) o << "n=" << *n << '\n';
    o << "seed=" << seed << '\n' << "runs=" << runs << '\n';
    if (!degree_file.empty()) o << "degree_file=" << degree_file << '\n';
    o << "access=" << (access == sim::Access::kRandom ? "random" : "round_robin") << '\n';
    if (slot_cap > 0) o << "slot_cap=" << slot_cap << '\n';
    if (mode == Mode::kSweep) o << "k_min=" << k_min << '\n' << "k_max=" << k_max << '\n';
    if (mode == Mode::kRobustness) o << "design_k=" << design_k << '\n' << "actual_k=" << actual_k << '\n';
    return o.str();
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig base) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key=value");
        base.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path.string());
    return parse_config(in, std::move(base));
}

sim::SimConfig sim_config(const ExperimentConfig& cfg, int n) {
    sim::SimConfig s;
    s.params = cfg.params;
    s.n = n;
    s.seed = cfg.seed;
    s.access = cfg.access;
    s.slot_cap = cfg.slot_cap;
    s.trace = cfg.trace;
    if (!cfg.degree_file.empty()) s.degrees = DegreeDistribution::load(cfg.degree_file);
    return s;
}

std::vector<sim::SimReport> run_seeds(const sim::SimConfig& base, int runs) {
    return parallel_map<sim::SimReport>(runs, [&](int i) {
        sim::SimConfig c = base;
        c.seed = base.seed + static_cast<std::uint64_t>(i);
        return sim::run(c);
    });
}

Summary summarize(const std::vector<double>& xs) {
    Summary s;
    if (xs.empty()) return s;
    s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

double tv_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw std::invalid_argument("tv_distance: length mismatch");
    return 0.5 * (a - b).cwiseAbs().sum();
}

namespace {

std::string run_plan(const ExperimentConfig& cfg, std::ostream& log) {
    const auto plan = analytics::optimize_batches(cfg.params);
    auto out = open_csv(cfg, "plan.csv");
    analytics::write_plan_csv(out, plan, comment_line(cfg));
    const auto& best = plan.at(plan.n_opt);
    log << "T(n*)=" << (best.t ? std::to_string(*best.t) : "none") << " total(n*)=" << best.total << '\n';
    return "n_l=" + std::to_string(plan.n_min) + " n_u=" + std::to_string(plan.n_max) +
           " n*=" + std::to_string(plan.n_opt);
}

std::string run_simulate(const ExperimentConfig& cfg, std::ostream& log) {
    const int n = cfg.n ? *cfg.n : analytics::optimize_batches(cfg.params).n_opt;
    const auto reports = run_seeds(sim_config(cfg, n), cfg.runs);
    const int f = cfg.params.file_packets;
    const int m = cfg.params.batch_size;

    auto runs = open_csv(cfg, "runs.csv");
    runs << "# " << comment_line(cfg) << " n_used=" << n << '\n';
    runs << "seed,success,phase1_tx,phase2_tx,total_tx,mean_redundant,mean_overhead,max_inactivated,z_bound_held\n";
    int failures = 0;
    Eigen::VectorXd hist = Eigen::VectorXd::Zero(m + 1);
    for (const auto& r : reports) {
        if (!r.success) ++failures;
        hist += r.rank_histogram;
        runs << r.seed << ',' << r.success << ',' << r.phase1_tx << ',' << r.phase2_tx << ',' << r.total_tx << ','
             << r.mean_redundant() << ',' << r.mean_overhead(f) << ','
             << *std::max_element(r.inactivated.begin(), r.inactivated.end()) << ',' << r.z_bound_held << '\n';
    }

    auto summary = open_csv(cfg, "summary.csv");
    summary << "# " << comment_line(cfg) << " n_used=" << n << '\n';
    summary << "metric,mean,stddev\n";
    auto emit = [&](const char* name, const std::function<double(const sim::SimReport&)>& fn) {
        std::vector<double> xs;
        for (const auto& r : reports) xs.push_back(fn(r));
        const auto s = summarize(xs);
        summary << name << ',' << s.mean << ',' << s.stddev << '\n';
        return s.mean;
    };
    emit("phase1_tx", [](const auto& r) { return static_cast<double>(r.phase1_tx); });
    const double p2 = emit("phase2_tx", [](const auto& r) { return static_cast<double>(r.phase2_tx); });
    const double total = emit("total_tx", [](const auto& r) { return static_cast<double>(r.total_tx); });
    emit("redundant_per_user", [](const auto& r) { return r.mean_redundant(); });
    emit("overhead", [f](const auto& r) { return r.mean_overhead(f); });

    const auto t = analytics::stopping_time(n, cfg.params);
    const double t_used = t ? static_cast<double>(*t) : p2;
    const Eigen::VectorXd emp = hist.sum() > 0 ? Eigen::VectorXd(hist / hist.sum()) : hist;
    const Eigen::VectorXd eq15 = analytics::rank_distribution(n, t_used, cfg.params);
    const Eigen::VectorXd eq16 = analytics::rank_distribution_approx(cfg.params);
    auto rank = open_csv(cfg, "rank.csv");
    rank << "# " << comment_line(cfg) << " n_used=" << n << " T_analytic=" << t_used << '\n';
    rank << "rank,empirical,analytic,approx\n";
    for (int r = 0; r <= m; ++r) rank << r << ',' << emp(r) << ',' << eq15(r) << ',' << eq16(r) << '\n';

    if (cfg.trace)
        for (const auto& r : reports) {
            auto tr = open_csv(cfg, "trace_" + std::to_string(r.seed) + ".csv");
            sim::write_trace_csv(tr, r, comment_line(cfg) + " seed=" + std::to_string(r.seed));
        }

    log << "tv_analytic=" << tv_distance(emp, eq15) << " tv_approx=" << tv_distance(emp, eq16)
        << " redundant_analytic=" << (t ? analytics::redundancy(t_used, n, cfg.params) : 0.0) << '\n';
    std::ostringstream h;
    h << "n=" << n << " runs=" << cfg.runs << " mean_phase2=" << p2 << " mean_total=" << total
      << " failures=" << failures;
    return h.str();
}

std::string run_single(const ExperimentConfig& cfg, std::ostream&) {
    const auto reports = parallel_map<sim::SinglePhaseReport>(cfg.runs, [&](int i) {
        return sim::run_single_phase(cfg.params, cfg.seed + static_cast<std::uint64_t>(i), cfg.slot_cap);
    });
    auto out = open_csv(cfg, "single_phase.csv");
    out << "# " << comment_line(cfg) << '\n';
    out << "seed,success,total_tx\n";
    std::vector<double> xs;
    for (const auto& r : reports) {
        out << r.seed << ',' << r.success << ',' << r.total_tx << '\n';
        xs.push_back(static_cast<double>(r.total_tx));
    }
    std::ostringstream h;
    h << "mean_total=" << summarize(xs).mean
      << " analytic=" << analytics::max_batches(cfg.params) * cfg.params.batch_size;
    return h.str();
}

std::string run_sweep(const ExperimentConfig& cfg, std::ostream& log) {
    auto out = open_csv(cfg, "sweep.csv");
    out << "# " << comment_line(cfg) << '\n';
    out << "k,p0,p1,p2,n_u,n_opt,single,two_phase,saving";
    if (cfg.sweep_simulate) out << ",single_sim,two_phase_sim";
    out << '\n';
    double last_saving = 0.0;
    for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
        NetworkParams p = cfg.params;
        p.k = k;
        const auto plan = analytics::optimize_batches(p);
        const double single = static_cast<double>(plan.n_max) * p.batch_size;
        const double two = plan.at(plan.n_opt).total;
        last_saving = single - two;
        out << k << ',' << p.p0 << ',' << p.p1 << ',' << p.p2 << ',' << plan.n_max << ',' << plan.n_opt << ','
            << single << ',' << two << ',' << last_saving;
        if (cfg.sweep_simulate) {
            std::vector<double> xs;
            for (int i = 0; i < cfg.runs; ++i)
                xs.push_back(static_cast<double>(sim::run_single_phase(p, cfg.seed + i, cfg.slot_cap).total_tx));
            ExperimentConfig c = cfg;
            c.params = p;
            const auto reps = run_seeds(sim_config(c, plan.n_opt), cfg.runs);
            out << ',' << summarize(xs).mean << ','
                << mean_of(reps, [](const auto& r) { return static_cast<double>(r.total_tx); });
        }
        out << '\n';
        log << "k=" << k << " single=" << single << " two_phase=" << two << '\n';
    }
    std::ostringstream h;
    h << "k=" << cfg.k_max << " saving=" << last_saving;
    return h.str();
}

std::string run_robust(const ExperimentConfig& cfg, std::ostream& log) {
    auto out = open_csv(cfg, "robustness.csv");
    out << "# " << comment_line(cfg) << '\n';
    out << "actual_k,n_design,n_ideal,design_tx,ideal_tx,degradation\n";
    double last = 0.0;
    for (int k = cfg.design_k; k <= cfg.actual_k; ++k) {
        sim::SimConfig base = sim_config(cfg, 1);
        const auto design = parallel_map<sim::RobustnessReport>(cfg.runs, [&](int i) {
            sim::SimConfig c = base;
            c.seed = cfg.seed + static_cast<std::uint64_t>(i);
            return sim::run_robustness(cfg.design_k, k, c);
        });
        const auto ideal = parallel_map<sim::RobustnessReport>(cfg.runs, [&](int i) {
            sim::SimConfig c = base;
            c.seed = cfg.seed + static_cast<std::uint64_t>(i);
            return sim::run_robustness(k, k, c);
        });
        std::vector<double> d, id;
        for (const auto& r : design) d.push_back(static_cast<double>(r.sim.total_tx));
        for (const auto& r : ideal) id.push_back(static_cast<double>(r.sim.total_tx));
        const double dm = summarize(d).mean;
        const double im = summarize(id).mean;
        last = (dm - im) / im;
        out << k << ',' << design.front().n << ',' << ideal.front().n << ',' << dm << ',' << im << ',' << last << '\n';
        log << "actual_k=" << k << " design_tx=" << dm << " ideal_tx=" << im << '\n';
    }
    std::ostringstream h;
    h << "design_k=" << cfg.design_k << " actual_k=" << cfg.actual_k << " degradation=" << last;
    return h.str();
}

}  // namespace

std::string execute(const ExperimentConfig& cfg, std::ostream& log) {
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    switch (cfg.mode) {
    case Mode::kPlan: return run_plan(cfg, log);
    case Mode::kSimulate: return run_simulate(cfg, log);
    case Mode::kSweep: return run_sweep(cfg, log);
    case Mode::kRobustness: return run_robust(cfg, log);
    case Mode::kSinglePhase: return run_single(cfg, log);
    }
    return {};
}

}  // namespace bats::experiment
