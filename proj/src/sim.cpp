#include "bats/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "bats/codec.hpp"
#include "bats/decoder.hpp"
#include "bats/sched.hpp"

namespace bats::sim {

namespace {

enum Stream : std::uint64_t { kCode = 1, kChannel = 2, kRecode = 3, kAccess = 4 };

struct User {
    std::vector<BatchState> batches;
    Decoder decoder;
    sched::TransmitSchedule schedule;
    std::int64_t rank_total = 0;
    bool decoded = false;

    User(const BatsCode& code, int n) : decoder(code, 0) {
        batches.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) batches.emplace_back(static_cast<std::uint32_t>(i), code.batch_size(), 0);
    }
};

bool try_decode(User& u, std::int64_t file_packets) {
    auto prog = u.decoder.run(false);
    // Inactivation is only worth its cost once the rank could suffice.
    if (!prog.complete && u.rank_total >= file_packets) prog = u.decoder.run(true);
    return prog.complete;
}

}  // namespace

std::vector<std::uint8_t> broadcast_source(const ChannelModel& ch, int users, Rng& rng) {
    std::vector<std::uint8_t> got(static_cast<std::size_t>(users), 0);
    if (rng.bernoulli(ch.p0)) return got;
    for (auto& g : got) g = rng.bernoulli(ch.p1) ? 0 : 1;
    return got;
}

namespace {

Eigen::VectorXd normalized(const Eigen::VectorXd& h) {
    const double s = h.sum();
    return s > 0 ? Eigen::VectorXd(h / s) : h;
}

}  // namespace

Eigen::VectorXd SimReport::rank_distribution() const { return normalized(rank_histogram); }

Eigen::VectorXd SimReport::final_rank_distribution() const { return normalized(final_rank_histogram); }

double SimReport::mean_redundant() const {
    if (phase2_redundant.empty()) return 0.0;
    return std::accumulate(phase2_redundant.begin(), phase2_redundant.end(), 0.0) /
           static_cast<double>(phase2_redundant.size());
}

double SimReport::mean_overhead(int file_packets) const {
    double sum = 0.0;
    int count = 0;
    for (std::size_t j = 0; j < innovative_at_decode.size(); ++j) {
        if (decode_slot[j] < 0) continue;
        sum += static_cast<double>(innovative_at_decode[j] - file_packets) / file_packets;
        ++count;
    }
    return count ? sum / count : 0.0;
}

SimReport run(const SimConfig& cfg) {
    const NetworkParams& p = cfg.params;
    p.validate();
    if (cfg.n < 1) throw std::invalid_argument("n: must be >= 1");
    const int k = p.k;
    const int m = p.batch_size;
    const int n = cfg.n;
    const std::int64_t f = p.file_packets;
    const ChannelModel ch{p.p0, p.p1, p.p2};

    CodeParams cp;
    cp.file_packets = static_cast<std::uint32_t>(p.file_packets);
    cp.batch_size = m;
    cp.seed = derive_seed(cfg.seed, kCode);
    cp.degrees = cfg.degrees ? *cfg.degrees : DegreeDistribution::default_for(m);
    BatsCode code(std::move(cp));
    code.reserve(static_cast<std::uint32_t>(n));

    Rng channel(derive_seed(cfg.seed, kChannel));
    Rng mixer(derive_seed(cfg.seed, kRecode));
    Rng access(derive_seed(cfg.seed, kAccess));

    SimReport r;
    r.seed = cfg.seed;
    r.users = k;
    r.n = n;
    r.decode_slot.assign(static_cast<std::size_t>(k), -1);
    r.phase1_received.assign(static_cast<std::size_t>(k), 0);
    r.innovative_at_decode.assign(static_cast<std::size_t>(k), 0);
    r.phase2_innovative.assign(static_cast<std::size_t>(k), 0);
    r.phase2_redundant.assign(static_cast<std::size_t>(k), 0);
    r.inactivated.assign(static_cast<std::size_t>(k), 0);
    r.rank_histogram = Eigen::VectorXd::Zero(m + 1);
    r.final_rank_histogram = Eigen::VectorXd::Zero(m + 1);

    std::vector<User> users;
    users.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) users.emplace_back(code, n);
    std::vector<int> group_distinct(static_cast<std::size_t>(n), 0);

    auto mark_decoded = [&](int j, std::int64_t slot) {
        User& u = users[static_cast<std::size_t>(j)];
        u.decoded = true;
        r.decode_slot[static_cast<std::size_t>(j)] = slot;
        r.innovative_at_decode[static_cast<std::size_t>(j)] = u.rank_total;
        r.inactivated[static_cast<std::size_t>(j)] = u.decoder.progress().inactivated;
        for (const auto& b : u.batches) r.rank_histogram(b.rank()) += 1.0;
    };

    // Phase 1.
    Packet pkt;
    pkt.coeff.assign(static_cast<std::size_t>(m), 0);
    for (int i = 0; i < n; ++i) {
        pkt.batch_id = static_cast<std::uint32_t>(i);
        for (int u = 0; u < m; ++u) {
            std::fill(pkt.coeff.begin(), pkt.coeff.end(), 0);
            pkt.coeff[static_cast<std::size_t>(u)] = 1;
            const auto got = broadcast_source(ch, k, channel);
            bool any = false;
            for (int j = 0; j < k; ++j) {
                if (!got[static_cast<std::size_t>(j)]) continue;
                any = true;
                User& usr = users[static_cast<std::size_t>(j)];
                usr.batches[static_cast<std::size_t>(i)].absorb(pkt);
                usr.decoder.add_packet(pkt.batch_id, pkt.coeff, pkt.payload);
                ++usr.rank_total;
                ++r.phase1_received[static_cast<std::size_t>(j)];
            }
            if (any) ++group_distinct[static_cast<std::size_t>(i)];
        }
    }
    r.phase1_tx = static_cast<std::int64_t>(n) * m;

    int remaining = k;
    for (int j = 0; j < k; ++j) {
        User& u = users[static_cast<std::size_t>(j)];
        std::vector<int> counts(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) counts[static_cast<std::size_t>(i)] = u.batches[static_cast<std::size_t>(i)].rank();
        u.schedule = sched::TransmitSchedule(sched::build_matrix(counts, p.p1, p.p2, m));
        if (try_decode(u, f)) {
            mark_decoded(j, 0);
            --remaining;
        }
    }

    // Phase 2.
    const std::int64_t cap = cfg.slot_cap > 0 ? cfg.slot_cap : 10LL * n * m;
    const std::size_t max_skip = static_cast<std::size_t>(m) * n + n;
    std::int64_t slot = 0;
    int turn = 0;
    int idle_turns = 0;
    while (remaining > 0 && slot < cap) {
        const int s = cfg.access == Access::kRoundRobin ? turn : static_cast<int>(access.below(static_cast<std::uint64_t>(k)));
        turn = (turn + 1) % k;
        User& sender = users[static_cast<std::size_t>(s)];

        std::optional<std::uint32_t> batch;
        if (cfg.selection == Selection::kQueue) {
            for (std::size_t tries = 0; tries < max_skip; ++tries) {
                const auto b = sender.schedule.next();
                if (sender.batches[b].rank() > 0) {
                    batch = b;
                    break;
                }
            }
        } else if (sender.rank_total > 0) {
            std::uint32_t b;
            do {
                b = static_cast<std::uint32_t>(access.below(static_cast<std::uint64_t>(n)));
            } while (sender.batches[b].rank() == 0);
            batch = b;
        }
        if (!batch) {
            // A user with an empty buffer stays silent; give up if nobody can send.
            if (++idle_turns >= k * 4) break;
            continue;
        }
        idle_turns = 0;
        ++slot;

        const Packet out = sender.batches[*batch].recode(mixer);
        TraceRow row;
        if (cfg.trace) {
            row.slot = slot;
            row.sender = s;
            row.batch_id = *batch;
            row.delivered.assign(static_cast<std::size_t>(k), 0);
        }
        for (int j = 0; j < k; ++j) {
            if (j == s) continue;
            if (channel.bernoulli(p.p2)) continue;
            if (cfg.trace) row.delivered[static_cast<std::size_t>(j)] = 1;
            User& u = users[static_cast<std::size_t>(j)];
            auto& st = u.batches[*batch];
            if (!st.absorb(out)) {
                ++r.phase2_redundant[static_cast<std::size_t>(j)];
                continue;
            }
            ++r.phase2_innovative[static_cast<std::size_t>(j)];
            ++u.rank_total;
            if (st.rank() > group_distinct[*batch]) r.z_bound_held = false;
            if (u.decoded) continue;
            u.decoder.add_packet(out.batch_id, out.coeff, out.payload);
            if (try_decode(u, f)) {
                mark_decoded(j, slot);
                --remaining;
            }
        }
        if (cfg.trace) {
            row.innovative.resize(static_cast<std::size_t>(k));
            for (int j = 0; j < k; ++j) row.innovative[static_cast<std::size_t>(j)] = users[static_cast<std::size_t>(j)].rank_total;
            r.trace.push_back(std::move(row));
        }
    }

    for (const auto& u : users)
        for (const auto& b : u.batches) r.final_rank_histogram(b.rank()) += 1.0;
    r.phase2_tx = slot;
    r.total_tx = r.phase1_tx + r.phase2_tx;
    r.success = remaining == 0;
    return r;
}

SinglePhaseReport run_single_phase(const NetworkParams& params, std::uint64_t seed, std::int64_t cap) {
    params.validate();
    const ChannelModel ch{params.p0, params.p1, params.p2};
    const auto need = static_cast<std::int64_t>(std::ceil(params.target_packets() - 1e-9));
    if (cap <= 0) cap = 10 * static_cast<std::int64_t>(std::ceil(need / ((1.0 - params.p0) * (1.0 - params.p1))));

    Rng rng(derive_seed(seed, kChannel));
    std::vector<std::int64_t> got(static_cast<std::size_t>(params.k), 0);
    int remaining = params.k;
    SinglePhaseReport out;
    out.seed = seed;
    while (remaining > 0 && out.total_tx < cap) {
        ++out.total_tx;
        const auto d = broadcast_source(ch, params.k, rng);
        for (std::size_t j = 0; j < d.size(); ++j)
            if (d[j] && ++got[j] == need) --remaining;
    }
    out.success = remaining == 0;
    return out;
}

RobustnessReport run_robustness(int design_k, int actual_k, SimConfig cfg) {
    if (design_k < 1) throw std::invalid_argument("design_k: must be >= 1");
    if (actual_k < design_k) throw std::invalid_argument("actual_k: must be >= design_k");
    NetworkParams design = cfg.params;
    design.k = design_k;
    RobustnessReport out;
    out.design_k = design_k;
    out.actual_k = actual_k;
    out.n = analytics::optimize_batches(design).n_opt;
    cfg.n = out.n;
    cfg.params.k = actual_k;
    out.sim = run(cfg);
    return out;
}

void write_trace_csv(std::ostream& out, const SimReport& r, const std::string& comment) {
    out << "# " << comment << '\n';
    out << "slot,sender,batch_id";
    for (int j = 0; j < r.users; ++j) out << ",delivered_" << j;
    for (int j = 0; j < r.users; ++j) out << ",innovative_" << j;
    out << '\n';
    for (const auto& row : r.trace) {
        out << row.slot << ',' << row.sender << ',' << row.batch_id;
        for (auto d : row.delivered) out << ',' << static_cast<int>(d);
        for (auto v : row.innovative) out << ',' << v;
        out << '\n';
    }
}

}  // namespace bats::sim
