#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "bats/analytics.hpp"
#include "bats/degree.hpp"
#include "bats/random.hpp"

namespace bats::sim {

struct ChannelModel {
    double p0 = 0.05;
    double p1 = 0.5;
    double p2 = 0.1;
};

/// One source transmission: a shared Bernoulli(p0) loss, then independent
/// Bernoulli(p1) losses per user. Entry j is 1 iff user j received it.
std::vector<std::uint8_t> broadcast_source(const ChannelModel& ch, int users, Rng& rng);

enum class Access { kRoundRobin, kRandom };

/// How a sender picks the batch to recode from. kQueue is the protocol;
/// kUniform (any buffered batch, equally likely) is the analysis' model.
enum class Selection { kQueue, kUniform };

struct SimConfig {
    NetworkParams params;
    int n = 0;                      // batches sent by the source
    std::uint64_t seed = 1;
    Access access = Access::kRoundRobin;
    Selection selection = Selection::kQueue;
    std::int64_t slot_cap = 0;      // phase-2 livelock guard, 0 means 10 nM
    bool trace = false;
    std::optional<DegreeDistribution> degrees;  // default_for(M) when empty
};

struct TraceRow {
    std::int64_t slot = 0;
    int sender = 0;
    std::uint32_t batch_id = 0;
    std::vector<std::uint8_t> delivered;
    std::vector<std::int64_t> innovative;  // cumulative, per user
};

struct SimReport {
    std::uint64_t seed = 0;
    int users = 0;
    int n = 0;
    bool success = false;           // every user decoded within the cap
    std::int64_t phase1_tx = 0;
    std::int64_t phase2_tx = 0;
    std::int64_t total_tx = 0;

    // Per user.
    std::vector<std::int64_t> decode_slot;           // phase-2 slot at decode, 0 after phase 1, -1 never
    std::vector<std::int64_t> phase1_received;
    std::vector<std::int64_t> innovative_at_decode;  // global rank used by the decoder
    std::vector<std::int64_t> phase2_innovative;     // over the whole of phase 2
    std::vector<std::int64_t> phase2_redundant;
    std::vector<std::size_t> inactivated;

    Eigen::VectorXd rank_histogram;        // batch ranks at each user's own decode instant, summed
    Eigen::VectorXd final_rank_histogram;  // batch ranks of every user once all have decoded
    bool z_bound_held = true;        // no user rank ever exceeded the group's phase-1 distinct count
    std::vector<TraceRow> trace;

    /// Histograms normalized to probability vectors.
    Eigen::VectorXd rank_distribution() const;
    Eigen::VectorXd final_rank_distribution() const;
    double mean_redundant() const;
    /// Mean over decoded users of (innovative_at_decode - F) / F.
    double mean_overhead(int file_packets) const;
};

/// Full two-phase protocol with `params.k` users: n batches from the source,
/// then peer recoding following each user's usefulness queue until every
/// user decodes.
SimReport run(const SimConfig& cfg);

/// Source-only baseline under an ideal erasure code: the source sends
/// packets until every user has received ceil(F') of them.
struct SinglePhaseReport {
    std::uint64_t seed = 0;
    std::int64_t total_tx = 0;
    bool success = false;
};
SinglePhaseReport run_single_phase(const NetworkParams& params, std::uint64_t seed, std::int64_t cap = 0);

/// Plans n for `design_k` users and simulates `actual_k`.
struct RobustnessReport {
    int design_k = 0;
    int actual_k = 0;
    int n = 0;
    SimReport sim;
};
RobustnessReport run_robustness(int design_k, int actual_k, SimConfig cfg);

/// CSV of a trace: slot, sender, batch_id, delivered_<j>..., innovative_<j>...
void write_trace_csv(std::ostream& out, const SimReport& r, const std::string& comment);

}  // namespace bats::sim
