#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace bats::sched {

/// Probability that exactly `m` of the `received` packets a user holds for a
/// batch were erased at a given peer: C(received, m) p1^m (1-p1)^(received-m),
/// and 0 for received < m <= M.
double prob_exclusive(int received, int m, double p1, int batch_size);

/// Estimated probability that the (u+1)-th recoded packet a user sends from a
/// batch it received `received` packets of is still useful to a peer, when
/// each of the u earlier ones reached that peer with probability 1 - p2.
double usefulness(int received, int u, double p1, double p2, int batch_size);

/// M x n matrix S with S(u, i) = usefulness(counts[i], u, ...).
Eigen::MatrixXd build_matrix(std::span<const int> counts, double p1, double p2, int batch_size);

/// Column (batch) indices of all M*n entries of `s` in descending order of
/// value; equal values go to the lower row first, then the lower column.
/// Each batch appears exactly M times.
std::vector<std::uint32_t> build_queue(const Eigen::MatrixXd& s);

/// Batches by descending last-row usefulness (lower index on ties), the
/// round-robin order a user falls back to once its queue is exhausted.
std::vector<std::uint32_t> fallback_order(const Eigen::MatrixXd& s);

/// A user's phase-2 transmission schedule: the queue, then the fallback
/// order repeated.
class TransmitSchedule {
public:
    TransmitSchedule() = default;
    explicit TransmitSchedule(const Eigen::MatrixXd& s);

    std::uint32_t next();
    std::size_t position() const { return pos_; }
    const std::vector<std::uint32_t>& queue() const { return queue_; }

private:
    std::vector<std::uint32_t> queue_;
    std::vector<std::uint32_t> fallback_;
    std::size_t pos_ = 0;
};

}  // namespace bats::sched
