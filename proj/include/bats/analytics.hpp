#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace bats {

/// Channel and protocol configuration shared by the planner and simulator.
struct NetworkParams {
    int k = 3;            // users
    double p0 = 0.05;     // correlated source loss
    double p1 = 0.5;      // independent source-to-user loss
    double p2 = 0.1;      // user-to-user loss
    int batch_size = 16;  // M
    int file_packets = 0; // F
    double eta = 0.01;    // code overhead fraction
    double epsilon = 1e-6;

    /// Throws std::invalid_argument naming the first offending field.
    void validate() const;
    /// F' = (1 + eta) F
    double target_packets() const { return (1.0 + eta) * file_packets; }
};

namespace analytics {

/// p-bar = 1 - (1-p0)(1-p1^k): a source packet reaches no user.
double effective_erasure(const NetworkParams& p);
/// p-hat = p0 + p1 - p0 p1: a source packet misses one given user.
double user_erasure(const NetworkParams& p);
/// p-tilde = (1 - p1^(k-1)) p-hat.
double delta_parameter(const NetworkParams& p);
/// Phi^{-1}(0.625 / (k + 0.25)); the expected minimum of k normals sits
/// this many standard deviations from their mean.
double min_order_quantile(int k);

/// Smallest batch count for which the group as a whole has collected F'
/// packets with probability at least 1 - epsilon (normal approximation).
double min_batches_real(const NetworkParams& p);
int min_batches(const NetworkParams& p);
/// Batch count at which the expected worst user alone holds F' packets.
double max_batches_real(const NetworkParams& p);
int max_batches(const NetworkParams& p);

/// P(T) = (1-p2)(k-1)T/k: packets one user receives from its peers.
double expected_peer_receptions(double t, const NetworkParams& p);

/// Binomial(M, p-tilde) pmf of the group-over-user surplus per batch.
Eigen::VectorXd delta_distribution(const NetworkParams& p);

/// Packets one user receives of a batch in phase 1: Binomial(M, (1-p0)(1-p1)).
Eigen::VectorXd y1_distribution(const NetworkParams& p);
/// Group-level distinct packets given the user holds `y1` of them.
Eigen::VectorXd z_given_y1(int y1, const NetworkParams& p);
/// Phase-2 receptions of one batch: Binomial(trials, 1/n).
Eigen::VectorXd y2_distribution(long trials, int n);
/// Trial count used for Y2 at stopping time T (P(T) rounded to nearest).
long y2_trials(double t, const NetworkParams& p);

/// Expected redundant phase-2 receptions per user, Gaussian closed form.
double redundancy(double t, int n, const NetworkParams& p);

struct StoppingTerms {
    double mu_d = 0.0;
    double sigma_d = 0.0;
    double margin = 0.0;  // mu_d + sigma_d * beta - F'
};
StoppingTerms stopping_terms(double t, int n, const NetworkParams& p);

/// Smallest integer T >= 0 with a nonnegative stopping margin. Bisection on
/// [0, nM] until the bracket's margins differ by at most 1, widened by
/// doubling when nM is not enough, then refined to the integer boundary.
/// Empty when no T up to nM * 2^20 satisfies the condition.
std::optional<std::int64_t> stopping_time(int n, const NetworkParams& p);

/// Predicted decode-time rank distribution over 0..M for n batches and T
/// phase-2 transmissions.
Eigen::VectorXd rank_distribution(int n, double t, const NetworkParams& p);
/// High-T approximation: Binomial(M, 1 - p-bar).
Eigen::VectorXd rank_distribution_approx(const NetworkParams& p);

struct PlanPoint {
    int n = 0;
    std::optional<std::int64_t> t;
    double total = 0.0;  // nM + T, +inf when T does not exist
};

struct PlanResult {
    int n_min = 0;
    int n_max = 0;
    int n_opt = 0;
    std::vector<PlanPoint> curve;

    const PlanPoint& at(int n) const;
};

/// Exhaustive scan of nM + T over [n_min, n_max]; lowest n wins ties.
PlanResult optimize_batches(const NetworkParams& p);

/// CSV with a '#' comment line, then "n,T,total".
void write_plan_csv(std::ostream& out, const PlanResult& plan, const std::string& comment);

}  // namespace analytics
}  // namespace bats
