#include "bats/sched.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace bats::sched {

namespace {

double binomial_pmf(int n, int k, double p) {
    if (k < 0 || k > n) return 0.0;
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
    return c * std::pow(p, k) * std::pow(1.0 - p, n - k);
}

}  // namespace

double prob_exclusive(int received, int m, double p1, int batch_size) {
    if (received < 0 || received > batch_size) throw std::invalid_argument("received count outside 0..M");
    if (m < 0 || m > batch_size) return 0.0;
    return binomial_pmf(received, m, p1);
}

double usefulness(int received, int u, double p1, double p2, int batch_size) {
    if (u < 0) throw std::invalid_argument("transmission count must be >= 0");
    double useful = 0.0;
    double wasted = prob_exclusive(received, 0, p1, batch_size);
    for (int m = u + 1; m <= batch_size; ++m) useful += prob_exclusive(received, m, p1, batch_size);
    // m <= u: useful only if at most m-1 of the u earlier packets got through.
    for (int m = 1; m <= std::min(u, batch_size); ++m) {
        const double pm = prob_exclusive(received, m, p1, batch_size);
        if (pm == 0.0) continue;
        double short_of_m = 0.0, reached_m = 0.0;
        for (int l = 0; l <= u; ++l) (l < m ? short_of_m : reached_m) += binomial_pmf(u, l, 1.0 - p2);
        useful += pm * short_of_m;
        wasted += pm * reached_m;
    }
    // Near 1 the complement is the accurate sum; this keeps columns ordered
    // instead of wobbling by an ulp around 1.
    return useful < 0.5 ? useful : std::max(0.0, 1.0 - wasted);
}

Eigen::MatrixXd build_matrix(std::span<const int> counts, double p1, double p2, int batch_size) {
    Eigen::MatrixXd s(batch_size, static_cast<Eigen::Index>(counts.size()));
    // Columns depend only on the count, so compute one per distinct value.
    std::vector<Eigen::VectorXd> by_count(static_cast<std::size_t>(batch_size) + 1);
    for (Eigen::Index i = 0; i < s.cols(); ++i) {
        const int c = counts[static_cast<std::size_t>(i)];
        if (c < 0 || c > batch_size) throw std::invalid_argument("reception count outside 0..M");
        auto& col = by_count[static_cast<std::size_t>(c)];
        if (col.size() == 0) {
            col.resize(batch_size);
            for (int u = 0; u < batch_size; ++u) col(u) = usefulness(c, u, p1, p2, batch_size);
        }
        s.col(i) = col;
    }
    return s;
}

std::vector<std::uint32_t> build_queue(const Eigen::MatrixXd& s) {
    struct Entry {
        double value;
        std::uint32_t u;
        std::uint32_t batch;
    };
    std::vector<Entry> entries;
    entries.reserve(static_cast<std::size_t>(s.size()));
    for (Eigen::Index i = 0; i < s.cols(); ++i)
        for (Eigen::Index u = 0; u < s.rows(); ++u)
            entries.push_back({s(u, i), static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(i)});
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.value != b.value) return a.value > b.value;
        return std::tie(a.u, a.batch) < std::tie(b.u, b.batch);
    });
    std::vector<std::uint32_t> v(entries.size());
    std::transform(entries.begin(), entries.end(), v.begin(), [](const Entry& e) { return e.batch; });
    return v;
}

std::vector<std::uint32_t> fallback_order(const Eigen::MatrixXd& s) {
    std::vector<std::uint32_t> order(static_cast<std::size_t>(s.cols()));
    std::iota(order.begin(), order.end(), 0u);
    if (s.rows() == 0) return order;
    const auto last = s.row(s.rows() - 1);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return last(a) > last(b); });
    return order;
}

TransmitSchedule::TransmitSchedule(const Eigen::MatrixXd& s) : queue_(build_queue(s)), fallback_(fallback_order(s)) {}

std::uint32_t TransmitSchedule::next() {
    if (queue_.empty() && fallback_.empty()) throw std::logic_error("empty schedule");
    const std::size_t p = pos_++;
    if (p < queue_.size()) return queue_[p];
    return fallback_[(p - queue_.size()) % fallback_.size()];
}

}  // namespace bats::sched
