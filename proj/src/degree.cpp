#include "bats/degree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace bats {

DegreeDistribution::DegreeDistribution(std::vector<double> psi) : psi_(std::move(psi)) {
    if (psi_.empty()) throw std::invalid_argument("degree distribution is empty");
    for (std::size_t i = 0; i < psi_.size(); ++i) {
        if (!(psi_[i] >= 0.0) || !std::isfinite(psi_[i]))
            throw std::invalid_argument("degree distribution: negative or non-finite probability at degree " +
                                        std::to_string(i + 1));
    }
    const double total = std::accumulate(psi_.begin(), psi_.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg.precision(12);
        msg << "degree distribution sums to " << total << ", expected 1";
        throw std::invalid_argument(msg.str());
    }
    while (psi_.size() > 1 && psi_.back() == 0.0) psi_.pop_back();
    cdf_.resize(psi_.size());
    std::partial_sum(psi_.begin(), psi_.end(), cdf_.begin());
    cdf_.back() = 1.0;
}

DegreeDistribution DegreeDistribution::point_mass(int degree) {
    if (degree < 1) throw std::invalid_argument("degree must be >= 1");
    std::vector<double> psi(static_cast<std::size_t>(degree), 0.0);
    psi.back() = 1.0;
    return DegreeDistribution(std::move(psi));
}

DegreeDistribution DegreeDistribution::default_for(int batch_size) {
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    const int d_max = 4 * batch_size;
    std::vector<double> psi(static_cast<std::size_t>(d_max), 0.0);
    // Degrees start at M: a batch never carries more rank than it has
    // contributors, so no received packet is wasted on a short batch. Above
    // that a 1/(x(x+1)) tail in x = d/M, and a spike at the cap for coverage.
    // BP stalls early with this shape; inactivation picks up the rest.
    for (int d = batch_size; d <= d_max; ++d) {
        const double x = static_cast<double>(d) / batch_size;
        psi[static_cast<std::size_t>(d - 1)] = 1.0 / (x * (x + 1.0)) / batch_size;
    }
    psi.back() += 0.05;
    const double total = std::accumulate(psi.begin(), psi.end(), 0.0);
    for (auto& p : psi) p /= total;
    return DegreeDistribution(std::move(psi));
}

DegreeDistribution DegreeDistribution::parse(std::istream& in) {
    std::vector<double> psi;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        int degree = 0;
        double prob = 0.0;
        if (!(ls >> degree)) continue;
        if (!(ls >> prob))
            throw std::invalid_argument("degree file line " + std::to_string(line_no) + ": missing probability");
        if (degree < 1)
            throw std::invalid_argument("degree file line " + std::to_string(line_no) + ": degree must be >= 1");
        if (psi.size() < static_cast<std::size_t>(degree)) psi.resize(static_cast<std::size_t>(degree), 0.0);
        psi[static_cast<std::size_t>(degree - 1)] += prob;
    }
    return DegreeDistribution(std::move(psi));
}

DegreeDistribution DegreeDistribution::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open degree file " + path.string());
    return parse(in);
}

void DegreeDistribution::write(std::ostream& out) const {
    const auto old = out.precision(17);
    for (std::size_t i = 0; i < psi_.size(); ++i)
        if (psi_[i] > 0.0) out << (i + 1) << ' ' << psi_[i] << '\n';
    out.precision(old);
}

double DegreeDistribution::probability(int degree) const {
    if (degree < 1 || degree > max_degree()) return 0.0;
    return psi_[static_cast<std::size_t>(degree - 1)];
}

double DegreeDistribution::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < psi_.size(); ++i) m += static_cast<double>(i + 1) * psi_[i];
    return m;
}

int DegreeDistribution::sample(Rng& rng) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    // Skip zero-probability degrees that share a cdf value with their neighbour.
    while (psi_[static_cast<std::size_t>(it - cdf_.begin())] == 0.0) ++it;
    return static_cast<int>(it - cdf_.begin()) + 1;
}

}  // namespace bats
