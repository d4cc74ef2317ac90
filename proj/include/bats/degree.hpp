#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "bats/random.hpp"

namespace bats {

/// Probability vector over batch degrees 1..max_degree().
class DegreeDistribution {
public:
    /// `psi[d-1]` is the probability of degree d. Throws std::invalid_argument
    /// unless the entries are nonnegative and sum to 1 within 1e-9.
    explicit DegreeDistribution(std::vector<double> psi);

    static DegreeDistribution point_mass(int degree);

    /// Built-in heuristic for batch size `batch_size`, supported on
    /// batch_size..4*batch_size. See degree.cpp for the construction.
    static DegreeDistribution default_for(int batch_size);

    /// Plain text, one "degree probability" pair per line; '#' starts a comment.
    static DegreeDistribution parse(std::istream& in);
    static DegreeDistribution load(const std::filesystem::path& path);
    void write(std::ostream& out) const;

    int max_degree() const { return static_cast<int>(psi_.size()); }
    double probability(int degree) const;
    double mean() const;
    const std::vector<double>& psi() const { return psi_; }

    int sample(Rng& rng) const;

private:
    std::vector<double> psi_;
    std::vector<double> cdf_;
};

}  // namespace bats
