#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bats/gf256.hpp"

namespace bats::gf {

using GfMatrix = Eigen::Matrix<Gf256, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using GfVector = Eigen::Matrix<Gf256, Eigen::Dynamic, 1>;
using GfRowVector = Eigen::Matrix<Gf256, 1, Eigen::Dynamic>;

/// Reduces `m` in place to reduced row echelon form and returns its rank.
/// Pivoting takes the first nonzero entry in each column; finite fields
/// have no magnitude to prefer. Optional `pivots` receives the pivot columns.
template <typename Derived>
Eigen::Index row_reduce(Eigen::MatrixBase<Derived>& m, std::vector<Eigen::Index>* pivots = nullptr) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index rows = m.rows();
    const Eigen::Index cols = m.cols();
    Eigen::Index r = 0;
    if (pivots) pivots->clear();
    for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
        Eigen::Index p = r;
        while (p < rows && m(p, c) == Scalar(0)) ++p;
        if (p == rows) continue;
        if (p != r) m.row(p).swap(m.row(r));
        const Scalar s = Scalar(1) / m(r, c);
        m.row(r) *= s;
        for (Eigen::Index i = 0; i < rows; ++i) {
            if (i == r) continue;
            const Scalar f = m(i, c);
            if (f != Scalar(0)) m.row(i) -= f * m.row(r);
        }
        if (pivots) pivots->push_back(c);
        ++r;
    }
    return r;
}

template <typename Derived>
Eigen::Index rank(const Eigen::MatrixBase<Derived>& m) {
    Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> work = m;
    return row_reduce(work);
}

enum class SolveStatus { kOk, kUnderdetermined, kInconsistent };

template <typename Scalar>
struct SolveResult {
    SolveStatus status = SolveStatus::kUnderdetermined;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x;

    bool ok() const { return status == SolveStatus::kOk; }
};

/// Solves a * x = y for x. `a` may be tall; the system is accepted when `a`
/// has full column rank and the surplus equations are consistent.
template <typename DerivedA, typename DerivedY>
auto solve(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedY>& y)
    -> SolveResult<typename DerivedA::Scalar> {
    using Scalar = typename DerivedA::Scalar;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    eigen_assert(a.rows() == y.rows());
    const Eigen::Index n = a.cols();
    Mat aug(a.rows(), n + y.cols());
    aug.leftCols(n) = a;
    aug.rightCols(y.cols()) = y;

    std::vector<Eigen::Index> pivots;
    const Eigen::Index r = row_reduce(aug, &pivots);

    SolveResult<Scalar> out;
    // A pivot landing in the right-hand block means 0 = nonzero.
    if (r > 0 && pivots.back() >= n) {
        out.status = SolveStatus::kInconsistent;
        return out;
    }
    if (r < n) {
        out.status = SolveStatus::kUnderdetermined;
        return out;
    }
    out.status = SolveStatus::kOk;
    out.x = aug.topRightCorner(n, y.cols());
    return out;
}

/// Uniform random matrix; `next_byte` is any callable returning a byte.
template <typename ByteSource>
GfMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, ByteSource&& next_byte) {
    GfMatrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = Gf256(next_byte());
    return m;
}

inline std::span<std::uint8_t> bytes(GfMatrix& m) {
    return {reinterpret_cast<std::uint8_t*>(m.data()), static_cast<std::size_t>(m.size())};
}

inline std::span<const std::uint8_t> bytes(const GfMatrix& m) {
    return {reinterpret_cast<const std::uint8_t*>(m.data()), static_cast<std::size_t>(m.size())};
}

inline std::span<const std::uint8_t> row_bytes(const GfMatrix& m, Eigen::Index r) {
    return bytes(m).subspan(static_cast<std::size_t>(r * m.cols()), static_cast<std::size_t>(m.cols()));
}

inline std::span<std::uint8_t> row_bytes(GfMatrix& m, Eigen::Index r) {
    return bytes(m).subspan(static_cast<std::size_t>(r * m.cols()), static_cast<std::size_t>(m.cols()));
}

}  // namespace bats::gf
