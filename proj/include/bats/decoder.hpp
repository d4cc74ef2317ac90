#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bats/codec.hpp"

namespace bats {

struct DecodeProgress {
    bool complete = false;
    std::size_t unresolved = 0;   // input packets neither solved nor inactivated
    std::size_t inactivated = 0;
    std::size_t deficiency = 0;   // F - rank of the global system, exact once unresolved == 0
};

/// Joint belief-propagation and inactivation decoder for one receiver.
///
/// Every received row h of batch i is turned into one equation over the
/// batch's contributors with coefficients G_i h. A batch is solved once the
/// number of its still-unknown contributors is at most the rank of its
/// equations restricted to them; solutions are substituted into every other
/// batch. When no batch is solvable, the unknown shared by the most open
/// batches (lowest index on ties) is inactivated, i.e. carried symbolically.
/// Surplus equations reduce to constraints on the inactive set and are kept
/// in echelon form, so decoding completes exactly when the global system
/// reaches rank F.
///
/// Equations may be added at any time; state is kept between run() calls.
class Decoder {
public:
    Decoder(const BatsCode& code, std::size_t payload_len);

    void add_packet(std::uint32_t batch_id, std::span<const std::uint8_t> coeff,
                    std::span<const std::uint8_t> payload);
    void add_batch(const BatchState& state);

    /// Runs BP to a fixed point. With `allow_inactivation`, stalls are broken
    /// by inactivation until every unknown is solved or inactive.
    DecodeProgress run(bool allow_inactivation = true);

    bool complete() const;
    DecodeProgress progress() const;
    std::size_t equations() const { return equations_; }

    /// F x L recovered file. Precondition: complete().
    gf::GfMatrix recover() const;

private:
    enum class Status : std::uint8_t { kUnknown, kSolved, kInactive };

    struct Equation {
        std::vector<std::uint8_t> coef;   // over the batch's contributors
        std::vector<std::uint8_t> inact;  // over inactive unknowns, zero-extended
        std::vector<std::uint8_t> rhs;
    };

    struct Slot {
        const BatchDescriptor* desc = nullptr;
        std::vector<Equation> eqs;
        std::uint32_t active = 0;
        bool done = false;
        bool queued = false;
    };

    struct Unknown {
        Status status = Status::kUnknown;
        std::uint32_t inactive_index = 0;
        std::uint32_t open_batches = 0;
        std::vector<std::uint8_t> w;  // value = P + sum_t w[t] * inactive_t
        std::vector<std::uint8_t> p;
        std::vector<std::pair<std::uint32_t, std::uint16_t>> occurrences;  // (slot, local)
    };

    struct PoolRow {
        std::vector<std::uint8_t> inact;
        std::vector<std::uint8_t> rhs;
    };

    Slot& slot_for(std::uint32_t batch_id);
    void substitute(const Slot& slot, Equation& eq) const;
    void maybe_enqueue(std::uint32_t s);
    void process(std::uint32_t s);
    void solve_unknown(std::uint32_t j, Equation&& eq);
    void inactivate(std::uint32_t j);
    void pool_insert(std::vector<std::uint8_t> inact, std::vector<std::uint8_t> rhs);
    void close_slot(std::uint32_t s);

    const BatsCode& code_;
    std::size_t payload_len_;
    std::vector<Slot> slots_;
    std::vector<std::int32_t> slot_of_batch_;
    std::vector<Unknown> unknowns_;
    std::vector<std::uint32_t> inactive_;       // inactive index -> unknown
    std::vector<PoolRow> pool_;
    std::vector<std::int32_t> pool_pivot_row_;  // inactive index -> pool row or -1
    std::vector<std::uint32_t> queue_;
    std::size_t unresolved_;
    std::size_t solved_ = 0;
    std::size_t equations_ = 0;
};

struct DecodeResult {
    bool success = false;
    std::size_t unresolved = 0;  // F - global rank on failure
    std::size_t inactivated = 0;
    gf::GfMatrix file;           // F x L on success
};

/// One-shot decode from a receiver's batch buffers.
DecodeResult decode(const BatsCode& code, std::span<const BatchState> batches, std::size_t payload_len);

}  // namespace bats
