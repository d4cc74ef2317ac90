#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bats/degree.hpp"
#include "bats/gf_matrix.hpp"
#include "bats/random.hpp"

namespace bats {

/// One coded packet. `coeff` has exactly M entries, one per packet of the
/// batch as emitted by the source; source packets carry unit vectors.
struct Packet {
    std::uint32_t batch_id = 0;
    std::vector<std::uint8_t> coeff;
    std::vector<std::uint8_t> payload;
};

/// Wire layout: batch_id (2 bytes, big endian), coeff (M bytes), payload (L bytes).
constexpr std::size_t wire_size(int batch_size, std::size_t payload_len) {
    return 2 + static_cast<std::size_t>(batch_size) + payload_len;
}
std::vector<std::uint8_t> to_wire(const Packet& p);
/// Throws std::invalid_argument when the buffer is shorter than 2 + M bytes.
Packet from_wire(std::span<const std::uint8_t> bytes, int batch_size);

struct CodeParams {
    std::uint32_t file_packets = 0;  // F
    int batch_size = 16;             // M
    std::uint64_t seed = 1;
    DegreeDistribution degrees = DegreeDistribution::default_for(16);
};

/// Batch i combines `contributors` (0-based input packet indices) through
/// the degree x M `generator`.
struct BatchDescriptor {
    std::uint32_t batch_id = 0;
    std::vector<std::uint32_t> contributors;
    gf::GfMatrix generator;

    int degree() const { return static_cast<int>(contributors.size()); }
};

/// Outer code shared by the source and every receiver. Descriptors are a
/// pure function of (params, batch_id): a receiver constructing a BatsCode
/// from the same params reproduces them without any side channel.
///
/// Contributors are drawn without replacement from a reshuffled deck of all
/// F indices, so every input packet is covered once per sum(d_i) = F.
class BatsCode {
public:
    explicit BatsCode(CodeParams params);

    const CodeParams& params() const { return params_; }
    int batch_size() const { return params_.batch_size; }
    std::uint32_t file_packets() const { return params_.file_packets; }

    /// Makes descriptors 0..count-1 available.
    void reserve(std::uint32_t count);
    std::uint32_t generated() const { return static_cast<std::uint32_t>(descriptors_.size()); }

    /// Throws std::out_of_range if `batch_id` has not been generated.
    const BatchDescriptor& descriptor(std::uint32_t batch_id) const;
    /// Generates on demand.
    const BatchDescriptor& descriptor(std::uint32_t batch_id);

    /// M source packets of batch `batch_id`; packet u has payload
    /// sum_c generator(c, u) * file.row(contributor c) and coeff e_u.
    /// `file` is F x L.
    std::vector<Packet> encode_batch(const gf::GfMatrix& file, std::uint32_t batch_id);

private:
    void generate_next();

    CodeParams params_;
    std::vector<BatchDescriptor> descriptors_;
    std::vector<std::uint32_t> deck_;
    std::size_t deck_pos_ = 0;
    Rng deck_rng_;
};

/// Receiver bookkeeping for one batch. Only innovative rows are kept, so
/// rank() == rows stored <= M at all times.
class BatchState {
public:
    BatchState(std::uint32_t batch_id, int batch_size, std::size_t payload_len);

    std::uint32_t batch_id() const { return batch_id_; }
    int batch_size() const { return batch_size_; }
    std::size_t payload_len() const { return payload_len_; }
    int rank() const { return rank_; }

    /// Appends `p` iff it raises the rank; returns whether it did.
    /// Throws std::invalid_argument on batch id or coefficient length mismatch.
    bool absorb(const Packet& p);
    /// Innovation test without storing.
    bool is_innovative(std::span<const std::uint8_t> coeff) const;

    /// Random nonzero combination of all stored rows. Throws std::logic_error
    /// when nothing is buffered.
    Packet recode(Rng& rng) const;

    std::span<const std::uint8_t> coeff_row(int r) const;
    std::span<const std::uint8_t> payload_row(int r) const;
    gf::GfMatrix received_coeffs() const;

private:
    int reduce(std::span<std::uint8_t> v) const;

    std::uint32_t batch_id_;
    int batch_size_;
    std::size_t payload_len_;
    int rank_ = 0;
    std::vector<std::uint8_t> coeffs_;    // rank x M, as received
    std::vector<std::uint8_t> payloads_;  // rank x L
    std::vector<std::uint8_t> basis_;     // rank x M, reduced row echelon
    std::vector<int> pivots_;
};

}  // namespace bats
