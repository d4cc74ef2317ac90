#include "bats/codec.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bats {

std::vector<std::uint8_t> to_wire(const Packet& p) {
    if (p.batch_id > 0xFFFF) throw std::invalid_argument("batch id does not fit the 2-byte header");
    std::vector<std::uint8_t> out;
    out.reserve(2 + p.coeff.size() + p.payload.size());
    out.push_back(static_cast<std::uint8_t>(p.batch_id >> 8));
    out.push_back(static_cast<std::uint8_t>(p.batch_id & 0xFF));
    out.insert(out.end(), p.coeff.begin(), p.coeff.end());
    out.insert(out.end(), p.payload.begin(), p.payload.end());
    return out;
}

Packet from_wire(std::span<const std::uint8_t> bytes, int batch_size) {
    const auto m = static_cast<std::size_t>(batch_size);
    if (bytes.size() < 2 + m) throw std::invalid_argument("wire packet shorter than header");
    Packet p;
    p.batch_id = (static_cast<std::uint32_t>(bytes[0]) << 8) | bytes[1];
    p.coeff.assign(bytes.begin() + 2, bytes.begin() + 2 + static_cast<std::ptrdiff_t>(m));
    p.payload.assign(bytes.begin() + 2 + static_cast<std::ptrdiff_t>(m), bytes.end());
    return p;
}

// ---------------------------------------------------------------------------

BatsCode::BatsCode(CodeParams params)
    : params_(std::move(params)), deck_rng_(derive_seed(params_.seed, 0xDEC0DECULL)) {
    if (params_.file_packets == 0) throw std::invalid_argument("file must contain at least one packet");
    if (params_.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    deck_.resize(params_.file_packets);
    for (std::uint32_t i = 0; i < params_.file_packets; ++i) deck_[i] = i;
    deck_pos_ = deck_.size();
}

void BatsCode::reserve(std::uint32_t count) {
    while (generated() < count) generate_next();
}

const BatchDescriptor& BatsCode::descriptor(std::uint32_t batch_id) const {
    if (batch_id >= descriptors_.size())
        throw std::out_of_range("batch " + std::to_string(batch_id) + " not generated");
    return descriptors_[batch_id];
}

const BatchDescriptor& BatsCode::descriptor(std::uint32_t batch_id) {
    reserve(batch_id + 1);
    return descriptors_[batch_id];
}

void BatsCode::generate_next() {
    const auto id = generated();
    Rng rng(derive_seed(params_.seed, id));
    const int degree = std::min<int>(params_.degrees.sample(rng), static_cast<int>(params_.file_packets));

    BatchDescriptor desc;
    desc.batch_id = id;
    desc.contributors.reserve(static_cast<std::size_t>(degree));
    auto taken = [&](std::uint32_t x) {
        return std::find(desc.contributors.begin(), desc.contributors.end(), x) != desc.contributors.end();
    };
    while (desc.degree() < degree) {
        if (deck_pos_ == deck_.size()) {
            for (std::size_t i = deck_.size() - 1; i > 0; --i)
                std::swap(deck_[i], deck_[deck_rng_.below(i + 1)]);
            deck_pos_ = 0;
        }
        if (taken(deck_[deck_pos_])) {
            // Only possible right after a reshuffle; pull the next fresh index forward.
            auto q = deck_pos_ + 1;
            while (taken(deck_[q])) ++q;
            std::swap(deck_[deck_pos_], deck_[q]);
        }
        desc.contributors.push_back(deck_[deck_pos_++]);
    }
    desc.generator = gf::random_matrix(degree, params_.batch_size, [&] { return rng.byte(); });
    descriptors_.push_back(std::move(desc));
}

std::vector<Packet> BatsCode::encode_batch(const gf::GfMatrix& file, std::uint32_t batch_id) {
    if (file.rows() != static_cast<Eigen::Index>(params_.file_packets))
        throw std::invalid_argument("file row count does not match F");
    const auto& desc = descriptor(batch_id);
    const int m = params_.batch_size;
    const auto len = static_cast<std::size_t>(file.cols());

    std::vector<Packet> out(static_cast<std::size_t>(m));
    for (int u = 0; u < m; ++u) {
        auto& p = out[static_cast<std::size_t>(u)];
        p.batch_id = batch_id;
        p.coeff.assign(static_cast<std::size_t>(m), 0);
        p.coeff[static_cast<std::size_t>(u)] = 1;
        p.payload.assign(len, 0);
        for (int c = 0; c < desc.degree(); ++c)
            gf::axpy(p.payload, gf::row_bytes(file, desc.contributors[static_cast<std::size_t>(c)]),
                     desc.generator(c, u).value());
    }
    return out;
}

// ---------------------------------------------------------------------------

BatchState::BatchState(std::uint32_t batch_id, int batch_size, std::size_t payload_len)
    : batch_id_(batch_id), batch_size_(batch_size), payload_len_(payload_len) {
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
}

int BatchState::reduce(std::span<std::uint8_t> v) const {
    const auto m = static_cast<std::size_t>(batch_size_);
    for (int r = 0; r < rank_; ++r) {
        const auto piv = static_cast<std::size_t>(pivots_[static_cast<std::size_t>(r)]);
        if (v[piv] != 0)
            gf::axpy(v, std::span<const std::uint8_t>(basis_).subspan(static_cast<std::size_t>(r) * m, m), v[piv]);
    }
    for (int c = 0; c < batch_size_; ++c)
        if (v[static_cast<std::size_t>(c)] != 0) return c;
    return -1;
}

bool BatchState::is_innovative(std::span<const std::uint8_t> coeff) const {
    if (coeff.size() != static_cast<std::size_t>(batch_size_))
        throw std::invalid_argument("coefficient vector length must equal the batch size");
    if (rank_ == batch_size_) return false;
    std::vector<std::uint8_t> v(coeff.begin(), coeff.end());
    return reduce(v) >= 0;
}

bool BatchState::absorb(const Packet& p) {
    if (p.batch_id != batch_id_) throw std::invalid_argument("packet belongs to a different batch");
    if (p.coeff.size() != static_cast<std::size_t>(batch_size_))
        throw std::invalid_argument("coefficient vector length must equal the batch size");
    if (p.payload.size() != payload_len_) throw std::invalid_argument("payload length mismatch");
    if (rank_ == batch_size_) return false;

    const auto m = static_cast<std::size_t>(batch_size_);
    std::vector<std::uint8_t> v(p.coeff.begin(), p.coeff.end());
    const int piv = reduce(v);
    if (piv < 0) return false;

    gf::scale(v, gf::inv(v[static_cast<std::size_t>(piv)]));
    // Keep the basis fully reduced so reduce() can visit rows in any order.
    for (int r = 0; r < rank_; ++r) {
        auto row = std::span<std::uint8_t>(basis_).subspan(static_cast<std::size_t>(r) * m, m);
        if (row[static_cast<std::size_t>(piv)] != 0) gf::axpy(row, v, row[static_cast<std::size_t>(piv)]);
    }
    basis_.insert(basis_.end(), v.begin(), v.end());
    pivots_.push_back(piv);
    coeffs_.insert(coeffs_.end(), p.coeff.begin(), p.coeff.end());
    payloads_.insert(payloads_.end(), p.payload.begin(), p.payload.end());
    ++rank_;
    return true;
}

Packet BatchState::recode(Rng& rng) const {
    if (rank_ == 0) throw std::logic_error("cannot recode from an empty batch buffer");
    std::vector<std::uint8_t> mix(static_cast<std::size_t>(rank_));
    do {
        for (auto& c : mix) c = rng.byte();
    } while (gf::is_zero(mix));

    Packet p;
    p.batch_id = batch_id_;
    p.coeff.assign(static_cast<std::size_t>(batch_size_), 0);
    p.payload.assign(payload_len_, 0);
    for (int r = 0; r < rank_; ++r) {
        const auto c = mix[static_cast<std::size_t>(r)];
        gf::axpy(p.coeff, coeff_row(r), c);
        if (payload_len_ > 0) gf::axpy(p.payload, payload_row(r), c);
    }
    return p;
}

std::span<const std::uint8_t> BatchState::coeff_row(int r) const {
    const auto m = static_cast<std::size_t>(batch_size_);
    return std::span<const std::uint8_t>(coeffs_).subspan(static_cast<std::size_t>(r) * m, m);
}

std::span<const std::uint8_t> BatchState::payload_row(int r) const {
    return std::span<const std::uint8_t>(payloads_).subspan(static_cast<std::size_t>(r) * payload_len_, payload_len_);
}

gf::GfMatrix BatchState::received_coeffs() const {
    gf::GfMatrix m(rank_, batch_size_);
    std::copy(coeffs_.begin(), coeffs_.end(), gf::bytes(m).begin());
    return m;
}

}  // namespace bats
