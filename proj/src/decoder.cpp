#include "bats/decoder.hpp"

#include <algorithm>
#include <stdexcept>

namespace bats {

namespace {

void grow(std::vector<std::uint8_t>& v, std::size_t n) {
    if (v.size() < n) v.resize(n, 0);
}

// dst ^= c * src where src may be shorter than dst (implicit zero tail).
void axpy_prefix(std::vector<std::uint8_t>& dst, const std::vector<std::uint8_t>& src, std::uint8_t c) {
    grow(dst, src.size());
    gf::axpy(std::span<std::uint8_t>(dst).first(src.size()), src, c);
}

}  // namespace

Decoder::Decoder(const BatsCode& code, std::size_t payload_len)
    : code_(code), payload_len_(payload_len), unknowns_(code.file_packets()), unresolved_(code.file_packets()) {}

Decoder::Slot& Decoder::slot_for(std::uint32_t batch_id) {
    if (batch_id >= slot_of_batch_.size()) slot_of_batch_.resize(batch_id + 1, -1);
    auto& idx = slot_of_batch_[batch_id];
    if (idx >= 0) return slots_[static_cast<std::size_t>(idx)];

    idx = static_cast<std::int32_t>(slots_.size());
    const auto s = static_cast<std::uint32_t>(idx);
    Slot slot;
    slot.desc = &code_.descriptor(batch_id);
    for (std::size_t c = 0; c < slot.desc->contributors.size(); ++c) {
        auto& u = unknowns_[slot.desc->contributors[c]];
        u.occurrences.emplace_back(s, static_cast<std::uint16_t>(c));
        if (u.status == Status::kUnknown) {
            ++slot.active;
            ++u.open_batches;
        }
    }
    slots_.push_back(std::move(slot));
    return slots_.back();
}

void Decoder::add_packet(std::uint32_t batch_id, std::span<const std::uint8_t> coeff,
                         std::span<const std::uint8_t> payload) {
    const auto m = static_cast<std::size_t>(code_.batch_size());
    if (coeff.size() != m) throw std::invalid_argument("coefficient vector length must equal the batch size");
    if (payload.size() != payload_len_) throw std::invalid_argument("payload length mismatch");

    Slot& slot = slot_for(batch_id);
    const auto s = static_cast<std::uint32_t>(slot_of_batch_[batch_id]);
    const auto& gen = slot.desc->generator;

    Equation eq;
    eq.coef.assign(slot.desc->contributors.size(), 0);
    for (std::size_t c = 0; c < eq.coef.size(); ++c) {
        const auto g = gf::row_bytes(gen, static_cast<Eigen::Index>(c));
        std::uint8_t acc = 0;
        for (std::size_t u = 0; u < m; ++u) acc ^= gf::mul(g[u], coeff[u]);
        eq.coef[c] = acc;
    }
    eq.rhs.assign(payload.begin(), payload.end());
    ++equations_;

    if (slot.done) {
        substitute(slot, eq);
        pool_insert(std::move(eq.inact), std::move(eq.rhs));
        return;
    }
    slot.eqs.push_back(std::move(eq));
    maybe_enqueue(s);
}

void Decoder::add_batch(const BatchState& state) {
    for (int r = 0; r < state.rank(); ++r) add_packet(state.batch_id(), state.coeff_row(r), state.payload_row(r));
}

void Decoder::maybe_enqueue(std::uint32_t s) {
    Slot& slot = slots_[s];
    if (slot.done || slot.queued) return;
    if (slot.active <= slot.eqs.size()) {
        slot.queued = true;
        queue_.push_back(s);
    }
}

// Moves every solved or inactive contributor of `eq` to the inactive part.
void Decoder::substitute(const Slot& slot, Equation& eq) const {
    for (std::size_t c = 0; c < eq.coef.size(); ++c) {
        const auto e = eq.coef[c];
        if (e == 0) continue;
        const auto& u = unknowns_[slot.desc->contributors[c]];
        if (u.status == Status::kSolved) {
            axpy_prefix(eq.inact, u.w, e);
            grow(eq.rhs, payload_len_);
            gf::axpy(eq.rhs, u.p, e);
            eq.coef[c] = 0;
        } else if (u.status == Status::kInactive) {
            grow(eq.inact, u.inactive_index + 1);
            eq.inact[u.inactive_index] ^= e;
            eq.coef[c] = 0;
        }
    }
}

void Decoder::process(std::uint32_t s) {
    Slot& slot = slots_[s];
    slot.queued = false;
    if (slot.done || slot.active > slot.eqs.size()) return;

    for (auto& eq : slot.eqs) substitute(slot, eq);

    // Gauss-Jordan on the columns of still-unknown contributors.
    const auto& contrib = slot.desc->contributors;
    auto& eqs = slot.eqs;
    std::vector<std::size_t> pivot_local;
    std::size_t r = 0;
    for (std::size_t c = 0; c < contrib.size() && r < eqs.size(); ++c) {
        if (unknowns_[contrib[c]].status != Status::kUnknown) continue;
        std::size_t p = r;
        while (p < eqs.size() && eqs[p].coef[c] == 0) ++p;
        if (p == eqs.size()) continue;
        std::swap(eqs[p], eqs[r]);
        Equation& piv = eqs[r];
        const auto s_inv = gf::inv(piv.coef[c]);
        gf::scale(piv.coef, s_inv);
        gf::scale(piv.inact, s_inv);
        gf::scale(piv.rhs, s_inv);
        for (std::size_t i = 0; i < eqs.size(); ++i) {
            if (i == r) continue;
            const auto f = eqs[i].coef[c];
            if (f == 0) continue;
            gf::axpy(eqs[i].coef, piv.coef, f);
            axpy_prefix(eqs[i].inact, piv.inact, f);
            if (!piv.rhs.empty()) {
                grow(eqs[i].rhs, payload_len_);
                gf::axpy(eqs[i].rhs, piv.rhs, f);
            }
        }
        pivot_local.push_back(c);
        ++r;
    }
    if (r < slot.active) return;

    // Decodable: each pivot row now reads x_c + (inactive terms) = rhs.
    std::vector<Equation> rows = std::move(eqs);
    eqs.clear();
    slot.done = true;
    close_slot(s);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i < pivot_local.size()) {
            solve_unknown(contrib[pivot_local[i]], std::move(rows[i]));
        } else {
            pool_insert(std::move(rows[i].inact), std::move(rows[i].rhs));
        }
    }
}

void Decoder::close_slot(std::uint32_t s) {
    for (auto j : slots_[s].desc->contributors) {
        auto& u = unknowns_[j];
        if (u.status == Status::kUnknown && u.open_batches > 0) --u.open_batches;
    }
}

void Decoder::solve_unknown(std::uint32_t j, Equation&& eq) {
    auto& u = unknowns_[j];
    u.status = Status::kSolved;
    u.w = std::move(eq.inact);
    u.p = std::move(eq.rhs);
    grow(u.p, payload_len_);
    --unresolved_;
    ++solved_;
    for (auto [s, local] : u.occurrences) {
        Slot& slot = slots_[s];
        if (slot.done) continue;
        --slot.active;
        maybe_enqueue(s);
    }
}

void Decoder::inactivate(std::uint32_t j) {
    auto& u = unknowns_[j];
    u.status = Status::kInactive;
    u.inactive_index = static_cast<std::uint32_t>(inactive_.size());
    inactive_.push_back(j);
    pool_pivot_row_.push_back(-1);
    --unresolved_;
    for (auto [s, local] : u.occurrences) {
        Slot& slot = slots_[s];
        if (slot.done) continue;
        --slot.active;
        maybe_enqueue(s);
    }
}

void Decoder::pool_insert(std::vector<std::uint8_t> inact, std::vector<std::uint8_t> rhs) {
    grow(rhs, payload_len_);
    for (std::size_t t = 0; t < inact.size(); ++t) {
        const auto e = inact[t];
        if (e == 0) continue;
        const auto row = pool_pivot_row_[t];
        if (row >= 0) {
            const auto& pr = pool_[static_cast<std::size_t>(row)];
            axpy_prefix(inact, pr.inact, e);
            gf::axpy(rhs, pr.rhs, e);
            continue;
        }
        const auto s_inv = gf::inv(e);
        gf::scale(inact, s_inv);
        gf::scale(rhs, s_inv);
        pool_pivot_row_[t] = static_cast<std::int32_t>(pool_.size());
        pool_.push_back({std::move(inact), std::move(rhs)});
        return;
    }
    // Dependent row: adds nothing.
}

DecodeProgress Decoder::run(bool allow_inactivation) {
    for (;;) {
        while (!queue_.empty()) {
            const auto s = queue_.back();
            queue_.pop_back();
            process(s);
        }
        if (unresolved_ == 0 || !allow_inactivation) break;

        std::uint32_t best = 0;
        std::uint32_t best_count = 0;
        bool found = false;
        for (std::uint32_t j = 0; j < unknowns_.size(); ++j) {
            const auto& u = unknowns_[j];
            if (u.status != Status::kUnknown) continue;
            if (!found || u.open_batches > best_count) {
                best = j;
                best_count = u.open_batches;
                found = true;
            }
        }
        inactivate(best);
    }
    return progress();
}

bool Decoder::complete() const { return unresolved_ == 0 && pool_.size() == inactive_.size(); }

DecodeProgress Decoder::progress() const {
    DecodeProgress p;
    p.unresolved = unresolved_;
    p.inactivated = inactive_.size();
    p.deficiency = unresolved_ + (inactive_.size() - pool_.size());
    p.complete = complete();
    return p;
}

gf::GfMatrix Decoder::recover() const {
    if (!complete()) throw std::logic_error("decoder is not complete");
    const std::size_t n_inact = inactive_.size();
    const auto len = payload_len_;

    // Back substitution over the echelon pool, highest pivot first.
    std::vector<std::vector<std::uint8_t>> value(n_inact, std::vector<std::uint8_t>(len, 0));
    for (std::size_t t = n_inact; t-- > 0;) {
        const auto& row = pool_[static_cast<std::size_t>(pool_pivot_row_[t])];
        auto& v = value[t];
        std::copy(row.rhs.begin(), row.rhs.end(), v.begin());
        for (std::size_t t2 = t + 1; t2 < row.inact.size(); ++t2)
            if (row.inact[t2] != 0) gf::axpy(v, value[t2], row.inact[t2]);
    }

    gf::GfMatrix file(static_cast<Eigen::Index>(unknowns_.size()), static_cast<Eigen::Index>(len));
    for (std::size_t j = 0; j < unknowns_.size(); ++j) {
        auto out = gf::row_bytes(file, static_cast<Eigen::Index>(j));
        const auto& u = unknowns_[j];
        if (u.status == Status::kInactive) {
            std::copy(value[u.inactive_index].begin(), value[u.inactive_index].end(), out.begin());
            continue;
        }
        std::copy(u.p.begin(), u.p.end(), out.begin());
        for (std::size_t t = 0; t < u.w.size(); ++t)
            if (u.w[t] != 0) gf::axpy(out, value[t], u.w[t]);
    }
    return file;
}

DecodeResult decode(const BatsCode& code, std::span<const BatchState> batches, std::size_t payload_len) {
    Decoder dec(code, payload_len);
    for (const auto& b : batches) {
        if (b.rank() == 0) continue;
        if (b.payload_len() != payload_len) throw std::invalid_argument("payload length mismatch");
        dec.add_batch(b);
    }
    const auto prog = dec.run(true);
    DecodeResult out;
    out.inactivated = prog.inactivated;
    out.unresolved = prog.deficiency;
    out.success = prog.complete;
    if (out.success) out.file = dec.recover();
    return out;
}

}  // namespace bats
