#include <doctest.h>

#include <numeric>

#include "bats/decoder.hpp"
#include "oracles.hpp"

using namespace bats;
using gf::GfMatrix;

namespace {

struct Instance {
    BatsCode code;
    GfMatrix file;
    std::vector<BatchState> batches;
};

// Receiver view: each source packet survives with probability 1 - erasure,
// and `extra` random recombinations of a full batch are appended on top.
Instance make_instance(CodeParams cp, int n, int len, double erasure, int extra, Rng& rng) {
    Instance in{BatsCode(std::move(cp)), {}, {}};
    const int f = static_cast<int>(in.code.file_packets());
    const int m = in.code.batch_size();
    in.file = gf::random_matrix(f, len, [&] { return rng.byte(); });
    for (int i = 0; i < n; ++i) {
        const auto id = static_cast<std::uint32_t>(i);
        const auto pkts = in.code.encode_batch(in.file, id);
        BatchState full(id, m, static_cast<std::size_t>(len));
        for (const auto& p : pkts) full.absorb(p);
        BatchState got(id, m, static_cast<std::size_t>(len));
        for (const auto& p : pkts)
            if (!rng.bernoulli(erasure)) got.absorb(p);
        for (int e = 0; e < extra; ++e) got.absorb(full.recode(rng));
        in.batches.push_back(std::move(got));
    }
    return in;
}

DegreeDistribution random_degrees(int max_degree, Rng& rng) {
    std::vector<double> w(static_cast<std::size_t>(max_degree));
    double s = 0.0;
    for (auto& x : w) s += x = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    if (s == 0.0) return DegreeDistribution::point_mass(1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_degree))));
    for (auto& x : w) x /= s;
    w.back() += 1.0 - std::accumulate(w.begin(), w.end(), 0.0);
    if (w.back() < 0) w.back() = 0;
    return DegreeDistribution(w);
}

}  // namespace

TEST_SUITE("decoder") {

TEST_CASE("loss-free loopback recovers the file byte for byte") {
    Rng rng(21);
    CodeParams cp;
    cp.file_packets = 200;
    cp.batch_size = 16;
    cp.seed = 3;
    cp.degrees = DegreeDistribution::default_for(16);
    auto in = make_instance(cp, 15, 40, 0.0, 0, rng);
    const auto res = decode(in.code, in.batches, 40);
    REQUIRE(res.success);
    CHECK(res.unresolved == 0);
    CHECK(res.file == in.file);
}

TEST_CASE("no packets leaves every input unresolved") {
    CodeParams cp;
    cp.file_packets = 30;
    cp.batch_size = 4;
    cp.degrees = DegreeDistribution::point_mass(4);
    BatsCode code(cp);
    Decoder dec(code, 8);
    const auto prog = dec.run(true);
    CHECK_FALSE(prog.complete);
    CHECK(prog.deficiency == 30);
    const auto res = decode(code, std::span<const BatchState>{}, 8);
    CHECK_FALSE(res.success);
    CHECK(res.unresolved == 30);
}

TEST_CASE("success and deficiency agree with the global rank on random instances") {
    Rng rng(22);
    int successes = 0;
    for (int trial = 0; trial < 200; ++trial) {
        CodeParams cp;
        cp.file_packets = 1 + static_cast<std::uint32_t>(rng.below(64));
        cp.batch_size = 1 + static_cast<int>(rng.below(8));
        cp.seed = rng.next();
        cp.degrees = random_degrees(1 + static_cast<int>(rng.below(3 * 8)), rng);
        const int n = 1 + static_cast<int>(rng.below(16));
        const double erasure = rng.uniform() * 0.6;
        auto in = make_instance(cp, n, 6, erasure, 0, rng);
        const int r = oracle::rank(oracle::global_system(in.code, in.batches));
        const auto f = in.code.file_packets();

        Decoder dec(in.code, 6);
        for (const auto& b : in.batches) dec.add_batch(b);
        const auto prog = dec.run(true);
        CAPTURE(trial);
        CHECK(prog.complete == (r == static_cast<int>(f)));
        CHECK(prog.deficiency == f - static_cast<std::size_t>(r));
        if (prog.complete) {
            ++successes;
            CHECK(dec.recover() == in.file);
        }
    }
    // Both outcomes must be exercised for the comparison to mean anything.
    CHECK(successes > 20);
    CHECK(successes < 180);
}

TEST_CASE("recovery under mixed erasures and recoding") {
    Rng rng(23);
    int decoded = 0;
    for (int trial = 0; trial < 100; ++trial) {
        CodeParams cp;
        cp.file_packets = 120;
        cp.batch_size = 8;
        cp.seed = rng.next();
        cp.degrees = DegreeDistribution::default_for(8);
        auto in = make_instance(cp, 30, 33, 0.4, static_cast<int>(rng.below(4)), rng);
        const auto res = decode(in.code, in.batches, 33);
        if (!res.success) continue;
        ++decoded;
        CHECK(res.file == in.file);
    }
    CHECK(decoded > 50);
}

TEST_CASE("incremental decoding matches one-shot decoding") {
    Rng rng(24);
    for (int trial = 0; trial < 20; ++trial) {
        CodeParams cp;
        cp.file_packets = 80;
        cp.batch_size = 8;
        cp.seed = rng.next();
        cp.degrees = DegreeDistribution::default_for(8);
        auto in = make_instance(cp, 16, 10, 0.3, 1, rng);
        const auto once = decode(in.code, in.batches, 10);

        Decoder inc(in.code, 10);
        for (const auto& b : in.batches) {
            for (int r = 0; r < b.rank(); ++r) {
                inc.add_packet(b.batch_id(), b.coeff_row(r), b.payload_row(r));
                inc.run(rng.below(2) == 0);
            }
        }
        const auto prog = inc.run(true);
        CHECK(prog.complete == once.success);
        CHECK(prog.deficiency == once.unresolved);
        if (prog.complete) CHECK(inc.recover() == once.file);
    }
}

}
