#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "hermes/trace.hpp"
#include "hermes/workload.hpp"
#include "oracles.hpp"

using namespace hermes;

TEST(Gemm, UnitGemmIsFourRequests) {
    GemmSpec s;
    s.m = s.n = s.k = 1;
    s.tile_m = s.tile_n = s.tile_k = 1;
    s.element_bytes = 4;
    s.base_a = 0x1000;
    s.base_b = 0x2000;
    s.base_c = 0x3000;
    auto t = gen_gemm(s, 0, 1);
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t[0].op, MemOp::Read);
    EXPECT_EQ(t[0].address, 0x1000u);
    EXPECT_EQ(t[0].size_bytes, 4u);
    EXPECT_EQ(t[1].address, 0x2000u);
    EXPECT_EQ(t[2].address, 0x3000u);
    EXPECT_EQ(t[2].op, MemOp::Read);
    EXPECT_EQ(t[3].address, 0x3000u);
    EXPECT_EQ(t[3].op, MemOp::Write);
    EXPECT_EQ(t[0].hint->reuse_class, ReuseClass::Weight);
    EXPECT_EQ(t[1].hint->reuse_class, ReuseClass::Activation);
    EXPECT_EQ(t[2].hint->reuse_class, ReuseClass::Gradient);
}

TEST(Gemm, ATileBytesMatchLoopNestIdentity) {
    GemmSpec s;
    s.m = s.n = s.k = 64;
    s.tile_m = s.tile_n = s.tile_k = 32;
    s.element_bytes = 4;
    s.base_a = 0x100000;
    s.base_b = 0x200000;
    s.base_c = 0x300000;
    auto t = gen_gemm(s, 0, 1);
    auto want = oracle::gemm_counts(s);
    EXPECT_EQ(oracle::bytes_in_region(t, s.base_a, s.m * s.k * 4, MemOp::Read), want.a_read);
    EXPECT_EQ(oracle::bytes_in_region(t, s.base_b, s.k * s.n * 4, MemOp::Read), want.b_read);
    EXPECT_EQ(oracle::bytes_in_region(t, s.base_c, s.m * s.n * 4, MemOp::Read), want.c_read);
    EXPECT_EQ(oracle::bytes_in_region(t, s.base_c, s.m * s.n * 4, MemOp::Write), want.c_write);
}

TEST(Gemm, DeterministicAcrossRuns) {
    GemmSpec s;
    s.m = s.n = s.k = 64;
    s.tile_m = s.tile_n = s.tile_k = 16;
    s.base_a = 0x100000;
    s.base_b = 0x200000;
    s.base_c = 0x300000;
    EXPECT_EQ(gen_gemm(s, 2, 42), gen_gemm(s, 2, 42));
}

TEST(Gemm, OverlappingOperandsRejected) {
    GemmSpec s;
    s.m = s.n = s.k = 64;
    s.tile_m = s.tile_n = s.tile_k = 32;
    s.base_a = 0x1000;
    s.base_b = 0x1000;  // overlaps A
    s.base_c = 0x900000;
    EXPECT_THROW(gen_gemm(s, 0, 1), WorkloadError);
}

TEST(Rnn, MinimalStepIsThreeRequests) {
    RnnSpec s;
    s.hidden = 1;
    s.timesteps = 1;
    s.element_bytes = 4;
    s.base_weights = 0x1000;
    s.base_state = 0x2000;
    auto t = gen_rnn(s, 0, 1);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[0].op, MemOp::Read);
    EXPECT_EQ(t[0].address, 0x1000u);
    EXPECT_EQ(t[0].size_bytes, 4u);
    EXPECT_EQ(t[1].op, MemOp::Read);
    EXPECT_EQ(t[1].address, 0x2000u);
    EXPECT_EQ(t[2].op, MemOp::Write);
    EXPECT_EQ(t[2].address, 0x2000u);
}

TEST(Rnn, WeightBytesScaleWithTimesteps) {
    RnnSpec s;
    s.hidden = 48;
    s.timesteps = 17;
    s.element_bytes = 4;
    s.base_weights = 0x100000;
    s.base_state = 0x200000;
    auto t = gen_rnn(s, 0, 1);
    auto want = oracle::rnn_counts(s);
    EXPECT_EQ(oracle::bytes_in_region(t, s.base_weights, s.hidden * s.hidden * 4, MemOp::Read),
              want.w_read);
}

TEST(Rnn, StateAddressesIdenticalAcrossTimesteps) {
    RnnSpec s;
    s.hidden = 16;
    s.timesteps = 5;
    s.element_bytes = 4;
    s.base_weights = 0x100000;
    s.base_state = 0x200000;
    auto t = gen_rnn(s, 0, 1);
    std::set<Addr> state_reads;
    for (const auto& r : t)
        if (r.address >= s.base_state && r.address < s.base_state + 64 * 4) {
            state_reads.insert(r.address);
        }
    EXPECT_EQ(state_reads.size(), 1u);  // 16 * 4 = 64 bytes: a single request address
}

TEST(Attention, SingleTokenIsFiveRequests) {
    AttentionSpec s;
    s.seq_len = 1;
    s.head_dim = 1;
    s.element_bytes = 4;
    s.base_q = 0x1000;
    s.base_k = 0x2000;
    s.base_v = 0x3000;
    s.base_scores = 0x4000;
    auto t = gen_attention(s, 0, 1);
    ASSERT_EQ(t.size(), 5u);
    EXPECT_EQ(t[0].address, 0x1000u);  // Q row read
    EXPECT_EQ(t[1].address, 0x2000u);  // K row read
    EXPECT_EQ(t[2].address, 0x4000u);  // score write
    EXPECT_EQ(t[2].op, MemOp::Write);
    EXPECT_EQ(t[3].address, 0x3000u);  // V row read
    EXPECT_EQ(t[4].address, 0x1000u);  // output write, in place over Q
    EXPECT_EQ(t[4].op, MemOp::Write);
    EXPECT_EQ(t[1].hint->reuse_class, ReuseClass::Weight);
    EXPECT_EQ(t[2].hint->reuse_class, ReuseClass::Streaming);
}

TEST(Attention, KBytesMatchIdentity) {
    AttentionSpec s;
    s.seq_len = 24;
    s.head_dim = 16;
    s.element_bytes = 4;
    s.base_q = 0x100000;
    s.base_k = 0x200000;
    s.base_v = 0x300000;
    s.base_scores = 0x400000;
    auto t = gen_attention(s, 0, 1);
    auto want = oracle::attention_counts(s);
    EXPECT_EQ(oracle::bytes_in_region(t, s.base_k, s.seq_len * s.head_dim * 4, MemOp::Read),
              want.k_read);
}

TEST(Attention, ScoreRegionTouchedExactlyTwicePerElement) {
    AttentionSpec s;
    s.seq_len = 16;
    s.head_dim = 8;
    s.element_bytes = 4;
    s.base_q = 0x100000;
    s.base_k = 0x200000;
    s.base_v = 0x300000;
    s.base_scores = 0x400000;
    auto t = gen_attention(s, 0, 1);
    const std::uint64_t score_bytes = s.seq_len * s.seq_len * 4;
    EXPECT_EQ(oracle::bytes_in_region(t, s.base_scores, score_bytes, MemOp::Write), score_bytes);
    EXPECT_EQ(oracle::bytes_in_region(t, s.base_scores, score_bytes, MemOp::Read), score_bytes);
}

TEST(Merge, SingleStreamIsIdentity) {
    auto s = gen_rnn({4, 2, 4, 0x1000, 0x2000}, 0, 1);
    EXPECT_EQ(merge_streams({s}), s);
}

TEST(Merge, DisjointTickRangesConcatenate) {
    std::vector<MemoryRequest> a{{0, 0, MemOp::Read, 0x0, 4, std::nullopt},
                                 {1, 0, MemOp::Read, 0x40, 4, std::nullopt}};
    std::vector<MemoryRequest> b{{10, 1, MemOp::Read, 0x80, 4, std::nullopt}};
    auto m = merge_streams({b, a});
    ASSERT_EQ(m.size(), 3u);
    EXPECT_EQ(m[0].core, 0u);
    EXPECT_EQ(m[2].core, 1u);
}

TEST(Merge, EqualTicksAlternateByCoreId) {
    std::vector<MemoryRequest> a{{0, 0, MemOp::Read, 0x0, 4, std::nullopt},
                                 {1, 0, MemOp::Read, 0x40, 4, std::nullopt}};
    std::vector<MemoryRequest> b{{0, 1, MemOp::Read, 0x80, 4, std::nullopt},
                                 {1, 1, MemOp::Read, 0xC0, 4, std::nullopt}};
    auto m = merge_streams({b, a});
    ASSERT_EQ(m.size(), 4u);
    EXPECT_EQ(m[0].core, 0u);
    EXPECT_EQ(m[1].core, 1u);
    EXPECT_EQ(m[2].core, 0u);
    EXPECT_EQ(m[3].core, 1u);
}

TEST(TraceIo, RoundTripIsExact) {
    auto t = bundled_workload("rnn-small");
    t.resize(5000);
    std::ostringstream out;
    write_trace(out, t);
    std::istringstream in(out.str());
    EXPECT_EQ(read_trace(in), t);
}

TEST(TraceIo, BadOpNamesLine) {
    std::istringstream in("0 0 R 0x1000 64\n1 0 X 0x2000 64\n");
    try {
        read_trace(in);
        FAIL() << "expected TraceError";
    } catch (const TraceError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(TraceIo, EmptyFileIsEmptyStream) {
    std::istringstream in("");
    EXPECT_TRUE(read_trace(in).empty());
}

TEST(TraceIo, NonMonotonicTickRejected) {
    std::istringstream in("5 0 R 0x1000 64\n3 0 R 0x2000 64\n");
    EXPECT_THROW(read_trace(in), TraceError);
}

TEST(Generators, PerCoreTicksMonotone) {
    for (const auto& name : bundled_workload_names()) {
        auto t = bundled_workload(name);
        std::map<CoreId, Tick> last;
        for (const auto& r : t) {
            auto it = last.find(r.core);
            if (it != last.end()) {
                ASSERT_GE(r.tick, it->second) << name;
            }
            last[r.core] = r.tick;
        }
    }
}

TEST(Generators, AddressesStayInDeclaredRegions) {
    GemmSpec s;
    s.m = s.n = s.k = 64;
    s.tile_m = s.tile_n = s.tile_k = 16;
    s.element_bytes = 8;
    s.base_a = 0x100000;
    s.base_b = 0x200000;
    s.base_c = 0x300000;
    for (const auto& r : gen_gemm(s, 0, 1)) {
        const bool in_a = r.address >= s.base_a && r.address + r.size_bytes <= s.base_a + s.m * s.k * 8;
        const bool in_b = r.address >= s.base_b && r.address + r.size_bytes <= s.base_b + s.k * s.n * 8;
        const bool in_c = r.address >= s.base_c && r.address + r.size_bytes <= s.base_c + s.m * s.n * 8;
        ASSERT_TRUE(in_a || in_b || in_c);
    }
}
