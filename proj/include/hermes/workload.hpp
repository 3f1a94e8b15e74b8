#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hermes/trace.hpp"
#include "hermes/types.hpp"

namespace hermes {

struct WorkloadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

struct Region {
    Addr base;
    std::uint64_t bytes;
};

inline void check_disjoint(const std::vector<Region>& regions, const std::string& what) {
    for (size_t i = 0; i < regions.size(); ++i)
        for (size_t j = i + 1; j < regions.size(); ++j) {
            const auto& a = regions[i];
            const auto& b = regions[j];
            if (a.base < b.base + b.bytes && b.base < a.base + a.bytes)
                throw WorkloadError(what + ": operand regions overlap");
        }
}

// Emits the byte range [base, base+len) as requests coalesced to line-sized
// pieces, splitting only at 64-byte boundaries.
class Emitter {
public:
    Emitter(std::vector<MemoryRequest>& out, CoreId core) : out_(out), core_(core) {}

    void range(MemOp op, Addr base, std::uint64_t len, TensorHint hint) {
        Addr a = base;
        std::uint64_t remaining = len;
        while (remaining > 0) {
            const std::uint64_t in_line = 64 - (a % 64);
            const std::uint32_t n = static_cast<std::uint32_t>(std::min<std::uint64_t>(in_line, remaining));
            out_.push_back({tick_++, core_, op, a, n, hint});
            a += n;
            remaining -= n;
        }
    }

private:
    std::vector<MemoryRequest>& out_;
    CoreId core_;
    Tick tick_ = 0;
};

}  // namespace detail

// --- GEMM (CNN / Transformer matmul proxy) ----------------------------------

struct GemmSpec {
    std::uint64_t m = 0, n = 0, k = 0;
    std::uint64_t tile_m = 0, tile_n = 0, tile_k = 0;
    std::uint32_t element_bytes = 4;
    Addr base_a = 0, base_b = 0, base_c = 0;

    void validate() const {
        if (m == 0 || n == 0 || k == 0 || tile_m == 0 || tile_n == 0 || tile_k == 0)
            throw WorkloadError("gemm: dimensions and tiles must be positive");
        if (tile_m > m || tile_n > n || tile_k > k)
            throw WorkloadError("gemm: tiles must not exceed dimensions");
        if (m % tile_m || n % tile_n || k % tile_k)
            throw WorkloadError("gemm: tiles must divide dimensions");
        if (element_bytes != 2 && element_bytes != 4 && element_bytes != 8)
            throw WorkloadError("gemm: element_bytes must be 2, 4 or 8");
        detail::check_disjoint({{base_a, m * k * element_bytes},
                                {base_b, k * n * element_bytes},
                                {base_c, m * n * element_bytes}},
                               "gemm");
    }
};

// Three-level tiled loop nest, jt outermost: per (jt, it) the kt loop reads
// the A and B tiles, then the C tile is read and written back (accumulator
// registers carry the partial sums). Row-major layouts.
inline std::vector<MemoryRequest> gen_gemm(const GemmSpec& s, CoreId core, std::uint64_t /*seed*/) {
    s.validate();
    std::vector<MemoryRequest> trace;
    detail::Emitter emit(trace, core);
    const std::uint32_t e = s.element_bytes;
    const TensorHint ha{static_cast<std::uint32_t>(core) * 16 + 0, ReuseClass::Weight};
    const TensorHint hb{static_cast<std::uint32_t>(core) * 16 + 1, ReuseClass::Activation};
    const TensorHint hc{static_cast<std::uint32_t>(core) * 16 + 2, ReuseClass::Gradient};

    auto tile_rows = [&](MemOp op, Addr base, std::uint64_t row_len_elems, std::uint64_t row0,
                         std::uint64_t col0, std::uint64_t rows, std::uint64_t cols, TensorHint h) {
        for (std::uint64_t r = 0; r < rows; ++r) {
            const Addr a = base + ((row0 + r) * row_len_elems + col0) * e;
            emit.range(op, a, cols * e, h);
        }
    };

    for (std::uint64_t jt = 0; jt < s.n / s.tile_n; ++jt)
        for (std::uint64_t it = 0; it < s.m / s.tile_m; ++it) {
            for (std::uint64_t kt = 0; kt < s.k / s.tile_k; ++kt) {
                tile_rows(MemOp::Read, s.base_a, s.k, it * s.tile_m, kt * s.tile_k, s.tile_m,
                          s.tile_k, ha);
                tile_rows(MemOp::Read, s.base_b, s.n, kt * s.tile_k, jt * s.tile_n, s.tile_k,
                          s.tile_n, hb);
            }
            tile_rows(MemOp::Read, s.base_c, s.n, it * s.tile_m, jt * s.tile_n, s.tile_m, s.tile_n,
                      hc);
            tile_rows(MemOp::Write, s.base_c, s.n, it * s.tile_m, jt * s.tile_n, s.tile_m, s.tile_n,
                      hc);
        }
    return trace;
}

// --- RNN (LSTM/GRU step proxy) ----------------------------------------------

struct RnnSpec {
    std::uint64_t hidden = 0;
    std::uint64_t timesteps = 0;
    std::uint32_t element_bytes = 4;
    Addr base_weights = 0, base_state = 0;

    void validate() const {
        if (hidden == 0 || timesteps == 0) throw WorkloadError("rnn: hidden and timesteps must be positive");
        if (element_bytes != 2 && element_bytes != 4 && element_bytes != 8)
            throw WorkloadError("rnn: element_bytes must be 2, 4 or 8");
        detail::check_disjoint({{base_weights, hidden * hidden * element_bytes},
                                {base_state, hidden * element_bytes}},
                               "rnn");
    }
};

// Per timestep: full weight-matrix read, then the state vector is read and
// rewritten in place.
inline std::vector<MemoryRequest> gen_rnn(const RnnSpec& s, CoreId core, std::uint64_t /*seed*/) {
    s.validate();
    std::vector<MemoryRequest> trace;
    detail::Emitter emit(trace, core);
    const TensorHint hw{static_cast<std::uint32_t>(core) * 16 + 0, ReuseClass::Weight};
    const TensorHint hs{static_cast<std::uint32_t>(core) * 16 + 1, ReuseClass::Activation};
    for (std::uint64_t t = 0; t < s.timesteps; ++t) {
        emit.range(MemOp::Read, s.base_weights, s.hidden * s.hidden * s.element_bytes, hw);
        emit.range(MemOp::Read, s.base_state, s.hidden * s.element_bytes, hs);
        emit.range(MemOp::Write, s.base_state, s.hidden * s.element_bytes, hs);
    }
    return trace;
}

// --- Attention (Transformer proxy) -------------------------------------------

struct AttentionSpec {
    std::uint64_t seq_len = 0;
    std::uint64_t head_dim = 0;
    std::uint32_t element_bytes = 4;
    Addr base_q = 0, base_k = 0, base_v = 0, base_scores = 0;

    void validate() const {
        if (seq_len == 0 || head_dim == 0)
            throw WorkloadError("attention: seq_len and head_dim must be positive");
        if (element_bytes != 2 && element_bytes != 4 && element_bytes != 8)
            throw WorkloadError("attention: element_bytes must be 2, 4 or 8");
        const std::uint64_t qv = seq_len * head_dim * element_bytes;
        detail::check_disjoint(
            {{base_q, qv}, {base_k, qv}, {base_v, qv}, {base_scores, seq_len * seq_len * element_bytes}},
            "attention");
    }
};

// QK^T first (every K row re-read per Q row, score rows written once), then
// scores x V (score rows re-read once, V re-read per output row). The output
// overwrites the Q row in place.
inline std::vector<MemoryRequest> gen_attention(const AttentionSpec& s, CoreId core,
                                                std::uint64_t /*seed*/) {
    s.validate();
    std::vector<MemoryRequest> trace;
    detail::Emitter emit(trace, core);
    const std::uint32_t e = s.element_bytes;
    const std::uint64_t row = s.head_dim * e;
    const TensorHint hq{static_cast<std::uint32_t>(core) * 16 + 0, ReuseClass::Activation};
    const TensorHint hk{static_cast<std::uint32_t>(core) * 16 + 1, ReuseClass::Weight};
    const TensorHint hv{static_cast<std::uint32_t>(core) * 16 + 2, ReuseClass::Weight};
    const TensorHint hscore{static_cast<std::uint32_t>(core) * 16 + 3, ReuseClass::Streaming};

    for (std::uint64_t i = 0; i < s.seq_len; ++i) {
        emit.range(MemOp::Read, s.base_q + i * row, row, hq);
        for (std::uint64_t j = 0; j < s.seq_len; ++j)
            emit.range(MemOp::Read, s.base_k + j * row, row, hk);
        emit.range(MemOp::Write, s.base_scores + i * s.seq_len * e, s.seq_len * e, hscore);
    }
    for (std::uint64_t i = 0; i < s.seq_len; ++i) {
        // A single-row score vector is still live in registers.
        if (s.seq_len > 1)
            emit.range(MemOp::Read, s.base_scores + i * s.seq_len * e, s.seq_len * e, hscore);
        for (std::uint64_t j = 0; j < s.seq_len; ++j)
            emit.range(MemOp::Read, s.base_v + j * row, row, hv);
        emit.range(MemOp::Write, s.base_q + i * row, row, hq);
    }
    return trace;
}

// --- Bundled presets ----------------------------------------------------------

// Per-core address windows, 256 MiB apart, clear of page zero.
inline Addr core_base(CoreId core) { return 0x4000'0000ull + std::uint64_t{core} * 0x1000'0000ull; }

inline GemmSpec gemm_small_spec(CoreId core) {
    GemmSpec s;
    s.m = s.n = s.k = 256;
    s.tile_m = s.tile_n = s.tile_k = 32;
    s.element_bytes = 4;
    s.base_a = core_base(core);
    s.base_b = s.base_a + 0x100'0000;
    s.base_c = s.base_b + 0x100'0000;
    return s;
}

inline RnnSpec rnn_small_spec(CoreId core) {
    RnnSpec s;
    s.hidden = 256;
    s.timesteps = 64;
    s.element_bytes = 4;
    s.base_weights = core_base(core);
    s.base_state = s.base_weights + 0x100'0000;
    return s;
}

inline AttentionSpec attention_small_spec(CoreId core) {
    AttentionSpec s;
    s.seq_len = 128;
    s.head_dim = 64;
    s.element_bytes = 4;
    s.base_q = core_base(core);
    s.base_k = s.base_q + 0x100'0000;
    s.base_v = s.base_k + 0x100'0000;
    s.base_scores = s.base_v + 0x100'0000;
    return s;
}

inline std::vector<std::string> bundled_workload_names() {
    return {"gemm-small", "rnn-small", "attention-small", "cnn-small", "mixed-ml"};
}

// Deterministic 4-core traces used by the CLI and the sweep.
inline std::vector<MemoryRequest> bundled_workload(const std::string& name, std::uint64_t seed = 1) {
    std::vector<std::vector<MemoryRequest>> streams;
    if (name == "gemm-small") {
        for (CoreId c = 0; c < 4; ++c) streams.push_back(gen_gemm(gemm_small_spec(c), c, seed));
    } else if (name == "rnn-small") {
        for (CoreId c = 0; c < 4; ++c) streams.push_back(gen_rnn(rnn_small_spec(c), c, seed));
    } else if (name == "attention-small") {
        for (CoreId c = 0; c < 4; ++c)
            streams.push_back(gen_attention(attention_small_spec(c), c, seed));
    } else if (name == "cnn-small") {
        // Two conv-as-GEMM layers with ResNet-flavoured im2col shapes.
        for (CoreId c = 0; c < 4; ++c) {
            GemmSpec l1;
            l1.m = 64; l1.n = 768; l1.k = 576;
            l1.tile_m = l1.tile_n = l1.tile_k = 32;
            l1.element_bytes = 4;
            l1.base_a = core_base(c);
            l1.base_b = l1.base_a + 0x200'0000;
            l1.base_c = l1.base_b + 0x200'0000;
            GemmSpec l2;
            l2.m = 128; l2.n = 192; l2.k = 1152;
            l2.tile_m = l2.tile_n = l2.tile_k = 32;
            l2.element_bytes = 4;
            l2.base_a = core_base(c) + 0x600'0000;
            l2.base_b = l2.base_a + 0x200'0000;
            l2.base_c = l2.base_b + 0x200'0000;
            std::vector<MemoryRequest> s = gen_gemm(l1, c, seed);
            std::vector<MemoryRequest> s2 = gen_gemm(l2, c, seed);
            const Tick offset = s.empty() ? 0 : s.back().tick + 1;
            for (auto& r : s2) r.tick += offset;
            s.insert(s.end(), s2.begin(), s2.end());
            streams.push_back(std::move(s));
        }
    } else if (name == "mixed-ml") {
        // Heterogeneous mix: one weight-heavy GEMM, one RNN, and two
        // streaming GEMMs whose touch-once activations flood the shared L3.
        GemmSpec big;
        big.m = 2048; big.n = 256; big.k = 512;
        big.tile_m = big.tile_n = big.tile_k = 16;
        big.element_bytes = 4;
        big.base_a = core_base(0);
        big.base_b = big.base_a + 0x400'0000;
        big.base_c = big.base_b + 0x400'0000;
        streams.push_back(gen_gemm(big, 0, seed));

        RnnSpec rnn;
        rnn.hidden = 448;
        rnn.timesteps = 171;
        rnn.element_bytes = 4;
        rnn.base_weights = core_base(1);
        rnn.base_state = rnn.base_weights + 0x400'0000;
        streams.push_back(gen_rnn(rnn, 1, seed));

        for (CoreId c = 2; c < 4; ++c) {
            GemmSpec fl;
            fl.m = 16; fl.n = 32736; fl.k = 512;
            fl.tile_m = fl.tile_n = fl.tile_k = 16;
            fl.element_bytes = 4;
            fl.base_a = core_base(c) + std::uint64_t{c} * 0x800'0000;
            fl.base_b = fl.base_a + 0x400'0000;
            fl.base_c = fl.base_b + 0x800'0000;
            streams.push_back(gen_gemm(fl, c, seed));
        }
    } else {
        throw WorkloadError("unknown workload '" + name + "' (known: gemm-small, rnn-small, "
                            "attention-small, cnn-small, mixed-ml)");
    }
    return merge_streams(streams);
}

}  // namespace hermes
