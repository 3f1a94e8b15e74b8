#pragma once

#include <array>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <vector>

#include "hermes/config.hpp"
#include "hermes/types.hpp"

namespace hermes {

enum class PrefetchTrigger : std::uint8_t { Stride, Delta };

struct PrefetchRequest {
    Addr address = 0;          // line-aligned
    std::uint32_t degree_index = 0;
    PrefetchTrigger trigger = PrefetchTrigger::Stride;
};

// Confirmation-based stride predictor. Traces carry no PC, so entries key on
// a 4 KiB address region; a stream crossing into a fresh region inherits the
// confidence of the per-core stream tracker so sequential scans survive page
// transitions.
class StridePrefetcher {
public:
    static constexpr std::uint32_t kTableSize = 256;
    static constexpr std::uint64_t kRegionBytes = 4096;
    static constexpr int kMaxConfidence = 3;
    static constexpr int kIssueConfidence = 2;

    struct StrideEntry {
        std::uint64_t region = 0;
        Addr last_address = 0;
        std::int64_t stride = 0;
        int confidence = 0;
        bool valid = false;
    };

    StridePrefetcher(std::uint32_t line_bytes, PrefetchParams params)
        : line_bytes_(line_bytes), params_(params) {}

    void observe(Addr address, std::vector<PrefetchRequest>& out) {
        const std::uint64_t region = address / kRegionBytes;
        StrideEntry& e = table_[region % kTableSize];
        if (e.valid && e.region == region) {
            const std::int64_t delta =
                static_cast<std::int64_t>(address) - static_cast<std::int64_t>(e.last_address);
            if (delta == e.stride && delta != 0) {
                e.confidence = std::min(e.confidence + 1, kMaxConfidence);
            } else {
                e.confidence = std::max(e.confidence - 1, 0);
                if (e.confidence == 0) {
                    e.stride = delta;
                    e.confidence = delta != 0 ? 1 : 0;
                }
            }
            e.last_address = address;
        } else {
            e = StrideEntry{region, address, 0, 0, true};
            if (stream_.valid) {
                const std::int64_t delta =
                    static_cast<std::int64_t>(address) - static_cast<std::int64_t>(stream_.last_address);
                if (delta != 0 && delta == stream_.stride && stream_.confidence >= 1) {
                    e.stride = delta;
                    e.confidence = std::min(stream_.confidence + 1, kMaxConfidence);
                }
            }
        }
        stream_ = {0, address, e.stride, e.confidence, true};

        if (e.confidence < kIssueConfidence || e.stride == 0) return;
        for (std::uint32_t k = 0; k < params_.degree; ++k) {
            const std::int64_t span = e.stride * static_cast<std::int64_t>(params_.distance + k);
            const Addr cand = align_down(static_cast<Addr>(
                                             static_cast<std::int64_t>(address) + span),
                                         line_bytes_);
            if (std::llabs(span) > static_cast<std::int64_t>(kRegionBytes)) continue;
            if (cand == align_down(address, line_bytes_)) continue;
            out.push_back({cand, k, PrefetchTrigger::Stride});
        }
    }

private:
    std::uint32_t line_bytes_;
    PrefetchParams params_;
    std::array<StrideEntry, kTableSize> table_{};
    StrideEntry stream_{};  // per-core continuation across regions
};

// Two-delta Markov predictor: the pair of the last two line deltas indexes a
// table of predicted next deltas. Stands in for model-based prefetching.
class DeltaHistoryPrefetcher {
public:
    static constexpr std::uint32_t kTableSize = 1024;

    struct DeltaHistoryEntry {
        std::int64_t key_d1 = 0;  // older delta
        std::int64_t key_d2 = 0;  // newer delta
        std::int64_t predicted_delta = 0;
        std::uint8_t hits = 0;  // saturating confirmation counter
        bool valid = false;
    };

    DeltaHistoryPrefetcher(std::uint32_t line_bytes, PrefetchParams params)
        : line_bytes_(line_bytes), params_(params) {}

    void observe(Addr address, std::vector<PrefetchRequest>& out) {
        const std::int64_t line = static_cast<std::int64_t>(address / line_bytes_);
        if (!has_last_) {
            last_line_ = line;
            has_last_ = true;
            return;
        }
        const std::int64_t delta = line - last_line_;
        last_line_ = line;
        if (delta == 0) return;  // same-line re-reference carries no pattern
        if (deltas_seen_ >= 2) {
            DeltaHistoryEntry& e = entry(d2_, d1_);
            if (e.valid && e.key_d1 == d2_ && e.key_d2 == d1_ && e.predicted_delta == delta) {
                if (e.hits < 255) ++e.hits;
            } else {
                e = DeltaHistoryEntry{d2_, d1_, delta, 0, true};
            }
        }
        d2_ = d1_;
        d1_ = delta;
        deltas_seen_ = std::min(deltas_seen_ + 1, 2);
        if (deltas_seen_ < 2) return;

        // Chain predictions up to the configured degree.
        std::int64_t kd1 = d2_, kd2 = d1_;
        std::int64_t pos = line;
        for (std::uint32_t k = 0; k < params_.degree; ++k) {
            const DeltaHistoryEntry& e = entry(kd1, kd2);
            if (!e.valid || e.key_d1 != kd1 || e.key_d2 != kd2 || e.predicted_delta == 0) break;
            pos += e.predicted_delta;
            const std::int64_t span = (pos - line) * static_cast<std::int64_t>(line_bytes_);
            if (std::llabs(span) > 4096) break;
            out.push_back({static_cast<Addr>(pos) * line_bytes_, k, PrefetchTrigger::Delta});
            kd1 = kd2;
            kd2 = e.predicted_delta;
        }
    }

private:
    DeltaHistoryEntry& entry(std::int64_t d1, std::int64_t d2) {
        std::uint64_t h = static_cast<std::uint64_t>(d1) * 0x9e3779b97f4a7c15ull;
        h ^= static_cast<std::uint64_t>(d2) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
        return table_[h % kTableSize];
    }

    std::uint32_t line_bytes_;
    PrefetchParams params_;
    std::array<DeltaHistoryEntry, kTableSize> table_{};
    std::int64_t last_line_ = 0;
    bool has_last_ = false;
    std::int64_t d1_ = 0, d2_ = 0;
    int deltas_seen_ = 0;
};

// Per-core front end combining the configured predictors and tracking
// usefulness of issued prefetches.
class Prefetcher {
public:
    Prefetcher(PrefetcherKind kind, std::uint32_t line_bytes, PrefetchParams params)
        : kind_(kind) {
        if (kind == PrefetcherKind::Stride || kind == PrefetcherKind::Both)
            stride_.emplace(line_bytes, params);
        if (kind == PrefetcherKind::DeltaHistory || kind == PrefetcherKind::Both)
            delta_.emplace(line_bytes, params);
    }

    // Called once per demand access in program order. Candidates are batch
    // deduplicated; the engine drops ones already resident or in flight.
    // Appends into `out` (cleared first) so the caller can reuse one buffer.
    void observe(const MemoryRequest& request, std::vector<PrefetchRequest>& out) {
        out.clear();
        if (kind_ == PrefetcherKind::None) return;
        if (stride_) stride_->observe(request.address, out);
        if (delta_) delta_->observe(request.address, out);
        size_t kept = 0;
        for (size_t i = 0; i < out.size(); ++i) {
            bool seen = false;
            for (size_t j = 0; j < kept; ++j)
                if (out[j].address == out[i].address) { seen = true; break; }
            if (!seen) out[kept++] = out[i];
        }
        out.resize(kept);
    }

    std::vector<PrefetchRequest> observe(const MemoryRequest& request) {
        std::vector<PrefetchRequest> out;
        observe(request, out);
        return out;
    }

    void on_fill_issued() { ++issued_; }
    void on_fill_feedback(Addr, bool was_useful) {
        if (was_useful) ++useful_;
        else ++useless_;
    }

    std::uint64_t issued() const { return issued_; }
    std::uint64_t useful() const { return useful_; }
    std::uint64_t useless() const { return useless_; }

    // useful / issued; absent when nothing was issued.
    std::optional<double> accuracy() const {
        if (issued_ == 0) return std::nullopt;
        return static_cast<double>(useful_) / static_cast<double>(issued_);
    }

private:
    PrefetcherKind kind_;
    std::optional<StridePrefetcher> stride_;
    std::optional<DeltaHistoryPrefetcher> delta_;
    std::uint64_t issued_ = 0;
    std::uint64_t useful_ = 0;
    std::uint64_t useless_ = 0;
};

}  // namespace hermes
