#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "hermes/config.hpp"
#include "hermes/types.hpp"

namespace hermes {

enum class DeviceId : std::uint8_t { Dram, Hbm };

struct OutOfMemoryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MemoryReply {
    Tick ready_at = 0;
    DeviceId device = DeviceId::Dram;
    bool row_hit = false;
    std::uint32_t bytes = 0;
};

// Sticky physical page -> device mapping.
class PagePlacement {
public:
    PagePlacement() = default;
    PagePlacement(std::uint64_t dram_pages, std::uint64_t hbm_pages, PlacementPolicy policy)
        : dram_capacity_(dram_pages), hbm_capacity_(hbm_pages), policy_(policy) {}

    DeviceId place(std::uint64_t page, const std::optional<TensorHint>& hint) {
        if (auto it = map_.find(page); it != map_.end())
            throw std::logic_error("PagePlacement::place: page already placed");
        DeviceId dev;
        switch (policy_) {
        case PlacementPolicy::AllDram:
            if (dram_used_ >= dram_capacity_) throw OutOfMemoryError("DRAM capacity exhausted");
            dev = DeviceId::Dram;
            break;
        case PlacementPolicy::RoundRobin:
            dev = next_rr_;
            if (dev == DeviceId::Dram && dram_used_ >= dram_capacity_) dev = DeviceId::Hbm;
            if (dev == DeviceId::Hbm && hbm_used_ >= hbm_capacity_) dev = DeviceId::Dram;
            if ((dev == DeviceId::Dram && dram_used_ >= dram_capacity_))
                throw OutOfMemoryError("memory capacity exhausted on both devices");
            next_rr_ = next_rr_ == DeviceId::Dram ? DeviceId::Hbm : DeviceId::Dram;
            break;
        case PlacementPolicy::StaticHotFirst: {
            const bool hot = hint && (hint->reuse_class == ReuseClass::Weight);
            if (hot && hbm_used_ < hbm_capacity_) dev = DeviceId::Hbm;
            else if (dram_used_ < dram_capacity_) dev = DeviceId::Dram;
            else if (hbm_used_ < hbm_capacity_) dev = DeviceId::Hbm;
            else throw OutOfMemoryError("memory capacity exhausted on both devices");
            break;
        }
        default:
            throw std::logic_error("unreachable");
        }
        map_.emplace(page, dev);
        if (dev == DeviceId::Dram) ++dram_used_;
        else ++hbm_used_;
        return dev;
    }

    std::optional<DeviceId> lookup(std::uint64_t page) const {
        auto it = map_.find(page);
        if (it == map_.end()) return std::nullopt;
        return it->second;
    }

    std::uint64_t pages_on(DeviceId dev) const {
        return dev == DeviceId::Dram ? dram_used_ : hbm_used_;
    }
    std::uint64_t placed_pages() const { return map_.size(); }

private:
    std::unordered_map<std::uint64_t, DeviceId> map_;
    std::uint64_t dram_capacity_ = 0;
    std::uint64_t hbm_capacity_ = 0;
    std::uint64_t dram_used_ = 0;
    std::uint64_t hbm_used_ = 0;
    PlacementPolicy policy_ = PlacementPolicy::AllDram;
    DeviceId next_rr_ = DeviceId::Dram;
};

// bytes-in-window / window-duration at 1 cycle = 1 ns, i.e. bytes/ns = GB/s.
inline double achieved_bandwidth(std::uint64_t bytes_in_window, Tick window_ticks) {
    if (window_ticks == 0) throw std::logic_error("achieved_bandwidth: empty window");
    return static_cast<double>(bytes_in_window) / static_cast<double>(window_ticks);
}

// Row-buffer timing model: one open row per channel, channels interleaved at
// line granularity, channel occupied for the transfer time only.
class DeviceState {
public:
    DeviceState() = default;
    DeviceState(const MemoryDeviceConfig& cfg, std::uint32_t line_bytes)
        : cfg_(cfg), line_bytes_(line_bytes), open_row_(cfg.channels), busy_until_(cfg.channels, 0) {
        transfer_cycles_ = static_cast<Tick>(
            (line_bytes + cfg.bytes_per_cycle_per_channel - 1) / cfg.bytes_per_cycle_per_channel);
        if (transfer_cycles_ == 0) transfer_cycles_ = 1;
    }

    MemoryReply service(Addr line_addr, Tick now, DeviceId id) {
        const std::uint32_t ch =
            static_cast<std::uint32_t>((line_addr / line_bytes_) % cfg_.channels);
        const std::uint64_t row = line_addr / cfg_.row_bytes;
        const bool hit = open_row_[ch].has_value() && *open_row_[ch] == row;
        open_row_[ch] = row;
        const Tick start = std::max(now, busy_until_[ch]);
        const Tick latency = hit ? cfg_.row_hit_latency : cfg_.row_miss_latency;
        busy_until_[ch] = start + transfer_cycles_;
        bytes_transferred_ += line_bytes_;
        return {start + latency, id, hit, line_bytes_};
    }

    std::uint64_t bytes_transferred() const { return bytes_transferred_; }
    Tick channel_busy_until(std::uint32_t ch) const { return busy_until_[ch]; }

private:
    MemoryDeviceConfig cfg_{};
    std::uint32_t line_bytes_ = 64;
    Tick transfer_cycles_ = 1;
    std::vector<std::optional<std::uint64_t>> open_row_;
    std::vector<Tick> busy_until_;
    std::uint64_t bytes_transferred_ = 0;
};

// DRAM + HBM behind one page-granular placement map.
class HybridMemory {
public:
    HybridMemory() = default;
    HybridMemory(const HybridMemoryConfig& cfg, std::uint32_t line_bytes)
        : cfg_(cfg),
          placement_(cfg.dram.capacity_bytes / cfg.page_bytes,
                     cfg.hbm.capacity_bytes / cfg.page_bytes, cfg.placement_policy),
          dram_(cfg.dram, line_bytes), hbm_(cfg.hbm, line_bytes) {}

    // Places the page on first touch, then services one line.
    MemoryReply service(Addr line_addr, Tick now, const std::optional<TensorHint>& hint) {
        const std::uint64_t page = line_addr / cfg_.page_bytes;
        DeviceId dev;
        if (auto placed = placement_.lookup(page)) {
            dev = *placed;
        } else {
            dev = placement_.place(page, hint);
        }
        return device(dev).service(line_addr, now, dev);
    }

    DeviceState& device(DeviceId id) { return id == DeviceId::Dram ? dram_ : hbm_; }
    const DeviceState& device(DeviceId id) const { return id == DeviceId::Dram ? dram_ : hbm_; }
    PagePlacement& placement() { return placement_; }
    const PagePlacement& placement() const { return placement_; }
    std::uint64_t total_bytes() const {
        return dram_.bytes_transferred() + hbm_.bytes_transferred();
    }

private:
    HybridMemoryConfig cfg_{};
    PagePlacement placement_;
    DeviceState dram_;
    DeviceState hbm_;
};

}  // namespace hermes
