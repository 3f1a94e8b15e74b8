#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hermes/cache.hpp"
#include "hermes/coherence.hpp"
#include "hermes/config.hpp"
#include "hermes/memory.hpp"
#include "hermes/prefetch.hpp"
#include "hermes/types.hpp"

namespace hermes {

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LevelStats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t probes() const { return hits + misses; }
    std::optional<double> hit_rate_pct() const {
        if (probes() == 0) return std::nullopt;
        return 100.0 * static_cast<double>(hits) / static_cast<double>(probes());
    }
};

// One energy event: a tag probe, a memory-controller transaction or a bus
// message.
enum class EnergyEvent : std::uint8_t { L1, L2, L3, Dram, Hbm, Bus };

struct EventCounts {
    std::uint64_t l1 = 0, l2 = 0, l3 = 0, dram = 0, hbm = 0, bus = 0;

    double total_energy_uj(const EnergyTable& t) const {
        return static_cast<double>(l1) * t.l1_access + static_cast<double>(l2) * t.l2_access +
               static_cast<double>(l3) * t.l3_access + static_cast<double>(dram) * t.dram_access +
               static_cast<double>(hbm) * t.hbm_access + static_cast<double>(bus) * t.bus_transfer;
    }
};

struct SimReport {
    std::string config_name;
    std::string workload_name;
    std::uint64_t total_requests = 0;
    double avg_latency_ns = 0.0;
    double bandwidth_gbs = 0.0;
    std::optional<double> l1_hit_rate_pct;
    std::optional<double> l2_hit_rate_pct;
    std::optional<double> l3_hit_rate_pct;
    std::optional<double> overall_hit_rate_pct;
    double energy_uj_per_op = 0.0;
    std::optional<double> prefetch_accuracy;
    Tick simulated_ticks = 0;
    double wall_seconds = 0.0;  // not serialized; varies run to run

    // Raw counters backing the conservation identities.
    LevelStats l1, l2, l3;
    std::uint64_t requests_to_memory = 0;
    std::uint64_t demand_bytes = 0;
    std::uint64_t mem_read_lines = 0;   // line fills served by DRAM/HBM
    std::uint64_t mem_wb_lines = 0;     // write-back lines to DRAM/HBM
    std::uint64_t dram_bytes = 0;
    std::uint64_t hbm_bytes = 0;
    std::uint64_t prefetch_issued = 0;
    std::uint64_t prefetch_useful = 0;
    std::uint64_t prefetch_useless = 0;
    std::uint64_t latency_total_ticks = 0;
    EventCounts events;
    double energy_total_uj = 0.0;
};

struct EngineOptions {
    // Counters reset after this many processed requests (cache/coherence
    // state is kept). Used by warm-up-sensitive tests.
    std::uint64_t warmup_requests = 0;
    bool record_event_log = false;
    bool record_latencies = false;
};

// Trace-driven driver: prefetchers -> private L1/L2 -> coherent shared L3 ->
// hybrid memory, additive-serial latency charging, deterministic.
class Engine {
public:
    static const SimConfig& validated(const SimConfig& cfg) {
        cfg.validate();
        return cfg;
    }

    explicit Engine(const SimConfig& cfg, EngineOptions opt = {})
        : cfg_(validated(cfg)), opt_(opt), streams_(cfg.cores + 1), ctrl_(cfg.cores + 1),
          memory_(cfg.memory, cfg.l1.line_bytes), line_bytes_(cfg.l1.line_bytes) {
        if (cfg_.cores + 1 > 8)
            throw ValidationError("engine supports at most 7 cores plus the accelerator stream");
        for (std::uint32_t c = 0; c < streams_; ++c) {
            l1s_.emplace_back(cfg_.l1, ClassMap::l2_default());
            l2s_.emplace_back(cfg_.l2, ClassMap::l2_default());
            prefetchers_.emplace_back(cfg_.prefetcher, line_bytes_, cfg_.prefetch);
        }
        if (cfg_.l3) l3_.emplace(*cfg_.l3, ClassMap::l3_default());
        core_time_.assign(streams_, 0);
        last_pf_fill_.assign(streams_, std::nullopt);
    }

    SimReport run(const std::vector<MemoryRequest>& trace) {
        const auto wall_start = std::chrono::steady_clock::now();
        validate_trace(trace);
        const auto order = [](const MemoryRequest& a, const MemoryRequest& b) {
            if (a.tick != b.tick) return a.tick < b.tick;
            return a.core < b.core;
        };
        // Bundled traces arrive pre-merged; only re-order when needed.
        const std::vector<MemoryRequest>* src = &trace;
        std::vector<MemoryRequest> ordered;
        if (!std::is_sorted(trace.begin(), trace.end(), order)) {
            ordered = trace;
            std::stable_sort(ordered.begin(), ordered.end(), order);
            src = &ordered;
        }

        std::uint64_t processed = 0;
        for (const MemoryRequest& req : *src) {
            process(req);
            ++processed;
            if (opt_.warmup_requests != 0 && processed == opt_.warmup_requests) reset_counters();
        }

        SimReport r = build_report();
        r.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
        return r;
    }

    const std::vector<EnergyEvent>& event_log() const { return event_log_; }
    const std::vector<Tick>& latencies() const { return latencies_; }
    const MesiController& coherence() const { return ctrl_; }
    const HybridMemory& memory() const { return memory_; }

private:
    void validate_trace(const std::vector<MemoryRequest>& trace) const {
        const std::uint64_t capacity = cfg_.total_memory_bytes();
        for (const auto& r : trace) {
            if (r.core >= streams_)
                throw ValidationError("trace core id " + std::to_string(r.core) +
                                      " exceeds configured cores (+accelerator stream)");
            if (r.size_bytes == 0 || r.size_bytes > line_bytes_)
                throw ValidationError("trace request size must be in [1, line_bytes]");
            if (r.address + r.size_bytes > capacity)
                throw ValidationError("trace address 0x" + std::to_string(r.address) +
                                      " beyond total memory capacity");
        }
    }

    void count(EnergyEvent e) {
        switch (e) {
        case EnergyEvent::L1: ++events_.l1; break;
        case EnergyEvent::L2: ++events_.l2; break;
        case EnergyEvent::L3: ++events_.l3; break;
        case EnergyEvent::Dram: ++events_.dram; break;
        case EnergyEvent::Hbm: ++events_.hbm; break;
        case EnergyEvent::Bus: ++events_.bus; break;
        }
        if (opt_.record_event_log) event_log_.push_back(e);
    }
    void count_device(DeviceId d) {
        count(d == DeviceId::Dram ? EnergyEvent::Dram : EnergyEvent::Hbm);
    }
    void count_bus_events(const MesiController::Transaction& tx) {
        for (size_t i = 0; i < tx.events.size(); ++i) count(EnergyEvent::Bus);
    }

    void process(const MemoryRequest& req) {
        ++requests_;
        demand_bytes_ += req.size_bytes;
        const CoreId c = req.core;
        const Tick start = std::max(req.tick, core_time_[c]);
        Tick t = start;
        bool reached_memory = false;

        // A request crossing a line boundary splits into two sequential
        // accesses.
        Addr first_line = align_down(req.address, line_bytes_);
        Addr last_line = align_down(req.address + req.size_bytes - 1, line_bytes_);
        for (Addr la = first_line; la <= last_line; la += line_bytes_) {
            if (cfg_.prefetcher != PrefetcherKind::None) {
                MemoryRequest sub = req;
                sub.address = la;
                prefetchers_[c].observe(sub, candidate_buf_);
            }
            t = access_line(c, la, req.op == MemOp::Write, req.hint, t, reached_memory);
            if (!candidate_buf_.empty()) {
                issue_prefetches(c, candidate_buf_, req.hint, t);
                candidate_buf_.clear();
            }
        }

        core_time_[c] = t;
        const Tick latency = t - start;
        latency_total_ += latency;
        if (opt_.record_latencies) latencies_.push_back(latency);
        if (reached_memory) ++requests_to_memory_;
    }

    Tick access_line(CoreId c, Addr la, bool is_write, const std::optional<TensorHint>& hint,
                     Tick t, bool& reached_memory) {
        count(EnergyEvent::L1);
        t += cfg_.l1.hit_latency;
        const AccessResult r1 = l1s_[c].access(la, is_write);
        if (r1.hit) {
            if (is_write) {
                auto tx = ctrl_.on_core_write(c, la);
                count_bus_events(tx);
                apply_remote_effects(tx, la, t);
                l2s_[c].mark_dirty(la);
            }
            return t;
        }

        count(EnergyEvent::L2);
        t += cfg_.l2.hit_latency;
        const AccessResult r2 = l2s_[c].access(la, is_write);
        if (r2.hit) {
            if (r2.first_use_of_prefetch) prefetchers_[c].on_fill_feedback(la, true);
            if (is_write) {
                // Reads hit in any valid state; writes may need an upgrade.
                auto tx = ctrl_.on_core_write(c, la);
                count_bus_events(tx);
                apply_remote_effects(tx, la, t);
            }
            fill_l1(c, la, hint);
            return t;
        }

        auto tx = is_write ? ctrl_.on_core_write(c, la) : ctrl_.on_core_read(c, la);
        count_bus_events(tx);
        apply_remote_effects(tx, la, t);

        if (l3_) {
            count(EnergyEvent::L3);
            t += cfg_.l3->hit_latency;
            const AccessResult r3 = l3_->access(la, false);
            if (!r3.hit) {
                reached_memory = true;
                const MemoryReply reply = memory_.service(la, t, hint);
                count_device(reply.device);
                ++mem_read_lines_;
                last_pf_fill_[c].reset();
                t = reply.ready_at;
                if (auto ev3 = l3_->fill(la, false, hint)) handle_l3_eviction(*ev3, t);
            }
        } else if (!tx.data_from_remote) {
            reached_memory = true;
            const MemoryReply reply = memory_.service(la, t, hint);
            count_device(reply.device);
            ++mem_read_lines_;
            last_pf_fill_[c].reset();
            t = reply.ready_at;
        }

        if (auto ev2 = l2s_[c].fill(la, is_write, hint)) handle_l2_eviction(c, *ev2, t);
        fill_l1(c, la, hint);
        return t;
    }

    void fill_l1(CoreId c, Addr la, const std::optional<TensorHint>& hint) {
        if (auto ev = l1s_[c].fill(la, false, hint)) {
            (void)ev;  // L1 lines are clean mirrors; drop silently
        }
    }

    // Invalidations and downgrades at remote hierarchies after a coherence
    // transaction. A remote Modified copy is flushed into the L3 (or memory
    // when there is none).
    void apply_remote_effects(const MesiController::Transaction& tx, Addr la, Tick t) {
        for (CoreId w : tx.invalidated) {
            l1s_[w].invalidate(la);
            if (auto inv = l2s_[w].invalidate(la)) {
                if (inv->prefetched_untouched) prefetchers_[w].on_fill_feedback(la, false);
            }
        }
        if (tx.writeback_from) {
            const CoreId w = *tx.writeback_from;
            const bool still_resident =
                std::find(tx.invalidated.begin(), tx.invalidated.end(), w) == tx.invalidated.end();
            if (still_resident) l2s_[w].clear_dirty(la);
            if (l3_) l3_->mark_dirty(la);
            else write_back_to_memory(la, t);
        }
    }

    void handle_l2_eviction(CoreId c, const Eviction& ev, Tick t) {
        if (ev.prefetched_untouched) prefetchers_[c].on_fill_feedback(ev.address, false);
        l1s_[c].invalidate(ev.address);
        auto wb = ctrl_.private_eviction(c, ev.address);
        if (wb) count(EnergyEvent::Bus);
        if (ev.dirty) {
            if (l3_) l3_->mark_dirty(ev.address);
            else write_back_to_memory(ev.address, t);
        }
    }

    void handle_l3_eviction(const Eviction& ev, Tick t) {
        auto bi = ctrl_.back_invalidate(ev.address);
        for (CoreId w : bi.holders) {
            count(EnergyEvent::Bus);
            l1s_[w].invalidate(ev.address);
            if (auto inv = l2s_[w].invalidate(ev.address)) {
                if (inv->prefetched_untouched) prefetchers_[w].on_fill_feedback(ev.address, false);
            }
        }
        if (ev.dirty || bi.dirty_flushed) write_back_to_memory(ev.address, t);
    }

    void write_back_to_memory(Addr la, Tick t) {
        const MemoryReply reply = memory_.service(la, t, std::nullopt);
        count_device(reply.device);
        ++mem_wb_lines_;
    }

    void issue_prefetches(CoreId c, const std::vector<PrefetchRequest>& candidates,
                          const std::optional<TensorHint>& trigger_hint, Tick t) {
        // The controller merges a prefetch fill into the previous prefetch
        // transaction when it extends the same burst (adjacent line, same
        // device, no demand access in between): one transaction, two lines.
        std::optional<std::pair<DeviceId, Addr>>& last_mem_fill = last_pf_fill_[c];
        for (const PrefetchRequest& cand : candidates) {
            const Addr la = cand.address;
            if (la + line_bytes_ > cfg_.total_memory_bytes()) continue;
            if (l2s_[c].contains(la)) continue;

            prefetchers_[c].on_fill_issued();
            auto tx = ctrl_.on_core_read(c, la);
            count_bus_events(tx);
            apply_remote_effects(tx, la, t);

            bool from_memory = false;
            DeviceId dev = DeviceId::Dram;
            if (l3_) {
                count(EnergyEvent::L3);
                if (!l3_->probe_prefetch(la)) {
                    const MemoryReply reply = memory_.service(la, t, trigger_hint);
                    from_memory = true;
                    dev = reply.device;
                    ++mem_read_lines_;
                    if (auto ev3 = l3_->fill(la, false, trigger_hint)) handle_l3_eviction(*ev3, t);
                }
            } else if (!tx.data_from_remote) {
                const MemoryReply reply = memory_.service(la, t, trigger_hint);
                from_memory = true;
                dev = reply.device;
                ++mem_read_lines_;
            }
            if (from_memory) {
                const bool coalesced = last_mem_fill && last_mem_fill->first == dev &&
                                       (la == last_mem_fill->second + line_bytes_ ||
                                        last_mem_fill->second == la + line_bytes_);
                if (!coalesced) count_device(dev);
                last_mem_fill = coalesced ? std::nullopt
                                          : std::optional<std::pair<DeviceId, Addr>>({dev, la});
            }

            if (auto ev2 = l2s_[c].fill(la, false, trigger_hint, /*prefetched=*/true))
                handle_l2_eviction(c, *ev2, t);
        }
    }

    void reset_counters() {
        for (auto& cache : l1s_) cache.reset_counters();
        for (auto& cache : l2s_) cache.reset_counters();
        if (l3_) l3_->reset_counters();
        requests_ = requests_to_memory_ = demand_bytes_ = 0;
        mem_read_lines_ = mem_wb_lines_ = 0;
        latency_total_ = 0;
        events_ = EventCounts{};
        event_log_.clear();
        latencies_.clear();
        dram_bytes_offset_ = memory_.device(DeviceId::Dram).bytes_transferred();
        hbm_bytes_offset_ = memory_.device(DeviceId::Hbm).bytes_transferred();
    }

    SimReport build_report() const {
        SimReport r;
        r.config_name = cfg_.name;
        r.total_requests = requests_;
        for (const auto& cache : l1s_) {
            r.l1.hits += cache.demand_hits();
            r.l1.misses += cache.demand_misses();
        }
        for (const auto& cache : l2s_) {
            r.l2.hits += cache.demand_hits();
            r.l2.misses += cache.demand_misses();
        }
        if (l3_) {
            r.l3.hits = l3_->demand_hits();
            r.l3.misses = l3_->demand_misses();
        }
        r.requests_to_memory = requests_to_memory_;
        r.demand_bytes = demand_bytes_;
        r.mem_read_lines = mem_read_lines_;
        r.mem_wb_lines = mem_wb_lines_;
        r.dram_bytes = memory_.device(DeviceId::Dram).bytes_transferred() - dram_bytes_offset_;
        r.hbm_bytes = memory_.device(DeviceId::Hbm).bytes_transferred() - hbm_bytes_offset_;
        r.latency_total_ticks = latency_total_;
        r.events = events_;
        r.energy_total_uj = events_.total_energy_uj(cfg_.energy);
        for (const auto& pf : prefetchers_) {
            r.prefetch_issued += pf.issued();
            r.prefetch_useful += pf.useful();
            r.prefetch_useless += pf.useless();
        }
        r.simulated_ticks = *std::max_element(core_time_.begin(), core_time_.end());
        if (requests_ > 0) {
            r.avg_latency_ns =
                static_cast<double>(latency_total_) / static_cast<double>(requests_);
            r.energy_uj_per_op = r.energy_total_uj / static_cast<double>(requests_);
            r.l1_hit_rate_pct = r.l1.hit_rate_pct();
            r.l2_hit_rate_pct = r.l2.hit_rate_pct();
            if (l3_) r.l3_hit_rate_pct = r.l3.hit_rate_pct();
            r.overall_hit_rate_pct = 100.0 *
                                     static_cast<double>(requests_ - requests_to_memory_) /
                                     static_cast<double>(requests_);
            if (r.simulated_ticks > 0)
                r.bandwidth_gbs = static_cast<double>(demand_bytes_) /
                                  static_cast<double>(r.simulated_ticks);
        }
        if (r.prefetch_issued > 0)
            r.prefetch_accuracy =
                static_cast<double>(r.prefetch_useful) / static_cast<double>(r.prefetch_issued);
        return r;
    }

    SimConfig cfg_;
    EngineOptions opt_;
    std::uint32_t streams_;
    MesiController ctrl_;
    HybridMemory memory_;
    std::uint32_t line_bytes_;
    std::vector<SetAssocCache> l1s_;
    std::vector<SetAssocCache> l2s_;
    std::optional<SetAssocCache> l3_;
    std::vector<Prefetcher> prefetchers_;
    std::vector<Tick> core_time_;
    std::vector<std::optional<std::pair<DeviceId, Addr>>> last_pf_fill_;
    std::vector<PrefetchRequest> candidate_buf_;

    std::uint64_t requests_ = 0;
    std::uint64_t requests_to_memory_ = 0;
    std::uint64_t demand_bytes_ = 0;
    std::uint64_t mem_read_lines_ = 0;
    std::uint64_t mem_wb_lines_ = 0;
    std::uint64_t latency_total_ = 0;
    std::uint64_t dram_bytes_offset_ = 0;
    std::uint64_t hbm_bytes_offset_ = 0;
    EventCounts events_;
    std::vector<EnergyEvent> event_log_;
    std::vector<Tick> latencies_;
};

// Convenience wrapper used by the CLI and tests.
inline SimReport run_simulation(const SimConfig& cfg, const std::vector<MemoryRequest>& trace,
                                const std::string& workload_name, EngineOptions opt = {}) {
    Engine engine(cfg, opt);
    SimReport r = engine.run(trace);
    r.workload_name = workload_name;
    return r;
}

}  // namespace hermes
