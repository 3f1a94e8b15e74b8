#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hermes/types.hpp"

namespace hermes {

enum class CoherenceState : std::uint8_t { Modified, Exclusive, Shared, Invalid };

enum class BusEventKind : std::uint8_t { BusRd, BusRdX, BusUpgr, WriteBack };

struct BusEvent {
    BusEventKind kind;
    CoreId source_core;
    Addr address;  // line-aligned
};

struct SnoopResponse {
    bool data_supplied = false;
    bool writeback = false;
    CoherenceState new_state = CoherenceState::Invalid;
};

// Standard MESI snoop reaction of one private cache to a remote bus event.
inline SnoopResponse snoop(CoherenceState state, const BusEvent& event) {
    SnoopResponse r{false, false, state};
    if (state == CoherenceState::Invalid) return r;
    switch (event.kind) {
    case BusEventKind::BusRd:
        if (state == CoherenceState::Modified) {
            r = {true, true, CoherenceState::Shared};
        } else if (state == CoherenceState::Exclusive) {
            r = {true, false, CoherenceState::Shared};
        } else if (state == CoherenceState::Shared) {
            r = {true, false, CoherenceState::Shared};
        }
        break;
    case BusEventKind::BusRdX:
        r = {state != CoherenceState::Shared, state == CoherenceState::Modified,
             CoherenceState::Invalid};
        break;
    case BusEventKind::BusUpgr:
        r = {false, false, CoherenceState::Invalid};
        break;
    case BusEventKind::WriteBack:
        break;
    }
    return r;
}

struct DirectoryEntry {
    std::uint32_t sharers = 0;  // bit per private hierarchy
    std::optional<CoreId> owner;  // the M/E holder
};

// Single-writer/multiple-reader over the per-cache states of one address.
inline bool swmr_holds(const std::vector<CoherenceState>& states) {
    std::uint32_t m = 0, e = 0, s = 0;
    for (CoherenceState st : states) {
        switch (st) {
        case CoherenceState::Modified: ++m; break;
        case CoherenceState::Exclusive: ++e; break;
        case CoherenceState::Shared: ++s; break;
        case CoherenceState::Invalid: break;
        }
    }
    if (m + e > 1) return false;
    if (m >= 1 && (s + e) > 0) return false;
    return true;
}

// MESI over the private L1/L2 hierarchies with a directory kept at the shared
// L3 (degenerates to bus snooping when no L3 is configured). The controller
// owns the authoritative line states; the engine mirrors the resulting
// presence/validity in its cache arrays. Transactions are atomic: each call
// runs to completion in logical order.
class MesiController {
public:
    explicit MesiController(std::uint32_t private_caches = 0) : n_(private_caches) {}

    struct Transaction {
        CoherenceState result_state = CoherenceState::Invalid;
        std::vector<BusEvent> events;           // for energy accounting
        std::vector<CoreId> invalidated;        // remote copies dropped
        std::optional<CoreId> writeback_from;   // remote M flushed its data
        bool data_from_remote = false;
        bool was_hit = false;  // requester already held a usable copy
    };

    Transaction on_core_read(CoreId core, Addr line_addr) {
        Transaction tx;
        CoherenceState s = state(core, line_addr);
        if (s != CoherenceState::Invalid) {
            tx.result_state = s;
            tx.was_hit = true;
            return tx;
        }
        BusEvent ev{BusEventKind::BusRd, core, line_addr};
        tx.events.push_back(ev);
        bool any_sharer = false;
        for (CoreId c = 0; c < n_; ++c) {
            if (c == core) continue;
            CoherenceState rs = state(c, line_addr);
            if (rs == CoherenceState::Invalid) continue;
            any_sharer = true;
            SnoopResponse resp = snoop(rs, ev);
            if (resp.writeback) {
                tx.writeback_from = c;
                tx.events.push_back({BusEventKind::WriteBack, c, line_addr});
            }
            if (resp.data_supplied) tx.data_from_remote = true;
            set_state(c, line_addr, resp.new_state);
        }
        tx.result_state = any_sharer ? CoherenceState::Shared : CoherenceState::Exclusive;
        set_state(core, line_addr, tx.result_state);
        return tx;
    }

    Transaction on_core_write(CoreId core, Addr line_addr) {
        Transaction tx;
        CoherenceState s = state(core, line_addr);
        if (s == CoherenceState::Modified) {
            tx.result_state = s;
            tx.was_hit = true;
            return tx;
        }
        if (s == CoherenceState::Exclusive) {
            // Silent upgrade; no bus traffic.
            set_state(core, line_addr, CoherenceState::Modified);
            tx.result_state = CoherenceState::Modified;
            tx.was_hit = true;
            return tx;
        }
        BusEvent ev{s == CoherenceState::Shared ? BusEventKind::BusUpgr : BusEventKind::BusRdX,
                    core, line_addr};
        tx.events.push_back(ev);
        for (CoreId c = 0; c < n_; ++c) {
            if (c == core) continue;
            CoherenceState rs = state(c, line_addr);
            if (rs == CoherenceState::Invalid) continue;
            SnoopResponse resp = snoop(rs, ev);
            if (resp.writeback) {
                tx.writeback_from = c;
                tx.events.push_back({BusEventKind::WriteBack, c, line_addr});
            }
            if (resp.data_supplied) tx.data_from_remote = true;
            set_state(c, line_addr, resp.new_state);
            tx.invalidated.push_back(c);
        }
        set_state(core, line_addr, CoherenceState::Modified);
        tx.result_state = CoherenceState::Modified;
        return tx;
    }

    // Capacity eviction from a private hierarchy. Dirty data is only ever
    // held in Modified state; leaving M emits exactly one WriteBack.
    std::optional<BusEvent> private_eviction(CoreId core, Addr line_addr) {
        CoherenceState s = state(core, line_addr);
        set_state(core, line_addr, CoherenceState::Invalid);
        if (s == CoherenceState::Modified)
            return BusEvent{BusEventKind::WriteBack, core, line_addr};
        return std::nullopt;
    }

    // L3 eviction: every inner copy is dropped (inclusive hierarchy).
    struct BackInvalidation {
        std::vector<CoreId> holders;
        bool dirty_flushed = false;  // an M copy existed; its data rides the L3 victim
    };
    BackInvalidation back_invalidate(Addr line_addr) {
        BackInvalidation r;
        for (CoreId c = 0; c < n_; ++c) {
            CoherenceState s = state(c, line_addr);
            if (s == CoherenceState::Invalid) continue;
            r.holders.push_back(c);
            if (s == CoherenceState::Modified) r.dirty_flushed = true;
            set_state(c, line_addr, CoherenceState::Invalid);
        }
        return r;
    }

    CoherenceState state(CoreId core, Addr line_addr) const {
        auto it = states_[core].find(line_addr);
        return it == states_[core].end() ? CoherenceState::Invalid : it->second;
    }

    DirectoryEntry directory_entry(Addr line_addr) const {
        DirectoryEntry e;
        for (CoreId c = 0; c < n_; ++c) {
            CoherenceState s = state(c, line_addr);
            if (s == CoherenceState::Invalid) continue;
            e.sharers |= (1u << c);
            if (s == CoherenceState::Modified || s == CoherenceState::Exclusive) e.owner = c;
        }
        return e;
    }

    // SWMR safety for one address: at most one M/E holder, and an M holder
    // excludes every other valid copy.
    bool check_global_invariants(Addr line_addr) const {
        std::vector<CoherenceState> states;
        states.reserve(n_);
        for (CoreId c = 0; c < n_; ++c) states.push_back(state(c, line_addr));
        if (!swmr_holds(states)) return false;
        DirectoryEntry dir = directory_entry(line_addr);
        if (dir.owner && dir.sharers != (1u << *dir.owner)) return false;
        return true;
    }

    std::uint32_t private_caches() const { return n_; }

private:
    void set_state(CoreId core, Addr line_addr, CoherenceState s) {
        if (s == CoherenceState::Invalid)
            states_[core].erase(line_addr);
        else
            states_[core][line_addr] = s;
    }

    std::uint32_t n_ = 0;
    std::array<std::unordered_map<Addr, CoherenceState>, 8> states_;
};

}  // namespace hermes
