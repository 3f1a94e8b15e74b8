#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hermes/config.hpp"
#include "hermes/types.hpp"

namespace hermes {

// Retention class stored per line. Victim priority is Streaming first, then
// Normal, then HighReuse, LRU-oldest within a class.
enum class PriorityClass : std::uint8_t { Normal, HighReuse, Streaming };

// Maps the request's reuse class to a retention class. L2 only demotes
// streaming data; the shared L3 additionally pins weights, whose reuse
// distances exceed a private L2 but fit the L3.
struct ClassMap {
    std::array<PriorityClass, 4> by_class{};  // indexed by ReuseClass
    PriorityClass unhinted = PriorityClass::Normal;

    PriorityClass map(const std::optional<TensorHint>& hint) const {
        if (!hint) return unhinted;
        return by_class[static_cast<size_t>(hint->reuse_class)];
    }

    static ClassMap l2_default() {
        ClassMap m;
        m.by_class = {PriorityClass::Normal, PriorityClass::Normal, PriorityClass::Normal,
                      PriorityClass::Streaming};
        return m;
    }
    static ClassMap l3_default() {
        ClassMap m;
        m.by_class = {PriorityClass::HighReuse, PriorityClass::Normal, PriorityClass::Normal,
                      PriorityClass::Streaming};
        return m;
    }
};

struct CacheLine {
    std::uint64_t tag = 0;
    bool valid = false;
    bool dirty = false;
    bool prefetched = false;  // speculative fill not yet demanded
    std::uint32_t lru_rank = 0;
    PriorityClass priority_class = PriorityClass::Normal;
};

struct AddressParts {
    std::uint64_t tag = 0;
    std::uint64_t set_index = 0;
    std::uint64_t offset = 0;
};

inline AddressParts decompose(Addr address, const CacheGeometry& g) {
    const std::uint64_t sets = g.set_count();
    AddressParts p;
    p.offset = address % g.line_bytes;
    p.set_index = (address / g.line_bytes) % sets;
    p.tag = address / (std::uint64_t{g.line_bytes} * sets);
    return p;
}

inline Addr recompose(const AddressParts& p, const CacheGeometry& g) {
    const std::uint64_t sets = g.set_count();
    return (p.tag * sets + p.set_index) * g.line_bytes + p.offset;
}

struct AccessResult {
    bool hit = false;
    bool first_use_of_prefetch = false;  // demand touched a prefetched line
};

struct Eviction {
    Addr address = 0;
    bool dirty = false;
    bool prefetched_untouched = false;
};

// Chooses the victim way in a full set under the tensor-aware policy:
// LRU-oldest Streaming line, else LRU-oldest Normal, else LRU-oldest
// HighReuse. Deterministic given the set state.
template <typename LineRange>
std::uint32_t select_victim_tensor_aware(const LineRange& set_lines) {
    static constexpr std::array<PriorityClass, 3> order = {
        PriorityClass::Streaming, PriorityClass::Normal, PriorityClass::HighReuse};
    for (PriorityClass pc : order) {
        std::int64_t best = -1;
        std::uint32_t best_rank = 0;
        for (std::uint32_t w = 0; w < set_lines.size(); ++w) {
            const auto& ln = set_lines[w];
            if (!ln.valid || ln.priority_class != pc) continue;
            if (best < 0 || ln.lru_rank > best_rank) {
                best = w;
                best_rank = ln.lru_rank;
            }
        }
        if (best >= 0) return static_cast<std::uint32_t>(best);
    }
    throw std::logic_error("select_victim_tensor_aware: set not full");
}

// Set-associative, write-back/write-allocate cache. access() never fills;
// fill() is a separate operation so the engine can charge latency and route
// the victim.
class SetAssocCache {
public:
    SetAssocCache() = default;
    SetAssocCache(const CacheGeometry& g, ClassMap class_map)
        : geom_(g), class_map_(class_map), sets_(g.set_count()),
          lines_(g.set_count() * g.associativity) {}

    const CacheGeometry& geometry() const { return geom_; }

    // Demand lookup. Hits refresh recency and set dirty on writes; misses
    // only count.
    AccessResult access(Addr address, bool is_write) {
        auto [way, set] = find(address);
        if (way < 0) {
            ++demand_misses_;
            return {false, false};
        }
        ++demand_hits_;
        CacheLine& ln = line(set, way);
        AccessResult r{true, ln.prefetched};
        ln.prefetched = false;
        if (is_write) ln.dirty = true;
        touch(set, way);
        return r;
    }

    bool contains(Addr address) const {
        auto [way, set] = find(address);
        return way >= 0;
    }

    // Speculative lookup: refreshes recency but does not count as a demand.
    bool probe_prefetch(Addr address) {
        auto [way, set] = find(address);
        if (way < 0) return false;
        touch(set, way);
        return true;
    }

    // Inserts a line that must not already be resident. Returns the evicted
    // line if the set was full.
    std::optional<Eviction> fill(Addr address, bool dirty, const std::optional<TensorHint>& hint,
                                 bool prefetched = false) {
        auto [existing, set] = find(address);
        if (existing >= 0) throw std::logic_error("SetAssocCache::fill: line already resident");
        const AddressParts parts = decompose(address, geom_);

        std::int64_t way = -1;
        for (std::uint32_t w = 0; w < geom_.associativity; ++w)
            if (!line(set, w).valid) { way = w; break; }

        std::optional<Eviction> evicted;
        if (way < 0) {
            std::uint32_t victim;
            if (geom_.replacement_policy == ReplacementPolicy::TensorAware)
                victim = select_victim_tensor_aware(set_view(set));
            else
                victim = oldest_way(set);
            CacheLine& v = line(set, victim);
            evicted = Eviction{line_address(set, v.tag), v.dirty, v.prefetched};
            remove(set, victim);
            way = victim;
        }

        const std::uint32_t valid_before = valid_count(set);
        PriorityClass pc = class_map_.map(hint);
        std::uint32_t rank;
        if (prefetched) {
            rank = std::min(geom_.associativity / 2, valid_before);
        } else if (geom_.replacement_policy == ReplacementPolicy::TensorAware &&
                   pc == PriorityClass::Streaming) {
            rank = valid_before;  // lowest retention
        } else {
            rank = 0;
        }
        insert_at_rank(set, static_cast<std::uint32_t>(way), rank);
        CacheLine& ln = line(set, static_cast<std::uint32_t>(way));
        ln.tag = parts.tag;
        ln.valid = true;
        ln.dirty = dirty;
        ln.prefetched = prefetched;
        ln.priority_class = pc;
        return evicted;
    }

    // Drops the line if present; reports whether dirty data must be flushed.
    struct Invalidated {
        bool dirty = false;
        bool prefetched_untouched = false;
    };
    std::optional<Invalidated> invalidate(Addr address) {
        auto [way, set] = find(address);
        if (way < 0) return std::nullopt;
        CacheLine& ln = line(set, way);
        Invalidated inv{ln.dirty, ln.prefetched};
        remove(set, static_cast<std::uint32_t>(way));
        return inv;
    }

    void mark_dirty(Addr address) {
        auto [way, set] = find(address);
        if (way < 0) throw std::logic_error("SetAssocCache::mark_dirty: line not resident");
        line(set, way).dirty = true;
    }

    // Data now lives in the next level (remote BusRd downgraded M to S).
    void clear_dirty(Addr address) {
        auto [way, set] = find(address);
        if (way >= 0) line(set, way).dirty = false;
    }

    std::uint64_t demand_hits() const { return demand_hits_; }
    std::uint64_t demand_misses() const { return demand_misses_; }
    void reset_counters() { demand_hits_ = demand_misses_ = 0; }

    // Test access to a whole set.
    std::vector<CacheLine> set_state(std::uint64_t set) const {
        std::vector<CacheLine> v;
        for (std::uint32_t w = 0; w < geom_.associativity; ++w) v.push_back(line(set, w));
        return v;
    }

    Addr line_address(std::uint64_t set, std::uint64_t tag) const {
        return recompose({tag, set, 0}, geom_);
    }

private:
    struct SetView {
        const SetAssocCache* cache;
        std::uint64_t set;
        std::uint32_t size() const { return cache->geom_.associativity; }
        const CacheLine& operator[](std::uint32_t w) const { return cache->line(set, w); }
    };
    SetView set_view(std::uint64_t set) const { return {this, set}; }

    CacheLine& line(std::uint64_t set, std::uint32_t way) {
        return lines_[set * geom_.associativity + way];
    }
    const CacheLine& line(std::uint64_t set, std::uint32_t way) const {
        return lines_[set * geom_.associativity + way];
    }

    std::pair<std::int64_t, std::uint64_t> find(Addr address) const {
        const AddressParts p = decompose(address, geom_);
        for (std::uint32_t w = 0; w < geom_.associativity; ++w) {
            const CacheLine& ln = line(p.set_index, w);
            if (ln.valid && ln.tag == p.tag) return {w, p.set_index};
        }
        return {-1, p.set_index};
    }

    std::uint32_t valid_count(std::uint64_t set) const {
        std::uint32_t n = 0;
        for (std::uint32_t w = 0; w < geom_.associativity; ++w)
            if (line(set, w).valid) ++n;
        return n;
    }

    std::uint32_t oldest_way(std::uint64_t set) const {
        std::uint32_t best = 0, best_rank = 0;
        bool found = false;
        for (std::uint32_t w = 0; w < geom_.associativity; ++w) {
            const CacheLine& ln = line(set, w);
            if (ln.valid && (!found || ln.lru_rank > best_rank)) {
                best = w;
                best_rank = ln.lru_rank;
                found = true;
            }
        }
        if (!found) throw std::logic_error("oldest_way: empty set");
        return best;
    }

    void touch(std::uint64_t set, std::uint32_t way) {
        const std::uint32_t old = line(set, way).lru_rank;
        for (std::uint32_t w = 0; w < geom_.associativity; ++w) {
            CacheLine& ln = line(set, w);
            if (ln.valid && ln.lru_rank < old) ++ln.lru_rank;
        }
        line(set, way).lru_rank = 0;
    }

    // Makes room at `rank`, shifting older lines down.
    void insert_at_rank(std::uint64_t set, std::uint32_t way, std::uint32_t rank) {
        for (std::uint32_t w = 0; w < geom_.associativity; ++w) {
            CacheLine& ln = line(set, w);
            if (ln.valid && ln.lru_rank >= rank) ++ln.lru_rank;
        }
        line(set, way).lru_rank = rank;
    }

    void remove(std::uint64_t set, std::uint32_t way) {
        const std::uint32_t old = line(set, way).lru_rank;
        line(set, way) = CacheLine{};
        for (std::uint32_t w = 0; w < geom_.associativity; ++w) {
            CacheLine& ln = line(set, w);
            if (ln.valid && ln.lru_rank > old) --ln.lru_rank;
        }
    }

    CacheGeometry geom_{};
    ClassMap class_map_{};
    std::uint64_t sets_ = 0;
    std::vector<CacheLine> lines_;
    std::uint64_t demand_hits_ = 0;
    std::uint64_t demand_misses_ = 0;
};

}  // namespace hermes
