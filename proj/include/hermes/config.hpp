#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hermes/types.hpp"

namespace hermes {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ReplacementPolicy : std::uint8_t { Lru, TensorAware };
enum class PlacementPolicy : std::uint8_t { StaticHotFirst, RoundRobin, AllDram };
enum class PrefetcherKind : std::uint8_t { None, Stride, DeltaHistory, Both };

struct CacheGeometry {
    std::uint64_t size_bytes = 0;
    std::uint32_t associativity = 0;
    std::uint32_t line_bytes = 64;
    std::uint32_t hit_latency = 1;  // cycles
    ReplacementPolicy replacement_policy = ReplacementPolicy::Lru;

    std::uint64_t set_count() const {
        return size_bytes / (std::uint64_t{associativity} * line_bytes);
    }

    void validate(const std::string& level) const {
        if (size_bytes == 0 || associativity == 0 || line_bytes == 0)
            throw ConfigError(level + ": size_bytes, associativity and line_bytes must be positive");
        if (!is_pow2(line_bytes) || line_bytes < 8)
            throw ConfigError(level + ": line_bytes must be a power of two >= 8");
        if (size_bytes % (std::uint64_t{associativity} * line_bytes) != 0)
            throw ConfigError(level + ": size_bytes not divisible by associativity * line_bytes");
        if (!is_pow2(set_count()))
            throw ConfigError(level + ": set count " + std::to_string(set_count()) +
                              " is not a power of two");
    }

    friend bool operator==(const CacheGeometry&, const CacheGeometry&) = default;
};

struct MemoryDeviceConfig {
    std::uint64_t capacity_bytes = 0;
    std::uint32_t channels = 1;
    std::uint32_t row_hit_latency = 1;   // cycles
    std::uint32_t row_miss_latency = 1;  // cycles
    std::uint64_t row_bytes = 8192;
    double bytes_per_cycle_per_channel = 1.0;
    double energy_per_access = 0.0;  // uJ

    void validate(const std::string& dev) const {
        if (capacity_bytes == 0 || channels == 0)
            throw ConfigError(dev + ": capacity_bytes and channels must be positive");
        if (row_hit_latency < 1 || row_miss_latency < row_hit_latency)
            throw ConfigError(dev + ": row_miss_latency >= row_hit_latency >= 1 violated");
        if (row_bytes == 0 || !is_pow2(row_bytes))
            throw ConfigError(dev + ": row_bytes must be a positive power of two");
        if (bytes_per_cycle_per_channel <= 0.0)
            throw ConfigError(dev + ": bytes_per_cycle_per_channel must be positive");
        if (energy_per_access < 0.0)
            throw ConfigError(dev + ": energy_per_access must be non-negative");
    }

    friend bool operator==(const MemoryDeviceConfig&, const MemoryDeviceConfig&) = default;
};

struct HybridMemoryConfig {
    MemoryDeviceConfig dram;
    MemoryDeviceConfig hbm;
    std::uint64_t page_bytes = 4096;
    PlacementPolicy placement_policy = PlacementPolicy::StaticHotFirst;

    void validate(std::uint32_t largest_line_bytes) const {
        dram.validate("memory.dram");
        hbm.validate("memory.hbm");
        if (!is_pow2(page_bytes))
            throw ConfigError("memory.page_bytes must be a power of two");
        if (page_bytes < largest_line_bytes)
            throw ConfigError("memory.page_bytes must be >= the largest cache line size");
        if (dram.capacity_bytes % page_bytes != 0)
            throw ConfigError("memory.dram.capacity_bytes not a multiple of page_bytes");
        if (hbm.capacity_bytes % page_bytes != 0)
            throw ConfigError("memory.hbm.capacity_bytes not a multiple of page_bytes");
    }

    friend bool operator==(const HybridMemoryConfig&, const HybridMemoryConfig&) = default;
};

// Per-event energies in uJ. One event = one tag probe at a cache level, one
// memory-controller transaction, or one coherence bus message.
struct EnergyTable {
    double l1_access = 0.2;
    double l2_access = 1.0;
    double l3_access = 5.0;
    double dram_access = 45.0;
    double hbm_access = 25.0;
    double bus_transfer = 1.0;

    void validate() const {
        for (double v : {l1_access, l2_access, l3_access, dram_access, hbm_access, bus_transfer})
            if (v < 0.0) throw ConfigError("energy.*: entries must be non-negative");
    }

    friend bool operator==(const EnergyTable&, const EnergyTable&) = default;
};

struct PrefetchParams {
    std::uint32_t degree = 2;    // candidates per trigger and predictor
    std::uint32_t distance = 1;  // strides ahead of the trigger

    friend bool operator==(const PrefetchParams&, const PrefetchParams&) = default;
};

struct SimConfig {
    std::string name = "paper-default";
    std::uint32_t cores = 4;
    std::uint64_t seed = 1;
    CacheGeometry l1;
    CacheGeometry l2;
    std::optional<CacheGeometry> l3;
    PrefetcherKind prefetcher = PrefetcherKind::Both;
    PrefetchParams prefetch;
    HybridMemoryConfig memory;
    EnergyTable energy;

    void validate() const {
        if (cores < 1) throw ConfigError("cores must be >= 1");
        l1.validate("l1");
        l2.validate("l2");
        if (l1.line_bytes != l2.line_bytes)
            throw ConfigError("all cache levels must share one line size");
        if (l3) {
            l3->validate("l3");
            if (l3->line_bytes != l1.line_bytes)
                throw ConfigError("all cache levels must share one line size");
            if (l3->size_bytes <= std::uint64_t{cores} * l2.size_bytes)
                throw ConfigError(
                    "l3.size_bytes must exceed cores * l2.size_bytes (inclusive hierarchy)");
        }
        if (prefetch.degree == 0) throw ConfigError("prefetch.degree must be >= 1");
        if (prefetch.distance == 0) throw ConfigError("prefetch.distance must be >= 1");
        memory.validate(l1.line_bytes);
        energy.validate();
    }

    std::uint64_t total_memory_bytes() const {
        return memory.dram.capacity_bytes + memory.hbm.capacity_bytes;
    }

    friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

// --- defaults ---------------------------------------------------------------

inline CacheGeometry default_l1() { return {32 * 1024, 8, 64, 2, ReplacementPolicy::Lru}; }
inline CacheGeometry default_l2() { return {256 * 1024, 8, 64, 12, ReplacementPolicy::Lru}; }
inline CacheGeometry default_l3() { return {8 * 1024 * 1024, 16, 64, 40, ReplacementPolicy::Lru}; }

inline MemoryDeviceConfig default_dram() {
    return {8ull << 30, 2, 100, 180, 8192, 8.0, 45.0};
}
inline MemoryDeviceConfig default_hbm() {
    return {4ull << 30, 8, 60, 110, 8192, 16.0, 25.0};
}

// Full HERMES system: shared L3, both prefetchers, tensor-aware replacement
// on L2/L3, hint-driven page placement.
inline SimConfig default_config() {
    SimConfig c;
    c.l1 = default_l1();
    c.l2 = default_l2();
    c.l3 = default_l3();
    c.l2.replacement_policy = ReplacementPolicy::TensorAware;
    c.l3->replacement_policy = ReplacementPolicy::TensorAware;
    c.prefetcher = PrefetcherKind::Both;
    c.memory = {default_dram(), default_hbm(), 4096, PlacementPolicy::StaticHotFirst};
    return c;
}

// The four published HERMES evaluation configurations, each the previous plus
// one feature: baseline -> +shared L3 -> +prefetching -> +tensor-aware
// caching (replacement and hint-driven page placement).
inline std::vector<SimConfig> paper_configs() {
    SimConfig baseline = default_config();
    baseline.name = "baseline";
    baseline.l3.reset();
    baseline.l2.replacement_policy = ReplacementPolicy::Lru;
    baseline.prefetcher = PrefetcherKind::None;
    baseline.memory.placement_policy = PlacementPolicy::AllDram;

    SimConfig shared_l3 = baseline;
    shared_l3.name = "shared-l3";
    shared_l3.l3 = default_l3();

    SimConfig prefetch = shared_l3;
    prefetch.name = "prefetch";
    prefetch.prefetcher = PrefetcherKind::Both;

    SimConfig tensor_aware = prefetch;
    tensor_aware.name = "tensor-aware";
    tensor_aware.l2.replacement_policy = ReplacementPolicy::TensorAware;
    tensor_aware.l3->replacement_policy = ReplacementPolicy::TensorAware;
    tensor_aware.memory.placement_policy = PlacementPolicy::StaticHotFirst;

    return {baseline, shared_l3, prefetch, tensor_aware};
}

// --- enum <-> string --------------------------------------------------------

inline std::string to_string(ReplacementPolicy p) {
    return p == ReplacementPolicy::Lru ? "LRU" : "TensorAware";
}
inline std::string to_string(PlacementPolicy p) {
    switch (p) {
    case PlacementPolicy::StaticHotFirst: return "StaticHotFirst";
    case PlacementPolicy::RoundRobin: return "RoundRobin";
    case PlacementPolicy::AllDram: return "AllDram";
    }
    return "?";
}
inline std::string to_string(PrefetcherKind p) {
    switch (p) {
    case PrefetcherKind::None: return "None";
    case PrefetcherKind::Stride: return "Stride";
    case PrefetcherKind::DeltaHistory: return "DeltaHistory";
    case PrefetcherKind::Both: return "Both";
    }
    return "?";
}

namespace detail {

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::uint64_t parse_uint(const std::string& raw, int line_no) {
    std::string s;
    for (char ch : raw)
        if (ch != '_') s.push_back(ch);
    if (s.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty integer");
    std::uint64_t mult = 1;
    char suffix = s.back();
    if (suffix == 'k' || suffix == 'K') mult = 1024ull;
    else if (suffix == 'M') mult = 1024ull * 1024;
    else if (suffix == 'G') mult = 1024ull * 1024 * 1024;
    if (mult != 1) s.pop_back();
    try {
        size_t pos = 0;
        std::uint64_t v = std::stoull(s, &pos, 0);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v * mult;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line_no) + ": bad integer '" + raw + "'");
    }
}

inline double parse_double(const std::string& raw, int line_no) {
    try {
        size_t pos = 0;
        double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line_no) + ": bad number '" + raw + "'");
    }
}

inline std::string parse_string(const std::string& raw) {
    if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"')
        return raw.substr(1, raw.size() - 2);
    return raw;
}

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

// Parses the flat dotted-key config format. Unset keys keep the stock
// system defaults;
// unknown keys are rejected.
inline SimConfig parse_config(const std::string& text) {
    SimConfig cfg = default_config();
    bool l3_none = false;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::string s = detail::trim(line);
        if (s.empty()) continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        std::string key = detail::trim(s.substr(0, eq));
        std::string val = detail::trim(s.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");

        auto uint_v = [&] { return detail::parse_uint(val, line_no); };
        auto dbl_v = [&] { return detail::parse_double(val, line_no); };
        auto u32_v = [&] { return static_cast<std::uint32_t>(detail::parse_uint(val, line_no)); };

        auto geometry_key = [&](CacheGeometry& g, const std::string& field) -> bool {
            if (field == "size_bytes") g.size_bytes = uint_v();
            else if (field == "associativity") g.associativity = u32_v();
            else if (field == "line_bytes") g.line_bytes = u32_v();
            else if (field == "hit_latency") g.hit_latency = u32_v();
            else if (field == "replacement_policy") {
                std::string v = detail::parse_string(val);
                if (v == "LRU") g.replacement_policy = ReplacementPolicy::Lru;
                else if (v == "TensorAware") g.replacement_policy = ReplacementPolicy::TensorAware;
                else
                    throw ConfigError("line " + std::to_string(line_no) +
                                      ": replacement_policy must be LRU or TensorAware");
            } else return false;
            return true;
        };
        auto device_key = [&](MemoryDeviceConfig& d, const std::string& field) -> bool {
            if (field == "capacity_bytes") d.capacity_bytes = uint_v();
            else if (field == "channels") d.channels = u32_v();
            else if (field == "row_hit_latency") d.row_hit_latency = u32_v();
            else if (field == "row_miss_latency") d.row_miss_latency = u32_v();
            else if (field == "row_bytes") d.row_bytes = uint_v();
            else if (field == "bytes_per_cycle_per_channel") d.bytes_per_cycle_per_channel = dbl_v();
            else if (field == "energy_per_access") d.energy_per_access = dbl_v();
            else return false;
            return true;
        };

        bool known = true;
        if (key == "name") cfg.name = detail::parse_string(val);
        else if (key == "cores") cfg.cores = u32_v();
        else if (key == "seed") cfg.seed = uint_v();
        else if (key == "l3") {
            if (detail::parse_string(val) != "none")
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": 'l3 = none' is the only bare l3 form");
            l3_none = true;
        } else if (key == "prefetcher") {
            std::string v = detail::parse_string(val);
            if (v == "None") cfg.prefetcher = PrefetcherKind::None;
            else if (v == "Stride") cfg.prefetcher = PrefetcherKind::Stride;
            else if (v == "DeltaHistory") cfg.prefetcher = PrefetcherKind::DeltaHistory;
            else if (v == "Both") cfg.prefetcher = PrefetcherKind::Both;
            else
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": prefetcher must be None, Stride, DeltaHistory or Both");
        } else if (key == "prefetch.degree") cfg.prefetch.degree = u32_v();
        else if (key == "prefetch.distance") cfg.prefetch.distance = u32_v();
        else if (key == "memory.page_bytes") cfg.memory.page_bytes = uint_v();
        else if (key == "memory.placement_policy") {
            std::string v = detail::parse_string(val);
            if (v == "StaticHotFirst") cfg.memory.placement_policy = PlacementPolicy::StaticHotFirst;
            else if (v == "RoundRobin") cfg.memory.placement_policy = PlacementPolicy::RoundRobin;
            else if (v == "AllDram") cfg.memory.placement_policy = PlacementPolicy::AllDram;
            else
                throw ConfigError("line " + std::to_string(line_no) +
                                  ": placement_policy must be StaticHotFirst, RoundRobin or AllDram");
        } else if (key.rfind("l1.", 0) == 0) known = geometry_key(cfg.l1, key.substr(3));
        else if (key.rfind("l2.", 0) == 0) known = geometry_key(cfg.l2, key.substr(3));
        else if (key.rfind("l3.", 0) == 0) {
            if (!cfg.l3) cfg.l3 = default_l3();
            known = geometry_key(*cfg.l3, key.substr(3));
        } else if (key.rfind("memory.dram.", 0) == 0) known = device_key(cfg.memory.dram, key.substr(12));
        else if (key.rfind("memory.hbm.", 0) == 0) known = device_key(cfg.memory.hbm, key.substr(11));
        else if (key == "energy.l1_access") cfg.energy.l1_access = dbl_v();
        else if (key == "energy.l2_access") cfg.energy.l2_access = dbl_v();
        else if (key == "energy.l3_access") cfg.energy.l3_access = dbl_v();
        else if (key == "energy.dram_access") cfg.energy.dram_access = dbl_v();
        else if (key == "energy.hbm_access") cfg.energy.hbm_access = dbl_v();
        else if (key == "energy.bus_transfer") cfg.energy.bus_transfer = dbl_v();
        else known = false;

        if (!known)
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (l3_none) cfg.l3.reset();
    cfg.validate();
    return cfg;
}

// Canonical rendering; parse_config(render_config(c)) == c for valid c.
inline std::string render_config(const SimConfig& c) {
    std::ostringstream out;
    out << "name = \"" << c.name << "\"\n";
    out << "cores = " << c.cores << "\n";
    out << "seed = " << c.seed << "\n";
    auto geometry = [&](const std::string& lvl, const CacheGeometry& g) {
        out << lvl << ".size_bytes = " << g.size_bytes << "\n";
        out << lvl << ".associativity = " << g.associativity << "\n";
        out << lvl << ".line_bytes = " << g.line_bytes << "\n";
        out << lvl << ".hit_latency = " << g.hit_latency << "\n";
        out << lvl << ".replacement_policy = " << to_string(g.replacement_policy) << "\n";
    };
    geometry("l1", c.l1);
    geometry("l2", c.l2);
    if (c.l3) geometry("l3", *c.l3);
    else out << "l3 = none\n";
    out << "prefetcher = " << to_string(c.prefetcher) << "\n";
    out << "prefetch.degree = " << c.prefetch.degree << "\n";
    out << "prefetch.distance = " << c.prefetch.distance << "\n";
    auto device = [&](const std::string& dev, const MemoryDeviceConfig& d) {
        out << dev << ".capacity_bytes = " << d.capacity_bytes << "\n";
        out << dev << ".channels = " << d.channels << "\n";
        out << dev << ".row_hit_latency = " << d.row_hit_latency << "\n";
        out << dev << ".row_miss_latency = " << d.row_miss_latency << "\n";
        out << dev << ".row_bytes = " << d.row_bytes << "\n";
        out << dev << ".bytes_per_cycle_per_channel = "
            << detail::fmt_double(d.bytes_per_cycle_per_channel) << "\n";
        out << dev << ".energy_per_access = " << detail::fmt_double(d.energy_per_access) << "\n";
    };
    device("memory.dram", c.memory.dram);
    device("memory.hbm", c.memory.hbm);
    out << "memory.page_bytes = " << c.memory.page_bytes << "\n";
    out << "memory.placement_policy = " << to_string(c.memory.placement_policy) << "\n";
    out << "energy.l1_access = " << detail::fmt_double(c.energy.l1_access) << "\n";
    out << "energy.l2_access = " << detail::fmt_double(c.energy.l2_access) << "\n";
    out << "energy.l3_access = " << detail::fmt_double(c.energy.l3_access) << "\n";
    out << "energy.dram_access = " << detail::fmt_double(c.energy.dram_access) << "\n";
    out << "energy.hbm_access = " << detail::fmt_double(c.energy.hbm_access) << "\n";
    out << "energy.bus_transfer = " << detail::fmt_double(c.energy.bus_transfer) << "\n";
    return out.str();
}

}  // namespace hermes
