#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "hermes/types.hpp"

namespace hermes {

struct TraceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One request per line: `tick core R|W 0xADDRESS size [tensor_id:reuse_class]`.
inline void write_trace(std::ostream& out, const std::vector<MemoryRequest>& trace) {
    for (const auto& r : trace) {
        out << r.tick << ' ' << r.core << ' ' << (r.op == MemOp::Read ? 'R' : 'W') << " 0x"
            << std::hex << r.address << std::dec << ' ' << r.size_bytes;
        if (r.hint) out << ' ' << r.hint->tensor_id << ':' << reuse_class_code(r.hint->reuse_class);
        out << '\n';
    }
}

inline std::vector<MemoryRequest> read_trace(std::istream& in) {
    std::vector<MemoryRequest> trace;
    std::unordered_map<CoreId, Tick> last_tick;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        MemoryRequest r;
        std::string op, addr, hint;
        if (!(ls >> r.tick)) {
            // blank or comment-only line
            bool blank = true;
            for (char c : line)
                if (!std::isspace(static_cast<unsigned char>(c))) blank = false;
            if (blank) continue;
            throw TraceError("trace line " + std::to_string(line_no) + ": malformed tick");
        }
        if (!(ls >> r.core >> op >> addr >> r.size_bytes))
            throw TraceError("trace line " + std::to_string(line_no) + ": malformed request");
        if (op == "R") r.op = MemOp::Read;
        else if (op == "W") r.op = MemOp::Write;
        else throw TraceError("trace line " + std::to_string(line_no) + ": bad op '" + op + "'");
        try {
            size_t pos = 0;
            r.address = std::stoull(addr, &pos, 16);
            if (pos != addr.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw TraceError("trace line " + std::to_string(line_no) + ": bad address '" + addr + "'");
        }
        if (r.size_bytes == 0 || r.size_bytes > 64)
            throw TraceError("trace line " + std::to_string(line_no) + ": size must be in [1,64]");
        if (ls >> hint) {
            auto colon = hint.find(':');
            if (colon == std::string::npos || colon + 2 != hint.size())
                throw TraceError("trace line " + std::to_string(line_no) + ": bad hint '" + hint + "'");
            auto rc = reuse_class_from_code(hint[colon + 1]);
            if (!rc)
                throw TraceError("trace line " + std::to_string(line_no) + ": bad reuse class '" +
                                 hint.substr(colon + 1) + "'");
            TensorHint h;
            try {
                h.tensor_id = static_cast<std::uint32_t>(std::stoul(hint.substr(0, colon)));
            } catch (const std::exception&) {
                throw TraceError("trace line " + std::to_string(line_no) + ": bad tensor id");
            }
            h.reuse_class = *rc;
            r.hint = h;
        }
        if (auto it = last_tick.find(r.core); it != last_tick.end() && r.tick < it->second)
            throw TraceError("trace line " + std::to_string(line_no) +
                             ": non-monotonic tick for core " + std::to_string(r.core));
        last_tick[r.core] = r.tick;
        trace.push_back(r);
    }
    return trace;
}

// Global order by tick, ties broken by core id; per-core order preserved.
inline std::vector<MemoryRequest> merge_streams(const std::vector<std::vector<MemoryRequest>>& streams) {
    std::vector<MemoryRequest> merged;
    size_t total = 0;
    for (const auto& s : streams) total += s.size();
    merged.reserve(total);
    for (const auto& s : streams) merged.insert(merged.end(), s.begin(), s.end());
    std::stable_sort(merged.begin(), merged.end(), [](const MemoryRequest& a, const MemoryRequest& b) {
        if (a.tick != b.tick) return a.tick < b.tick;
        return a.core < b.core;
    });
    return merged;
}

}  // namespace hermes
