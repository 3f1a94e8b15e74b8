#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hermes/config.hpp"
#include "hermes/engine.hpp"
#include "hermes/report.hpp"
#include "hermes/trace.hpp"
#include "hermes/workload.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes atomically: temp file in the target directory, then rename.
void write_file(const std::string& path, const std::string& content) {
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw IoError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path + "'");
}

// --config accepts a file path or one of the built-in configuration names.
hermes::SimConfig load_config(const std::string& spec) {
    static const std::map<std::string, int> builtin = {
        {"baseline", 0}, {"shared-l3", 1}, {"prefetch", 2}, {"tensor-aware", 3}};
    if (spec.empty() || spec == "paper-default") return hermes::default_config();
    if (auto it = builtin.find(spec); it != builtin.end() && !fs::exists(spec))
        return hermes::paper_configs()[static_cast<size_t>(it->second)];
    return hermes::parse_config(read_file(spec));
}

std::uint64_t effective_seed(std::uint64_t config_seed) {
    if (const char* env = std::getenv("HERMES_SEED")) return std::stoull(env);
    return config_seed;
}

std::string format_report(const hermes::SimReport& r, const std::string& format) {
    if (format == "json") return hermes::report_to_json(r).dump(2) + "\n";
    if (format == "csv") return hermes::report_to_csv(r);
    return hermes::report_to_text(r);
}

std::vector<hermes::MemoryRequest> load_trace(const std::string& trace_file,
                                              const std::string& workload, std::uint64_t seed) {
    if (!trace_file.empty()) {
        std::ifstream in(trace_file);
        if (!in) throw IoError("cannot open trace '" + trace_file + "'");
        return hermes::read_trace(in);
    }
    return hermes::bundled_workload(workload, seed);
}

int cmd_run(const std::string& config_spec, const std::string& trace_file,
            const std::string& workload, const std::string& out_file, const std::string& format) {
    hermes::SimConfig cfg = load_config(config_spec);
    const std::uint64_t seed = effective_seed(cfg.seed);
    cfg.seed = seed;
    const std::string workload_name = trace_file.empty() ? workload : trace_file;
    auto trace = load_trace(trace_file, workload, seed);
    hermes::SimReport report = hermes::run_simulation(cfg, trace, workload_name);
    const std::string text = format_report(report, format);
    if (out_file.empty())
        std::cout << text;
    else
        write_file(out_file, text);
    std::cerr << "ran " << report.total_requests << " requests in " << report.wall_seconds
              << " s\n";
    return kExitOk;
}

int cmd_sweep(const std::string& workload, const std::string& out_dir, const std::string& format) {
    fs::create_directories(out_dir);
    std::vector<hermes::SimReport> reports;
    for (hermes::SimConfig cfg : hermes::paper_configs()) {
        cfg.seed = effective_seed(cfg.seed);
        auto trace = hermes::bundled_workload(workload, cfg.seed);
        hermes::SimReport r = hermes::run_simulation(cfg, trace, workload);
        const std::string ext = format == "csv" ? ".csv" : format == "text" ? ".txt" : ".json";
        write_file((fs::path(out_dir) / (cfg.name + ext)).string(), format_report(r, format));
        std::cerr << cfg.name << ": " << r.total_requests << " requests, "
                  << r.avg_latency_ns << " ns/op, " << r.wall_seconds << " s\n";
        reports.push_back(std::move(r));
    }
    write_file((fs::path(out_dir) / "comparison.csv").string(),
               hermes::comparison_to_csv(hermes::build_comparison(reports)));
    return kExitOk;
}

int cmd_gen_trace(const std::string& kind, const std::vector<std::string>& spec_args,
                  std::uint32_t cores, std::uint64_t seed, const std::string& out_file) {
    std::map<std::string, std::uint64_t> kv;
    for (const auto& arg : spec_args) {
        auto eq = arg.find('=');
        if (eq == std::string::npos)
            throw hermes::WorkloadError("--spec arguments take the form KEY=VALUE");
        kv[arg.substr(0, eq)] = std::stoull(arg.substr(eq + 1));
    }
    auto take = [&](const std::string& key, std::uint64_t def) {
        auto it = kv.find(key);
        if (it == kv.end()) return def;
        std::uint64_t v = it->second;
        kv.erase(it);
        return v;
    };

    std::vector<std::vector<hermes::MemoryRequest>> streams;
    if (kind == "gemm") {
        const std::uint64_t m = take("m", 256), n = take("n", 256), k = take("k", 256);
        const std::uint64_t tm = take("tile_m", 32), tn = take("tile_n", 32), tk = take("tile_k", 32);
        const std::uint32_t e = static_cast<std::uint32_t>(take("element_bytes", 4));
        if (!kv.empty())
            throw hermes::WorkloadError("unknown gemm spec key '" + kv.begin()->first +
                                        "' (valid: m, n, k, tile_m, tile_n, tile_k, element_bytes)");
        for (hermes::CoreId c = 0; c < cores; ++c) {
            hermes::GemmSpec s;
            s.m = m; s.n = n; s.k = k;
            s.tile_m = tm; s.tile_n = tn; s.tile_k = tk;
            s.element_bytes = e;
            s.base_a = hermes::core_base(c);
            s.base_b = s.base_a + 0x100'0000;
            s.base_c = s.base_b + 0x100'0000;
            streams.push_back(hermes::gen_gemm(s, c, seed));
        }
    } else if (kind == "rnn") {
        const std::uint64_t hidden = take("hidden", 256), timesteps = take("timesteps", 64);
        const std::uint32_t e = static_cast<std::uint32_t>(take("element_bytes", 4));
        if (!kv.empty())
            throw hermes::WorkloadError("unknown rnn spec key '" + kv.begin()->first +
                                        "' (valid: hidden, timesteps, element_bytes)");
        for (hermes::CoreId c = 0; c < cores; ++c) {
            hermes::RnnSpec s;
            s.hidden = hidden;
            s.timesteps = timesteps;
            s.element_bytes = e;
            s.base_weights = hermes::core_base(c);
            s.base_state = s.base_weights + 0x100'0000;
            streams.push_back(hermes::gen_rnn(s, c, seed));
        }
    } else if (kind == "attention") {
        const std::uint64_t seq = take("seq_len", 128), dim = take("head_dim", 64);
        const std::uint32_t e = static_cast<std::uint32_t>(take("element_bytes", 4));
        if (!kv.empty())
            throw hermes::WorkloadError("unknown attention spec key '" + kv.begin()->first +
                                        "' (valid: seq_len, head_dim, element_bytes)");
        for (hermes::CoreId c = 0; c < cores; ++c) {
            hermes::AttentionSpec s;
            s.seq_len = seq;
            s.head_dim = dim;
            s.element_bytes = e;
            s.base_q = hermes::core_base(c);
            s.base_k = s.base_q + 0x100'0000;
            s.base_v = s.base_k + 0x100'0000;
            s.base_scores = s.base_v + 0x100'0000;
            streams.push_back(hermes::gen_attention(s, c, seed));
        }
    } else {
        throw hermes::WorkloadError("unknown trace kind '" + kind +
                                    "' (valid: gemm, rnn, attention)");
    }

    auto merged = hermes::merge_streams(streams);
    std::ostringstream out;
    out << "# hermes trace: kind=" << kind << " cores=" << cores << " seed=" << seed << "\n";
    out << "# format: tick core R|W 0xADDRESS size [tensor_id:reuse_class]\n";
    hermes::write_trace(out, merged);
    if (out_file.empty())
        std::cout << out.str();
    else
        write_file(out_file, out.str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HERMES memory-hierarchy simulator"};
    app.require_subcommand(1);

    std::string config_spec = "paper-default";
    std::string trace_file;
    std::string workload = "gemm-small";
    std::string out_file;
    std::string out_dir = "sweep-out";
    std::string format = "json";
    std::string kind;
    std::vector<std::string> spec_args;
    std::uint32_t cores = 4;
    std::uint64_t seed = 1;

    CLI::App* run = app.add_subcommand("run", "run one simulation");
    run->add_option("--config", config_spec, "config file or built-in name");
    auto* topt = run->add_option("--trace", trace_file, "input trace file");
    run->add_option("--workload", workload, "bundled workload name")->excludes(topt);
    run->add_option("--out", out_file, "report file (stdout when omitted)");
    run->add_option("--format", format)->check(CLI::IsMember({"json", "csv", "text"}));

    CLI::App* sweep = app.add_subcommand("sweep", "run the four reference configurations");
    sweep->add_option("--workload", workload, "bundled workload name");
    sweep->add_option("--out", out_dir, "output directory");
    sweep->add_option("--format", format)->check(CLI::IsMember({"json", "csv", "text"}));

    CLI::App* gen = app.add_subcommand("gen-trace", "generate a synthetic trace");
    gen->add_option("--kind", kind, "gemm | rnn | attention")->required();
    gen->add_option("--spec", spec_args, "KEY=VALUE spec entries");
    gen->add_option("--cores", cores, "number of per-core streams");
    gen->add_option("--seed", seed, "generator seed");
    gen->add_option("--out", out_file, "trace file (stdout when omitted)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_spec, trace_file, workload, out_file, format);
        if (sweep->parsed()) return cmd_sweep(workload, out_dir, format);
        if (gen->parsed()) return cmd_gen_trace(kind, spec_args, cores, seed, out_file);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
