#include <gtest/gtest.h>

#include "hermes/report.hpp"
#include "hermes/workload.hpp"

using namespace hermes;

namespace {

SimReport sample_report() {
    auto trace = bundled_workload("attention-small");
    trace.resize(30000);
    auto r = run_simulation(paper_configs()[2], trace, "attention-small");
    return r;
}

}  // namespace

TEST(Json, RoundTripPreservesEveryField) {
    SimReport r = sample_report();
    SimReport back = report_from_json(report_to_json(r));
    EXPECT_EQ(report_to_json(back).dump(), report_to_json(r).dump());
    EXPECT_EQ(back.total_requests, r.total_requests);
    EXPECT_EQ(back.config_name, r.config_name);
    EXPECT_EQ(back.l2.hits, r.l2.hits);
    EXPECT_EQ(back.events.dram, r.events.dram);
}

TEST(Json, SchemaComplete) {
    Json j = report_to_json(sample_report());
    for (const char* key :
         {"config", "workload", "total_requests", "avg_latency_ns", "bandwidth_gbs",
          "hit_rate_pct", "energy_uj_per_op", "prefetch_accuracy", "simulated_ticks", "counters"})
        EXPECT_TRUE(j.contains(key)) << key;
    for (const char* key : {"l1", "l2", "l3", "overall"})
        EXPECT_TRUE(j.at("hit_rate_pct").contains(key)) << key;
}

TEST(Csv, SameValuesAsJson) {
    SimReport r = sample_report();
    Json j = report_to_json(r);
    std::string csv = report_to_csv(r);
    auto second_line = csv.substr(csv.find('\n') + 1);
    std::vector<std::string> fields;
    std::string cur;
    for (char c : second_line) {
        if (c == ',' || c == '\n') {
            fields.push_back(cur);
            cur.clear();
        } else
            cur.push_back(c);
    }
    ASSERT_EQ(fields.size(), report_csv_header().size());
    EXPECT_EQ(fields[0], j.at("config").get<std::string>());
    EXPECT_EQ(std::stoull(fields[2]), j.at("total_requests").get<std::uint64_t>());
    EXPECT_DOUBLE_EQ(std::stod(fields[3]), j.at("avg_latency_ns").get<double>());
    EXPECT_DOUBLE_EQ(std::stod(fields[9]), j.at("energy_uj_per_op").get<double>());
}

TEST(PaperTable, MatchesThePublishedRowsVerbatim) {
    const auto& t = paper_reference_table();
    ASSERT_EQ(t.size(), 4u);
    EXPECT_EQ(t[0].config, "baseline");
    EXPECT_DOUBLE_EQ(t[0].latency_ns, 120.0);
    EXPECT_DOUBLE_EQ(t[0].bandwidth_gbs, 25.0);
    EXPECT_DOUBLE_EQ(t[0].hit_rate_pct, 60.0);
    EXPECT_DOUBLE_EQ(t[0].energy_uj_per_op, 50.0);
    EXPECT_DOUBLE_EQ(t[1].latency_ns, 95.0);
    EXPECT_DOUBLE_EQ(t[1].bandwidth_gbs, 35.0);
    EXPECT_DOUBLE_EQ(t[1].hit_rate_pct, 75.0);
    EXPECT_DOUBLE_EQ(t[1].energy_uj_per_op, 40.0);
    EXPECT_DOUBLE_EQ(t[2].latency_ns, 85.0);
    EXPECT_DOUBLE_EQ(t[2].bandwidth_gbs, 40.0);
    EXPECT_DOUBLE_EQ(t[2].hit_rate_pct, 80.0);
    EXPECT_DOUBLE_EQ(t[2].energy_uj_per_op, 38.0);
    EXPECT_DOUBLE_EQ(t[3].latency_ns, 80.0);
    EXPECT_DOUBLE_EQ(t[3].bandwidth_gbs, 42.0);
    EXPECT_DOUBLE_EQ(t[3].hit_rate_pct, 90.0);
    EXPECT_DOUBLE_EQ(t[3].energy_uj_per_op, 35.0);
}

TEST(Comparison, DirectionFlagsFollowTheMetricSense) {
    std::vector<SimReport> reports(4);
    const char* names[] = {"baseline", "shared-l3", "prefetch", "tensor-aware"};
    double lat[] = {100, 80, 60, 70};  // regression at the last step
    double bw[] = {1, 2, 3, 4};
    double hit[] = {50, 60, 70, 80};
    double energy[] = {40, 30, 20, 10};
    for (int i = 0; i < 4; ++i) {
        reports[i].config_name = names[i];
        reports[i].avg_latency_ns = lat[i];
        reports[i].bandwidth_gbs = bw[i];
        reports[i].overall_hit_rate_pct = hit[i];
        reports[i].energy_uj_per_op = energy[i];
    }
    auto rows = build_comparison(reports);
    ASSERT_EQ(rows.size(), 16u);
    int bad = 0;
    for (const auto& row : rows) {
        if (!row.direction_ok) {
            ++bad;
            EXPECT_EQ(row.metric, "latency_ns");
            EXPECT_EQ(row.config, "tensor-aware");
        }
        if (row.config == std::string("baseline") && row.metric == std::string("latency_ns")) {
            ASSERT_TRUE(row.paper.has_value());
            EXPECT_DOUBLE_EQ(*row.paper, 120.0);
        }
    }
    EXPECT_EQ(bad, 1);
}

TEST(Comparison, CsvEmbedsPaperConstants) {
    std::vector<SimReport> reports(4);
    const char* names[] = {"baseline", "shared-l3", "prefetch", "tensor-aware"};
    for (int i = 0; i < 4; ++i) reports[i].config_name = names[i];
    std::string csv = comparison_to_csv(build_comparison(reports));
    EXPECT_NE(csv.find("baseline,latency_ns,0,120,"), std::string::npos);
    EXPECT_NE(csv.find("tensor-aware,energy_uj_per_op,0,35,"), std::string::npos);
}
