#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "hematch/he/params.hpp"

namespace hematch::net {

// Spawns real worker processes on loopback sockets, builds a synthetic
// registry they all load, then measures distributed authentication latency
// (fan-out through aggregation) for each requested cluster size.
struct BenchOptions {
    std::string server_binary;             // binary exec'd as "<bin> serve ..."
    std::vector<size_t> worker_counts{1, 2, 3};
    size_t population = 5000;
    std::string profile = "production";
    he::BackendKind backend = he::BackendKind::lattice;
    size_t runs_per_count = 3;             // timed runs; one warmup precedes them
    std::filesystem::path work_dir;        // empty: fresh temp dir, removed after
    std::chrono::milliseconds worker_deadline{180000};
    std::chrono::milliseconds startup_timeout{180000};
    uint64_t seed = 1;
    std::ostream* log = nullptr;           // progress notes
};

struct BenchRow {
    size_t workers = 0;
    std::vector<double> run_ms;
    double median_ms = 0.0;
};

struct BenchReport {
    size_t population = 0;
    size_t shard_count = 0;
    std::string profile;
    std::string backend;
    unsigned hardware_threads = 0;
    bool decisions_verified = false; // every run matched the expected identity
    std::vector<BenchRow> rows;
};

BenchReport run_bench(const BenchOptions& opt);

void print_bench_report(std::ostream& os, const BenchReport& report);

} // namespace hematch::net
