#include "hematch/net/bench.hpp"

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <iostream>
#include <random>
#include <thread>

#include <json.hpp>

#include "hematch/client/pipeline.hpp"
#include "hematch/cluster/orchestrator.hpp"
#include "hematch/common/binio.hpp"
#include "hematch/he/serialize.hpp"
#include "hematch/net/client.hpp"
#include "hematch/net/config.hpp"
#include "hematch/oracle/clear_oracle.hpp"

extern char** environ;

namespace hematch::net {

namespace {

using Clock = std::chrono::steady_clock;

struct ChildProcs {
    std::vector<pid_t> pids;

    ~ChildProcs() {
        for (pid_t pid : pids) ::kill(pid, SIGTERM);
        auto cutoff = Clock::now() + std::chrono::seconds(5);
        for (pid_t pid : pids) {
            for (;;) {
                int status = 0;
                pid_t done = ::waitpid(pid, &status, WNOHANG);
                if (done == pid || done < 0) break;
                if (Clock::now() > cutoff) {
                    ::kill(pid, SIGKILL);
                    ::waitpid(pid, &status, 0);
                    break;
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
            }
        }
    }
};

pid_t spawn_server(const std::string& binary, const std::filesystem::path& config,
                   const std::filesystem::path& port_file) {
    std::vector<std::string> arg_strings = {binary, "serve", "--config", config.string(),
                                            "--port-file", port_file.string()};
    std::vector<char*> argv;
    for (auto& s : arg_strings) argv.push_back(s.data());
    argv.push_back(nullptr);

    // Workers get one compute thread each so cluster scaling measures
    // distribution, not intra-process parallelism.
    std::vector<std::string> env_strings = {"OMP_NUM_THREADS=1"};
    for (char** e = environ; *e != nullptr; ++e)
        if (std::string_view(*e).substr(0, 16) != "OMP_NUM_THREADS=") env_strings.push_back(*e);
    std::vector<char*> envp;
    for (auto& s : env_strings) envp.push_back(s.data());
    envp.push_back(nullptr);

    pid_t pid = ::fork();
    if (pid < 0) throw WorkerFault("cannot fork a worker process");
    if (pid == 0) {
        ::execve(binary.c_str(), argv.data(), envp.data());
        _exit(127);
    }
    return pid;
}

Endpoint wait_ready(const std::filesystem::path& port_file, Clock::time_point cutoff,
                    size_t worker_number) {
    for (;;) {
        if (std::filesystem::exists(port_file)) {
            std::string text;
            try {
                text = read_text_file(port_file);
            } catch (const Error&) {
                text.clear();
            }
            while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
            if (!text.empty()) {
                try {
                    Endpoint ep = parse_endpoint(text);
                    request_health(ep);
                    return ep;
                } catch (const Error&) {
                    // not accepting yet; keep polling
                }
            }
        }
        if (Clock::now() > cutoff)
            throw WorkerFault("worker " + std::to_string(worker_number) +
                              " did not become healthy before the startup deadline");
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

BenchReport run_bench(const BenchOptions& opt) {
    if (opt.server_binary.empty()) throw ConfigError("bench needs the server binary path");
    if (opt.worker_counts.empty()) throw ConfigError("bench needs at least one worker count");
    if (opt.population == 0) throw ConfigError("bench needs a nonzero population");
    if (opt.runs_per_count == 0) throw ConfigError("bench needs at least one run per count");

    const bool own_dir = opt.work_dir.empty();
    std::filesystem::path dir = opt.work_dir;
    if (own_dir) {
        std::mt19937_64 rng(std::random_device{}());
        dir = std::filesystem::temp_directory_path() /
              ("hematch-bench-" + std::to_string(::getpid()) + "-" + std::to_string(rng() % 100000));
    }
    std::filesystem::create_directories(dir);
    struct DirGuard {
        std::filesystem::path dir;
        bool owned;
        ~DirGuard() {
            if (owned) {
                std::error_code ec;
                std::filesystem::remove_all(dir, ec);
            }
        }
    } dir_guard{dir, own_dir};

    auto log = [&](const std::string& line) {
        if (opt.log) *opt.log << line << "\n" << std::flush;
    };

    const he::HeParams params = params_for_profile(opt.profile);
    auto backend_owned = he::SlotBackend::create(params, opt.backend);
    std::shared_ptr<he::SlotBackend> backend = std::move(backend_owned);
    const uint64_t digest = backend->params_digest();

    log("generating keys and a " + std::to_string(opt.population) + "-user registry under " +
        dir.string());
    auto keys = backend->keygen();
    write_file(dir / "public.key", he::serialize_public_key(keys.eval.public_key));
    write_file(dir / "galois.key", he::serialize_galois_keys(keys.eval.galois));
    write_file(dir / "relin.key", he::serialize_relin_key(keys.eval.relin));
    write_file(dir / "secret.key", he::serialize_secret_key(keys.secret));

    oracle::SyntheticSpec spec;
    spec.population = opt.population;
    spec.seed = opt.seed;
    auto fixture = oracle::gen_synthetic(spec);
    auto shards = oracle::pack_clear_shards(fixture.registry, *backend, keys.eval.public_key);

    std::map<uint64_t, std::string> identities;
    for (const auto& e : fixture.registry.entries) identities[e.global_index] = e.user_id;
    registry::write_registry_dir(dir / "registry", shards, identities);
    write_text_file(dir / "model.json", client::dump_model(fixture.model));

    std::mt19937_64 token_rng(std::random_device{}());
    const std::string token = "bench-" + digest_hex(token_rng());

    const size_t max_workers = *std::max_element(opt.worker_counts.begin(), opt.worker_counts.end());
    const std::string backend_name = opt.backend == he::BackendKind::lattice ? "lattice" : "clear";

    ChildProcs children;
    std::vector<std::filesystem::path> port_files;
    for (size_t i = 0; i < max_workers; ++i) {
        nlohmann::json cfg = {
            {"role", "worker"},
            {"listen", "127.0.0.1:0"},
            {"registry_dir", (dir / "registry").string()},
            {"keys", {{"galois", (dir / "galois.key").string()},
                      {"relin", (dir / "relin.key").string()}}},
            {"model", (dir / "model.json").string()},
            {"token", token},
            {"profile", opt.profile},
            {"backend", backend_name},
        };
        auto cfg_path = dir / ("worker-" + std::to_string(i) + ".json");
        write_text_file(cfg_path, cfg.dump(2) + "\n");
        auto port_file = dir / ("worker-" + std::to_string(i) + ".port");
        port_files.push_back(port_file);
        children.pids.push_back(spawn_server(opt.server_binary, cfg_path, port_file));
    }

    log("waiting for " + std::to_string(max_workers) + " worker processes");
    auto startup_cutoff = Clock::now() + opt.startup_timeout;
    std::vector<Endpoint> endpoints;
    for (size_t i = 0; i < max_workers; ++i)
        endpoints.push_back(wait_ready(port_files[i], startup_cutoff, i + 1));

    BenchReport report;
    report.population = opt.population;
    report.shard_count = shards.size();
    report.profile = opt.profile;
    report.backend = backend_name;
    report.hardware_threads = std::thread::hardware_concurrency();
    report.decisions_verified = true;

    const client::DecisionParams dp{fixture.model.decision.fc1_bias,
                                    fixture.model.decision.threshold};

    for (size_t w : opt.worker_counts) {
        if (w == 0 || w > endpoints.size())
            throw ConfigError("worker count " + std::to_string(w) + " is not spawnable");
        auto plan = cluster::make_plan(shards.size(), w);
        std::vector<Endpoint> used(endpoints.begin(), endpoints.begin() + long(w));
        auto call = remote_worker_call(used, token, digest, backend, opt.worker_deadline);

        BenchRow row;
        row.workers = w;
        for (size_t run = 0; run < opt.runs_per_count + 1; ++run) {
            const auto& query = fixture.genuine[run % fixture.genuine.size()];
            auto u = client::finalize_features(query.features, fixture.model.fc16);
            auto c_u = client::pack_query(u, *backend, keys.eval.public_key);

            auto t0 = Clock::now();
            auto groups = cluster::cluster_auth(plan, c_u, call, *backend, opt.worker_deadline);
            auto t1 = Clock::now();
            const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            const bool warmup = run == 0;
            if (!warmup) row.run_ms.push_back(ms);

            std::vector<he::Ciphertext> cts;
            std::vector<DynBitset> valid;
            for (size_t g = 0; g < groups.size(); ++g) {
                if (groups[g].group_index != g)
                    throw AggregationError("bench expects dense groups from zero");
                cts.push_back(std::move(groups[g].result));
                valid.push_back(std::move(groups[g].valid_slots));
            }
            auto decision = client::decide_all(cts, keys.secret, dp, valid, *backend);
            if (!decision.matched || decision.global_index != query.true_index) {
                report.decisions_verified = false;
                log("DECISION MISMATCH at " + std::to_string(w) + " workers: expected index " +
                    std::to_string(query.true_index));
            }
            log("  " + std::to_string(w) + " worker(s) " + (warmup ? "warmup" : "run") + ": " +
                std::to_string(ms) + " ms");
        }
        row.median_ms = median(row.run_ms);
        report.rows.push_back(std::move(row));
    }
    return report;
}

void print_bench_report(std::ostream& os, const BenchReport& report) {
    os << "auth latency vs cluster size\n";
    os << "population " << report.population << " (" << report.shard_count << " shards), profile "
       << report.profile << ", backend " << report.backend << "\n";
    os << "hardware threads available: " << report.hardware_threads << "\n";
    os << "  workers    median_ms    runs_ms\n";
    char buf[64];
    for (const auto& row : report.rows) {
        std::snprintf(buf, sizeof buf, "  %7zu  %11.1f   ", row.workers, row.median_ms);
        os << buf;
        for (double ms : row.run_ms) {
            std::snprintf(buf, sizeof buf, " %.1f", ms);
            os << buf;
        }
        os << "\n";
    }
    os << (report.decisions_verified ? "every timed run matched the expected identity"
                                     : "DECISION MISMATCHES OCCURRED; timings are not trustworthy")
       << "\n";
}

} // namespace hematch::net
