// Operator CLI: key generation, enrollment, authentication, serving, and
// the cluster latency bench.
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "hematch/client/pipeline.hpp"
#include "hematch/common/binio.hpp"
#include "hematch/he/serialize.hpp"
#include "hematch/net/bench.hpp"
#include "hematch/net/client.hpp"
#include "hematch/net/service.hpp"

namespace {

using namespace hematch;

net::ServiceConfig load_client_config(const std::string& path) {
    auto cfg = net::load_service_config(path);
    if (cfg.role != net::Role::client_tool)
        throw ConfigError("this subcommand needs a client-tool config");
    return cfg;
}

std::array<double, 16> first_feature_vector(const std::string& features_path,
                                            const client::ModelParams& model) {
    auto rows = client::load_features(features_path);
    if (rows.empty()) throw FormatError("feature file " + features_path + " holds no vectors");
    return client::finalize_features(rows.front(), model.fc16);
}

int run_keygen(const std::string& config_path, std::optional<uint64_t> seed) {
    auto cfg = load_client_config(config_path);
    const auto& k = cfg.keys;
    if (k.public_key.empty() || k.galois.empty() || k.relin.empty() || k.secret.empty())
        throw ConfigError("keygen needs all four key paths (public, galois, relin, secret)");

    auto backend = he::SlotBackend::create(net::params_for_profile(cfg.profile), cfg.backend);
    auto bundle = backend->keygen(seed);

    for (const std::string* path : {&k.public_key, &k.galois, &k.relin, &k.secret}) {
        auto parent = std::filesystem::path(*path).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
    }
    write_file(k.public_key, he::serialize_public_key(bundle.eval.public_key));
    write_file(k.galois, he::serialize_galois_keys(bundle.eval.galois));
    write_file(k.relin, he::serialize_relin_key(bundle.eval.relin));
    write_file(k.secret, he::serialize_secret_key(bundle.secret));
    std::cout << "wrote " << k.public_key << ", " << k.galois << ", " << k.relin << ", "
              << k.secret << "\n";
    return 0;
}

int run_enroll(const std::string& config_path, const std::string& features_path,
               const std::string& user_id) {
    auto cfg = load_client_config(config_path);
    auto backend = he::SlotBackend::create(net::params_for_profile(cfg.profile), cfg.backend);
    auto model = client::load_model(cfg.model);
    auto pk = he::deserialize_public_key(read_file(cfg.keys.public_key), *backend->context());

    auto u = first_feature_vector(features_path, model);
    auto c_u = client::pack_registration(u, *backend, pk);
    uint64_t index = net::request_enroll(net::parse_endpoint(cfg.main_endpoint),
                                         backend->params_digest(), c_u, user_id);
    std::cout << "enrolled " << user_id << " at index " << index << "\n";
    return 0;
}

int run_auth(const std::string& config_path, const std::string& features_path,
             std::optional<double> threshold) {
    auto cfg = load_client_config(config_path);
    auto backend = he::SlotBackend::create(net::params_for_profile(cfg.profile), cfg.backend);
    auto model = client::load_model(cfg.model);
    auto pk = he::deserialize_public_key(read_file(cfg.keys.public_key), *backend->context());
    auto sk = he::deserialize_secret_key(read_file(cfg.keys.secret), *backend->context());

    auto u = first_feature_vector(features_path, model);
    auto c_u = client::pack_query(u, *backend, pk);

    const net::Endpoint main = net::parse_endpoint(cfg.main_endpoint);
    auto result = net::request_auth(main, backend->params_digest(), c_u, *backend);

    client::DecisionParams dp = model.decision;
    if (threshold) dp.threshold = *threshold;
    auto decision = client::decide_all(result.groups, sk, dp, result.valid, *backend);

    char prob[32];
    std::snprintf(prob, sizeof prob, "%.4f", decision.probability);
    if (decision.matched) {
        std::string identity = net::request_identity(main, decision.global_index);
        std::cout << "matched " << identity << " (index " << decision.global_index << ", p="
                  << prob << ")\n";
    } else {
        std::cout << "no_match (best p=" << prob << ")\n";
    }
    return 0;
}

int run_serve(const std::string& config_path, const std::string& port_file) {
    auto cfg = net::load_service_config(config_path);
    auto server = net::start_service(cfg);
    const std::string bound =
        net::parse_endpoint(cfg.listen).host + ":" + std::to_string(server->port());
    if (!port_file.empty()) write_text_file(port_file, bound + "\n");
    std::cerr << "serving " << net::role_name(cfg.role) << " on " << bound << "\n";
    server->join();
    return 0;
}

int run_bench_cmd(std::vector<size_t> workers, size_t n, const std::string& profile,
                  const std::string& backend, size_t runs, const std::string& dir,
                  uint64_t seed) {
    net::BenchOptions opt;
    std::error_code ec;
    auto self = std::filesystem::read_symlink("/proc/self/exe", ec);
    if (ec) throw ConfigError("cannot locate this binary for worker spawning");
    opt.server_binary = self.string();
    opt.worker_counts = std::move(workers);
    opt.population = n;
    opt.profile = profile;
    if (backend == "lattice")
        opt.backend = he::BackendKind::lattice;
    else if (backend == "clear")
        opt.backend = he::BackendKind::clear;
    else
        throw ConfigError("unknown backend \"" + backend + "\"");
    opt.runs_per_count = runs;
    opt.work_dir = dir;
    opt.seed = seed;
    opt.log = &std::cerr;

    auto report = net::run_bench(opt);
    net::print_bench_report(std::cout, report);
    return report.decisions_verified ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"encrypted 1:N fingerprint matching"};
    app.require_subcommand(1);

    std::string config_path, features_path, user_id, port_file;
    std::optional<uint64_t> seed;
    std::optional<double> threshold;
    std::vector<size_t> workers{1, 2, 3};
    size_t n = 5000, runs = 3;
    std::string profile = "production", backend = "lattice", bench_dir;
    uint64_t bench_seed = 1;

    auto* keygen = app.add_subcommand("keygen", "generate and write the four key files");
    keygen->add_option("--config", config_path, "client-tool config")->required();
    keygen->add_option("--seed", seed, "deterministic generation (test profile only)");

    auto* enroll = app.add_subcommand("enroll", "register a feature vector under an identity");
    enroll->add_option("--config", config_path, "client-tool config")->required();
    enroll->add_option("--features", features_path, "feature vector file")->required();
    enroll->add_option("--id", user_id, "identity to register")->required();

    auto* auth = app.add_subcommand("auth", "match a feature vector against the registry");
    auth->add_option("--config", config_path, "client-tool config")->required();
    auth->add_option("--features", features_path, "feature vector file")->required();
    auth->add_option("--threshold", threshold, "decision threshold override");

    auto* serve = app.add_subcommand("serve", "run the main or worker service");
    serve->add_option("--config", config_path, "main or worker config")->required();
    serve->add_option("--port-file", port_file, "write the bound endpoint here once listening");

    auto* bench = app.add_subcommand("bench", "measure auth latency against local worker processes");
    bench->add_option("--workers", workers, "cluster sizes to time")->delimiter(',');
    bench->add_option("--n", n, "synthetic registry population");
    bench->add_option("--profile", profile, "params profile (production|test)");
    bench->add_option("--backend", backend, "backend (lattice|clear)");
    bench->add_option("--runs", runs, "timed runs per cluster size");
    bench->add_option("--dir", bench_dir, "working directory (kept after the run)");
    bench->add_option("--seed", bench_seed, "synthetic fixture seed");

    try {
        app.parse(argc, argv);
        if (keygen->parsed()) return run_keygen(config_path, seed);
        if (enroll->parsed()) return run_enroll(config_path, features_path, user_id);
        if (auth->parsed()) return run_auth(config_path, features_path, threshold);
        if (serve->parsed()) return run_serve(config_path, port_file);
        if (bench->parsed())
            return run_bench_cmd(workers, n, profile, backend, runs, bench_dir, bench_seed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const hematch::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
