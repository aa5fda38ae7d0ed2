#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "hematch/he/params.hpp"

namespace hematch::net {

enum class Role { main_server, worker, client_tool };

const char* role_name(Role r);
Role parse_role(const std::string& name); // ConfigError on unknown names

struct KeyPaths {
    std::string public_key;
    std::string galois;
    std::string relin;
    std::string secret; // client-tool only; servers must never name one
};

// One JSON file per process.  Required fields depend on the role:
//   main:        listen, registry_dir, keys.galois, token; workers optional
//   worker:      listen, registry_dir, keys.galois, keys.relin, model, token
//   client-tool: main_endpoint, keys.public, keys.secret, model
struct ServiceConfig {
    Role role = Role::client_tool;
    std::string listen;
    std::string main_endpoint;
    std::vector<std::string> workers;
    std::string registry_dir;
    KeyPaths keys;
    std::string profile = "production";
    he::BackendKind backend = he::BackendKind::lattice;
    std::string model; // model parameter file
    std::string token; // shared secret guarding worker endpoints
    std::chrono::milliseconds worker_deadline{10000};
};

he::HeParams params_for_profile(const std::string& profile);

// ConfigError on malformed JSON, unknown fields or roles, missing required
// fields, or a server role that references a secret-key path.
ServiceConfig parse_service_config(const std::string& json_text);
ServiceConfig load_service_config(const std::filesystem::path& path);

} // namespace hematch::net
