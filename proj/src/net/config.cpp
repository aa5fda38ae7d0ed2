#include "hematch/net/config.hpp"

#include <set>

#include <json.hpp>

#include "hematch/common/binio.hpp"
#include "hematch/common/errors.hpp"

namespace hematch::net {

using nlohmann::json;

const char* role_name(Role r) {
    switch (r) {
    case Role::main_server: return "main";
    case Role::worker: return "worker";
    case Role::client_tool: return "client-tool";
    }
    return "?";
}

Role parse_role(const std::string& name) {
    if (name == "main") return Role::main_server;
    if (name == "worker") return Role::worker;
    if (name == "client-tool") return Role::client_tool;
    throw ConfigError("unknown role \"" + name + "\"");
}

he::HeParams params_for_profile(const std::string& profile) {
    if (profile == "production") return he::HeParams::production();
    if (profile == "test") return he::HeParams::test_profile();
    throw ConfigError("unknown params profile \"" + profile + "\"");
}

namespace {

std::string get_string(const json& j, const char* key, const std::string& fallback = {}) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_string()) throw ConfigError(std::string("field \"") + key + "\" must be a string");
    return it->get<std::string>();
}

void require(bool ok, Role role, const char* what) {
    if (!ok)
        throw ConfigError(std::string("a ") + role_name(role) + " config requires " + what);
}

void check_known_fields(const json& j, const std::set<std::string>& known,
                        const std::string& where) {
    for (const auto& [key, value] : j.items())
        if (!known.contains(key))
            throw ConfigError("unknown config field \"" + (where.empty() ? key : where + "." + key) + "\"");
}

} // namespace

ServiceConfig parse_service_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    check_known_fields(j,
                       {"role", "listen", "main_endpoint", "workers", "registry_dir", "keys",
                        "profile", "backend", "model", "token", "worker_deadline_ms"},
                       "");

    ServiceConfig cfg;
    auto role_it = j.find("role");
    if (role_it == j.end()) throw ConfigError("config has no role");
    cfg.role = parse_role(get_string(j, "role"));

    cfg.listen = get_string(j, "listen");
    cfg.main_endpoint = get_string(j, "main_endpoint");
    cfg.registry_dir = get_string(j, "registry_dir");
    cfg.profile = get_string(j, "profile", "production");
    cfg.model = get_string(j, "model");
    cfg.token = get_string(j, "token");

    const std::string backend = get_string(j, "backend", "lattice");
    if (backend == "lattice")
        cfg.backend = he::BackendKind::lattice;
    else if (backend == "clear")
        cfg.backend = he::BackendKind::clear;
    else
        throw ConfigError("unknown backend \"" + backend + "\"");

    if (auto it = j.find("workers"); it != j.end()) {
        if (!it->is_array()) throw ConfigError("field \"workers\" must be an array of endpoints");
        for (const auto& w : *it) {
            if (!w.is_string()) throw ConfigError("worker endpoints must be strings");
            cfg.workers.push_back(w.get<std::string>());
        }
    }

    if (auto it = j.find("keys"); it != j.end()) {
        if (!it->is_object()) throw ConfigError("field \"keys\" must be an object");
        check_known_fields(*it, {"public", "galois", "relin", "secret"}, "keys");
        cfg.keys.public_key = get_string(*it, "public");
        cfg.keys.galois = get_string(*it, "galois");
        cfg.keys.relin = get_string(*it, "relin");
        cfg.keys.secret = get_string(*it, "secret");
    }

    if (auto it = j.find("worker_deadline_ms"); it != j.end()) {
        if (!it->is_number_integer() || it->get<int64_t>() <= 0)
            throw ConfigError("field \"worker_deadline_ms\" must be a positive integer");
        cfg.worker_deadline = std::chrono::milliseconds(it->get<int64_t>());
    }

    params_for_profile(cfg.profile); // validates the name

    const Role r = cfg.role;
    if (r == Role::main_server || r == Role::worker) {
        if (!cfg.keys.secret.empty())
            throw ConfigError(std::string(role_name(r)) +
                              " config must not reference a secret-key path");
        require(!cfg.listen.empty(), r, "a listen endpoint");
        require(!cfg.registry_dir.empty(), r, "a registry_dir");
        require(!cfg.keys.galois.empty(), r, "keys.galois");
        require(!cfg.token.empty(), r, "a worker token");
    }
    if (r == Role::worker) {
        require(!cfg.keys.relin.empty(), r, "keys.relin");
        require(!cfg.model.empty(), r, "a model file");
    }
    if (r == Role::client_tool) {
        require(!cfg.main_endpoint.empty(), r, "a main_endpoint");
        require(!cfg.keys.public_key.empty(), r, "keys.public");
        require(!cfg.keys.secret.empty(), r, "keys.secret");
        require(!cfg.model.empty(), r, "a model file");
    }
    return cfg;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const Error& e) {
        throw ConfigError("cannot read config " + path.string() + ": " + e.what());
    }
    return parse_service_config(text);
}

} // namespace hematch::net
