#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace hematch::client {

// Affine feature finalizer u = xA + b.  An empty matrix means the identity
// map on 16-wide inputs, for deployments that feed precomputed embeddings.
struct Fc16Params {
    std::vector<double> a_matrix; // row-major input_dim x 16; empty = identity
    size_t input_dim = 16;
    std::array<double, 16> bias{};

    bool identity() const { return a_matrix.empty(); }
};

struct DecisionParams {
    double fc1_bias = 0.0;
    double threshold = 0.2; // open unit interval
};

// Everything the deployment ships as one model file: the client-side
// finalizer, the server-side scoring weights, and the decision operating
// point.
struct ModelParams {
    Fc16Params fc16;
    std::array<double, 16> fc1_weights{};
    DecisionParams decision;

    // ConfigError on non-finite entries or a threshold outside (0,1).
    void validate() const;
};

// JSON file with fields a_matrix (optional, rows of 16 or a flat multiple of
// 16), fc16_bias, fc1_weights, fc1_bias, threshold.
ModelParams load_model(const std::string& path);
ModelParams parse_model(const std::string& json_text);
std::string dump_model(const ModelParams& m);

// Feature files: one comma-separated vector per line; blank lines and
// #-comment lines are skipped.
std::vector<std::vector<double>> load_features(const std::string& path);
std::string dump_features(const std::vector<std::vector<double>>& rows);

} // namespace hematch::client
