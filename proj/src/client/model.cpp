#include "hematch/client/model.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "hematch/common/binio.hpp"
#include "hematch/common/errors.hpp"

namespace hematch::client {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw ConfigError(std::string(what) + " contains a non-finite value");
}

std::array<double, 16> read_vec16(const nlohmann::json& j, const char* field) {
    if (!j.contains(field)) throw ConfigError(std::string("model file missing field ") + field);
    const auto& arr = j.at(field);
    if (!arr.is_array() || arr.size() != 16)
        throw ConfigError(std::string(field) + " must be an array of 16 numbers");
    std::array<double, 16> out{};
    for (size_t i = 0; i < 16; ++i) {
        out[i] = arr[i].get<double>();
        require_finite(out[i], field);
    }
    return out;
}

} // namespace

void ModelParams::validate() const {
    if (!fc16.identity()) {
        if (fc16.input_dim == 0 || fc16.a_matrix.size() != fc16.input_dim * 16)
            throw ConfigError("a_matrix shape does not match input_dim x 16");
        for (double v : fc16.a_matrix) require_finite(v, "a_matrix");
    }
    for (double v : fc16.bias) require_finite(v, "fc16_bias");
    for (double v : fc1_weights) require_finite(v, "fc1_weights");
    require_finite(decision.fc1_bias, "fc1_bias");
    require_finite(decision.threshold, "threshold");
    if (!(decision.threshold > 0.0 && decision.threshold < 1.0))
        throw ConfigError("threshold must lie strictly between 0 and 1");
}

ModelParams parse_model(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("model file must be a JSON object");

    ModelParams m;
    try {
        if (j.contains("a_matrix")) {
            const auto& a = j.at("a_matrix");
            if (!a.is_array() || a.empty())
                throw ConfigError("a_matrix must be a non-empty array");
            if (a[0].is_array()) {
                m.fc16.input_dim = a.size();
                m.fc16.a_matrix.reserve(a.size() * 16);
                for (const auto& row : a) {
                    if (!row.is_array() || row.size() != 16)
                        throw ConfigError("a_matrix rows must have 16 entries");
                    for (const auto& v : row) m.fc16.a_matrix.push_back(v.get<double>());
                }
            } else {
                if (a.size() % 16 != 0)
                    throw ConfigError("flat a_matrix length must be a multiple of 16");
                m.fc16.input_dim = a.size() / 16;
                for (const auto& v : a) m.fc16.a_matrix.push_back(v.get<double>());
            }
        }
        m.fc16.bias = read_vec16(j, "fc16_bias");
        m.fc1_weights = read_vec16(j, "fc1_weights");
        if (!j.contains("fc1_bias") || !j.contains("threshold"))
            throw ConfigError("model file missing fc1_bias or threshold");
        m.decision.fc1_bias = j.at("fc1_bias").get<double>();
        m.decision.threshold = j.at("threshold").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("model field has the wrong type: ") + e.what());
    }
    m.validate();
    return m;
}

ModelParams load_model(const std::string& path) {
    return parse_model(read_text_file(path));
}

std::string dump_model(const ModelParams& m) {
    m.validate();
    nlohmann::json j;
    if (!m.fc16.identity()) {
        nlohmann::json rows = nlohmann::json::array();
        for (size_t r = 0; r < m.fc16.input_dim; ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (size_t c = 0; c < 16; ++c) row.push_back(m.fc16.a_matrix[r * 16 + c]);
            rows.push_back(std::move(row));
        }
        j["a_matrix"] = std::move(rows);
    }
    j["fc16_bias"] = m.fc16.bias;
    j["fc1_weights"] = m.fc1_weights;
    j["fc1_bias"] = m.decision.fc1_bias;
    j["threshold"] = m.decision.threshold;
    return j.dump(2) + "\n";
}

std::vector<std::vector<double>> load_features(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<std::vector<double>> rows;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;

        std::vector<double> row;
        std::istringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            try {
                size_t used = 0;
                double v = std::stod(field, &used);
                while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used])))
                    ++used;
                if (used != field.size()) throw std::invalid_argument(field);
                if (!std::isfinite(v)) throw std::invalid_argument(field);
                row.push_back(v);
            } catch (const std::exception&) {
                throw FormatError("feature file line " + std::to_string(line_no) +
                                  " has a malformed number");
            }
        }
        if (row.empty())
            throw FormatError("feature file line " + std::to_string(line_no) + " has no values");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string dump_features(const std::vector<std::vector<double>>& rows) {
    std::ostringstream out;
    out.precision(17);
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    }
    return out.str();
}

} // namespace hematch::client
