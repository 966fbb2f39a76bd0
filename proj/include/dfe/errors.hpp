#pragma once

#include <stdexcept>
#include <string>

namespace dfe {

// Configuration/validation failures map to CLI exit code 2, divergence to 3.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// CSV parse failure; line is 1-based and counts the header line.
struct ParseError : ConfigError {
    ParseError(const std::string& path, int line_no, const std::string& detail)
        : ConfigError(path + ":" + std::to_string(line_no) + ": " + detail),
          line(line_no) {}
    int line;
};

struct EmptyPoolError : ConfigError {
    using ConfigError::ConfigError;
};

struct GraphGenerationError : ConfigError {
    using ConfigError::ConfigError;
};

// gamma(A) = 1: gossip cannot contract, run setup refuses the topology.
struct NonConvergentTopologyError : ConfigError {
    using ConfigError::ConfigError;
};

struct UnsupportedSchemeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivergenceError : std::runtime_error {
    DivergenceError(int node_id, int round_no)
        : std::runtime_error("non-finite weight at node " + std::to_string(node_id) +
                             ", round " + std::to_string(round_no)),
          node(node_id),
          round(round_no) {}
    int node;
    int round;
};

}  // namespace dfe
