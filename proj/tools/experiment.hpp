#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace shrink::experiment {

struct SystemSpec {
    std::vector<std::string> betas;              // diagonal entries as constants
    std::vector<std::vector<long long>> matrix;  // integer matrix
    bool degenerate = false;                     // admit |beta| <= 1
};

struct TargetConfig {
    std::string shape = "ball";
    std::vector<double> center;
    std::vector<std::string> rates;
};

struct ExperimentConfig {
    std::string command;
    SystemSpec system;
    TargetConfig target;
    std::vector<std::string> x;  // start point; empty means random samples
    long long steps = 0;
    std::vector<long long> checkpoints;
    uint64_t samples = 1;
    std::optional<uint64_t> seed;
    double epsilon = 0.5;
    double band = 0.2;
    long long precision_bits = 0;
    std::optional<long long> precision_cap;
    std::string measure = "lebesgue";  // or "parry"

    std::string beta;  // single-coordinate commands
    std::vector<double> set_e;
    std::vector<double> set_f;
    int n_max = 25;
    int fit_lo = 5;
    int fit_hi = 25;
    bool stratified = true;

    int d = 1;
    std::vector<double> delta;

    std::string method;
    std::vector<double> moduli;
    std::optional<double> lambda;
    std::vector<std::vector<double>> t;  // accumulation points, +inf allowed
    std::vector<double> deltas;
    std::vector<double> u;
    std::vector<double> v;
    long long horizon = 65536;

    int power = 1;

    double tol = 1e-9;
    double merge_gap = 1e-6;
    std::vector<double> interval;
};

nlohmann::json to_json(const ExperimentConfig& c);
// Throws ConfigInvalid naming the offending field path.
ExperimentConfig from_json(const nlohmann::json& j);

bool is_stochastic(const std::string& command);

struct Diagnostic {
    enum class Severity { ConfigError, PreconditionError, Warning };
    Severity severity;
    std::string field;
    std::string message;
};

std::vector<Diagnostic> validate(const ExperimentConfig& c);

struct RunOptions {
    unsigned jobs = 1;
    bool manifest_only = false;
};

struct RunResult {
    std::map<std::string, std::string> outputs;  // file name -> content
    nlohmann::json manifest;
    std::vector<Diagnostic> diagnostics;
};

RunResult run(const ExperimentConfig& c, const RunOptions& opt = {});

std::string sha256_hex(const std::string& data);
std::string config_hash(const ExperimentConfig& c);
// Writes outputs and manifest.json into dir, adding file digests.
void write_outputs(const RunResult& r, const std::string& dir);

int exit_code_for(const std::exception& e);
const char* tool_version();
const char* git_describe();

}  // namespace shrink::experiment
