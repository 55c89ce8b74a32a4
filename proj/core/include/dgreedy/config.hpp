#pragma once

#include <filesystem>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>

#include "dgreedy/greedy.hpp"

namespace dgreedy {

enum class ProblemChoice { cd, transport, transport_jump, synthetic_saddle };

std::string to_string(ProblemChoice p);
ProblemChoice problem_from_string(const std::string& s);

struct ExperimentConfig {
    ProblemChoice problem = ProblemChoice::cd;
    double epsilon = 1.0 / 32.0;
    double omega = 1e-2;
    int trial_level = 5;
    int test_level = 6;
    int sample_count = 100;
    double interval_lo = 0.2;
    double interval_hi = std::numbers::pi - 0.2;
    double zeta = 0.5;
    double delta = 0.5;
    double tol = 1e-4;
    int n_max = 10;
    int cycles = 0;
    std::string output_dir = "out";
    std::uint64_t seed = 7;

    // Restricts the run to one cover piece (0 = left of π/2, 1 = right); empty runs all.
    std::optional<int> piece;
    // Left empty, the surrogate and stabilization loop follow the problem kind.
    std::optional<SurrogateKind> surrogate;
    std::optional<StabLoop> loop;
    int threads = 0;

    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

// Flat `key = value` lines; `#` starts a comment, strings may be quoted.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// Applies one key/value pair with the same rules as the file parser.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

std::string serialize_config(const ExperimentConfig& cfg);

// 17 significant digits.
std::string format_double(double x);

GreedyConfig greedy_config(const ExperimentConfig& cfg);

}  // namespace dgreedy
