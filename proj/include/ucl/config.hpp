#ifndef UCL_CONFIG_HPP
#define UCL_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ucl {

// Experiment configuration: a flat map of dotted key paths to raw values,
// parsed from a nested key-value text format
//
//   experiment = prop-suite
//   seed = 7
//   [strip]
//   lambdas = [0, 0.3, 0.2]
//
// Section headers prefix the keys that follow ("strip.lambdas").  Values are
// scalars or bracketed arrays; the typed getters parse on demand.
struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 0;
    bool has_seed = false;
    std::string out_dir = ".";
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    // Accepts "[1, 2, 3]" or "1,2,3"; an absent key yields the fallback.
    std::vector<double> get_list(const std::string& key,
                                 const std::vector<double>& fallback = {}) const;

    void set(const std::string& key, const std::string& raw);
    // Deterministic canonical form (sorted key = value lines) used for the
    // provenance hash.
    std::string canonical() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Parses a scalar list in either bracketed or comma form.
std::vector<double> parse_number_list(const std::string& raw);

// Schema validation: the experiment must be known, the seed present, every
// key allowed for that experiment, and domain constraints on the exponents
// respected (q0 must lie strictly above d/2).  Throws std::invalid_argument
// naming the offending key path.
void validate_config(const ExperimentConfig& cfg);

// FNV-1a hash of the canonical form, as fixed-width hex.
std::string config_hash(const ExperimentConfig& cfg);

} // namespace ucl

#endif
