#include "ucl/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ucl {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) ++a;
    while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& raw) {
    const std::string t = trim(raw);
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size())
            throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key
                                    + "': cannot parse number from '" + t + "'");
    }
}

} // namespace

bool ExperimentConfig::has(const std::string& key) const {
    return values.count(key) > 0;
}

std::string ExperimentConfig::get_string(const std::string& key,
                                         const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : trim(it->second);
}

double ExperimentConfig::get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : parse_double(key, it->second);
}

int ExperimentConfig::get_int(const std::string& key, int fallback) const {
    const double v = get_double(key, double(fallback));
    return int(v);
}

std::vector<double> ExperimentConfig::get_list(
    const std::string& key, const std::vector<double>& fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    return parse_number_list(it->second);
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
    values[key] = trim(raw);
}

std::string ExperimentConfig::canonical() const {
    std::ostringstream os;
    os << "experiment = " << experiment << "\n";
    if (has_seed) os << "seed = " << seed << "\n";
    for (const auto& [k, v] : values) os << k << " = " << trim(v) << "\n";
    return os.str();
}

std::vector<double> parse_number_list(const std::string& raw) {
    std::string t = trim(raw);
    if (!t.empty() && t.front() == '[') {
        if (t.back() != ']')
            throw std::invalid_argument("unterminated array: '" + raw + "'");
        t = t.substr(1, t.size() - 2);
    }
    std::vector<double> out;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string v = trim(item);
        if (v.empty()) continue;
        out.push_back(parse_double("<list>", v));
    }
    return out;
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno)
                                            + ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno)
                                        + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno)
                                        + ": empty key");
        const std::string path = section.empty() ? key : section + "." + key;
        if (path == "experiment") {
            cfg.experiment = val;
        } else if (path == "seed") {
            cfg.seed = std::stoull(val);
            cfg.has_seed = true;
        } else if (path == "out") {
            cfg.out_dir = val;
        } else {
            if (cfg.values.count(path))
                throw std::invalid_argument("config: duplicate key '" + path + "'");
            cfg.values[path] = val;
        }
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

namespace {

const std::set<std::string> kStripKeys = {
    "strip.d", "strip.X0", "strip.X1", "strip.lambdas",
};

std::set<std::string> with_strip(std::set<std::string> s) {
    s.insert(kStripKeys.begin(), kStripKeys.end());
    return s;
}

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"kernel-eval", with_strip({"taus", "bound"})},
        {"parametrix-check", with_strip({"taus", "n1", "nperp", "tol"})},
        {"norm-scan", with_strip({"taus", "rows", "n1", "nperp", "Lperp"})},
        {"prop-suite", with_strip({"taus", "n1", "nperp", "Lperp"})},
        {"carleman-verify", with_strip({"taus", "cases", "n1", "nperp"})},
        {"wolff-search", {"measure", "n", "eps", "kgrid", "points"}},
        {"split-potentials",
         {"q0", "q1", "q2", "n", "n1", "nperp", "normV", "normW1", "normW2"}},
        {"three-balls",
         {"R", "resolution", "family_size", "potential_scales", "q0", "q1", "q2"}},
        {"chain-propagate",
         {"domain", "omega", "O", "C_step", "alpha_step"}},
    };
    return s;
}

} // namespace

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.experiment.empty())
        throw std::invalid_argument("config: 'experiment' is required");
    auto it = schema().find(cfg.experiment);
    if (it == schema().end())
        throw std::invalid_argument("config: unknown experiment '"
                                    + cfg.experiment + "'");
    if (!cfg.has_seed)
        throw std::invalid_argument("config: 'seed' is mandatory");
    for (const auto& [k, v] : cfg.values)
        if (!it->second.count(k))
            throw std::invalid_argument("config: unknown key '" + k
                                        + "' for experiment '" + cfg.experiment + "'");
    if (cfg.has("q0")) {
        const int d = 3;
        const double q0 = cfg.get_double("q0", 0.0);
        if (!(q0 > d / 2.0))
            throw std::invalid_argument(
                "config key 'q0': must lie in (d/2, inf], got "
                + cfg.get_string("q0", ""));
    }
    for (const char* key : {"q1", "q2"}) {
        if (!cfg.has(key)) continue;
        const double q = cfg.get_double(key, 0.0);
        if (!(q > 3.0))
            throw std::invalid_argument(std::string("config key '") + key
                                        + "': must lie in (d, inf]");
    }
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string c = cfg.canonical();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : c) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return std::string(buf);
}

} // namespace ucl
