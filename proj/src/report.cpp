#include "ucl/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ucl {

std::string fmt_sig(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
}

void finalize_bundle(ReportBundle& b) {
    std::stable_sort(b.verdicts.begin(), b.verdicts.end(),
                     [](const Verdict& a, const Verdict& c) {
                         if (a.experiment != c.experiment)
                             return a.experiment < c.experiment;
                         return a.id < c.id;
                     });
}

std::string csv_body(const CsvTable& t) {
    std::ostringstream os;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) os << ',';
        os << t.columns[c];
    }
    os << '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size())
            throw std::logic_error("csv row width mismatch in table " + t.name);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) os << ',';
            os << row[c];
        }
        os << '\n';
    }
    return os.str();
}

nlohmann::json summary_json(const ReportBundle& b, bool with_timestamp) {
    nlohmann::json j;
    j["experiment"] = b.experiment;
    j["config_hash"] = b.config_hash;
    nlohmann::json verdicts = nlohmann::json::array();
    for (const auto& v : b.verdicts) {
        verdicts.push_back({{"experiment", v.experiment},
                            {"id", v.id},
                            {"pass", v.pass},
                            {"value", v.value},
                            {"threshold", v.threshold},
                            {"note", v.note}});
    }
    j["verdicts"] = verdicts;
    j["fitted"] = b.fitted;
    j["tables"] = nlohmann::json::array();
    for (const auto& t : b.tables) j["tables"].push_back(t.name);
    if (with_timestamp) {
        const auto now = std::chrono::system_clock::now();
        j["timestamp_unix"] =
            std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch())
                .count();
    }
    return j;
}

std::vector<std::string> emit_report(const ReportBundle& b, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> written;
    for (const auto& t : b.tables) {
        const fs::path p = fs::path(dir) / (b.experiment + "-" + t.name + ".csv");
        std::ofstream out(p);
        if (!out) throw std::runtime_error("cannot write " + p.string());
        out << csv_body(t);
        written.push_back(p.string());
    }
    const fs::path p = fs::path(dir) / (b.experiment + "-summary.json");
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << summary_json(b, true).dump(2) << '\n';
    written.push_back(p.string());
    return written;
}

int bundle_exit_code(const ReportBundle& b) {
    for (const auto& v : b.verdicts)
        if (!v.pass) return 1;
    return 0;
}

} // namespace ucl
