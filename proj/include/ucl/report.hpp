#ifndef UCL_REPORT_HPP
#define UCL_REPORT_HPP

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace ucl {

struct CsvTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

struct Verdict {
    std::string experiment;
    std::string id;
    bool pass = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string note;
};

// One experiment's output: tables for plotting, verdicts for the exit code,
// fitted constants for the JSON summary, and the provenance hash.
struct ReportBundle {
    std::string experiment;
    std::vector<CsvTable> tables;
    std::vector<Verdict> verdicts;
    std::map<std::string, double> fitted;
    std::string config_hash;
};

// Fixed-precision formatting used everywhere a float reaches a report:
// 12 significant digits, shortest form.
std::string fmt_sig(double v);

// Sorts verdicts by (experiment, id); emit and exit code assume this ran.
void finalize_bundle(ReportBundle& b);

// CSV body: header line plus rows, '\n' line ends, no trailing blank line
// beyond the final newline.  An empty table is just its header.
std::string csv_body(const CsvTable& t);

// JSON summary: experiment, config hash, verdicts, fitted constants; the
// timestamp is optional so byte-level determinism checks can exclude it.
nlohmann::json summary_json(const ReportBundle& b, bool with_timestamp);

// Writes <dir>/<experiment>-<table>.csv per table and
// <dir>/<experiment>-summary.json.  Returns the written paths.
std::vector<std::string> emit_report(const ReportBundle& b, const std::string& dir);

// 0 when every verdict passed, 1 otherwise.
int bundle_exit_code(const ReportBundle& b);

} // namespace ucl

#endif
