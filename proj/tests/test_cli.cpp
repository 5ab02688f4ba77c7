#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "ucl/config.hpp"
#include "ucl/experiments.hpp"
#include "ucl/report.hpp"

using namespace ucl;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    namespace fs = std::filesystem;
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p);
    out << body;
    return p.string();
}

const CsvTable& table_named(const ReportBundle& b, const std::string& name) {
    for (const auto& t : b.tables)
        if (t.name == name) return t;
    throw std::runtime_error("no table " + name);
}

const Verdict& verdict_named(const ReportBundle& b, const std::string& id) {
    for (const auto& v : b.verdicts)
        if (v.id == id) return v;
    throw std::runtime_error("no verdict " + id);
}

} // namespace

TEST_CASE("config text parses sections, arrays and comments") {
    const ExperimentConfig cfg = parse_config_text(
        "# a comment\n"
        "experiment = prop-suite\n"
        "seed = 42\n"
        "taus = [8, 16, 32, 64]\n"
        "[strip]\n"
        "d = 3  # trailing comment\n"
        "lambdas = [0, 0.5, 1.0]\n");
    CHECK(cfg.experiment == "prop-suite");
    CHECK(cfg.has_seed);
    CHECK(cfg.seed == 42);
    CHECK(cfg.get_int("strip.d", 0) == 3);
    const auto ls = cfg.get_list("strip.lambdas");
    REQUIRE(ls.size() == 3);
    CHECK(ls[1] == 0.5);
    CHECK(cfg.get_list("taus").size() == 4);
    CHECK(cfg.get_double("absent", 7.5) == 7.5);
}

TEST_CASE("config parse errors") {
    CHECK_THROWS_AS(parse_config_text("experiment = x\nno equals sign here\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("a = 1\na = 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[unterminated\na = 1\n"),
                    std::invalid_argument);
}

TEST_CASE("number list parsing accepts both forms") {
    CHECK(parse_number_list("[1, 2.5, -3]") == std::vector<double>{1.0, 2.5, -3.0});
    CHECK(parse_number_list("4,5,6") == std::vector<double>{4.0, 5.0, 6.0});
    CHECK(parse_number_list("[]").empty());
    CHECK_THROWS_AS(parse_number_list("[1, x]"), std::invalid_argument);
}

TEST_CASE("schema validation rejects bad configs with key paths") {
    ExperimentConfig cfg;
    cfg.experiment = "nonsense";
    cfg.has_seed = true;
    CHECK_THROWS_WITH_AS(validate_config(cfg),
                         "config: unknown experiment 'nonsense'",
                         std::invalid_argument);

    cfg.experiment = "prop-suite";
    cfg.has_seed = false;
    CHECK_THROWS_WITH_AS(validate_config(cfg), "config: 'seed' is mandatory",
                         std::invalid_argument);

    cfg.has_seed = true;
    cfg.set("strip.bogus", "1");
    try {
        validate_config(cfg);
        CHECK(false);
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("strip.bogus") != std::string::npos);
    }
}

TEST_CASE("q0 at the lower integrability endpoint is rejected") {
    ExperimentConfig cfg;
    cfg.experiment = "split-potentials";
    cfg.has_seed = true;
    cfg.set("q0", "1.5");  // exactly d/2 at d = 3
    cfg.set("q1", "6");
    cfg.set("q2", "6");
    cfg.set("n", "8");
    try {
        validate_config(cfg);
        CHECK(false);
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("(d/2") != std::string::npos);
    }
    cfg.set("q0", "1.51");
    CHECK_NOTHROW(validate_config(cfg));
    cfg.set("q0", "inf");
    CHECK_NOTHROW(validate_config(cfg));
    cfg.set("q1", "3");
    CHECK_THROWS_AS(validate_config(cfg), std::invalid_argument);
}

TEST_CASE("significant-digit formatting") {
    CHECK(fmt_sig(1.0 / 3.0) == "0.333333333333");
    CHECK(fmt_sig(2.0) == "2");
    CHECK(fmt_sig(123456789.123456) == "123456789.123");
    CHECK(fmt_sig(-1.5e-11) == "-1.5e-11");
}

TEST_CASE("csv body: header, rows and width checking") {
    CsvTable t;
    t.name = "x";
    t.columns = {"a", "b"};
    CHECK(csv_body(t) == "a,b\n");
    t.rows.push_back({"1", "2"});
    CHECK(csv_body(t) == "a,b\n1,2\n");
    t.rows.push_back({"only one"});
    CHECK_THROWS_AS(csv_body(t), std::logic_error);
}

TEST_CASE("verdicts sort by experiment then id and gate the exit code") {
    ReportBundle b;
    b.verdicts.push_back({"z", "b", true, 0, 0, ""});
    b.verdicts.push_back({"a", "c", true, 0, 0, ""});
    b.verdicts.push_back({"a", "a", true, 0, 0, ""});
    finalize_bundle(b);
    CHECK(b.verdicts[0].id == "a");
    CHECK(b.verdicts[1].id == "c");
    CHECK(b.verdicts[2].experiment == "z");
    CHECK(bundle_exit_code(b) == 0);
    b.verdicts[1].pass = false;
    CHECK(bundle_exit_code(b) == 1);
}

TEST_CASE("summary json round-trips through text") {
    ReportBundle b;
    b.experiment = "demo";
    b.config_hash = "abc";
    b.verdicts.push_back({"demo", "v", true, 1.25, 2.0, "note"});
    b.fitted["slope"] = -1.5;
    const nlohmann::json j = summary_json(b, false);
    const nlohmann::json parsed = nlohmann::json::parse(j.dump(2));
    CHECK(parsed == j);
    CHECK(parsed["verdicts"][0]["pass"] == true);
    CHECK(parsed["fitted"]["slope"] == -1.5);
}

TEST_CASE("parametrix experiment: verdict per tau, empty sweep allowed") {
    ExperimentConfig cfg;
    cfg.experiment = "parametrix-check";
    cfg.has_seed = true;
    cfg.seed = 1;
    cfg.set("n1", "32");
    cfg.set("nperp", "8");
    cfg.set("taus", "[8]");
    cfg.set("tol", "0.05");
    const ReportBundle b = run_experiment(cfg);
    const CsvTable& t = table_named(b, "residuals");
    REQUIRE(t.rows.size() == 1);
    CHECK(std::stod(t.rows[0][1]) < 0.05);
    CHECK(b.verdicts.size() == 1);
    CHECK(b.verdicts[0].pass);
    CHECK(bundle_exit_code(b) == 0);

    cfg.set("taus", "[]");
    const ReportBundle empty = run_experiment(cfg);
    CHECK(table_named(empty, "residuals").rows.empty());
    CHECK(empty.verdicts.empty());
    CHECK(bundle_exit_code(empty) == 0);
}

TEST_CASE("determinism: same config and seed give identical csv bodies") {
    ExperimentConfig cfg;
    cfg.experiment = "wolff-search";
    cfg.has_seed = true;
    cfg.seed = 11;
    cfg.set("n", "4");
    cfg.set("eps", "0.3");
    cfg.set("kgrid", "4");
    cfg.set("points", "150");
    const ReportBundle a = run_experiment(cfg);
    const ReportBundle b = run_experiment(cfg);
    REQUIRE(a.tables.size() == b.tables.size());
    for (std::size_t i = 0; i < a.tables.size(); ++i)
        CHECK(csv_body(a.tables[i]) == csv_body(b.tables[i]));
    CHECK(summary_json(a, false) == summary_json(b, false));

    cfg.seed = 12;
    const ReportBundle c = run_experiment(cfg);
    CHECK(csv_body(a.tables[0]) != csv_body(c.tables[0]));
    CHECK(a.config_hash == b.config_hash);
    CHECK(a.verdicts.size() == 3);
    CHECK(verdict_named(a, "disjoint").pass);
    CHECK(verdict_named(a, "half_mass").pass);
}

TEST_CASE("measure files load and feed the search") {
    std::string body = "# three columns plus log weight\n";
    for (int i = 0; i < 60; ++i) {
        const double x = -1.5 + 0.015 * i;
        body += std::to_string(x) + " 0.1 -0.2 0.0\n";
    }
    const std::string path = write_temp("ucl_measure.txt", body);
    const DiscreteMeasure mu = load_measure_file(path);
    CHECK(mu.dim() == 3);
    CHECK(mu.size() == 60);

    ExperimentConfig cfg;
    cfg.experiment = "wolff-search";
    cfg.has_seed = true;
    cfg.seed = 1;
    cfg.set("measure", path);
    cfg.set("n", "3");
    cfg.set("eps", "0.3");
    cfg.set("kgrid", "3");
    const ReportBundle b = run_experiment(cfg);
    CHECK(!table_named(b, "family").rows.empty());
    CHECK(verdict_named(b, "ratio_positive").pass);
    std::remove(path.c_str());
}

TEST_CASE("splitter experiment reports thresholds and constraint rows") {
    ExperimentConfig cfg;
    cfg.experiment = "split-potentials";
    cfg.has_seed = true;
    cfg.seed = 3;
    cfg.set("q0", "6");
    cfg.set("q1", "6");
    cfg.set("q2", "6");
    cfg.set("n", "8");
    const ReportBundle b = run_experiment(cfg);
    CHECK(table_named(b, "thresholds").rows.size() == 1);
    CHECK(table_named(b, "constraints").rows.size() == 7);
    CHECK(verdict_named(b, "n_above_tau3").pass);
    CHECK(verdict_named(b, "smallness").pass);
    CHECK(b.fitted.count("tau3") == 1);
    CHECK(bundle_exit_code(b) == 0);
}

TEST_CASE("three-balls experiment fits a feasible exponent") {
    ExperimentConfig cfg;
    cfg.experiment = "three-balls";
    cfg.has_seed = true;
    cfg.seed = 5;
    cfg.set("R", "0.25");
    cfg.set("resolution", "15");
    cfg.set("family_size", "2");
    cfg.set("potential_scales", "[0]");
    const ReportBundle b = run_experiment(cfg);
    const CsvTable& t = table_named(b, "fits");
    REQUIRE(t.rows.size() == 1);
    const double alpha = std::stod(t.rows[0][3]);
    CHECK(alpha > 0.0);
    CHECK(alpha < 1.0);
    CHECK(verdict_named(b, "alpha_feasible").pass);
}

TEST_CASE("chain experiment on concentric balls and an annulus") {
    const std::string dom = write_temp("ucl_dom.txt",
                                       "shape = ball\ncenter = [0,0,0]\nradius = 1\n");
    const std::string om = write_temp("ucl_om.txt",
                                      "shape = ball\ncenter = [0,0,0]\nradius = 0.2\n");
    const std::string obs = write_temp(
        "ucl_obs.txt", "shape = ball\ncenter = [0.3,0,0]\nradius = 0.3\n");
    ExperimentConfig cfg;
    cfg.experiment = "chain-propagate";
    cfg.has_seed = true;
    cfg.seed = 1;
    cfg.set("domain", dom);
    cfg.set("omega", om);
    cfg.set("O", obs);
    const ReportBundle b = run_experiment(cfg);
    CHECK(verdict_named(b, "gc_certified").pass);
    CHECK(verdict_named(b, "composed_estimate").pass);
    for (const auto& row : table_named(b, "chains").rows) {
        const double alpha = std::stod(row[5]);
        CHECK(alpha > 0.0);
        CHECK(alpha < 1.0);
        CHECK(std::stod(row[6]) >= 1.5);  // composed never beats one step
    }

    // annulus: the hole blocks the straight path, the waypoint route works
    const std::string adom = write_temp(
        "ucl_adom.txt",
        "shape = annulus\ncenter = [0,0,0]\ninner = 0.3\nouter = 1\n");
    const std::string aom = write_temp(
        "ucl_aom.txt", "shape = ball\ncenter = [0.6,0,0]\nradius = 0.1\n");
    const std::string aobs = write_temp(
        "ucl_aobs.txt", "shape = ball\ncenter = [-0.6,0,0]\nradius = 0.1\n");
    cfg.set("domain", adom);
    cfg.set("omega", aom);
    cfg.set("O", aobs);
    const ReportBundle a = run_experiment(cfg);
    CHECK(verdict_named(a, "gc_certified").pass);
    for (const std::string& p : {dom, om, obs, adom, aom, aobs})
        std::remove(p.c_str());
}

TEST_CASE("config hash is canonical-order stable and value sensitive") {
    const ExperimentConfig a = parse_config_text(
        "experiment = wolff-search\nseed = 1\nn = 4\neps = 0.3\n");
    const ExperimentConfig b = parse_config_text(
        "experiment = wolff-search\nseed = 1\neps = 0.3\nn = 4\n");
    CHECK(config_hash(a) == config_hash(b));
    const ExperimentConfig c = parse_config_text(
        "experiment = wolff-search\nseed = 1\nn = 5\neps = 0.3\n");
    CHECK(config_hash(a) != config_hash(c));
    CHECK(config_hash(a).size() == 16);
}

TEST_CASE("unknown norm-scan row is a configuration error") {
    ExperimentConfig cfg;
    cfg.experiment = "norm-scan";
    cfg.has_seed = true;
    cfg.seed = 1;
    cfg.set("rows", "NoSuchRow");
    cfg.set("taus", "[8]");
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
}
