#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "app/commands.hpp"
#include "app/config.hpp"

namespace extremal::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string config_path(const std::string& name) { return std::string(EXTREMAL_CONFIG_DIR) + "/" + name; }

json rotation_doc(double c) {
    return json{{"system",
                 {{"n", 3},
                  {"k", 2},
                  {"drift", "0; 0; 1 - " + std::to_string(c) + "*x1"},
                  {"controlled", {"1; 0; 0", "0; 1; 3*x1"}}}},
                {"anchor", {0, 0, 0}},
                {"covector", {0, 0, 2}}};
}

std::string pointer_of(const json& doc) {
    try {
        (void)parse_config(doc);
    } catch (const ConfigError& e) {
        return e.pointer();
    }
    return "<none>";
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("extremal_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

TEST(Config, DefaultsAndNormalisation) {
    const RunConfig cfg = parse_config(rotation_doc(5.0));
    EXPECT_EQ(cfg.system.n, 3);
    ASSERT_TRUE(std::holds_alternative<Vector>(cfg.covector));
    EXPECT_NEAR(std::get<Vector>(cfg.covector).norm(), 1.0, 1e-15);
    EXPECT_DOUBLE_EQ(cfg.integrator.eps_switch, 1e-6);
    EXPECT_EQ(cfg.oracle.samples, 1000);
}

TEST(Config, ErrorsCarryJsonPointers) {
    json doc = rotation_doc(5.0);
    doc["system"]["bogus"] = 1;
    EXPECT_EQ(pointer_of(doc), "/system/bogus");

    doc = rotation_doc(5.0);
    doc["system"].erase("drift");
    EXPECT_EQ(pointer_of(doc), "/system/drift");

    doc = rotation_doc(5.0);
    doc["anchor"] = {0, 0};
    EXPECT_EQ(pointer_of(doc), "/anchor");

    doc = rotation_doc(5.0);
    doc["brackets"] = {{"H0I", {1, 0}}, {"HIJ", {{0, 1}, {1, 0}}}};
    EXPECT_EQ(pointer_of(doc), "/brackets/HIJ");

    doc = rotation_doc(5.0);
    doc["covector"] = {0, 0, 0};
    EXPECT_EQ(pointer_of(doc), "/covector");

    doc = rotation_doc(5.0);
    doc["integrator"] = {{"eps_switch", -1}};
    EXPECT_EQ(pointer_of(doc), "/integrator/eps_switch");
}

TEST(Config, MalformedFieldReportsOffset) {
    json doc = rotation_doc(5.0);
    doc["system"]["drift"] = "0; 0; 1 +* x1";
    try {
        (void)parse_config(doc);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.pointer(), "/system/drift");
        EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos);
    }
}

TEST(Commands, ClassifyWritesReport) {
    const fs::path out = scratch_dir("classify");
    std::ostringstream text;
    std::ostringstream err;
    const RunConfig cfg = load_config(config_path("rotation_cprime.json"));
    ASSERT_EQ(run_command("classify", cfg, text, err, out), kSuccess);
    std::ifstream in(out / "classify.json");
    const json rep = json::parse(in);
    EXPECT_EQ(rep["scenario"], "Cprime");
    EXPECT_NEAR(rep["d"].get<double>(), 4.0, 1e-7);
    EXPECT_TRUE(rep["codim1"]["holds"].get<bool>());
}

TEST(Commands, ClassifyAnnihilatorAndFailingCondition) {
    std::ostringstream text;
    std::ostringstream err;
    json doc = rotation_doc(3.0);
    doc["covector"] = "annihilator";
    const CommandResult r = run_classify(parse_config(doc), text);
    EXPECT_EQ(r.report["scenario"], "CondEqqFails");
    EXPECT_FALSE(r.report["codim1"]["holds"].get<bool>());
}

TEST(Commands, ShippedClassifications) {
    std::ostringstream text;
    const CommandResult di = run_classify(load_config(config_path("double_integrator.json")), text);
    EXPECT_EQ(di.report["scenario"], "A");
    EXPECT_NEAR(di.report["d"].get<double>(), std::abs(di.report["H0I"][0].get<double>()), 1e-12);
    const CommandResult flat = run_classify(load_config(config_path("commuting.json")), text);
    EXPECT_EQ(flat.report["scenario"], "CondEqqFails");
    EXPECT_FALSE(flat.report["codim1"]["holds"].get<bool>());
}

TEST(Commands, IntegrateIsBitwiseReproducible) {
    const RunConfig cfg = load_config(config_path("rotation_cprime.json"));
    std::string files[2];
    for (int i = 0; i < 2; ++i) {
        const fs::path out = scratch_dir("repro" + std::to_string(i));
        std::ostringstream text;
        std::ostringstream err;
        ASSERT_EQ(run_command("integrate", cfg, text, err, out), kSuccess);
        std::ifstream in(out / "trajectory.csv");
        files[i].assign(std::istreambuf_iterator<char>(in), {});
    }
    EXPECT_FALSE(files[0].empty());
    EXPECT_EQ(files[0], files[1]);
}

TEST(Commands, DoubleIntegratorRoundTrip) {
    std::ostringstream text;
    const CommandResult r = run_integrate(load_config(config_path("double_integrator.json")), text, std::nullopt);
    ASSERT_EQ(r.report["switches"].size(), 1u);
    EXPECT_EQ(r.report["switches"][0]["u_before"][0], -1.0);
    EXPECT_EQ(r.report["switches"][0]["u_after"][0], 1.0);
    ASSERT_TRUE(r.report.contains("round_trip_error"));
    EXPECT_LT(r.report["round_trip_error"].get<double>(), 1e-6);
}

TEST(Commands, IntegrateWritesTrajectory) {
    const fs::path out = scratch_dir("integrate");
    std::ostringstream text;
    std::ostringstream err;
    ASSERT_EQ(run_command("integrate", load_config(config_path("double_integrator.json")), text, err, out), kSuccess);
    EXPECT_TRUE(fs::exists(out / "trajectory.csv"));
    std::ifstream in(out / "integrate.json");
    const json rep = json::parse(in);
    ASSERT_EQ(rep["switches"].size(), 1u);
}

TEST(Commands, CdoubleprimeIntegrationReportsNoSwitch) {
    std::ostringstream text;
    std::ostringstream err;
    EXPECT_EQ(run_command("integrate", load_config(config_path("rotation_cdoubleprime.json")), text, err,
                          std::nullopt),
              kSuccess)
        << err.str();
}

TEST(Commands, ValidatePassesOnShippedConfigs) {
    for (const char* name :
         {"rotation_cprime.json", "rotation_cdoubleprime.json", "commuting.json", "double_integrator.json"}) {
        std::ostringstream text;
        std::ostringstream err;
        EXPECT_EQ(run_command("validate", load_config(config_path(name)), text, err, std::nullopt), kSuccess)
            << name << "\n"
            << text.str() << err.str();
    }
}

TEST(Commands, SphereWritesCsv) {
    const fs::path out = scratch_dir("sphere");
    std::ostringstream text;
    std::ostringstream err;
    RunConfig cfg = load_config(config_path("rotation_cprime.json"));
    cfg.sphere.random_starts = 5;
    ASSERT_EQ(run_command("sphere", cfg, text, err, out), kSuccess);
    std::ifstream in(out / "sphere.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "s,u1,u2");
    std::ifstream rep_in(out / "sphere.json");
    const json rep = json::parse(rep_in);
    EXPECT_EQ(rep["converged_starts"], 5);
    EXPECT_LT(rep["lift_gap"].get<double>(), 1e-6);
}

TEST(Commands, UnknownVerbIsInputError) {
    std::ostringstream text;
    std::ostringstream err;
    EXPECT_EQ(run_command("frobnicate", parse_config(rotation_doc(5.0)), text, err, std::nullopt), kInputError);
}

}  // namespace
}  // namespace extremal::app
