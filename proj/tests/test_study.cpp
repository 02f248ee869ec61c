#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hdrest/errors.hpp"
#include "hdrest/study.hpp"

using namespace hdrest;
using namespace hdrest::simbench;

namespace {

StudyConfig tiny() {
    StudyConfig c;
    c.models = {1, 5};
    c.taus = {0.5};
    c.ns = {150};
    c.Bs = {20};
    c.ps = {0.1, 0.2};
    c.reference_p = 0.2;
    c.R = 3;
    c.seed = 11;
    c.truth_draws = 20000;
    c.measure_draws = 10000;
    return c;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("study config parses JSON and key=value forms") {
    const auto a = StudyConfig::parse(R"({"models": [1, 7], "taus": [0.5, 0.8], "ns": [500, 1000], "B": [100],
                                          "p": [0.05, 0.15], "R": 4, "seed": 9, "output_dir": "out"})");
    CHECK(a.models == std::vector<int>{1, 7});
    CHECK(a.taus.size() == 2);
    CHECK(a.Bs == std::vector<std::size_t>{100});
    CHECK(a.R == 4);
    CHECK(a.output_dir == "out");
    CHECK(a.step == doctest::Approx(0.025));

    const auto b = StudyConfig::parse(
        "# sweep\nmodels = 1, 7\ntaus = 0.5, 0.8\nns = 500,1000\nB = 100\np = 0.05, 0.15\nR = 4\nseed = 9\n"
        "output_dir = out\nrefit_bootstrap = false\n");
    CHECK(b.to_json()["models"] == a.to_json()["models"]);
    CHECK(b.ns == a.ns);
    CHECK(b.ps == a.ps);
    CHECK(b.output_dir == "out");
    CHECK_FALSE(b.refit_bootstrap);

    const auto round = StudyConfig::from_json(a.to_json());
    CHECK(round.to_json() == a.to_json());

    CHECK_THROWS_AS(StudyConfig::parse(R"({"modles": [1]})"), FormatError);
    CHECK_THROWS_AS(StudyConfig::parse("models 1"), FormatError);
    CHECK_THROWS_AS(StudyConfig::parse(R"({"R": "x"})"), FormatError);

    auto bad = tiny();
    bad.models = {10};
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = tiny();
    bad.R = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    bad = tiny();
    bad.measure_draws = 5000;
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    CHECK_NOTHROW(tiny().validate());
}

TEST_CASE("a small study is reproducible and fills every cell") {
    const auto cfg = tiny();
    std::size_t last = 0, total = 0;
    const auto r1 = run_study(cfg, [&](std::size_t d, std::size_t t) {
        last = d;
        total = t;
    });
    CHECK(total == 6);
    CHECK(last == 6);
    // 2 models x 3 replicates x (2 hybrid + 2 plug-in)
    REQUIRE(r1.raw.size() == 24);
    CHECK(r1.cells.size() == 8);
    for (const auto& e : r1.raw) {
        INFO(e.method << " model " << e.model << " " << e.cause);
        CHECK_FALSE(e.failed());
        CHECK(e.hausdorff > 0);
        CHECK(e.hausdorff < 2);
        CHECK(e.measure >= 0);
        CHECK(e.measure < 5);
    }
    for (const auto& c : r1.cells) {
        CHECK(c.ok == 3);
        CHECK_FALSE(c.sd_degenerate);
        CHECK(c.sd_hausdorff >= 0);
    }
    CHECK(r1.reference_label() == "p2");
    std::size_t ratio_rows = 0;
    for (const auto& q : r1.quotients) ratio_rows += q.name == "p2/H1" || q.name == "p2/H2";
    CHECK(ratio_rows == 8);

    const auto r2 = run_study(cfg);
    REQUIRE(r2.raw.size() == r1.raw.size());
    for (std::size_t i = 0; i < r1.raw.size(); ++i) {
        CHECK(r1.raw[i].hausdorff == r2.raw[i].hausdorff);
        CHECK(r1.raw[i].measure == r2.raw[i].measure);
    }

    const auto dir = std::filesystem::temp_directory_path() / "hdrest_study_test";
    std::filesystem::remove_all(dir);
    const auto files = write_report(r1, dir.string());
    for (const auto& f : files) CHECK(std::filesystem::exists(dir / f));
    const auto table = slurp(dir / "table_tau0.5_n150_B20_hausdorff.csv");
    CHECK(table.rfind("row,M1_mean,M1_sd,M5_mean,M5_sd\n", 0) == 0);
    CHECK(table.find("\nH2,") != std::string::npos);
    CHECK(table.find("\np2/H1,") != std::string::npos);
    const auto report = slurp(dir / "report.txt");
    CHECK(report.find("(5)") != std::string::npos);
    CHECK(report.find("0.5000") != std::string::npos);
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["replicate_records"] == 24);
    CHECK(manifest["config"]["seed"] == 11);
    std::filesystem::remove_all(dir);
}

TEST_CASE("a single replicate reports zero spread and flags it") {
    auto cfg = tiny();
    cfg.models = {1};
    cfg.R = 1;
    cfg.Bs = {};
    cfg.ps = {};
    const auto r = run_study(cfg);
    REQUIRE(r.cells.size() == 2);
    for (const auto& c : r.cells) {
        CHECK(c.sd_degenerate);
        CHECK(c.sd_hausdorff == 0.0);
    }
    const auto dir = std::filesystem::temp_directory_path() / "hdrest_study_r1";
    write_report(r, dir.string());
    CHECK(nlohmann::json::parse(slurp(dir / "manifest.json"))["sd_degenerate"] == true);
    CHECK(slurp(dir / "report.txt").find("R = 1") != std::string::npos);
    std::filesystem::remove_all(dir);
}

TEST_CASE("failed cells are recorded without stopping the study") {
    auto cfg = tiny();
    cfg.models = {1};
    cfg.R = 2;
    cfg.ps = {0.2, 0.9};  // p = 0.9 may end with crossed thresholds
    cfg.reference_p = 0.2;
    const auto r = run_study(cfg);
    CHECK(r.raw.size() == 8);
    // force a failure through summarize on a doctored record
    auto doctored = r;
    doctored.raw[0].status = "failed";
    doctored.raw[0].cause = "synthetic";
    doctored.raw[0].hausdorff = kMissing;
    summarize(doctored);
    const auto* c = doctored.find(doctored.raw[0].model, doctored.raw[0].tau, doctored.raw[0].n, doctored.raw[0].B,
                                  doctored.raw[0].method);
    REQUIRE(c != nullptr);
    CHECK(c->failed == 1);
    CHECK(c->ok == 1);
    CHECK(c->sd_degenerate);
    REQUIRE(c->causes.size() == 1);
    CHECK(c->causes[0] == "synthetic");
    CHECK(std::isfinite(c->mean_hausdorff));
}
