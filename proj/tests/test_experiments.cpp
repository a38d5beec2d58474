#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "kron/errors.hpp"
#include "kron/experiments.hpp"

using namespace kron;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentPlan small_cauchy_plan(const std::string& out, int workers) {
    ExperimentPlan plan;
    plan.kind = ExperimentKind::cauchy_limit;
    plan.config = default_config(1);
    plan.nList = {500, 1000};
    plan.sampleCount = 200;
    plan.workers = workers;
    plan.outputDir = out;
    return plan;
}

} // namespace

TEST_CASE("plan hash is stable and seed-sensitive") {
    auto a = small_cauchy_plan("", 1);
    auto b = small_cauchy_plan("", 4); // workers are not part of the plan identity
    CHECK(a.planHash() == b.planHash());
    b.config.seed += 1;
    CHECK(a.planHash() != b.planHash());
}

TEST_CASE("config json round trip") {
    auto c = default_config(2);
    auto tmp = std::filesystem::temp_directory_path() / "kron_cfg_test.json";
    {
        std::ofstream out(tmp);
        out << c.toJson();
    }
    auto back = ExperimentConfig::fromJsonFile(tmp.string());
    CHECK(back.d == c.d);
    CHECK(back.sideRanges == c.sideRanges);
    CHECK(back.eta == c.eta);
    CHECK(back.epsilon == c.epsilon);
    CHECK(back.delta == c.delta);
    CHECK(back.seed == c.seed);
    std::filesystem::remove(tmp);
}

TEST_CASE("outputs are byte-identical across reruns and worker counts") {
    namespace fs = std::filesystem;
    auto base = fs::temp_directory_path() / "kron_det_test";
    fs::remove_all(base);
    auto d1 = (base / "w1").string(), d2 = (base / "w3").string(), d3 = (base / "re").string();

    run_cauchy_limit(small_cauchy_plan(d1, 1));
    run_cauchy_limit(small_cauchy_plan(d2, 3));
    run_cauchy_limit(small_cauchy_plan(d3, 1));

    for (const char* name : {"cauchy_cdf_N500.csv", "cauchy_cdf_N1000.csv",
                             "cauchy_summary.json"}) {
        auto f1 = slurp(fs::path(d1) / name);
        CHECK(f1 == slurp(fs::path(d2) / name));
        CHECK(f1 == slurp(fs::path(d3) / name));
        CHECK_FALSE(f1.empty());
    }
    // header block carries plan hash, seed and version
    auto csv = slurp(fs::path(d1) / "cauchy_cdf_N500.csv");
    CHECK(csv.rfind("# plan_hash=", 0) == 0);
    CHECK(csv.find("seed=") != std::string::npos);
    CHECK(csv.find("version=") != std::string::npos);
    fs::remove_all(base);
}

TEST_CASE("single-sample report is well-formed") {
    ExperimentPlan plan;
    plan.kind = ExperimentKind::cauchy_limit;
    plan.config = default_config(1);
    plan.nList = {300};
    plan.sampleCount = 1;
    auto rep = run_cauchy_limit(plan);
    REQUIRE(rep.perN.size() == 1);
    CHECK(rep.perN[0].ks >= 0.0);
    CHECK(rep.perN[0].ks <= 1.0);
}

TEST_CASE("infeasible N/mode combinations fail before work starts") {
    ExperimentPlan plan;
    plan.kind = ExperimentKind::cauchy_limit;
    plan.config = default_config(1);
    plan.nList = {200000}; // needs the flow route, which wants d = 2
    plan.sampleCount = 100000;
    CHECK_THROWS_AS(run_cauchy_limit(plan), ResourceError);

    plan.kind = ExperimentKind::smallbox;
    plan.config = default_config(2);
    plan.gamma = 0.2;
    CHECK_THROWS_AS(run_cauchy_limit(plan), ResourceError);

    plan.nList = {10}; // below the minimum orbit length
    CHECK_THROWS_AS(plan.validate(), ArgumentError);
}

TEST_CASE("poisson runner surfaces the degenerate-count case") {
    ExperimentPlan plan;
    plan.kind = ExperimentKind::poisson_process;
    plan.config = default_config(2);
    plan.nList = {16}; // counts almost surely all zero at two samples
    plan.sampleCount = 2;
    CHECK_THROWS_AS(run_poisson_process(plan), DegenerateTestError);
}

TEST_CASE("lattice consistency at small scale reports zero mismatches") {
    ExperimentPlan plan;
    plan.kind = ExperimentKind::lattice_consistency;
    plan.config = default_config(2);
    plan.nList = {3000};
    plan.sampleCount = 10;
    plan.workers = 2;
    auto rep = run_lattice_consistency(plan);
    CHECK(rep.samples == 10);
    CHECK(rep.mismatches == 0);
}

TEST_CASE("kind names round through to_string") {
    CHECK(std::string(to_string(ExperimentKind::cauchy_limit)) == "cauchy-limit");
    CHECK(std::string(to_string(ExperimentKind::gamma_constant)) == "gamma-constant");
}
