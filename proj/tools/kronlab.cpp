// kronlab: experiment driver for Kronecker-sequence discrepancy statistics.
//
// Subcommands mirror the experiment kinds; every run is a pure function of
// (plan, seed), so reruns reproduce output files byte for byte.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kron/errors.hpp"
#include "kron/experiments.hpp"
#include "kron/version.hpp"

namespace {

struct CommonOpts {
    std::string configPath;
    std::uint64_t seed = 0;
    bool seedSet = false;
    int workers = 1;
    std::string outDir;
    std::vector<long long> nList;
    long long samples = 0;
    int dim = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.configPath, "JSON config file");
    cmd->add_option("--seed", o.seed, "RNG seed (overrides config)")->each([&](const std::string&) {
        o.seedSet = true;
    });
    cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.outDir, "output directory for CSV/JSON artifacts");
    cmd->add_option("--n", o.nList, "orbit length N (repeatable)");
    cmd->add_option("--samples", o.samples, "Monte Carlo sample count");
    cmd->add_option("--dim", o.dim, "dimension d when no config file is given");
}

kron::ExperimentPlan make_plan(kron::ExperimentKind kind, const CommonOpts& o, int defaultDim,
                               long long defaultSamples, std::vector<long long> defaultN) {
    kron::ExperimentPlan plan;
    plan.kind = kind;
    plan.config = o.configPath.empty()
                      ? kron::default_config(o.dim > 0 ? o.dim : defaultDim)
                      : kron::ExperimentConfig::fromJsonFile(o.configPath);
    if (o.seedSet) plan.config.seed = o.seed;
    plan.workers = o.workers;
    plan.outputDir = o.outDir;
    plan.nList = o.nList.empty() ? std::move(defaultN) : o.nList;
    plan.sampleCount = o.samples > 0 ? o.samples : defaultSamples;
    return plan;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kronecker-sequence discrepancy and lattice point-process experiments"};
    app.set_version_flag("--version", kron::kVersion);
    app.require_subcommand(1);

    CommonOpts o;
    double gamma = 0.25;
    std::vector<double> tList;
    std::vector<long long> mList;

    auto* cauchy = app.add_subcommand("cauchy-limit", "discrepancy law vs the Cauchy limit");
    add_common(cauchy, o);
    auto* poisson = app.add_subcommand("poisson-process", "resonant point process statistics");
    add_common(poisson, o);
    auto* consistency =
        app.add_subcommand("lattice-consistency", "flow scan vs brute-force enumeration");
    add_common(consistency, o);
    auto* rogers = app.add_subcommand("rogers", "Rogers moment identities Monte Carlo");
    add_common(rogers, o);
    auto* multiplicity =
        app.add_subcommand("multiplicity", "cusp multiple-visit statistics");
    add_common(multiplicity, o);
    multiplicity->add_option("--m", mList, "flow depth M (repeatable)");
    auto* smallbox = app.add_subcommand("smallbox", "shrinking-box discrepancy law");
    add_common(smallbox, o);
    smallbox->add_option("--gamma", gamma, "box shrink exponent in [0, 1/d)");
    auto* continuous = app.add_subcommand("continuous", "linear-flow discrepancy tightness");
    add_common(continuous, o);
    continuous->add_option("--t", tList, "time horizon T (repeatable)");
    auto* gammaConst =
        app.add_subcommand("gamma-constant", "limit-constant and series cross-checks");
    add_common(gammaConst, o);

    CLI11_PARSE(app, argc, argv);

    try {
        kron::ExperimentPlan plan;
        if (app.got_subcommand(cauchy))
            plan = make_plan(kron::ExperimentKind::cauchy_limit, o, 1, 5000,
                             {1000, 10000, 100000});
        else if (app.got_subcommand(poisson))
            plan = make_plan(kron::ExperimentKind::poisson_process, o, 2, 10000, {100000000});
        else if (app.got_subcommand(consistency))
            plan = make_plan(kron::ExperimentKind::lattice_consistency, o, 2, 200, {10000});
        else if (app.got_subcommand(rogers))
            plan = make_plan(kron::ExperimentKind::rogers, o, 1, 100000, {});
        else if (app.got_subcommand(multiplicity)) {
            plan = make_plan(kron::ExperimentKind::multiplicity, o, 2, 800000, {});
            plan.mList = mList;
            plan.config.epsilon = o.configPath.empty() ? 1.0 : plan.config.epsilon;
        } else if (app.got_subcommand(smallbox)) {
            plan = make_plan(kron::ExperimentKind::smallbox, o, 1, 5000, {100000});
            plan.gamma = gamma;
        } else if (app.got_subcommand(continuous)) {
            plan = make_plan(kron::ExperimentKind::continuous, o, 2, 2000, {});
            plan.tList = tList;
        } else if (app.got_subcommand(gammaConst)) {
            plan = make_plan(kron::ExperimentKind::gamma_constant, o, 1, 4000000, {});
        }
        int failures = kron::run_experiment(plan);
        if (failures > 0) std::fprintf(stderr, "%d assertion(s) failed\n", failures);
        return failures == 0 ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
