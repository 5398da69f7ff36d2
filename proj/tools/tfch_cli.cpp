#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "tfch/harness.hpp"
#include "tfch/kernels.hpp"

namespace {

void emit(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    if (path.empty() || path == "-") {
        writer(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    writer(os);
}

struct MeshFlags {
    std::string kind = "uniform";
    double T = 1.0;
    int N = 100;
    double gamma = 2.0;
    double ratio = 1.1;
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--mesh", kind, "uniform|graded|fixed_ratio|random|composite")
            ->capture_default_str();
        cmd->add_option("--T", T, "time horizon")->capture_default_str();
        cmd->add_option("--N", N, "number of steps")->capture_default_str();
        cmd->add_option("--gamma", gamma, "grading exponent")->capture_default_str();
        cmd->add_option("--ratio", ratio, "fixed step ratio")->capture_default_str();
        cmd->add_option("--seed", seed, "mesh seed")->capture_default_str();
    }

    tfch::MeshSpec spec() const {
        tfch::MeshSpec s;
        s.kind = tfch::mesh_kind_from_name(kind);
        s.T = T;
        s.N = N;
        s.gamma = gamma;
        s.ratio = ratio;
        s.seed = seed;
        return s;
    }
};

int cmd_kernels(CLI::App* cmd) {
    auto family = std::make_shared<std::string>("l1");
    auto alpha = std::make_shared<double>(0.5);
    auto mesh = std::make_shared<MeshFlags>();
    auto upto = std::make_shared<int>(0);
    auto criteria = std::make_shared<std::string>("none");
    auto rows_out = std::make_shared<std::string>("-");
    auto report_out = std::make_shared<std::string>("-");
    auto mesh_out = std::make_shared<std::string>();

    cmd->add_option("--family", *family, "l1|l1h|l1a|auxl1h|auxl1a")->capture_default_str();
    cmd->add_option("--alpha", *alpha, "fractional order")->capture_default_str();
    mesh->attach(cmd);
    cmd->add_option("--upto", *upto, "last row to emit (default: N)");
    cmd->add_option("--criteria", *criteria, "none|uniform|nonuniform")->capture_default_str();
    cmd->add_option("--rows-out", *rows_out, "rows CSV path ('-' for stdout)")
        ->capture_default_str();
    cmd->add_option("--report-out", *report_out, "criteria JSON path")->capture_default_str();
    cmd->add_option("--mesh-out", *mesh_out, "also dump the mesh CSV here");

    cmd->callback([=]() {
        const tfch::TimeMesh m = mesh->spec().build();
        const int n = *upto > 0 ? *upto : m.size();
        tfch::KernelTable table(m, *alpha, tfch::family_from_name(*family));
        table.extend(n);
        emit(*rows_out, [&](std::ostream& os) { tfch::write_rows_csv(table, n, os); });
        if (*criteria != "none") {
            const auto variant = *criteria == "uniform" ? tfch::CriteriaVariant::Uniform
                                                        : tfch::CriteriaVariant::Nonuniform;
            const tfch::CriteriaReport report = tfch::check_criteria(table, n, variant);
            emit(*report_out, [&](std::ostream& os) { tfch::write_report_json(report, os); });
        }
        if (!mesh_out->empty())
            emit(*mesh_out, [&](std::ostream& os) { tfch::write_csv(m, os); });
    });
    return 0;
}

int cmd_eigen(CLI::App* cmd) {
    auto family = std::make_shared<std::string>("l1");
    auto mesh = std::make_shared<MeshFlags>();
    auto alphas = std::make_shared<std::vector<double>>(std::vector<double>{0.5});
    auto Ns = std::make_shared<std::vector<int>>(std::vector<int>{100});
    auto out = std::make_shared<std::string>("-");

    cmd->add_option("--family", *family, "l1|l1h|l1a")->capture_default_str();
    mesh->attach(cmd);
    cmd->add_option("--alpha", *alphas, "fractional orders (repeatable)")
        ->capture_default_str();
    cmd->add_option("--Ns", *Ns, "step counts (repeatable)")->capture_default_str();
    cmd->add_option("--out", *out, "table CSV path")->capture_default_str();

    cmd->callback([=]() {
        tfch::EigenConfig cfg;
        cfg.family = tfch::family_from_name(*family);
        cfg.mesh = mesh->spec();
        cfg.alphas = *alphas;
        cfg.Ns = *Ns;
        const auto rows = tfch::run_eigen_table(cfg);
        emit(*out, [&](std::ostream& os) { tfch::write_eigen_csv(cfg, rows, os); });
    });
    return 0;
}

int cmd_converge(CLI::App* cmd) {
    auto cfg = std::make_shared<tfch::ConvergeConfig>();
    auto scheme = std::make_shared<std::string>("l1");
    auto out = std::make_shared<std::string>("-");
    auto literal_start = std::make_shared<bool>(false);

    cmd->add_option("--scheme", *scheme, "l1|l1h|l1a")->capture_default_str();
    cmd->add_option("--alpha", cfg->alpha)->capture_default_str();
    cmd->add_option("--sigma", cfg->sigma, "regularity of the manufactured solution")
        ->capture_default_str();
    cmd->add_option("--kappa", cfg->kappa)->capture_default_str();
    cmd->add_option("--epsilon", cfg->epsilon)->capture_default_str();
    cmd->add_option("--T", cfg->T)->capture_default_str();
    cmd->add_option("--gamma", cfg->gamma, "grading of the composite head")
        ->capture_default_str();
    cmd->add_option("--M", cfg->M, "grid points per direction")->capture_default_str();
    cmd->add_option("--Ns", cfg->Ns, "step counts (repeatable)")->capture_default_str();
    cmd->add_option("--seed0", cfg->seed0, "per-N mesh seed is seed0+N")
        ->capture_default_str();
    cmd->add_option("--fp-tol", cfg->opts.fp_tol)->capture_default_str();
    cmd->add_flag("--l1a-literal-start", *literal_start,
                  "use the half-weight first row verbatim");
    cmd->add_option("--out", *out, "table CSV path")->capture_default_str();

    cmd->callback([=]() {
        cfg->scheme = tfch::scheme_from_name(*scheme);
        cfg->opts.l1a_consistent_start = !*literal_start;
        const auto rows = tfch::run_convergence(*cfg);
        emit(*out, [&](std::ostream& os) { tfch::write_converge_csv(*cfg, rows, os); });
    });
    return 0;
}

struct SimulateFlags {
    std::string scheme = "l1";
    MeshFlags mesh;
    tfch::SimulateConfig cfg;
    bool literal_start = false;
    bool no_restriction = false;
    bool no_variational = false;
    std::string trace_out = "-";
    std::string snapshot_dir = ".";
    int exit_code = 0;
};

std::shared_ptr<SimulateFlags> cmd_simulate(CLI::App* cmd) {
    auto f = std::make_shared<SimulateFlags>();
    f->mesh.T = 10.0;  // desk-scale coarsening default

    cmd->add_option("--scheme", f->scheme, "l1|l1h|l1a")->capture_default_str();
    cmd->add_option("--alpha", f->cfg.params.alpha)->capture_default_str();
    cmd->add_option("--kappa", f->cfg.params.kappa)->capture_default_str();
    cmd->add_option("--epsilon", f->cfg.params.epsilon)->capture_default_str();
    cmd->add_option("--M", f->cfg.M, "grid points per direction")->capture_default_str();
    cmd->add_option("--domain-length", f->cfg.L)->capture_default_str();
    cmd->add_option("--init-amp", f->cfg.init_amp, "initial noise amplitude")
        ->capture_default_str();
    cmd->add_option("--init-seed", f->cfg.init_seed)->capture_default_str();
    f->mesh.attach(cmd);
    cmd->add_flag("--adaptive", f->cfg.adaptive, "use the step-size controller");
    cmd->add_option("--eta", f->cfg.policy.eta, "controller sensitivity")
        ->capture_default_str();
    cmd->add_option("--tau-min", f->cfg.policy.tau_min)->capture_default_str();
    cmd->add_option("--tau-max", f->cfg.policy.tau_max)->capture_default_str();
    cmd->add_option("--warmup-gamma", f->cfg.warmup.gamma)->capture_default_str();
    cmd->add_option("--warmup-N0", f->cfg.warmup.N0)->capture_default_str();
    cmd->add_option("--warmup-T0", f->cfg.warmup.T0)->capture_default_str();
    cmd->add_option("--fp-tol", f->cfg.opts.fp_tol)->capture_default_str();
    cmd->add_option("--stab", f->cfg.opts.stabilization, "fixed-point stabilization factor")
        ->capture_default_str();
    cmd->add_flag("--l1a-literal-start", f->literal_start,
                  "use the half-weight first row verbatim");
    cmd->add_flag("--no-restriction", f->no_restriction,
                  "flag instead of reject oversized steps");
    cmd->add_flag("--no-variational", f->no_variational,
                  "skip the variational energy bookkeeping");
    cmd->add_option("--snapshots", f->cfg.snapshot_times,
                    "times whose nearest record gets dumped (repeatable)");
    cmd->add_option("--snapshot-dir", f->snapshot_dir)->capture_default_str();
    cmd->add_option("--trace-out", f->trace_out, "trace CSV path")->capture_default_str();

    cmd->callback([=]() {
        f->cfg.scheme = tfch::scheme_from_name(f->scheme);
        f->cfg.mesh = f->mesh.spec();
        f->cfg.opts.l1a_consistent_start = !f->literal_start;
        f->cfg.opts.enforce_restriction = !f->no_restriction;
        f->cfg.opts.track_variational = !f->no_variational;

        const tfch::SimulateResult result = tfch::run_simulation(f->cfg);

        std::ostringstream header;
        header << "scheme=" << f->scheme << " alpha=" << f->cfg.params.alpha
               << " kappa=" << f->cfg.params.kappa << " epsilon=" << f->cfg.params.epsilon
               << " M=" << f->cfg.M << " L=" << f->cfg.L << " init_amp=" << f->cfg.init_amp
               << " init_seed=" << f->cfg.init_seed;
        if (f->cfg.adaptive)
            header << " adaptive=1 eta=" << f->cfg.policy.eta
                   << " tau_min=" << f->cfg.policy.tau_min
                   << " tau_max=" << f->cfg.policy.tau_max
                   << " warmup_gamma=" << f->cfg.warmup.gamma
                   << " warmup_N0=" << f->cfg.warmup.N0
                   << " warmup_T0=" << f->cfg.warmup.T0 << " T=" << f->mesh.T;
        else
            header << " mesh=" << f->mesh.kind << " T=" << f->mesh.T << " N=" << f->mesh.N
                   << " gamma=" << f->mesh.gamma << " ratio=" << f->mesh.ratio
                   << " seed=" << f->mesh.seed;
        emit(f->trace_out, [&](std::ostream& os) {
            tfch::write_trace_csv(result.trace, os, header.str());
        });
        if (!result.snapshots.empty())
            std::filesystem::create_directories(f->snapshot_dir);
        for (const auto& [t, field] : result.snapshots) {
            std::ostringstream name;
            name << f->snapshot_dir << "/phi_t" << t << ".csv";
            emit(name.str(), [&](std::ostream& os) { tfch::write_csv(field, os); });
        }
        std::cerr << "levels=" << result.total_levels
                  << " walltime=" << result.trace.walltime_sec << "s";
        if (!result.invariants_ok)
            std::cerr << " INVARIANT FAILURE: " << result.invariant_message;
        std::cerr << '\n';
        if (!result.invariants_ok) f->exit_code = 3;
    });
    return f;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-fractional Cahn-Hilliard tools"};
    app.require_subcommand(1);

    auto* kernels = app.add_subcommand("kernels", "kernel rows and criteria checks");
    auto* eigen = app.add_subcommand("eigen", "minimum-eigenvalue tables");
    auto* converge = app.add_subcommand("converge", "manufactured-solution error sweep");
    auto* simulate = app.add_subcommand("simulate", "coarsening run with energy trace");
    for (CLI::App* sub : {kernels, eigen, converge, simulate})
        sub->set_config("--config", "", "key=value config file; explicit flags win");

    cmd_kernels(kernels);
    cmd_eigen(eigen);
    cmd_converge(converge);
    auto sim = cmd_simulate(simulate);

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return sim->exit_code;
}
