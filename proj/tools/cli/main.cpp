#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <refine_sdo/error.hpp>

#include "run.hpp"

namespace {

void setup_logging()
{
    auto logger = spdlog::stderr_color_mt("refine-sdo");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("REFINE_SDO_LOG")) {
        const auto level = spdlog::level::from_str(env);
        if (level == spdlog::level::off && std::string(env) != "off")
            spdlog::warn("REFINE_SDO_LOG='{}' not recognized; using warn", env);
        else
            spdlog::set_level(level);
    }
}

struct Options {
    std::string input;
    std::string form = "standard";
    double eps_oracle = 1e-2;
    double eps_final = 1e-8;
    std::optional<double> gamma;
    std::optional<double> delta;
    std::optional<double> beta;
    std::string scaling = "nt";
    std::string solver = "auto";
    std::string ir = "feasible";
    double rho = 10.0;
    std::string trace_out;
    bool analyze_condition = false;
    bool no_timing = false;
};

void add_options(CLI::App* cmd, Options& o)
{
    cmd->add_option("input", o.input, "SDPA sparse (.dat-s) file")->required();
    cmd->add_option("--form", o.form, "Read constraints as equalities (standard) or A_i•X ≥ b_i (canonical)")
        ->check(CLI::IsMember({"standard", "canonical"}));
    cmd->add_option("--eps-oracle", o.eps_oracle, "Oracle precision");
    cmd->add_option("--eps-final", o.eps_final, "Final precision");
    cmd->add_option("--gamma", o.gamma, "Neighborhood radius");
    cmd->add_option("--delta", o.delta, "Centering parameter, σ = 1 − δ/√N");
    cmd->add_option("--beta", o.beta, "Newton residual bound factor");
    cmd->add_option("--scaling", o.scaling, "Search direction")->check(CLI::IsMember({"nt", "hkm", "aho"}));
    cmd->add_option("--solver", o.solver, "Newton system solver")
        ->check(CLI::IsMember({"auto", "direct", "iterative"}));
    cmd->add_option("--ir", o.ir, "Refinement variant")
        ->check(CLI::IsMember({"feasible", "infeasible-ni", "infeasible-ii"}));
    cmd->add_option("--rho", o.rho, "Growth cap of η in the infeasible variants");
    cmd->add_option("--trace-out", o.trace_out, "JSON run log path (standard output when omitted)");
    cmd->add_flag("--analyze-condition", o.analyze_condition, "Record κ(M) at every IPM iteration");
    cmd->add_flag("--no-timing", o.no_timing, "Omit wall-clock fields so logs compare byte for byte");
}

} // namespace

int main(int argc, char** argv)
{
    using namespace refine_sdo;
    setup_logging();

    CLI::App app{"Iterative refinement for semidefinite optimization"};
    app.require_subcommand(1);
    Options opt;
    struct Sub {
        const char* name;
        const char* help;
        cli::Command command;
    };
    const Sub subs[] = {
        {"solve", "Embedding start, then iterative refinement to --eps-final", cli::Command::Solve},
        {"solve-ipm", "Embedding IPM alone to --eps-final", cli::Command::SolveIpm},
        {"embed-only", "Build the self-dual embedding and report its data", cli::Command::EmbedOnly},
        {"analyze-condition", "Embedding IPM with κ(M) recorded per iteration", cli::Command::AnalyzeCondition},
    };
    cli::Command command = cli::Command::Solve;
    for (const auto& s : subs) {
        CLI::App* cmd = app.add_subcommand(s.name, s.help);
        add_options(cmd, opt);
        cmd->callback([&command, c = s.command] { command = c; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::UsageError;
    }

    cli::RunConfig cfg;
    try {
        cfg.command = command;
        cfg.input = opt.input;
        cfg.form = cli::parse_form(opt.form);
        cfg.eps_oracle = opt.eps_oracle;
        cfg.eps_final = opt.eps_final;
        cfg.gamma = opt.gamma;
        cfg.delta = opt.delta;
        cfg.beta = opt.beta;
        cfg.scaling = cli::parse_scaling(opt.scaling);
        cfg.solver = cli::parse_solver(opt.solver);
        cfg.ir_variant = cli::parse_ir_variant(opt.ir);
        cfg.rho = opt.rho;
        cfg.trace_out = opt.trace_out;
        cfg.analyze_condition = opt.analyze_condition;
        cfg.timing = !opt.no_timing;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return cli::UsageError;
    }

    cli::RunOutcome out = cli::run(cfg);
    const std::string doc = cli::emit_trace(out.log, cfg.timing).dump(2) + "\n";
    if (cfg.trace_out.empty()) {
        std::cout << doc;
    } else {
        try {
            cli::write_atomic(cfg.trace_out, doc);
        } catch (const Error& e) {
            spdlog::error("{}", e.what());
            return out.exit_code == cli::Success ? cli::UsageError : out.exit_code;
        }
    }
    const auto& res = out.log.result;
    if (out.exit_code == cli::Success && res.contains("solution"))
        spdlog::info("gap {:.3e}, primal objective {:.12g}", res["solution"]["gap"].get<double>(),
                     res["solution"]["primal_objective"].get<double>());
    return out.exit_code;
}
