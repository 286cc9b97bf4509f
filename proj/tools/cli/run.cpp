#include "run.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <spdlog/spdlog.h>

#include <refine_sdo/embedding.hpp>
#include <refine_sdo/error.hpp>

#include "sdpa.hpp"

namespace refine_sdo::cli {

using json = nlohmann::ordered_json;

const char* to_string(Command c)
{
    switch (c) {
    case Command::Solve: return "solve";
    case Command::SolveIpm: return "solve-ipm";
    case Command::EmbedOnly: return "embed-only";
    case Command::AnalyzeCondition: return "analyze-condition";
    }
    return "unknown";
}

Scaling parse_scaling(const std::string& s)
{
    if (s == "nt") return Scaling::NT;
    if (s == "hkm") return Scaling::HKM;
    if (s == "aho") return Scaling::AHO;
    fail(ErrorKind::InvalidParameters, "unknown scaling '" + s + "'");
}

SolverChoice parse_solver(const std::string& s)
{
    if (s == "auto") return SolverChoice::Auto;
    if (s == "direct") return SolverChoice::Direct;
    if (s == "iterative") return SolverChoice::Iterative;
    fail(ErrorKind::InvalidParameters, "unknown solver '" + s + "'");
}

IrVariant parse_ir_variant(const std::string& s)
{
    if (s == "feasible") return IrVariant::Feasible;
    if (s == "infeasible-ni") return IrVariant::InfeasibleNI;
    if (s == "infeasible-ii") return IrVariant::InfeasibleII;
    fail(ErrorKind::InvalidParameters, "unknown IR variant '" + s + "'");
}

Form parse_form(const std::string& s)
{
    if (s == "standard") return Form::Standard;
    if (s == "canonical") return Form::Canonical;
    fail(ErrorKind::InvalidParameters, "unknown form '" + s + "'");
}

IpmConfig ipm_config(const RunConfig& cfg)
{
    IpmConfig c;
    if (cfg.gamma) c.gamma = *cfg.gamma;
    if (cfg.delta) c.delta = *cfg.delta;
    if (cfg.beta) c.beta = *cfg.beta;
    c.scaling = cfg.scaling;
    c.solver = cfg.solver;
    c.estimate_condition = cfg.analyze_condition || cfg.command == Command::AnalyzeCondition;
    c.target_eps = cfg.eps_oracle;
    return c;
}

void validate(const RunConfig& cfg)
{
    if (!(cfg.eps_oracle > 0.0 && cfg.eps_oracle < 1.0))
        fail(ErrorKind::InvalidParameters, "--eps-oracle must lie in (0,1)");
    if (!(cfg.eps_final > 0.0 && cfg.eps_final < 1.0))
        fail(ErrorKind::InvalidParameters, "--eps-final must lie in (0,1)");
    if (!(cfg.rho > 1.0))
        fail(ErrorKind::InvalidParameters, "--rho must exceed 1");
    const IpmConfig ipm = ipm_config(cfg);
    if (!(ipm.gamma > 0.0 && ipm.gamma < 1.0))
        fail(ErrorKind::InvalidParameters, "--gamma must lie in (0,1)");
    if (!(ipm.delta > 0.0 && ipm.delta < 1.0))
        fail(ErrorKind::InvalidParameters, "--delta must lie in (0,1)");
    if (cfg.beta && !(*cfg.beta > 0.0 && *cfg.beta < 1.0))
        fail(ErrorKind::InvalidParameters, "--beta must lie in (0,1)");
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

json layout_json(const Layout& layout)
{
    json a = json::array();
    for (int n : layout)
        a.push_back(n);
    return a;
}

json problem_json(const SdoProblem& p)
{
    json j;
    j["form"] = to_string(p.form);
    j["m"] = p.m();
    j["n"] = p.n();
    j["blocks"] = layout_json(p.layout());
    j["svec_dim"] = p.svec_dim();
    j["norm_b"] = p.b.norm();
    j["norm_C"] = p.C.norm();
    return j;
}

json config_json(const RunConfig& cfg, const CheckedConfig* checked)
{
    json j;
    j["command"] = to_string(cfg.command);
    j["input"] = cfg.input;
    j["form"] = to_string(cfg.form);
    j["eps_oracle"] = cfg.eps_oracle;
    j["eps_final"] = cfg.eps_final;
    const IpmConfig ipm = ipm_config(cfg);
    j["gamma"] = ipm.gamma;
    j["delta"] = ipm.delta;
    if (cfg.beta)
        j["beta"] = *cfg.beta;
    else
        j["beta"] = nullptr;
    j["scaling"] = to_string(cfg.scaling);
    j["solver"] = to_string(cfg.solver);
    j["ir"] = to_string(cfg.ir_variant);
    j["rho"] = cfg.rho;
    j["analyze_condition"] = ipm.estimate_condition;
    if (checked) {
        j["embedding_dim"] = checked->dim;
        j["embedding_sigma"] = checked->sigma;
        j["embedding_beta"] = checked->beta;
    }
    return j;
}

json real_or_null(double v)
{
    if (std::isfinite(v))
        return v;
    return nullptr;
}

void append_ipm(json& out, const IterationTrace& trace, const std::string& phase, int call, bool timing)
{
    for (const auto& r : trace.records) {
        json j;
        j["phase"] = phase;
        j["call"] = call;
        j["k"] = r.k;
        j["mu"] = r.mu;
        j["gap"] = r.gap;
        j["distance"] = r.distance;
        j["primal_residual"] = r.primal_residual;
        j["dual_residual"] = r.dual_residual;
        j["step"] = r.step;
        j["halvings"] = r.halvings;
        j["method"] = to_string(r.method);
        j["solver_residual"] = r.solver_residual;
        j["solver_tolerance"] = r.solver_tolerance;
        j["solver_iterations"] = r.solver_iterations;
        j["kappa"] = real_or_null(r.kappa);
        if (timing)
            j["wall_seconds"] = r.wall_seconds;
        out.push_back(std::move(j));
    }
}

json ir_json(const IrRecord& r)
{
    json j;
    j["k"] = r.k;
    j["gap"] = r.gap;
    j["eta"] = r.eta;
    j["eta_log10"] = r.eta_log10;
    j["residual"] = r.residual;
    j["primal_residual"] = r.primal_residual;
    j["dual_residual"] = r.dual_residual;
    j["min_eig_x"] = r.min_eig_x;
    j["min_eig_s"] = r.min_eig_s;
    j["objective_shift"] = r.objective_shift;
    j["oracle_iterations"] = r.oracle_iterations;
    j["oracle_start_mu"] = r.oracle_start_mu;
    j["oracle_retried"] = r.oracle_retried;
    return j;
}

json point_summary(const SdoProblem& prob, const PrimalDualPoint& pt)
{
    const Residuals res = residuals(prob, pt);
    json j;
    j["gap"] = res.gap;
    j["primal_objective"] = prob.C.dot(pt.X);
    j["dual_objective"] = prob.b.dot(pt.y);
    j["primal_residual"] = res.primal_norm();
    j["dual_residual"] = res.dual_norm();
    j["min_eig_x"] = min_eig(pt.X);
    j["min_eig_s"] = min_eig(pt.S);
    json y = json::array();
    for (Eigen::Index i = 0; i < pt.y.size(); ++i)
        y.push_back(pt.y(i));
    j["y"] = std::move(y);
    return j;
}

json condition_table(const IterationTrace& trace)
{
    json t = json::array();
    for (const auto& r : trace.records) {
        if (!std::isfinite(r.kappa))
            continue;
        json row;
        row["k"] = r.k;
        row["mu"] = r.mu;
        row["kappa"] = r.kappa;
        t.push_back(std::move(row));
    }
    return t;
}

// Canonical problem handed to the embedding and the conversion that links it to a standard pair.
struct Pipeline {
    SdoProblem input;
    SdoProblem canonical;
    SdoProblem standard;
    std::optional<Conversion> conversion; // standard ↔ canonical
};

Pipeline make_pipeline(const SdoProblem& input)
{
    Pipeline p;
    p.input = input;
    if (input.form == Form::Standard) {
        Conversion c = standard_to_canonical(input);
        p.canonical = c.target;
        p.standard = input;
        p.conversion = std::move(c);
    } else {
        Conversion c = canonical_to_standard(input);
        p.canonical = input;
        p.standard = c.target;
        p.conversion = std::move(c);
    }
    return p;
}

// Embedding-extracted canonical point expressed on the standard pair.
PrimalDualPoint to_standard(const Pipeline& p, const PrimalDualPoint& canonical_pt)
{
    if (p.input.form == Form::Standard)
        return p.conversion->backward(canonical_pt);
    return p.conversion->forward(canonical_pt);
}

// Standard-pair point expressed on the input problem.
PrimalDualPoint to_input(const Pipeline& p, const PrimalDualPoint& standard_pt)
{
    if (p.input.form == Form::Standard)
        return standard_pt;
    return p.conversion->backward(standard_pt);
}

struct Failure {
    int code;
    std::string kind;
    std::string message;
};

Failure classify(const Error& e)
{
    switch (e.kind()) {
    case ErrorKind::ParseError:
    case ErrorKind::IndexOutOfBlock:
    case ErrorKind::NonSymmetricDuplicate:
        return {InputError, to_string(e.kind()), e.what()};
    case ErrorKind::InvalidParameters:
        return {UsageError, to_string(e.kind()), e.what()};
    default:
        return {SolverFailure, to_string(e.kind()), e.what()};
    }
}

int execute(const RunConfig& cfg, RunLog& log)
{
    const auto t_start = Clock::now();
    validate(cfg);

    SdoProblem input;
    try {
        input = load_sdpa(cfg.input, cfg.form);
        input.validate();
    } catch (const ParseError& e) {
        log.result["status"] = "parse_error";
        log.result["error"] = e.what();
        log.result["line"] = e.line();
        spdlog::error("{}:{}: {}", cfg.input, e.line(), e.reason());
        return InputError;
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::IoError || e.kind() == ErrorKind::DimMismatch ||
            e.kind() == ErrorKind::LayoutMismatch) {
            log.result["status"] = "input_error";
            log.result["error"] = e.what();
            spdlog::error("{}", e.what());
            return InputError;
        }
        throw;
    }
    log.problem = problem_json(input);
    log.timing["parse_seconds"] = seconds_since(t_start);

    const Pipeline pipe = make_pipeline(input);
    const SelfDualProblem emb = build_embedding(pipe.canonical);
    IpmConfig ipm = ipm_config(cfg);
    const CheckedConfig checked = validate_config(ipm, emb.complementarity_dim());
    log.config = config_json(cfg, &checked);
    log.problem["embedding"] = {{"m", emb.m()},
                                {"n", emb.n()},
                                {"complementarity_dim", emb.complementarity_dim()},
                                {"obar", emb.obar},
                                {"norm_bbar", emb.bbar.norm()},
                                {"norm_Cbar", emb.Cbar.norm()}};

    if (cfg.command == Command::EmbedOnly) {
        const SelfDualPoint p0 = initial_point(emb);
        log.result["status"] = "embedded";
        log.result["initial_residual"] = embedding_residuals(emb, p0).norm();
        log.result["initial_mu"] = selfdual_mu(emb, p0);
        log.result["initial_distance"] = selfdual_distance(emb, p0);
        return Success;
    }

    if (cfg.command == Command::SolveIpm)
        ipm.target_eps = cfg.eps_final;
    const auto t_emb = Clock::now();
    const SelfDualIpmResult sd = ipm_solve_selfdual(emb, ipm);
    log.timing["embedding_seconds"] = seconds_since(t_emb);
    append_ipm(log.ipm_iterations, sd.trace, "embedding", 0, cfg.timing);

    const Outcome outcome = extract_solution(sd.point, std::sqrt(cfg.eps_final));
    log.result["embedding"] = {{"outcome", to_string(outcome.kind)},
                               {"tau", outcome.tau},
                               {"phi", outcome.phi},
                               {"iterations", sd.trace.iterations()}};

    if (cfg.command == Command::AnalyzeCondition) {
        log.extra["condition"] = condition_table(sd.trace);
        log.result["status"] = "analyzed";
        return Success;
    }
    if (outcome.kind != OutcomeKind::Optimal) {
        log.result["status"] = outcome.kind == OutcomeKind::ImprovingRay ? "infeasible" : "no_complementary_pair";
        spdlog::error("embedding run ended with outcome {}", to_string(outcome.kind));
        return SolverFailure;
    }

    const PrimalDualPoint approx = to_standard(pipe, outcome.point);
    if (cfg.command == Command::SolveIpm) {
        log.result["status"] = "optimal";
        log.result["solution"] = point_summary(input, to_input(pipe, approx));
        return Success;
    }

    const auto t_rest = Clock::now();
    const ConstraintBasis basis = make_constraint_basis(pipe.standard);
    const RestoreResult restored =
        restore_feasible_center(pipe.standard, basis, approx, cfg.scaling, ipm.gamma / 2.0);
    log.timing["restoration_seconds"] = seconds_since(t_rest);
    log.result["restoration"] = {{"iterations", restored.iterations},
                                 {"distance", restored.distance},
                                 {"primal_residual", restored.primal_residual},
                                 {"dual_residual", restored.dual_residual}};

    IrOptions opt;
    opt.eps_oracle = cfg.eps_oracle;
    opt.eps_final = cfg.eps_final;
    opt.rho = cfg.rho;
    const Oracle oracle = make_ifipm_oracle(ipm);
    const auto t_ir = Clock::now();
    IrResult ir;
    switch (cfg.ir_variant) {
    case IrVariant::Feasible: ir = ir_feasible(pipe.standard, restored.point, opt, oracle); break;
    case IrVariant::InfeasibleNI: ir = ir_infeasible_ni(pipe.standard, restored.point, opt, oracle); break;
    case IrVariant::InfeasibleII: ir = ir_infeasible_ii(pipe.standard, restored.point, opt, oracle); break;
    }
    log.timing["refinement_seconds"] = seconds_since(t_ir);
    for (std::size_t c = 0; c < ir.oracle_traces.size(); ++c)
        append_ipm(log.ipm_iterations, ir.oracle_traces[c], "oracle", static_cast<int>(c), cfg.timing);
    for (const auto& r : ir.trace.records)
        log.ir_iterations.push_back(ir_json(r));

    log.result["status"] = "optimal";
    log.result["ir_outer_iterations"] = ir.trace.outer_iterations();
    log.result["final_residual"] = ir.trace.records.back().residual;
    log.result["solution"] = point_summary(input, to_input(pipe, ir.point));
    if (cfg.analyze_condition)
        log.extra["condition"] = condition_table(sd.trace);
    return Success;
}

} // namespace

RunOutcome run(const RunConfig& cfg)
{
    RunOutcome out;
    out.log.config = config_json(cfg, nullptr);
    const auto t0 = Clock::now();
    try {
        out.exit_code = execute(cfg, out.log);
    } catch (const Error& e) {
        const Failure f = classify(e);
        out.exit_code = f.code;
        out.log.result["status"] = "error";
        out.log.result["error_kind"] = f.kind;
        out.log.result["error"] = f.message;
        spdlog::error("{}", f.message);
    } catch (const std::exception& e) {
        out.exit_code = SolverFailure;
        out.log.result["status"] = "error";
        out.log.result["error"] = e.what();
        spdlog::error("{}", e.what());
    }
    out.log.result["exit_code"] = out.exit_code;
    out.log.timing["total_seconds"] = seconds_since(t0);
    return out;
}

json emit_trace(const RunLog& log, bool timing)
{
    json j;
    j["config"] = log.config;
    j["problem"] = log.problem;
    j["ipm_iterations"] = log.ipm_iterations;
    j["ir_iterations"] = log.ir_iterations;
    j["result"] = log.result;
    for (const auto& [key, value] : log.extra.items())
        j[key] = value;
    if (timing)
        j["timing"] = log.timing;
    return j;
}

void write_atomic(const std::string& path, const std::string& contents)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            fail(ErrorKind::IoError, "cannot open '" + tmp.string() + "' for writing");
        out << contents;
        out.flush();
        if (!out)
            fail(ErrorKind::IoError, "cannot write '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        fail(ErrorKind::IoError, "cannot rename onto '" + path + "'");
    }
}

} // namespace refine_sdo::cli
