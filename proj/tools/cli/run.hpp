#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include <refine_sdo/ifipm.hpp>
#include <refine_sdo/refine.hpp>

namespace refine_sdo::cli {

enum class Command { Solve, SolveIpm, EmbedOnly, AnalyzeCondition };

const char* to_string(Command c);

struct RunConfig {
    Command command = Command::Solve;
    std::string input;
    Form form = Form::Standard;
    double eps_oracle = 1e-2;
    double eps_final = 1e-8;
    std::optional<double> gamma;
    std::optional<double> delta;
    std::optional<double> beta;
    Scaling scaling = Scaling::NT;
    SolverChoice solver = SolverChoice::Auto;
    IrVariant ir_variant = IrVariant::Feasible;
    double rho = 10.0;
    std::string trace_out; // empty: JSON goes to standard output
    bool analyze_condition = false;
    bool timing = true; // false gives byte-identical logs across runs
};

enum ExitCode { Success = 0, UsageError = 1, SolverFailure = 2, InputError = 3 };

// Range checks that need no problem data. Throws InvalidParameters.
void validate(const RunConfig& cfg);

IpmConfig ipm_config(const RunConfig& cfg);

struct RunLog {
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    nlohmann::ordered_json problem = nlohmann::ordered_json::object();
    nlohmann::ordered_json ipm_iterations = nlohmann::ordered_json::array();
    nlohmann::ordered_json ir_iterations = nlohmann::ordered_json::array();
    nlohmann::ordered_json result = nlohmann::ordered_json::object();
    nlohmann::ordered_json timing = nlohmann::ordered_json::object();
    nlohmann::ordered_json extra = nlohmann::ordered_json::object(); // command-specific sections
};

struct RunOutcome {
    int exit_code = Success;
    RunLog log;
};

// Executes the command. Never throws for solver or input failures; they are reported
// through the exit code and the result section.
RunOutcome run(const RunConfig& cfg);

nlohmann::ordered_json emit_trace(const RunLog& log, bool timing);

// Writes to path.tmp, then renames. Throws IoError.
void write_atomic(const std::string& path, const std::string& contents);

Scaling parse_scaling(const std::string& s);
SolverChoice parse_solver(const std::string& s);
IrVariant parse_ir_variant(const std::string& s);
Form parse_form(const std::string& s);

} // namespace refine_sdo::cli
