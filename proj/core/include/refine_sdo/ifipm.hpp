#pragma once

#include <limits>
#include <vector>

#include "refine_sdo/embedding.hpp"
#include "refine_sdo/model.hpp"
#include "refine_sdo/newton.hpp"
#include "refine_sdo/solvers.hpp"

namespace refine_sdo {

enum class SolverChoice { Auto, Direct, Iterative };

const char* to_string(SolverChoice s);

struct IpmConfig {
    double gamma = 0.1;
    double delta = 0.04;
    double beta = 0.0; // 0 selects half of the largest value admitted by both bounds
    Scaling scaling = Scaling::NT;
    SolverChoice solver = SolverChoice::Auto;
    int iterative_threshold = 400; // Auto uses the iterative solver above this system size
    int max_iterations = 200000;
    double target_eps = 1e-2;
    bool estimate_condition = false;
    bool check_neighborhood = true;
};

struct CheckedConfig {
    IpmConfig cfg;
    int dim = 0;       // complementarity dimension N
    double sigma = 0.0; // 1 − δ/√N
    double beta = 0.0;
};

// Largest β allowed by β ≤ 1 − γ/√N − 21.7(γ²+δ²)/((2+√2)(1−δ/√N)γ(1−γ)).
double beta_upper_bound(double gamma, double delta, int dim);

// Checks the three short-step parameter inequalities. Throws InvalidParameters.
CheckedConfig validate_config(const IpmConfig& cfg, int dim);

// ⌈(√N/δ)·ln(Nμ⁰/ε)⌉.
int iteration_bound(int dim, double delta, double mu0, double eps);

struct IterationRecord {
    int k = 0;
    double mu = 0.0;
    double gap = 0.0;
    double distance = 0.0; // neighborhood distance divided by μ
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double step = 1.0;
    int halvings = 0;
    SolveMethod method = SolveMethod::Direct;
    double solver_residual = 0.0;
    double solver_tolerance = 0.0;
    int solver_iterations = 0;
    double kappa = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0.0;
};

// records[0] describes the start point.
struct IterationTrace {
    int dim = 0;
    double sigma = 0.0;
    double beta = 0.0;
    std::vector<IterationRecord> records;

    int iterations() const { return records.empty() ? 0 : static_cast<int>(records.size()) - 1; }
};

struct IpmResult {
    PrimalDualPoint point;
    IterationTrace trace;
};

struct SelfDualIpmResult {
    SelfDualPoint point;
    IterationTrace trace;
};

// Short-step IPM on a standard-form problem from a strictly feasible start in N_F(γ).
// Stops at the first iterate with N·μ ≤ cfg.target_eps.
IpmResult ipm_solve_standard(const SdoProblem& prob, const ConstraintBasis& basis, const PrimalDualPoint& start,
                             const IpmConfig& cfg);
IpmResult ipm_solve_standard(const SdoProblem& prob, const PrimalDualPoint& start, const IpmConfig& cfg);

// Short-step IPM on the embedding from its built-in centered start.
SelfDualIpmResult ipm_solve_selfdual(const SelfDualProblem& emb, const IpmConfig& cfg);

struct RestoreResult {
    PrimalDualPoint point;
    int iterations = 0;
    double distance = 0.0; // relative to μ
    double primal_residual = 0.0;
    double dual_residual = 0.0;
};

// Damped Newton steps that remove primal and dual residuals at fixed μ, then centering
// steps until the relative neighborhood distance is at most target_distance.
RestoreResult restore_feasible_center(const SdoProblem& prob, const ConstraintBasis& basis,
                                      const PrimalDualPoint& approx, Scaling scaling, double target_distance,
                                      int max_iterations = 200);

} // namespace refine_sdo
