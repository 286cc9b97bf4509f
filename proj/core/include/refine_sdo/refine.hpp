#pragma once

#include <functional>
#include <vector>

#include "refine_sdo/ifipm.hpp"
#include "refine_sdo/model.hpp"

namespace refine_sdo {

enum class IrVariant { Feasible, InfeasibleNI, InfeasibleII };

const char* to_string(IrVariant v);

// Positive real kept as mantissa·2^exponent so growth past the double range is detected.
class ScaleFactor {
public:
    ScaleFactor() = default;
    static ScaleFactor of(double v);

    ScaleFactor times(double v) const;
    ScaleFactor reciprocal() const;
    double log10() const;
    // Throws InvalidParameters when the value is outside the double range.
    double value() const;

    friend bool operator<(const ScaleFactor& a, const ScaleFactor& b) { return a.log2() < b.log2(); }
    friend ScaleFactor min(const ScaleFactor& a, const ScaleFactor& b) { return b < a ? b : a; }

private:
    double log2() const;

    double mantissa_ = 0.5; // in [0.5, 1)
    long exponent_ = 1;
};

// Refining pair around an anchor point, with its standard-form image
//   min η(C − Σy_iA_i)•X̂  s.t.  A_i•X̂ = ηb_i, X̂ ⪰ 0,
// obtained from X̂ = X̄ + ηX, ŷ = ȳ, Ŝ = S̄ (+ ηS in the interior variant).
struct RefiningProblem {
    IrVariant variant = IrVariant::Feasible;
    ScaleFactor eta;
    double eta_value = 1.0;
    Vec rhs_shift;             // ηb̄ (zero for the feasible variant)
    SymMat objective;          // ηS, or η(C̄ + S) in the interior variant
    double objective_constant = 0.0; // −η·(objective•X), dropped from the image
    PrimalDualPoint anchor;
    SdoProblem image;

    // Shift (X̄, ȳ, S̄) of a solution of the image.
    PrimalDualPoint correction(const PrimalDualPoint& hat) const;
    // Anchor + correction/η, with the dual slack handled per variant.
    PrimalDualPoint update(const SdoProblem& prob, const PrimalDualPoint& hat) const;
};

// S = C − Σy_iA_i.
SymMat dual_slack(const SdoProblem& prob, const Vec& y);

RefiningProblem build_refining_feasible(const SdoProblem& prob, const PrimalDualPoint& pt, ScaleFactor eta);
RefiningProblem build_refining_in(const SdoProblem& prob, const PrimalDualPoint& pt, ScaleFactor eta);
RefiningProblem build_refining_ii(const SdoProblem& prob, const PrimalDualPoint& pt, ScaleFactor eta);

enum class WarmStart { RefPoint, CurrentPoint };

// RefPoint: (ηX̊, η(ẙ − y), ηS̊). CurrentPoint: (ηX, 0, ηS).
PrimalDualPoint warm_start(WarmStart choice, const RefiningProblem& rp, const PrimalDualPoint& interior_ref);

// max{max_i|b̄_i|, X•S, max{−e_min(X),0}, max{−e_min(S),0}} with S = C − Σy_iA_i.
double residual_in(const SdoProblem& prob, const PrimalDualPoint& pt);
// max{max_i|b̄_i|, X•S, ‖C − Σy_iA_i − S‖_F}.
double residual_ii(const SdoProblem& prob, const PrimalDualPoint& pt);

bool in_pd_eps_in(const SdoProblem& prob, const PrimalDualPoint& pt, double eps);
bool in_pd_eps_ii(const SdoProblem& prob, const PrimalDualPoint& pt, double eps);

struct OracleRequest {
    const SdoProblem& problem;
    const PrimalDualPoint& warm_start;
    double eps;
    bool force_direct;
};

struct OracleResult {
    PrimalDualPoint point;
    IterationTrace trace;
};

using Oracle = std::function<OracleResult(const OracleRequest&)>;

// Short-step IPM oracle. With rescale, each call first applies the congruence
// A_i ↦ TA_iT, C ↦ TCT with T = W^{1/2} for the NT point W of the warm start,
// which maps the warm start to a perfectly conditioned pair.
Oracle make_ifipm_oracle(const IpmConfig& cfg, bool rescale = true);

struct IrOptions {
    double eps_oracle = 1e-2;
    double eps_final = 1e-8;
    double rho = 10.0;
    WarmStart warm = WarmStart::CurrentPoint;
    int max_outer = 60;
};

// One oracle call. k = 0 is the initial solve; k ≥ 1 are refinements.
struct IrRecord {
    int k = 0;
    double gap = 0.0;
    double eta = 1.0;
    double eta_log10 = 0.0;
    double residual = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double min_eig_x = 0.0;
    double min_eig_s = 0.0;
    double objective_shift = 0.0;
    int oracle_iterations = 0;
    double oracle_start_mu = 0.0;
    bool oracle_retried = false;
};

struct IrTrace {
    IrVariant variant = IrVariant::Feasible;
    std::vector<IrRecord> records;

    int outer_iterations() const { return records.empty() ? 0 : static_cast<int>(records.size()) - 1; }
};

struct IrResult {
    PrimalDualPoint point;
    IrTrace trace;
    std::vector<IterationTrace> oracle_traces;
};

// Iterative refinement from a strictly feasible start.
IrResult ir_feasible(const SdoProblem& prob, const PrimalDualPoint& start, const IrOptions& opt,
                     const Oracle& oracle);

// Infeasible non-interior refinement; reference is a strictly feasible interior point
// used for the initial solve and the RefPoint warm starts.
IrResult ir_infeasible_ni(const SdoProblem& prob, const PrimalDualPoint& reference, const IrOptions& opt,
                          const Oracle& oracle);

// Infeasible interior refinement (dual slack carried, not recomputed).
IrResult ir_infeasible_ii(const SdoProblem& prob, const PrimalDualPoint& reference, const IrOptions& opt,
                          const Oracle& oracle);

} // namespace refine_sdo
