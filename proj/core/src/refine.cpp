#include "refine_sdo/refine.hpp"

#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "refine_sdo/error.hpp"

namespace refine_sdo {

const char* to_string(IrVariant v)
{
    switch (v) {
    case IrVariant::Feasible: return "feasible";
    case IrVariant::InfeasibleNI: return "infeasible-ni";
    case IrVariant::InfeasibleII: return "infeasible-ii";
    }
    return "unknown";
}

// ---- ScaleFactor ----

ScaleFactor ScaleFactor::of(double v)
{
    if (!(v > 0.0) || !std::isfinite(v))
        fail(ErrorKind::InvalidParameters, "ScaleFactor: value must be positive and finite");
    ScaleFactor s;
    int e = 0;
    s.mantissa_ = std::frexp(v, &e);
    s.exponent_ = e;
    return s;
}

ScaleFactor ScaleFactor::times(double v) const
{
    ScaleFactor s = of(mantissa_ * v);
    s.exponent_ += exponent_;
    return s;
}

ScaleFactor ScaleFactor::reciprocal() const
{
    ScaleFactor s = of(1.0 / mantissa_);
    s.exponent_ -= exponent_;
    return s;
}

double ScaleFactor::log2() const { return std::log2(mantissa_) + static_cast<double>(exponent_); }

double ScaleFactor::log10() const { return log2() * std::log10(2.0); }

double ScaleFactor::value() const
{
    if (exponent_ > std::numeric_limits<double>::max_exponent ||
        exponent_ < std::numeric_limits<double>::min_exponent) {
        std::ostringstream msg;
        msg << "scale factor 10^" << log10() << " is outside the double range";
        fail(ErrorKind::InvalidParameters, msg.str());
    }
    return std::ldexp(mantissa_, static_cast<int>(exponent_));
}

// ---- refining problems ----

SymMat dual_slack(const SdoProblem& prob, const Vec& y)
{
    return prob.C - prob.apply_adjoint(y);
}

namespace {

RefiningProblem build_common(IrVariant variant, const SdoProblem& prob, const PrimalDualPoint& pt, ScaleFactor eta)
{
    if (prob.form != Form::Standard)
        fail(ErrorKind::FormError, "refining problems are built on standard-form problems");
    RefiningProblem rp;
    rp.variant = variant;
    rp.eta = eta;
    rp.eta_value = eta.value();
    rp.anchor = pt;
    const double e = rp.eta_value;

    const SymMat s_dual = dual_slack(prob, pt.y); // C − Σy_iA_i
    if (variant == IrVariant::InfeasibleII)
        rp.objective = e * s_dual; // η(C̄ + S)
    else
        rp.objective = e * ((variant == IrVariant::Feasible) ? pt.S : s_dual);
    if (variant == IrVariant::Feasible)
        rp.rhs_shift = Vec::Zero(prob.m());
    else
        rp.rhs_shift = e * (prob.b - prob.apply(pt.X));
    rp.objective_constant = -e * rp.objective.dot(pt.X);

    rp.image.form = Form::Standard;
    rp.image.A = prob.A;
    rp.image.b = e * prob.b;
    rp.image.C = rp.objective;
    return rp;
}

} // namespace

RefiningProblem build_refining_feasible(const SdoProblem& prob, const PrimalDualPoint& pt, ScaleFactor eta)
{
    if (!is_positive_definite(pt.X) || !is_positive_definite(pt.S))
        fail(ErrorKind::NotStrictlyFeasible, "build_refining_feasible: anchor point is not interior");
    return build_common(IrVariant::Feasible, prob, pt, eta);
}

RefiningProblem build_refining_in(const SdoProblem& prob, const PrimalDualPoint& pt, ScaleFactor eta)
{
    return build_common(IrVariant::InfeasibleNI, prob, pt, eta);
}

RefiningProblem build_refining_ii(const SdoProblem& prob, const PrimalDualPoint& pt, ScaleFactor eta)
{
    return build_common(IrVariant::InfeasibleII, prob, pt, eta);
}

PrimalDualPoint RefiningProblem::correction(const PrimalDualPoint& hat) const
{
    PrimalDualPoint c;
    c.X = hat.X - eta_value * anchor.X;
    c.y = hat.y;
    c.S = (variant == IrVariant::InfeasibleII) ? hat.S - eta_value * anchor.S : hat.S;
    return c;
}

PrimalDualPoint RefiningProblem::update(const SdoProblem& prob, const PrimalDualPoint& hat) const
{
    const double inv = 1.0 / eta_value;
    PrimalDualPoint next;
    next.X = anchor.X + inv * (hat.X - eta_value * anchor.X);
    next.y = anchor.y + inv * hat.y;
    if (variant == IrVariant::InfeasibleII)
        next.S = anchor.S + inv * (hat.S - eta_value * anchor.S);
    else
        next.S = dual_slack(prob, next.y);
    return next;
}

PrimalDualPoint warm_start(WarmStart choice, const RefiningProblem& rp, const PrimalDualPoint& interior_ref)
{
    const double e = rp.eta_value;
    PrimalDualPoint w;
    if (choice == WarmStart::CurrentPoint) {
        if (!is_positive_definite(rp.anchor.X) || !is_positive_definite(rp.anchor.S))
            fail(ErrorKind::NotStrictlyFeasible, "warm_start: current point is not interior");
        w.X = e * rp.anchor.X;
        w.y = Vec::Zero(rp.anchor.y.size());
        w.S = e * rp.anchor.S;
    } else {
        if (!is_positive_definite(interior_ref.X) || !is_positive_definite(interior_ref.S))
            fail(ErrorKind::NotStrictlyFeasible, "warm_start: reference point is not interior");
        w.X = e * interior_ref.X;
        w.y = e * (interior_ref.y - rp.anchor.y);
        w.S = e * interior_ref.S;
    }
    return w;
}

// ---- residual measures ----

double residual_in(const SdoProblem& prob, const PrimalDualPoint& pt)
{
    const SymMat s = dual_slack(prob, pt.y);
    const Vec bbar = prob.b - prob.apply(pt.X);
    double r = bbar.size() ? bbar.cwiseAbs().maxCoeff() : 0.0;
    r = std::max(r, pt.X.dot(s));
    r = std::max(r, std::max(-min_eig(pt.X), 0.0));
    r = std::max(r, std::max(-min_eig(s), 0.0));
    return r;
}

double residual_ii(const SdoProblem& prob, const PrimalDualPoint& pt)
{
    const Vec bbar = prob.b - prob.apply(pt.X);
    const SymMat cbar = dual_slack(prob, pt.y) - pt.S;
    double r = bbar.size() ? bbar.cwiseAbs().maxCoeff() : 0.0;
    r = std::max(r, pt.X.dot(pt.S));
    r = std::max(r, cbar.norm());
    return r;
}

bool in_pd_eps_in(const SdoProblem& prob, const PrimalDualPoint& pt, double eps)
{
    const SymMat s = dual_slack(prob, pt.y);
    const Vec bbar = prob.b - prob.apply(pt.X);
    const bool primal = bbar.size() == 0 || bbar.cwiseAbs().maxCoeff() <= eps;
    return primal && pt.X.dot(s) <= eps && min_eig(pt.X) >= -eps && min_eig(s) >= -eps;
}

bool in_pd_eps_ii(const SdoProblem& prob, const PrimalDualPoint& pt, double eps)
{
    const Vec bbar = prob.b - prob.apply(pt.X);
    const SymMat cbar = dual_slack(prob, pt.y) - pt.S;
    const bool primal = bbar.size() == 0 || bbar.cwiseAbs().maxCoeff() <= eps;
    return primal && cbar.norm() <= eps && pt.X.dot(pt.S) <= eps && min_eig(pt.X) >= 0.0 && min_eig(pt.S) >= 0.0;
}

// ---- oracle ----

Oracle make_ifipm_oracle(const IpmConfig& cfg, bool rescale)
{
    return [cfg, rescale](const OracleRequest& req) {
        IpmConfig c = cfg;
        c.target_eps = req.eps;
        if (req.force_direct)
            c.solver = SolverChoice::Direct;
        if (!rescale) {
            IpmResult r = ipm_solve_standard(req.problem, req.warm_start, c);
            return OracleResult{std::move(r.point), std::move(r.trace)};
        }
        const PrimalDualPoint& w = req.warm_start;
        const SymMat nt = nt_scaling_point(w.X, w.S);
        const SymMat t = sqrtm(nt, 0.0);
        const SymMat ti = invsqrtm(nt, 0.0);

        SdoProblem scaled;
        scaled.form = Form::Standard;
        scaled.b = req.problem.b;
        scaled.C = congruence(req.problem.C, t);
        scaled.A.reserve(req.problem.A.size());
        for (const auto& a : req.problem.A)
            scaled.A.push_back(congruence(a, t));
        const PrimalDualPoint start{congruence(w.X, ti), w.y, congruence(w.S, t), Vec()};

        IpmResult r = ipm_solve_standard(scaled, start, c);
        PrimalDualPoint back{congruence(r.point.X, t), r.point.y, congruence(r.point.S, ti), Vec()};
        return OracleResult{std::move(back), std::move(r.trace)};
    };
}

// ---- outer loops ----

namespace {

struct OracleCall {
    OracleResult result;
    bool retried = false;
};

// Gap reported by the oracle in its own coordinates; recomputing X•S after the
// back-transformation loses digits once X and S are of size η.
double reported_gap(const OracleResult& r)
{
    if (!r.trace.records.empty())
        return r.trace.records.back().gap;
    return r.point.X.dot(r.point.S);
}

OracleCall call_oracle(const Oracle& oracle, const SdoProblem& problem, const PrimalDualPoint& warm, double eps)
{
    OracleCall out;
    try {
        out.result = oracle(OracleRequest{problem, warm, eps, false});
        if (reported_gap(out.result) <= eps)
            return out;
        spdlog::warn("oracle returned gap {:.3e} above {:.3e}; retrying with the direct solver",
                     reported_gap(out.result), eps);
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidParameters || e.kind() == ErrorKind::FormError ||
            e.kind() == ErrorKind::NotStrictlyFeasible)
            throw;
        spdlog::warn("oracle failed ({}); retrying with the direct solver", e.what());
    }
    out.retried = true;
    out.result = oracle(OracleRequest{problem, warm, eps, true});
    const double gap = reported_gap(out.result);
    if (gap > eps) {
        std::ostringstream msg;
        msg << "oracle returned gap " << gap << " above the requested " << eps;
        fail(ErrorKind::OracleFailure, msg.str());
    }
    return out;
}

IrRecord make_record(int k, const SdoProblem& prob, const PrimalDualPoint& pt, double residual,
                     const OracleCall& call, const RefiningProblem* rp)
{
    IrRecord r;
    r.k = k;
    r.gap = pt.X.dot(pt.S);
    r.residual = residual;
    const Residuals res = residuals(prob, pt);
    r.primal_residual = res.primal_norm();
    r.dual_residual = res.dual_norm();
    r.min_eig_x = min_eig(pt.X);
    r.min_eig_s = min_eig(pt.S);
    r.oracle_iterations = call.result.trace.iterations();
    r.oracle_start_mu = call.result.trace.records.empty() ? 0.0 : call.result.trace.records.front().mu;
    r.oracle_retried = call.retried;
    if (rp) {
        r.eta = rp->eta_value;
        r.eta_log10 = rp->eta.log10();
        r.objective_shift = rp->objective_constant;
    }
    return r;
}

void check_options(const IrOptions& opt)
{
    if (!(opt.eps_oracle > 0.0 && opt.eps_oracle < 1.0))
        fail(ErrorKind::InvalidParameters, "eps_oracle must lie in (0,1)");
    if (!(opt.eps_final > 0.0))
        fail(ErrorKind::InvalidParameters, "eps_final must be positive");
    if (!(opt.rho > 1.0))
        fail(ErrorKind::InvalidParameters, "rho must exceed 1");
}

void check_outer(int k, const IrOptions& opt)
{
    if (k >= opt.max_outer) {
        std::ostringstream msg;
        msg << "iterative refinement: " << k << " outer iterations without reaching " << opt.eps_final;
        fail(ErrorKind::MaxIterations, msg.str());
    }
}

} // namespace

IrResult ir_feasible(const SdoProblem& prob, const PrimalDualPoint& start, const IrOptions& opt,
                     const Oracle& oracle)
{
    check_options(opt);
    if (!is_positive_definite(start.X) || !is_positive_definite(start.S))
        fail(ErrorKind::NotStrictlyFeasible, "ir_feasible: start point is not interior");

    IrResult out;
    out.trace.variant = IrVariant::Feasible;
    OracleCall call = call_oracle(oracle, prob, start, opt.eps_oracle);
    PrimalDualPoint pt = call.result.point;
    pt.S = dual_slack(prob, pt.y);
    double gap = pt.X.dot(pt.S);
    out.trace.records.push_back(make_record(0, prob, pt, gap, call, nullptr));
    out.oracle_traces.push_back(std::move(call.result.trace));

    int k = 0;
    while (gap > opt.eps_final) {
        check_outer(k, opt);
        ++k;
        const RefiningProblem rp = build_refining_feasible(prob, pt, ScaleFactor::of(1.0 / gap));
        const PrimalDualPoint warm = warm_start(opt.warm, rp, start);
        call = call_oracle(oracle, rp.image, warm, opt.eps_oracle);
        pt = rp.update(prob, call.result.point);
        gap = pt.X.dot(pt.S);
        out.trace.records.push_back(make_record(k, prob, pt, gap, call, &rp));
        out.oracle_traces.push_back(std::move(call.result.trace));
        spdlog::info("refinement {}: eta = {:.3e}, gap = {:.3e}", k, rp.eta_value, gap);
    }
    out.point = std::move(pt);
    return out;
}

namespace {

IrResult ir_infeasible(IrVariant variant, const SdoProblem& prob, const PrimalDualPoint& reference,
                       const IrOptions& opt, const Oracle& oracle)
{
    check_options(opt);
    const bool interior = variant == IrVariant::InfeasibleII;
    auto residual = [&](const PrimalDualPoint& p) {
        return interior ? residual_ii(prob, p) : residual_in(prob, p);
    };

    IrResult out;
    out.trace.variant = variant;
    OracleCall call = call_oracle(oracle, prob, reference, opt.eps_oracle);
    PrimalDualPoint pt = call.result.point;
    if (!interior)
        pt.S = dual_slack(prob, pt.y);
    double r = residual(pt);
    out.trace.records.push_back(make_record(0, prob, pt, r, call, nullptr));
    out.oracle_traces.push_back(std::move(call.result.trace));

    ScaleFactor eta = ScaleFactor::of(1.0);
    int k = 0;
    while (r > opt.eps_final) {
        check_outer(k, opt);
        ++k;
        eta = min(ScaleFactor::of(r).reciprocal(), eta.times(opt.rho));
        const RefiningProblem rp =
            interior ? build_refining_ii(prob, pt, eta) : build_refining_in(prob, pt, eta);
        const PrimalDualPoint warm = warm_start(WarmStart::RefPoint, rp, reference);
        call = call_oracle(oracle, rp.image, warm, opt.eps_oracle);
        pt = rp.update(prob, call.result.point);
        r = residual(pt);
        out.trace.records.push_back(make_record(k, prob, pt, r, call, &rp));
        out.oracle_traces.push_back(std::move(call.result.trace));
        spdlog::info("refinement {}: eta = {:.3e}, residual = {:.3e}", k, rp.eta_value, r);
    }
    out.point = std::move(pt);
    return out;
}

} // namespace

IrResult ir_infeasible_ni(const SdoProblem& prob, const PrimalDualPoint& reference, const IrOptions& opt,
                          const Oracle& oracle)
{
    return ir_infeasible(IrVariant::InfeasibleNI, prob, reference, opt, oracle);
}

IrResult ir_infeasible_ii(const SdoProblem& prob, const PrimalDualPoint& reference, const IrOptions& opt,
                          const Oracle& oracle)
{
    return ir_infeasible(IrVariant::InfeasibleII, prob, reference, opt, oracle);
}

} // namespace refine_sdo
