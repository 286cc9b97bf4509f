#include "refine_sdo/ifipm.hpp"

#include <chrono>
#include <functional>
#include <algorithm>
#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "refine_sdo/error.hpp"

namespace refine_sdo {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool chol_ok(const SymMat& m)
{
    return is_positive_definite(m);
}

SolveMethod pick_method(const IpmConfig& cfg, int dim)
{
    switch (cfg.solver) {
    case SolverChoice::Direct: return SolveMethod::Direct;
    case SolverChoice::Iterative: return SolveMethod::IterativeNormal;
    case SolverChoice::Auto: break;
    }
    return dim > cfg.iterative_threshold ? SolveMethod::IterativeNormal : SolveMethod::Direct;
}

// Solves the Newton system and fills the solver fields of rec. Materializes M on demand.
Vec solve_newton(OssSystem& sys, const std::function<void(OssSystem&)>& materialize, SolveMethod method,
                 double beta, bool estimate_condition, IterationRecord& rec)
{
    if (estimate_condition) {
        if (sys.M.size() == 0)
            materialize(sys);
        rec.kappa = cond_estimate(sys.M, CondMode::Auto);
    }
    if (method == SolveMethod::IterativeNormal) {
        const bool matrix_free = sys.M.size() == 0;
        StandardOssOperator free_op(sys);
        DenseOperator dense_op(sys.M);
        const LinearOperator& op = matrix_free ? static_cast<const LinearOperator&>(free_op)
                                               : static_cast<const LinearOperator&>(dense_op);
        const double tol = std::min(newton_tolerance(beta, sys.mu, op), beta * sys.mu);
        const int max_iter = 20 * std::max(1, sys.dim());
        SolveReport rep = solve_iterative_normal(op, sys.rhs, tol, max_iter);
        rec.method = SolveMethod::IterativeNormal;
        rec.solver_tolerance = tol;
        rec.solver_iterations = rep.iterations;
        rec.solver_residual = rep.residual_norm;
        if (rep.converged)
            return rep.solution;
        spdlog::warn("iterative Newton solve missed tolerance {:.3e} (residual {:.3e} after {} iterations); "
                     "retrying with the direct solver",
                     tol, rep.residual_norm, rep.iterations);
    }
    if (sys.M.size() == 0)
        materialize(sys);
    SolveReport rep = solve_direct(sys.M, sys.rhs);
    rec.method = SolveMethod::Direct;
    rec.solver_residual = rep.residual_norm;
    rec.solver_iterations = rep.iterations;
    return rep.solution;
}

double max_step_to_boundary(const SymMat& x, const SymMat& dx)
{
    double alpha = std::numeric_limits<double>::infinity();
    for (int j = 0; j < x.num_blocks(); ++j) {
        Eigen::LLT<Mat> llt(x.block(j));
        if (llt.info() != Eigen::Success)
            return 0.0;
        const Mat l = llt.matrixL();
        Mat z = llt.matrixL().solve(dx.block(j));
        z = l.triangularView<Eigen::Lower>().solve(z.transpose().eval());
        Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (z + z.transpose()), Eigen::EigenvaluesOnly);
        const double lo = es.eigenvalues()(0);
        if (lo < 0.0)
            alpha = std::min(alpha, -1.0 / lo);
    }
    return alpha;
}

} // namespace

const char* to_string(SolverChoice s)
{
    switch (s) {
    case SolverChoice::Auto: return "auto";
    case SolverChoice::Direct: return "direct";
    case SolverChoice::Iterative: return "iterative";
    }
    return "unknown";
}

double beta_upper_bound(double gamma, double delta, int dim)
{
    const double rn = std::sqrt(static_cast<double>(dim));
    return 1.0 - gamma / rn -
           21.7 * (gamma * gamma + delta * delta) /
               ((2.0 + std::sqrt(2.0)) * (1.0 - delta / rn) * gamma * (1.0 - gamma));
}

CheckedConfig validate_config(const IpmConfig& cfg, int dim)
{
    auto bad = [](const std::string& what) { fail(ErrorKind::InvalidParameters, what); };
    if (dim < 1)
        bad("complementarity dimension must be positive");
    if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0))
        bad("gamma must lie in (0,1)");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
        bad("delta must lie in (0,1)");
    if (!(cfg.target_eps > 0.0))
        bad("target epsilon must be positive");
    if (cfg.max_iterations < 0)
        bad("max_iterations must be nonnegative");

    const double g = cfg.gamma;
    const double d = cfg.delta;
    const double n = dim;
    CheckedConfig out;
    out.cfg = cfg;
    out.dim = dim;
    out.sigma = 1.0 - d / std::sqrt(n);

    if (2.0 * std::sqrt(2.0) * g / (1.0 - g) > 1.0) {
        std::ostringstream msg;
        msg << "2*sqrt(2)*gamma/(1-gamma) <= 1 violated (gamma = " << g << ")";
        bad(msg.str());
    }
    const double bmax = beta_upper_bound(g, d, dim);
    const double rhs2 = std::sqrt((g * g + (1.0 - out.sigma) * (1.0 - out.sigma) * n) / (1.0 - g));
    const double beta = cfg.beta > 0.0 ? cfg.beta : 0.5 * std::min(bmax, rhs2 / out.sigma);
    if (!(beta > 0.0 && beta < 1.0)) {
        std::ostringstream msg;
        msg << "beta <= 1 - gamma/sqrt(N) - 21.7(gamma^2+delta^2)/((2+sqrt2)(1-delta/sqrt(N))gamma(1-gamma)) "
               "admits no beta in (0,1) (bound = "
            << bmax << ", gamma = " << g << ", delta = " << d << ", N = " << dim << ")";
        bad(msg.str());
    }
    if (beta > bmax) {
        std::ostringstream msg;
        msg << "beta <= 1 - gamma/sqrt(N) - 21.7(gamma^2+delta^2)/((2+sqrt2)(1-delta/sqrt(N))gamma(1-gamma)) "
               "violated (beta = "
            << beta << ", bound = " << bmax << ")";
        bad(msg.str());
    }
    if (beta * out.sigma > rhs2) {
        std::ostringstream msg;
        msg << "beta*sigma <= sqrt((gamma^2 + (1-sigma)^2 N)/(1-gamma)) violated (beta*sigma = " << beta * out.sigma
            << ", bound = " << rhs2 << ")";
        bad(msg.str());
    }
    out.beta = beta;
    return out;
}

int iteration_bound(int dim, double delta, double mu0, double eps)
{
    const double n = dim;
    const double v = std::sqrt(n) / delta * std::log(n * mu0 / eps);
    return v <= 0.0 ? 0 : static_cast<int>(std::ceil(v));
}

IpmResult ipm_solve_standard(const SdoProblem& prob, const PrimalDualPoint& start, const IpmConfig& cfg)
{
    return ipm_solve_standard(prob, make_constraint_basis(prob), start, cfg);
}

IpmResult ipm_solve_standard(const SdoProblem& prob, const ConstraintBasis& basis, const PrimalDualPoint& start,
                             const IpmConfig& cfg)
{
    if (prob.form != Form::Standard)
        fail(ErrorKind::FormError, "ipm_solve_standard: problem must be in standard form");
    const int n = prob.n();
    const CheckedConfig cc = validate_config(cfg, n);
    if (!chol_ok(start.X) || !chol_ok(start.S))
        fail(ErrorKind::NotStrictlyFeasible, "ipm_solve_standard: start point is not interior");

    IpmResult out;
    out.trace.dim = n;
    out.trace.sigma = cc.sigma;
    out.trace.beta = cc.beta;
    PrimalDualPoint pt = start;

    auto make_record = [&](int k, double mu) {
        IterationRecord r;
        r.k = k;
        r.mu = mu;
        r.gap = pt.X.dot(pt.S);
        r.distance = neighborhood_distance(pt) / mu;
        const Residuals res = residuals(prob, pt);
        r.primal_residual = res.primal_norm();
        r.dual_residual = res.dual_norm();
        return r;
    };

    double mu = pt.X.dot(pt.S) / n;
    {
        IterationRecord r0 = make_record(0, mu);
        if (cfg.check_neighborhood && r0.distance > cfg.gamma)
            fail(ErrorKind::NeighborhoodEscape, "ipm_solve_standard: start point lies outside the neighborhood");
        out.trace.records.push_back(r0);
    }

    const SolveMethod method = pick_method(cfg, prob.svec_dim());
    int k = 0;
    while (n * mu > cfg.target_eps) {
        if (k >= cfg.max_iterations) {
            std::ostringstream msg;
            msg << "ipm_solve_standard: " << k << " iterations without reaching N*mu <= " << cfg.target_eps;
            fail(ErrorKind::MaxIterations, msg.str());
        }
        ++k;
        const auto t0 = Clock::now();
        const SymMat p = scaling_matrix(pt, cfg.scaling);
        const bool materialize = method == SolveMethod::Direct || cfg.estimate_condition;
        OssSystem sys = assemble_oss_standard(prob, basis, pt, p, cc.sigma, mu, materialize);
        sys.scaling = cfg.scaling;

        IterationRecord rec;
        auto build_matrix = [&](OssSystem& s) {
            s = assemble_oss_standard(prob, basis, pt, p, cc.sigma, mu, true);
            s.scaling = cfg.scaling;
        };
        const Vec sol = solve_newton(sys, build_matrix, method, cc.beta, cfg.estimate_condition, rec);
        const StandardDirection dir = recover_direction_standard(sol, sys);

        double alpha = 1.0;
        int halvings = 0;
        SymMat xn = pt.X + dir.dX;
        SymMat sn = pt.S + dir.dS;
        while (!chol_ok(xn) || !chol_ok(sn)) {
            if (++halvings > 30)
                fail(ErrorKind::NotPositiveDefinite, "ipm_solve_standard: step length collapsed");
            alpha *= 0.5;
            xn = pt.X + alpha * dir.dX;
            sn = pt.S + alpha * dir.dS;
        }
        if (halvings > 0)
            spdlog::warn("iteration {}: step shortened to {} to stay interior", k, alpha);
        pt.X = std::move(xn);
        pt.S = std::move(sn);
        pt.y += alpha * dir.dy;

        mu = pt.X.dot(pt.S) / n;
        IterationRecord r = make_record(k, mu);
        r.step = alpha;
        r.halvings = halvings;
        r.method = rec.method;
        r.solver_residual = rec.solver_residual;
        r.solver_tolerance = rec.solver_tolerance;
        r.solver_iterations = rec.solver_iterations;
        r.kappa = rec.kappa;
        r.wall_seconds = seconds_since(t0);
        out.trace.records.push_back(r);
        spdlog::debug("ipm k={} mu={:.6e} dist={:.3e}", k, mu, r.distance);
        if (cfg.check_neighborhood && r.distance > cfg.gamma) {
            std::ostringstream msg;
            msg << "ipm_solve_standard: iterate " << k << " left the neighborhood (distance/mu = " << r.distance
                << " > gamma = " << cfg.gamma << ")";
            fail(ErrorKind::NeighborhoodEscape, msg.str());
        }
    }
    out.point = std::move(pt);
    return out;
}

SelfDualIpmResult ipm_solve_selfdual(const SelfDualProblem& emb, const IpmConfig& cfg)
{
    const int big_n = emb.complementarity_dim();
    const CheckedConfig cc = validate_config(cfg, big_n);
    const Mat v = selfdual_basis(emb);

    SelfDualIpmResult out;
    out.trace.dim = big_n;
    out.trace.sigma = cc.sigma;
    out.trace.beta = cc.beta;
    SelfDualPoint pt = initial_point(emb);

    auto make_record = [&](int k, double mu) {
        IterationRecord r;
        r.k = k;
        r.mu = mu;
        r.gap = pt.complementarity();
        r.distance = selfdual_distance(emb, pt) / mu;
        r.primal_residual = embedding_residuals(emb, pt).norm();
        return r;
    };
    auto interior = [](const SelfDualPoint& p) {
        return p.tau > 0.0 && p.theta > 0.0 && p.phi > 0.0 && p.rho > 0.0 && (p.y.array() > 0.0).all() &&
               (p.u.array() > 0.0).all() && is_positive_definite(p.X) && is_positive_definite(p.S);
    };

    double mu = selfdual_mu(emb, pt);
    out.trace.records.push_back(make_record(0, mu));

    const SolveMethod method = pick_method(cfg, static_cast<int>(v.cols()));
    int k = 0;
    while (big_n * mu > cfg.target_eps) {
        if (k >= cfg.max_iterations) {
            std::ostringstream msg;
            msg << "ipm_solve_selfdual: " << k << " iterations without reaching N*mu <= " << cfg.target_eps;
            fail(ErrorKind::MaxIterations, msg.str());
        }
        ++k;
        const auto t0 = Clock::now();
        OssSystem sys = assemble_oss_selfdual(emb, v, pt, cc.sigma, mu, cfg.scaling);
        IterationRecord rec;
        const Vec sol = solve_newton(sys, [](OssSystem&) {}, method, cc.beta, cfg.estimate_condition, rec);
        const SelfDualDelta d = recover_direction_selfdual(sol, sys);

        double alpha = 1.0;
        int halvings = 0;
        SelfDualPoint next = add_scaled(pt, 1.0, d);
        while (!interior(next)) {
            if (++halvings > 30)
                fail(ErrorKind::NotPositiveDefinite, "ipm_solve_selfdual: step length collapsed");
            alpha *= 0.5;
            next = add_scaled(pt, alpha, d);
        }
        if (halvings > 0)
            spdlog::warn("embedding iteration {}: step shortened to {} to stay interior", k, alpha);
        pt = std::move(next);

        mu = selfdual_mu(emb, pt);
        IterationRecord r = make_record(k, mu);
        r.step = alpha;
        r.halvings = halvings;
        r.method = rec.method;
        r.solver_residual = rec.solver_residual;
        r.solver_tolerance = rec.solver_tolerance;
        r.solver_iterations = rec.solver_iterations;
        r.kappa = rec.kappa;
        r.wall_seconds = seconds_since(t0);
        out.trace.records.push_back(r);
        if (cfg.check_neighborhood && r.distance > cfg.gamma) {
            std::ostringstream msg;
            msg << "ipm_solve_selfdual: iterate " << k << " left the neighborhood (distance/mu = " << r.distance
                << " > gamma = " << cfg.gamma << ")";
            fail(ErrorKind::NeighborhoodEscape, msg.str());
        }
    }
    out.point = std::move(pt);
    return out;
}

RestoreResult restore_feasible_center(const SdoProblem& prob, const ConstraintBasis& basis,
                                      const PrimalDualPoint& approx, Scaling scaling, double target_distance,
                                      int max_iterations)
{
    if (prob.form != Form::Standard)
        fail(ErrorKind::FormError, "restore_feasible_center: problem must be in standard form");
    if (!chol_ok(approx.X) || !chol_ok(approx.S))
        fail(ErrorKind::NotStrictlyFeasible, "restore_feasible_center: start point is not interior");

    const int n = prob.n();
    const double tol_p = 1e-12 * (1.0 + prob.b.norm());
    const double tol_d = 1e-12 * (1.0 + prob.C.norm());
    RestoreResult out;
    PrimalDualPoint pt = approx;
    double mu0 = 0.0;
    for (int it = 0;; ++it) {
        const Residuals res = residuals(prob, pt);
        const double mu = pt.X.dot(pt.S) / n;
        if (it == 0)
            mu0 = mu;
        if (!(mu > 1e-10 * mu0))
            fail(ErrorKind::NotStrictlyFeasible,
                 "restore_feasible_center: complementarity collapsed while removing residuals; the problem may "
                 "have no strictly feasible primal-dual pair");
        out.distance = neighborhood_distance(pt) / mu;
        out.primal_residual = res.primal_norm();
        out.dual_residual = res.dual_norm();
        out.iterations = it;
        if (out.primal_residual <= tol_p && out.dual_residual <= tol_d && out.distance <= target_distance)
            break;
        if (it >= max_iterations) {
            std::ostringstream msg;
            msg << "restore_feasible_center: no feasible centered point after " << it
                << " iterations (primal " << out.primal_residual << ", dual " << out.dual_residual
                << ", distance " << out.distance << ")";
            fail(ErrorKind::NotStrictlyFeasible, msg.str());
        }
        const SymMat p = scaling_matrix(pt, scaling);
        StandardDirection dir;
        try {
            const OssSystem sys = assemble_oss_standard_infeasible(prob, basis, pt, p, 1.0, mu, true);
            dir = recover_direction_standard(solve_direct(sys.M, sys.rhs).solution, sys);
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "restore_feasible_center: Newton system broke down after " << it << " iterations (" << e.what()
                << "); the problem may have no strictly feasible primal-dual pair";
            fail(ErrorKind::NotStrictlyFeasible, msg.str());
        }
        const double amax = std::min(max_step_to_boundary(pt.X, dir.dX), max_step_to_boundary(pt.S, dir.dS));
        double alpha = std::min(1.0, 0.95 * amax);
        SymMat xn = pt.X + alpha * dir.dX;
        SymMat sn = pt.S + alpha * dir.dS;
        int halvings = 0;
        while (!chol_ok(xn) || !chol_ok(sn)) {
            if (++halvings > 30)
                fail(ErrorKind::NotPositiveDefinite, "restore_feasible_center: step length collapsed");
            alpha *= 0.5;
            xn = pt.X + alpha * dir.dX;
            sn = pt.S + alpha * dir.dS;
        }
        pt.X = std::move(xn);
        pt.S = std::move(sn);
        pt.y += alpha * dir.dy;
        spdlog::debug("restore it={} alpha={:.3e} primal={:.3e} dual={:.3e} dist={:.3e}", it, alpha,
                      out.primal_residual, out.dual_residual, out.distance);
    }
    out.point = std::move(pt);
    return out;
}

} // namespace refine_sdo
