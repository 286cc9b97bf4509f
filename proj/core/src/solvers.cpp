#include "refine_sdo/solvers.hpp"

#include <cmath>
#include <sstream>

#include "refine_sdo/error.hpp"

namespace refine_sdo {

Vec CountingOperator::apply(const Vec& x) const
{
    ++forward_;
    return inner_.apply(x);
}

Vec CountingOperator::apply_transpose(const Vec& x) const
{
    ++transpose_;
    return inner_.apply_transpose(x);
}

const char* to_string(SolveMethod method)
{
    return method == SolveMethod::Direct ? "direct" : "iterative";
}

SolveReport solve_direct(const Mat& m, const Vec& v)
{
    if (m.rows() != m.cols() || m.rows() != v.size())
        fail(ErrorKind::DimMismatch, "solve_direct: dimensions do not match");
    SolveReport r;
    r.method = SolveMethod::Direct;
    if (m.rows() == 0) {
        r.solution = Vec();
        return r;
    }
    Eigen::PartialPivLU<Mat> lu(m);
    const double rc = lu.rcond();
    if (!(rc > 1e-20))
        fail(ErrorKind::Singular, "solve_direct: matrix is numerically singular");
    r.solution = lu.solve(v);
    r.residual_norm = (m * r.solution - v).norm();
    r.iterations = 1;
    return r;
}

SolveReport solve_iterative_normal(const LinearOperator& m, const Vec& v, double tol_abs, int max_iter)
{
    if (m.size() != v.size())
        fail(ErrorKind::DimMismatch, "solve_iterative_normal: dimensions do not match");
    if (!(tol_abs > 0.0))
        fail(ErrorKind::InvalidParameters, "solve_iterative_normal: tol_abs must be positive");

    SolveReport rep;
    rep.method = SolveMethod::IterativeNormal;
    Vec u = Vec::Zero(v.size());
    Vec r = v;
    double rnorm = r.norm();
    if (rnorm <= tol_abs) {
        rep.solution = u;
        rep.residual_norm = rnorm;
        rep.converged = true;
        return rep;
    }

    Vec s = m.apply_transpose(r);
    Vec p = s;
    double gamma = s.squaredNorm();
    int k = 0;
    bool converged = false;
    while (k < max_iter && gamma > 0.0) {
        ++k;
        const Vec q = m.apply(p);
        const double qq = q.squaredNorm();
        if (!(qq > 0.0))
            break;
        const double alpha = gamma / qq;
        u += alpha * p;
        r -= alpha * q;
        rnorm = r.norm();
        if (rnorm <= tol_abs) {
            converged = true;
            break;
        }
        if (k == max_iter)
            break;
        s = m.apply_transpose(r);
        const double gamma_new = s.squaredNorm();
        p = s + (gamma_new / gamma) * p;
        gamma = gamma_new;
    }

    rep.solution = u;
    rep.iterations = k;
    // True residual; the recurrence value is not trusted.
    rep.residual_norm = (m.apply(u) - v).norm();
    rep.converged = converged && rep.residual_norm <= tol_abs;
    return rep;
}

SolveReport solve_iterative_normal(const Mat& m, const Vec& v, double tol_abs, int max_iter)
{
    if (m.rows() != m.cols())
        fail(ErrorKind::DimMismatch, "solve_iterative_normal: matrix must be square");
    DenseOperator op(m);
    return solve_iterative_normal(op, v, tol_abs, max_iter);
}

void require_converged(const SolveReport& report)
{
    if (!report.converged) {
        std::ostringstream msg;
        msg << "iterative solve stopped after " << report.iterations << " iterations with residual "
            << report.residual_norm;
        fail(ErrorKind::NonConverged, msg.str());
    }
}

int default_max_iter(double kappa, double tol_rel)
{
    const double t = std::min(std::max(tol_rel, 1e-300), 0.5);
    const double d = std::ceil(2.0 * std::max(kappa, 1.0) * std::log(1.0 / t));
    if (!(d < 1e9))
        return 1000000000;
    return std::max(1, static_cast<int>(d));
}

double spectral_norm_estimate(const LinearOperator& m, int iterations)
{
    const Eigen::Index n = m.size();
    if (n == 0)
        return 0.0;
    Vec x(n);
    for (Eigen::Index i = 0; i < n; ++i)
        x(i) = 1.0 + 0.1 * static_cast<double>(i % 7);
    x.normalize();
    double lam = 0.0;
    for (int it = 0; it < iterations; ++it) {
        const Vec y = m.apply_transpose(m.apply(x));
        lam = x.dot(y);
        const double ny = y.norm();
        if (ny == 0.0)
            return 0.0;
        x = y / ny;
    }
    return std::sqrt(std::max(lam, 0.0));
}

double newton_tolerance(double beta, double mu, double norm_m)
{
    if (!(beta > 0.0 && beta < 1.0))
        fail(ErrorKind::InvalidParameters, "newton_tolerance: beta must lie in (0,1)");
    if (!(mu > 0.0))
        fail(ErrorKind::InvalidParameters, "newton_tolerance: mu must be positive");
    if (!(norm_m > 0.0))
        fail(ErrorKind::InvalidParameters, "newton_tolerance: operator norm must be positive");
    return beta * mu / norm_m;
}

double newton_tolerance(double beta, double mu, const LinearOperator& m)
{
    return newton_tolerance(beta, mu, 1.05 * spectral_norm_estimate(m, 20));
}

double newton_tolerance(double beta, double mu, const Mat& m)
{
    DenseOperator op(m);
    return newton_tolerance(beta, mu, op);
}

} // namespace refine_sdo
