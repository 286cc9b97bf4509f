#include "refine_sdo/embedding.hpp"

#include <cmath>

#include "refine_sdo/error.hpp"

namespace refine_sdo {

double SelfDualPoint::complementarity() const
{
    return y.dot(u) + X.dot(S) + tau * phi + theta * rho;
}

SelfDualPoint add_scaled(const SelfDualPoint& pt, double alpha, const SelfDualDelta& d)
{
    SelfDualPoint out = pt;
    out.y += alpha * d.dy;
    out.X += alpha * d.dX;
    out.tau += alpha * d.dtau;
    out.theta += alpha * d.dtheta;
    out.u += alpha * d.du;
    out.S += alpha * d.dS;
    out.phi += alpha * d.dphi;
    out.rho += alpha * d.drho;
    return out;
}

SelfDualProblem build_embedding(const SdoProblem& canonical)
{
    if (canonical.form != Form::Canonical)
        fail(ErrorKind::FormError, "build_embedding: problem must be in canonical form");
    canonical.validate();

    SelfDualProblem emb;
    emb.base = canonical;
    const int m = canonical.m();
    const SymMat eye = SymMat::identity(canonical.layout());

    emb.bbar.resize(m);
    for (int i = 0; i < m; ++i)
        emb.bbar(i) = canonical.b(i) + 1.0 - canonical.A[i].trace();

    emb.Cbar = canonical.C - eye - canonical.apply_adjoint(Vec::Ones(m));
    emb.obar = 1.0 + canonical.C.trace() - canonical.b.sum();
    return emb;
}

SelfDualPoint initial_point(const SelfDualProblem& emb)
{
    SelfDualPoint p;
    p.y = Vec::Ones(emb.m());
    p.u = Vec::Ones(emb.m());
    p.X = SymMat::identity(emb.base.layout());
    p.S = SymMat::identity(emb.base.layout());
    p.tau = p.theta = p.phi = p.rho = 1.0;
    return p;
}

double EmbeddingResiduals::norm() const
{
    return std::sqrt(u.squaredNorm() + S.norm() * S.norm() + phi * phi + rho * rho);
}

EmbeddingResiduals embedding_residuals(const SelfDualProblem& emb, const SelfDualPoint& pt)
{
    const SdoProblem& p = emb.base;
    const double big_n = emb.complementarity_dim();
    EmbeddingResiduals r;
    r.u = p.apply(pt.X) - pt.tau * p.b + pt.theta * emb.bbar - pt.u;
    r.S = pt.tau * p.C - p.apply_adjoint(pt.y) - pt.theta * emb.Cbar - pt.S;
    r.phi = p.b.dot(pt.y) - p.C.dot(pt.X) + emb.obar * pt.theta - pt.phi;
    r.rho = -emb.bbar.dot(pt.y) + emb.Cbar.dot(pt.X) - emb.obar * pt.tau + big_n - pt.rho;
    return r;
}

double selfdual_mu(const SelfDualProblem& emb, const SelfDualPoint& pt)
{
    return pt.complementarity() / emb.complementarity_dim();
}

double selfdual_distance(const SelfDualProblem& emb, const SelfDualPoint& pt)
{
    const double mu = selfdual_mu(emb, pt);
    double d2 = 0.0;
    for (int j = 0; j < pt.X.num_blocks(); ++j) {
        Eigen::LLT<Mat> llt(pt.X.block(j));
        if (llt.info() != Eigen::Success)
            fail(ErrorKind::NotPositiveDefinite, "selfdual_distance: X is not positive definite");
        const Mat l = llt.matrixL();
        Mat r = l.transpose() * pt.S.block(j) * l;
        r.diagonal().array() -= mu;
        d2 += r.squaredNorm();
    }
    for (Eigen::Index i = 0; i < pt.y.size(); ++i) {
        const double t = pt.y(i) * pt.u(i) - mu;
        d2 += t * t;
    }
    const double t1 = pt.tau * pt.phi - mu;
    const double t2 = pt.theta * pt.rho - mu;
    return std::sqrt(d2 + t1 * t1 + t2 * t2);
}

const char* to_string(OutcomeKind kind)
{
    switch (kind) {
    case OutcomeKind::Optimal: return "optimal";
    case OutcomeKind::ImprovingRay: return "improving_ray";
    case OutcomeKind::NoComplementaryPair: return "no_complementary_pair";
    }
    return "unknown";
}

Outcome extract_solution(const SelfDualPoint& pt, double tol)
{
    Outcome o;
    o.tau = pt.tau;
    o.phi = pt.phi;
    if (pt.tau > tol) {
        o.kind = OutcomeKind::Optimal;
        const double s = 1.0 / pt.tau;
        o.point = PrimalDualPoint{s * pt.X, s * pt.y, s * pt.S, s * pt.u};
    } else if (pt.phi > tol) {
        o.kind = OutcomeKind::ImprovingRay;
        o.point = PrimalDualPoint{pt.X, pt.y, pt.S, pt.u};
    } else {
        o.kind = OutcomeKind::NoComplementaryPair;
        o.point = PrimalDualPoint{pt.X, pt.y, pt.S, pt.u};
    }
    return o;
}

} // namespace refine_sdo
