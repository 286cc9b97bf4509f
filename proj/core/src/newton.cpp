#include "refine_sdo/newton.hpp"

#include <cmath>
#include <sstream>

#include "refine_sdo/error.hpp"

namespace refine_sdo {

const char* to_string(Scaling s)
{
    switch (s) {
    case Scaling::NT: return "nt";
    case Scaling::HKM: return "hkm";
    case Scaling::AHO: return "aho";
    }
    return "unknown";
}

SymMat nt_scaling_point(const SymMat& x, const SymMat& s)
{
    require_same_layout(x.layout(), s.layout(), "nt_scaling_point");
    const SymMat xh = sqrtm(x, 0.0);
    const SymMat mid = invsqrtm(congruence(s, xh), 0.0);
    return congruence(mid, xh);
}

SymMat nt_scaling_point_dual_form(const SymMat& x, const SymMat& s)
{
    require_same_layout(x.layout(), s.layout(), "nt_scaling_point_dual_form");
    const SymMat sh = sqrtm(s, 0.0);
    const SymMat shi = invsqrtm(s, 0.0);
    const SymMat mid = sqrtm(congruence(x, sh), 0.0);
    return congruence(mid, shi);
}

SymMat scaling_matrix(const SymMat& x, const SymMat& s, Scaling choice)
{
    switch (choice) {
    case Scaling::NT: return invsqrtm(nt_scaling_point(x, s), 0.0);
    case Scaling::HKM: return sqrtm(s, 0.0);
    case Scaling::AHO: return SymMat::identity(x.layout());
    }
    fail(ErrorKind::InvalidParameters, "scaling_matrix: unknown scaling");
}

SymMat scaling_matrix(const PrimalDualPoint& pt, Scaling choice)
{
    return scaling_matrix(pt.X, pt.S, choice);
}

SymMat h_p(const BlockMatrix& p, const BlockMatrix& m)
{
    if (p.layout() != m.layout())
        fail(ErrorKind::DimMismatch, "h_p: P and M layouts differ");
    std::vector<Mat> blocks;
    blocks.reserve(p.num_blocks());
    for (int j = 0; j < p.num_blocks(); ++j) {
        const Mat& pb = p.block(j);
        Eigen::JacobiSVD<Mat> svd(pb);
        const Vec& sv = svd.singularValues();
        if (sv.size() > 0 && !(sv(sv.size() - 1) > 0.0 && sv(0) / sv(sv.size() - 1) < 1e12))
            fail(ErrorKind::SingularScaling, "h_p: scaling matrix is singular or too ill-conditioned");
        const Mat pinv = pb.partialPivLu().inverse();
        blocks.push_back(pb * m.block(j) * pinv);
    }
    return SymMat(std::move(blocks));
}

ScaledFactors scaled_factors(const SymMat& x, const SymMat& s, const SymMat& p)
{
    require_same_layout(x.layout(), p.layout(), "scaled_factors");
    const BlockMatrix pb(p);
    const BlockMatrix pinv_t = pb.inverse().transpose();
    return ScaledFactors{pb, pinv_t * BlockMatrix(s), pb * BlockMatrix(x), pinv_t};
}

Mat e_operator(const ScaledFactors& f) { return sym_kron(f.e_g, f.e_k); }
Mat f_operator(const ScaledFactors& f) { return sym_kron(f.f_g, f.f_k); }

// ---- constraint basis ----

Vec ConstraintBasis::particular(const Vec& r) const
{
    if (r.size() == 0)
        return Vec::Zero(As.cols());
    return Q1 * AsQ1.partialPivLu().solve(r);
}

ConstraintBasis make_constraint_basis(const Mat& as, const Layout& layout)
{
    ConstraintBasis cb;
    cb.layout = layout;
    cb.As = as;
    const Eigen::Index m = as.rows();
    const Eigen::Index d = as.cols();
    if (d != svec_length(layout))
        fail(ErrorKind::DimMismatch, "make_constraint_basis: A_s width does not match the layout");
    if (m > d)
        fail(ErrorKind::RankDeficient, "make_constraint_basis: more constraints than svec dimension");
    if (m == 0) {
        cb.Q1 = Mat::Zero(d, 0);
        cb.Q2 = Mat::Identity(d, d);
        cb.AsQ1 = Mat::Zero(0, 0);
        return cb;
    }
    Eigen::ColPivHouseholderQR<Mat> qr(as.transpose());
    qr.setThreshold(1e-10);
    if (qr.rank() < m) {
        std::ostringstream msg;
        msg << "constraint matrix has rank " << qr.rank() << " < m = " << m;
        fail(ErrorKind::RankDeficient, msg.str());
    }
    const Mat q = qr.householderQ();
    cb.Q1 = q.leftCols(m);
    cb.Q2 = q.rightCols(d - m);
    cb.AsQ1 = as * cb.Q1;
    return cb;
}

ConstraintBasis make_constraint_basis(const SdoProblem& prob)
{
    return make_constraint_basis(prob.constraint_matrix(), prob.layout());
}

Mat nullspace_basis(const Mat& as)
{
    const Eigen::Index d = as.cols();
    int n = 0;
    while (svec_length(n) < d)
        ++n;
    Layout layout{n};
    if (svec_length(n) != d) {
        // Width is not a single svec length; fall back to 1×1 blocks.
        layout.assign(static_cast<std::size_t>(d), 1);
    }
    return make_constraint_basis(as, layout).Q2;
}

// ---- standard OSS ----

namespace {

OssSystem assemble_standard_common(const SdoProblem& prob, const ConstraintBasis& basis, const PrimalDualPoint& pt,
                                   const SymMat& p, double sigma, double mu, bool materialize)
{
    require_same_layout(pt.X.layout(), prob.layout(), "assemble_oss_standard");
    if (basis.layout != prob.layout())
        fail(ErrorKind::DimMismatch, "assemble_oss_standard: basis built for another layout");

    OssSystem sys;
    sys.kind = OssKind::Standard;
    sys.scaling = Scaling::NT;
    sys.mu = mu;
    sys.sigma = sigma;
    sys.m = prob.m();
    sys.layout = prob.layout();
    sys.basis = basis.Q2;
    sys.As = basis.As;
    sys.factors = scaled_factors(pt.X, pt.S, p);

    const SymMat target = SymMat::identity(prob.layout(), sigma * mu);
    const SymMat hxs = h_p(BlockMatrix(p), BlockMatrix(pt.X) * BlockMatrix(pt.S));
    sys.rhs = svec(target - hxs);
    sys.x_shift = Vec::Zero(prob.svec_dim());
    sys.s_shift = Vec::Zero(prob.svec_dim());

    if (materialize) {
        const Mat e = e_operator(sys.factors);
        const Mat f = f_operator(sys.factors);
        const Eigen::Index d = prob.svec_dim();
        sys.M.resize(d, d);
        sys.M.leftCols(basis.Q2.cols()) = e * basis.Q2;
        sys.M.rightCols(prob.m()) = -(f * basis.As.transpose());
    }
    return sys;
}

} // namespace

OssSystem assemble_oss_standard(const SdoProblem& prob, const ConstraintBasis& basis, const PrimalDualPoint& pt,
                                const SymMat& p, double sigma, double mu, bool materialize)
{
    return assemble_standard_common(prob, basis, pt, p, sigma, mu, materialize);
}

OssSystem assemble_oss_standard_infeasible(const SdoProblem& prob, const ConstraintBasis& basis,
                                           const PrimalDualPoint& pt, const SymMat& p, double sigma, double mu,
                                           bool materialize)
{
    OssSystem sys = assemble_standard_common(prob, basis, pt, p, sigma, mu, materialize);
    const Residuals r = residuals(prob, pt);
    sys.x_shift = basis.particular(r.primal);
    sys.s_shift = svec(r.dual);
    const ScaledFactors& f = sys.factors;
    sys.rhs -= sym_kron_apply(f.e_g, f.e_k, sys.x_shift);
    sys.rhs -= sym_kron_apply(f.f_g, f.f_k, sys.s_shift);
    return sys;
}

Vec StandardOssOperator::apply(const Vec& x) const
{
    const Eigen::Index nl = sys_.basis.cols();
    const Vec lam = x.head(nl);
    const Vec dy = x.tail(sys_.m);
    const ScaledFactors& f = sys_.factors;
    return sym_kron_apply(f.e_g, f.e_k, sys_.basis * lam) -
           sym_kron_apply(f.f_g, f.f_k, sys_.As.transpose() * dy);
}

Vec StandardOssOperator::apply_transpose(const Vec& w) const
{
    const ScaledFactors& f = sys_.factors;
    Vec out(sys_.dim());
    const Eigen::Index nl = sys_.basis.cols();
    out.head(nl) = sys_.basis.transpose() * sym_kron_apply(f.e_g.transpose(), f.e_k.transpose(), w);
    out.tail(sys_.m) = -(sys_.As * sym_kron_apply(f.f_g.transpose(), f.f_k.transpose(), w));
    return out;
}

StandardDirection recover_direction_standard(const Vec& lambda, const Vec& dy, const OssSystem& sys)
{
    if (sys.kind != OssKind::Standard)
        fail(ErrorKind::DimMismatch, "recover_direction_standard: not a standard-form system");
    if (lambda.size() != sys.basis.cols() || dy.size() != sys.m)
        fail(ErrorKind::DimMismatch, "recover_direction_standard: lambda or dy has wrong length");
    StandardDirection d;
    d.dX = smat(sys.x_shift + sys.basis * lambda, sys.layout);
    d.dy = dy;
    d.dS = smat(sys.s_shift - sys.As.transpose() * dy, sys.layout);
    return d;
}

StandardDirection recover_direction_standard(const Vec& solution, const OssSystem& sys)
{
    const Eigen::Index nl = sys.basis.cols();
    if (solution.size() != nl + sys.m)
        fail(ErrorKind::DimMismatch, "recover_direction_standard: solution has wrong length");
    return recover_direction_standard(solution.head(nl), solution.tail(sys.m), sys);
}

// ---- self-dual OSS ----

Mat selfdual_skew_matrix(const SelfDualProblem& emb)
{
    const SdoProblem& p = emb.base;
    const int m = p.m();
    const int d = p.svec_dim();
    const int dim = m + d + 2;
    const int it = m + d;
    const int ith = m + d + 1;
    const Mat as = p.constraint_matrix();
    const Vec c = svec(p.C);
    const Vec cbar = svec(emb.Cbar);

    Mat k = Mat::Zero(dim, dim);
    k.block(0, m, m, d) = as;
    k.block(0, it, m, 1) = -p.b;
    k.block(0, ith, m, 1) = emb.bbar;

    k.block(m, 0, d, m) = -as.transpose();
    k.block(m, it, d, 1) = c;
    k.block(m, ith, d, 1) = -cbar;

    k.block(it, 0, 1, m) = p.b.transpose();
    k.block(it, m, 1, d) = -c.transpose();
    k(it, ith) = emb.obar;

    k.block(ith, 0, 1, m) = -emb.bbar.transpose();
    k.block(ith, m, 1, d) = cbar.transpose();
    k(ith, it) = -emb.obar;
    return k;
}

Mat selfdual_constraint_matrix(const SelfDualProblem& emb)
{
    const Mat k = selfdual_skew_matrix(emb);
    const Eigen::Index dim = k.rows();
    Mat p(dim, 2 * dim);
    p.leftCols(dim) = Mat::Identity(dim, dim);
    p.rightCols(dim) = -k;
    return p;
}

Mat selfdual_basis(const SelfDualProblem& emb)
{
    const Mat k = selfdual_skew_matrix(emb);
    const Eigen::Index dim = k.rows();
    Mat v(2 * dim, dim);
    v.topRows(dim) = -k;
    v.bottomRows(dim) = -Mat::Identity(dim, dim);
    return v;
}

OssSystem assemble_oss_selfdual(const SelfDualProblem& emb, const Mat& v, const SelfDualPoint& pt, double sigma,
                                double mu, Scaling scaling)
{
    const int m = emb.m();
    const int d = emb.base.svec_dim();
    const int dim = m + d + 2;
    if (v.rows() != 2 * dim || v.cols() != dim)
        fail(ErrorKind::DimMismatch, "assemble_oss_selfdual: basis has wrong shape");

    const SymMat p = scaling_matrix(pt.X, pt.S, scaling);
    const ScaledFactors f = scaled_factors(pt.X, pt.S, p);
    const Mat e = e_operator(f);
    const Mat fo = f_operator(f);

    // M = D·V with D = [D_w, D_z] and V = [−K; −I].
    const auto kw = v.topRows(dim);
    Mat mm(dim, dim);
    mm.topRows(m) = pt.y.asDiagonal() * kw.topRows(m);
    mm.middleRows(m, d) = fo * kw.middleRows(m, d);
    mm.row(m + d) = pt.tau * kw.row(m + d);
    mm.row(m + d + 1) = pt.theta * kw.row(m + d + 1);
    for (int i = 0; i < m; ++i)
        mm(i, i) -= pt.u(i);
    mm.block(m, m, d, d) -= e;
    mm(m + d, m + d) -= pt.phi;
    mm(m + d + 1, m + d + 1) -= pt.rho;

    OssSystem sys;
    sys.kind = OssKind::SelfDual;
    sys.M = std::move(mm);
    sys.basis = v;
    sys.scaling = scaling;
    sys.mu = mu;
    sys.sigma = sigma;
    sys.m = m;
    sys.layout = emb.base.layout();
    sys.factors = f;

    const double t = sigma * mu;
    sys.rhs.resize(dim);
    sys.rhs.head(m) = Vec::Constant(m, t) - pt.y.cwiseProduct(pt.u);
    const SymMat hxs = h_p(BlockMatrix(p), BlockMatrix(pt.X) * BlockMatrix(pt.S));
    sys.rhs.segment(m, d) = svec(SymMat::identity(sys.layout, t) - hxs);
    sys.rhs(m + d) = t - pt.tau * pt.phi;
    sys.rhs(m + d + 1) = t - pt.theta * pt.rho;
    return sys;
}

OssSystem assemble_oss_selfdual(const SelfDualProblem& emb, const SelfDualPoint& pt, double sigma, double mu,
                                Scaling scaling)
{
    return assemble_oss_selfdual(emb, selfdual_basis(emb), pt, sigma, mu, scaling);
}

SelfDualDelta recover_direction_selfdual(const Vec& lambda, const OssSystem& sys)
{
    if (sys.kind != OssKind::SelfDual)
        fail(ErrorKind::DimMismatch, "recover_direction_selfdual: not an embedding system");
    if (lambda.size() != sys.basis.cols())
        fail(ErrorKind::DimMismatch, "recover_direction_selfdual: lambda has wrong length");
    const int m = sys.m;
    const int d = svec_length(sys.layout);
    const int dim = m + d + 2;
    const Vec x = sys.basis * lambda;
    SelfDualDelta out;
    out.du = x.head(m);
    out.dS = smat(x.segment(m, d), sys.layout);
    out.dphi = x(m + d);
    out.drho = x(m + d + 1);
    out.dy = x.segment(dim, m);
    out.dX = smat(x.segment(dim + m, d), sys.layout);
    out.dtau = x(dim + m + d);
    out.dtheta = x(dim + m + d + 1);
    return out;
}

} // namespace refine_sdo
