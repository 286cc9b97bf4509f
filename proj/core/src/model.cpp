#include "refine_sdo/model.hpp"

#include <cmath>
#include <sstream>

#include "refine_sdo/error.hpp"

namespace refine_sdo {

const char* to_string(Form form)
{
    return form == Form::Standard ? "standard" : "canonical";
}

void SdoProblem::validate() const
{
    if (b.size() != m())
        fail(ErrorKind::DimMismatch, "SdoProblem: rhs length differs from number of constraints");
    for (int i = 0; i < m(); ++i)
        if (A[i].layout() != layout())
            fail(ErrorKind::LayoutMismatch, "SdoProblem: constraint matrix " + std::to_string(i + 1) +
                                                " has a different block layout than C");
}

Mat SdoProblem::constraint_matrix() const
{
    Mat as(m(), svec_dim());
    for (int i = 0; i < m(); ++i)
        as.row(i) = svec(A[i]).transpose();
    return as;
}

void SdoProblem::check_rank() const
{
    if (m() == 0)
        return;
    if (m() > svec_dim())
        fail(ErrorKind::RankDeficient, "more constraints than the dimension of the symmetric space");
    Eigen::JacobiSVD<Mat> svd(constraint_matrix());
    const Vec& s = svd.singularValues();
    const double thresh = 1e-10 * s(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > thresh)
            ++rank;
    if (rank < m()) {
        std::ostringstream msg;
        msg << "constraint matrices have rank " << rank << " < m = " << m();
        fail(ErrorKind::RankDeficient, msg.str());
    }
}

SymMat SdoProblem::apply_adjoint(const Vec& y) const
{
    if (y.size() != m())
        fail(ErrorKind::DimMismatch, "apply_adjoint: y has wrong length");
    SymMat out = SymMat::zeros(layout());
    for (int i = 0; i < m(); ++i)
        if (y(i) != 0.0)
            out += y(i) * A[i];
    return out;
}

Vec SdoProblem::apply(const SymMat& x) const
{
    require_same_layout(x.layout(), layout(), "SdoProblem::apply");
    Vec out(m());
    for (int i = 0; i < m(); ++i)
        out(i) = A[i].dot(x);
    return out;
}

int SdoProblem::complementarity_dim() const
{
    return form == Form::Canonical ? n() + m() : n();
}

double PrimalDualPoint::gap() const
{
    double g = X.dot(S);
    if (u.size() > 0)
        g += u.dot(y);
    return g;
}

Residuals residuals(const SdoProblem& prob, const PrimalDualPoint& pt)
{
    require_same_layout(pt.X.layout(), prob.layout(), "residuals (X)");
    require_same_layout(pt.S.layout(), prob.layout(), "residuals (S)");
    if (pt.y.size() != prob.m())
        fail(ErrorKind::DimMismatch, "residuals: y has wrong length");
    const bool canonical = prob.form == Form::Canonical;
    if (canonical && pt.u.size() != prob.m())
        fail(ErrorKind::DimMismatch, "residuals: canonical point needs u of length m");

    Residuals r;
    r.primal = prob.b - prob.apply(pt.X);
    if (canonical)
        r.primal += pt.u;
    r.dual = prob.C - prob.apply_adjoint(pt.y) - pt.S;
    r.gap = pt.X.dot(pt.S) + (canonical ? pt.u.dot(pt.y) : 0.0);
    r.mu = r.gap / prob.complementarity_dim();
    return r;
}

double central_mu(const PrimalDualPoint& pt)
{
    const int dim = pt.X.total_dim() + static_cast<int>(pt.u.size());
    return pt.gap() / dim;
}

double neighborhood_distance(const PrimalDualPoint& pt)
{
    require_same_layout(pt.X.layout(), pt.S.layout(), "neighborhood_distance");
    const double mu = central_mu(pt);
    double d2 = 0.0;
    // LᵀSL has the eigenvalues of X^{1/2}SX^{1/2} and is symmetric, so the norms agree.
    for (int j = 0; j < pt.X.num_blocks(); ++j) {
        Eigen::LLT<Mat> llt(pt.X.block(j));
        if (llt.info() != Eigen::Success)
            fail(ErrorKind::NotPositiveDefinite, "neighborhood_distance: X is not positive definite");
        const Mat l = llt.matrixL();
        Mat r = l.transpose() * pt.S.block(j) * l;
        r.diagonal().array() -= mu;
        d2 += r.squaredNorm();
    }
    for (Eigen::Index i = 0; i < pt.u.size(); ++i) {
        const double t = pt.y(i) * pt.u(i) - mu;
        d2 += t * t;
    }
    return std::sqrt(d2);
}

bool in_neighborhood(const PrimalDualPoint& pt, double gamma)
{
    return neighborhood_distance(pt) <= gamma * central_mu(pt);
}

// ---- conversions ----

namespace {

SymMat append_diagonal(const SymMat& base, const Vec& diag)
{
    std::vector<Mat> blocks = base.blocks();
    for (Eigen::Index i = 0; i < diag.size(); ++i)
        blocks.push_back(Mat::Constant(1, 1, diag(i)));
    return SymMat(std::move(blocks));
}

SymMat leading_blocks(const SymMat& m, int count)
{
    std::vector<Mat> blocks(m.blocks().begin(), m.blocks().begin() + count);
    return SymMat(std::move(blocks));
}

Vec trailing_diagonal(const SymMat& m, int first)
{
    Vec d(m.num_blocks() - first);
    for (int j = first; j < m.num_blocks(); ++j)
        d(j - first) = m.block(j)(0, 0);
    return d;
}

} // namespace

Conversion standard_to_canonical(const SdoProblem& prob)
{
    if (prob.form != Form::Standard)
        fail(ErrorKind::FormError, "standard_to_canonical: problem is not in standard form");
    Conversion c{ConversionKind::SplitEqualities, prob, {}};
    SdoProblem& t = c.target;
    t.form = Form::Canonical;
    t.C = prob.C;
    t.A.reserve(2 * prob.m());
    for (int i = 0; i < prob.m(); ++i)
        t.A.push_back(prob.A[i]);
    for (int i = 0; i < prob.m(); ++i)
        t.A.push_back(-1.0 * prob.A[i]);
    t.b.resize(2 * prob.m());
    t.b << prob.b, -prob.b;
    return c;
}

Conversion canonical_to_standard(const SdoProblem& prob)
{
    if (prob.form != Form::Canonical)
        fail(ErrorKind::FormError, "canonical_to_standard: problem is not in canonical form");
    Conversion c{ConversionKind::SlackBlocks, prob, {}};
    SdoProblem& t = c.target;
    t.form = Form::Standard;
    const int m = prob.m();
    t.C = append_diagonal(prob.C, Vec::Zero(m));
    t.b = prob.b;
    t.A.reserve(m);
    for (int i = 0; i < m; ++i) {
        Vec slack = Vec::Zero(m);
        slack(i) = -1.0;
        t.A.push_back(append_diagonal(prob.A[i], slack));
    }
    return c;
}

PrimalDualPoint Conversion::forward(const PrimalDualPoint& p) const
{
    PrimalDualPoint out;
    if (kind == ConversionKind::SplitEqualities) {
        const int m = source.m();
        out.X = p.X;
        out.S = p.S;
        out.y.resize(2 * m);
        out.y << p.y.cwiseMax(0.0), (-p.y).cwiseMax(0.0);
        out.u = Vec::Zero(2 * m);
    } else {
        out.X = append_diagonal(p.X, p.u);
        out.S = append_diagonal(p.S, p.y);
        out.y = p.y;
    }
    return out;
}

PrimalDualPoint Conversion::backward(const PrimalDualPoint& p) const
{
    PrimalDualPoint out;
    if (kind == ConversionKind::SplitEqualities) {
        const int m = source.m();
        out.X = p.X;
        out.S = p.S;
        out.y = p.y.head(m) - p.y.tail(m);
    } else {
        const int nb = source.C.num_blocks();
        out.X = leading_blocks(p.X, nb);
        out.S = leading_blocks(p.S, nb);
        out.y = p.y;
        out.u = trailing_diagonal(p.X, nb);
    }
    return out;
}

} // namespace refine_sdo
