#include "refine_sdo/symlin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "refine_sdo/error.hpp"

namespace refine_sdo {

namespace {

const double kSqrt2 = std::sqrt(2.0);

void svec_block(const Mat& b, double* out)
{
    const Eigen::Index n = b.rows();
    for (Eigen::Index c = 0; c < n; ++c) {
        *out++ = b(c, c);
        for (Eigen::Index r = c + 1; r < n; ++r)
            *out++ = kSqrt2 * 0.5 * (b(r, c) + b(c, r));
    }
}

Mat smat_block(const double* in, int n)
{
    Mat b(n, n);
    for (int c = 0; c < n; ++c) {
        b(c, c) = *in++;
        for (int r = c + 1; r < n; ++r) {
            b(r, c) = *in++ / kSqrt2;
            b(c, r) = b(r, c);
        }
    }
    return b;
}

} // namespace

int svec_length(const Layout& layout)
{
    int s = 0;
    for (int n : layout)
        s += svec_length(n);
    return s;
}

int total_dim(const Layout& layout)
{
    return std::accumulate(layout.begin(), layout.end(), 0);
}

void require_same_layout(const Layout& a, const Layout& b, const char* where)
{
    if (a != b)
        fail(ErrorKind::DimMismatch, std::string(where) + ": block layouts differ");
}

// ---- BlockMatrix ----

BlockMatrix::BlockMatrix(std::vector<Mat> blocks) : blocks_(std::move(blocks))
{
    for (const auto& b : blocks_)
        if (b.rows() != b.cols())
            fail(ErrorKind::DimMismatch, "BlockMatrix: blocks must be square");
}

BlockMatrix::BlockMatrix(const SymMat& sym) : blocks_(sym.blocks()) {}

BlockMatrix BlockMatrix::identity(const Layout& layout)
{
    std::vector<Mat> blocks;
    blocks.reserve(layout.size());
    for (int n : layout)
        blocks.push_back(Mat::Identity(n, n));
    return BlockMatrix(std::move(blocks));
}

Layout BlockMatrix::layout() const
{
    Layout l;
    l.reserve(blocks_.size());
    for (const auto& b : blocks_)
        l.push_back(static_cast<int>(b.rows()));
    return l;
}

int BlockMatrix::total_dim() const
{
    int n = 0;
    for (const auto& b : blocks_)
        n += static_cast<int>(b.rows());
    return n;
}

BlockMatrix BlockMatrix::transpose() const
{
    std::vector<Mat> out;
    out.reserve(blocks_.size());
    for (const auto& b : blocks_)
        out.push_back(b.transpose());
    return BlockMatrix(std::move(out));
}

BlockMatrix BlockMatrix::inverse() const
{
    std::vector<Mat> out;
    out.reserve(blocks_.size());
    for (const auto& b : blocks_) {
        Eigen::PartialPivLU<Mat> lu(b);
        if (!(std::abs(lu.determinant()) > 0.0))
            fail(ErrorKind::Singular, "BlockMatrix::inverse: singular block");
        out.push_back(lu.inverse());
    }
    return BlockMatrix(std::move(out));
}

Mat BlockMatrix::to_dense() const
{
    const int n = total_dim();
    Mat d = Mat::Zero(n, n);
    int off = 0;
    for (const auto& b : blocks_) {
        d.block(off, off, b.rows(), b.cols()) = b;
        off += static_cast<int>(b.rows());
    }
    return d;
}

BlockMatrix operator*(const BlockMatrix& a, const BlockMatrix& b)
{
    if (a.layout() != b.layout())
        fail(ErrorKind::DimMismatch, "BlockMatrix product: layouts differ");
    std::vector<Mat> out;
    out.reserve(a.blocks_.size());
    for (std::size_t j = 0; j < a.blocks_.size(); ++j)
        out.push_back(a.blocks_[j] * b.blocks_[j]);
    return BlockMatrix(std::move(out));
}

BlockMatrix operator+(const BlockMatrix& a, const BlockMatrix& b)
{
    if (a.layout() != b.layout())
        fail(ErrorKind::DimMismatch, "BlockMatrix sum: layouts differ");
    std::vector<Mat> out;
    out.reserve(a.blocks_.size());
    for (std::size_t j = 0; j < a.blocks_.size(); ++j)
        out.push_back(a.blocks_[j] + b.blocks_[j]);
    return BlockMatrix(std::move(out));
}

BlockMatrix operator*(double s, const BlockMatrix& a)
{
    std::vector<Mat> out;
    out.reserve(a.blocks_.size());
    for (const auto& b : a.blocks_)
        out.push_back(s * b);
    return BlockMatrix(std::move(out));
}

// ---- SymMat ----

SymMat::SymMat(std::vector<Mat> blocks) : blocks_(std::move(blocks))
{
    layout_.reserve(blocks_.size());
    for (auto& b : blocks_) {
        if (b.rows() != b.cols())
            fail(ErrorKind::DimMismatch, "SymMat: blocks must be square");
        Mat t = 0.5 * (b + b.transpose());
        b = std::move(t);
        layout_.push_back(static_cast<int>(b.rows()));
    }
}

SymMat::SymMat(const Mat& single) : SymMat(std::vector<Mat>{single}) {}

SymMat SymMat::zeros(const Layout& layout)
{
    std::vector<Mat> blocks;
    blocks.reserve(layout.size());
    for (int n : layout)
        blocks.push_back(Mat::Zero(n, n));
    return SymMat(std::move(blocks));
}

SymMat SymMat::identity(const Layout& layout, double scale)
{
    std::vector<Mat> blocks;
    blocks.reserve(layout.size());
    for (int n : layout)
        blocks.push_back(scale * Mat::Identity(n, n));
    return SymMat(std::move(blocks));
}

int SymMat::total_dim() const { return refine_sdo::total_dim(layout_); }

double SymMat::trace() const
{
    double t = 0.0;
    for (const auto& b : blocks_)
        t += b.trace();
    return t;
}

double SymMat::dot(const SymMat& other) const
{
    require_same_layout(layout_, other.layout_, "SymMat::dot");
    double s = 0.0;
    for (std::size_t j = 0; j < blocks_.size(); ++j)
        s += blocks_[j].cwiseProduct(other.blocks_[j]).sum();
    return s;
}

double SymMat::norm() const
{
    double s = 0.0;
    for (const auto& b : blocks_)
        s += b.squaredNorm();
    return std::sqrt(s);
}

double SymMat::max_abs() const
{
    double m = 0.0;
    for (const auto& b : blocks_)
        if (b.size() > 0)
            m = std::max(m, b.cwiseAbs().maxCoeff());
    return m;
}

Mat SymMat::to_dense() const { return BlockMatrix(*this).to_dense(); }

SymMat& SymMat::operator+=(const SymMat& other)
{
    require_same_layout(layout_, other.layout_, "SymMat::operator+=");
    for (std::size_t j = 0; j < blocks_.size(); ++j)
        blocks_[j] += other.blocks_[j];
    return *this;
}

SymMat& SymMat::operator-=(const SymMat& other)
{
    require_same_layout(layout_, other.layout_, "SymMat::operator-=");
    for (std::size_t j = 0; j < blocks_.size(); ++j)
        blocks_[j] -= other.blocks_[j];
    return *this;
}

SymMat& SymMat::operator*=(double s)
{
    for (auto& b : blocks_)
        b *= s;
    return *this;
}

SymMat sym_part(const BlockMatrix& m)
{
    std::vector<Mat> blocks;
    blocks.reserve(m.num_blocks());
    for (int j = 0; j < m.num_blocks(); ++j)
        blocks.push_back(m.block(j));
    return SymMat(std::move(blocks));
}

SymMat congruence(const SymMat& a, const SymMat& t)
{
    require_same_layout(a.layout(), t.layout(), "congruence");
    std::vector<Mat> blocks;
    blocks.reserve(a.num_blocks());
    for (int j = 0; j < a.num_blocks(); ++j)
        blocks.push_back(t.block(j) * a.block(j) * t.block(j));
    return SymMat(std::move(blocks));
}

// ---- svec / smat ----

Vec svec(const SymMat& u)
{
    Vec v(u.svec_dim());
    double* out = v.data();
    for (const auto& b : u.blocks()) {
        svec_block(b, out);
        out += svec_length(static_cast<int>(b.rows()));
    }
    return v;
}

SymMat smat(const Vec& v, const Layout& layout)
{
    if (v.size() != svec_length(layout)) {
        std::ostringstream msg;
        msg << "smat: vector length " << v.size() << " does not match layout length " << svec_length(layout);
        fail(ErrorKind::LayoutMismatch, msg.str());
    }
    std::vector<Mat> blocks;
    blocks.reserve(layout.size());
    const double* in = v.data();
    for (int n : layout) {
        blocks.push_back(smat_block(in, n));
        in += svec_length(n);
    }
    return SymMat(std::move(blocks));
}

// ---- symmetric Kronecker product ----

Mat sym_kron(const BlockMatrix& g, const BlockMatrix& k)
{
    if (g.layout() != k.layout())
        fail(ErrorKind::DimMismatch, "sym_kron: G and K layouts differ");
    const int dim = svec_length(g.layout());
    Mat out = Mat::Zero(dim, dim);
    int off = 0;
    for (int blk = 0; blk < g.num_blocks(); ++blk) {
        const Mat& G = g.block(blk);
        const Mat& K = k.block(blk);
        const int n = static_cast<int>(G.rows());
        int col = off;
        for (int c0 = 0; c0 < n; ++c0) {
            for (int r0 = c0; r0 < n; ++r0, ++col) {
                // column for basis matrix E = smat(e_col), E supported on (r0, c0)
                const double scale = (r0 == c0) ? 0.25 : 0.5 / kSqrt2;
                int row = off;
                for (int c = 0; c < n; ++c) {
                    for (int r = c; r < n; ++r, ++row) {
                        const double t = K(r, r0) * G(c, c0) + K(c, r0) * G(r, c0) + G(r, r0) * K(c, c0) +
                                         G(c, r0) * K(r, c0);
                        const double z = scale * t;
                        out(row, col) = (r == c) ? z : kSqrt2 * z;
                    }
                }
            }
        }
        off += svec_length(n);
    }
    return out;
}

Vec sym_kron_apply(const BlockMatrix& g, const BlockMatrix& k, const Vec& v)
{
    if (g.layout() != k.layout())
        fail(ErrorKind::DimMismatch, "sym_kron_apply: G and K layouts differ");
    const Layout layout = g.layout();
    const SymMat m = smat(v, layout);
    std::vector<Mat> blocks;
    blocks.reserve(layout.size());
    for (int j = 0; j < g.num_blocks(); ++j) {
        const Mat t = k.block(j) * m.block(j) * g.block(j).transpose();
        blocks.push_back(0.5 * (t + t.transpose()));
    }
    return svec(SymMat(std::move(blocks)));
}

// ---- spectral functions ----

Vec EigenDecomposition::all_values() const
{
    Eigen::Index n = 0;
    for (const auto& v : values)
        n += v.size();
    Vec out(n);
    Eigen::Index off = 0;
    for (const auto& v : values) {
        out.segment(off, v.size()) = v;
        off += v.size();
    }
    std::sort(out.data(), out.data() + out.size());
    return out;
}

EigenDecomposition eig_sym(const SymMat& m)
{
    EigenDecomposition d;
    d.values.reserve(m.num_blocks());
    d.vectors.reserve(m.num_blocks());
    for (const auto& b : m.blocks()) {
        Eigen::SelfAdjointEigenSolver<Mat> es(b);
        if (es.info() != Eigen::Success)
            fail(ErrorKind::NoConvergence, "eig_sym: eigensolver did not converge");
        d.values.push_back(es.eigenvalues());
        d.vectors.push_back(es.eigenvectors());
    }
    return d;
}

SymMat mat_fn(const SymMat& m, MatFn f, double p, std::optional<double> psd_tol)
{
    const double tol = psd_tol ? *psd_tol : 1e-10 * (1.0 + m.norm());
    const EigenDecomposition d = eig_sym(m);
    std::vector<Mat> blocks;
    blocks.reserve(m.num_blocks());
    for (int j = 0; j < m.num_blocks(); ++j) {
        const Vec& lam = d.values[j];
        if (lam.size() > 0 && !(lam(0) > tol)) {
            std::ostringstream msg;
            msg << "mat_fn: eigenvalue " << lam(0) << " in block " << j << " is not above " << tol;
            fail(ErrorKind::NotPositiveDefinite, msg.str());
        }
        Vec fl(lam.size());
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
            switch (f) {
            case MatFn::Sqrt: fl(i) = std::sqrt(lam(i)); break;
            case MatFn::InvSqrt: fl(i) = 1.0 / std::sqrt(lam(i)); break;
            case MatFn::Inv: fl(i) = 1.0 / lam(i); break;
            case MatFn::Power: fl(i) = std::pow(lam(i), p); break;
            }
        }
        const Mat& q = d.vectors[j];
        blocks.push_back(q * fl.asDiagonal() * q.transpose());
    }
    return SymMat(std::move(blocks));
}

double min_eig(const SymMat& m)
{
    double v = std::numeric_limits<double>::infinity();
    for (const auto& b : m.blocks()) {
        Eigen::SelfAdjointEigenSolver<Mat> es(b, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            fail(ErrorKind::NoConvergence, "min_eig: eigensolver did not converge");
        if (es.eigenvalues().size() > 0)
            v = std::min(v, es.eigenvalues()(0));
    }
    return v;
}

double max_eig(const SymMat& m)
{
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& b : m.blocks()) {
        Eigen::SelfAdjointEigenSolver<Mat> es(b, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success)
            fail(ErrorKind::NoConvergence, "max_eig: eigensolver did not converge");
        if (es.eigenvalues().size() > 0)
            v = std::max(v, es.eigenvalues()(es.eigenvalues().size() - 1));
    }
    return v;
}

bool is_positive_definite(const SymMat& m)
{
    for (const auto& b : m.blocks()) {
        Eigen::LLT<Mat> llt(b);
        if (llt.info() != Eigen::Success)
            return false;
    }
    return true;
}

double cond_estimate(const Mat& m, CondMode mode)
{
    if (m.rows() != m.cols())
        fail(ErrorKind::DimMismatch, "cond_estimate: matrix must be square");
    if (m.rows() == 0)
        return 1.0;
    if (mode == CondMode::Auto)
        mode = m.rows() <= 2000 ? CondMode::ExactSvd : CondMode::PowerIter;

    double smax = 0.0;
    double smin = 0.0;
    if (mode == CondMode::ExactSvd) {
        Eigen::BDCSVD<Mat> svd(m);
        const Vec& s = svd.singularValues();
        smax = s(0);
        smin = s(s.size() - 1);
    } else {
        const Eigen::Index n = m.rows();
        Vec start(n);
        for (Eigen::Index i = 0; i < n; ++i)
            start(i) = 1.0 + 0.1 * static_cast<double>(i % 7);
        start.normalize();

        Vec x = start;
        double lam = 0.0;
        for (int it = 0; it < 30; ++it) {
            Vec y = m.transpose() * (m * x);
            lam = x.dot(y);
            const double ny = y.norm();
            if (ny == 0.0)
                break;
            x = y / ny;
        }
        smax = std::sqrt(std::max(lam, 0.0));

        Eigen::PartialPivLU<Mat> lu(m);
        x = start;
        double mu = 0.0;
        for (int it = 0; it < 30; ++it) {
            Vec y = lu.solve(lu.transpose().solve(x));
            mu = x.dot(y);
            const double ny = y.norm();
            if (!std::isfinite(ny) || ny == 0.0)
                break;
            x = y / ny;
        }
        smin = (mu > 0.0 && std::isfinite(mu)) ? 1.0 / std::sqrt(mu) : 0.0;
    }
    if (!(smin >= 1e-300))
        fail(ErrorKind::Singular, "cond_estimate: smallest singular value below 1e-300");
    return smax / smin;
}

} // namespace refine_sdo
