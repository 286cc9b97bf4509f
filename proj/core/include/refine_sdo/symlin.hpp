#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace refine_sdo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Block sizes n_j of a block-diagonal matrix.
using Layout = std::vector<int>;

inline int svec_length(int n) { return n * (n + 1) / 2; }
int svec_length(const Layout& layout);
int total_dim(const Layout& layout);

class SymMat;

// Block-diagonal square matrix with general (not necessarily symmetric) blocks.
class BlockMatrix {
public:
    BlockMatrix() = default;
    explicit BlockMatrix(std::vector<Mat> blocks);
    BlockMatrix(const SymMat& sym); // NOLINT: implicit by design

    static BlockMatrix identity(const Layout& layout);

    Layout layout() const;
    int num_blocks() const { return static_cast<int>(blocks_.size()); }
    const Mat& block(int j) const { return blocks_[j]; }
    Mat& block(int j) { return blocks_[j]; }
    int total_dim() const;

    BlockMatrix transpose() const;
    BlockMatrix inverse() const;
    Mat to_dense() const;

    friend BlockMatrix operator*(const BlockMatrix& a, const BlockMatrix& b);
    friend BlockMatrix operator+(const BlockMatrix& a, const BlockMatrix& b);
    friend BlockMatrix operator*(double s, const BlockMatrix& a);

private:
    std::vector<Mat> blocks_;
};

class SymMat {
public:
    SymMat() = default;
    // Blocks are symmetrized as (M + Mᵀ)/2.
    explicit SymMat(std::vector<Mat> blocks);
    explicit SymMat(const Mat& single);

    static SymMat zeros(const Layout& layout);
    static SymMat identity(const Layout& layout, double scale = 1.0);

    const Layout& layout() const { return layout_; }
    int num_blocks() const { return static_cast<int>(blocks_.size()); }
    const Mat& block(int j) const { return blocks_[j]; }
    const std::vector<Mat>& blocks() const { return blocks_; }
    int total_dim() const;
    int svec_dim() const { return svec_length(layout_); }

    double trace() const;
    double dot(const SymMat& other) const;
    double norm() const;
    double max_abs() const;
    Mat to_dense() const;

    SymMat& operator+=(const SymMat& other);
    SymMat& operator-=(const SymMat& other);
    SymMat& operator*=(double s);

    friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
    friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
    friend SymMat operator*(double s, SymMat a) { return a *= s; }
    friend SymMat operator*(SymMat a, double s) { return a *= s; }

private:
    std::vector<Mat> blocks_;
    Layout layout_;
};

void require_same_layout(const Layout& a, const Layout& b, const char* where);

// (M + Mᵀ)/2 of a general block matrix.
SymMat sym_part(const BlockMatrix& m);

// T·A·T for symmetric T.
SymMat congruence(const SymMat& a, const SymMat& t);

// Per-block (u11, √2·u21, …, √2·un1, u22, …, unn).
Vec svec(const SymMat& u);
SymMat smat(const Vec& v, const Layout& layout);

// Dense ½U(G⊗K + K⊗G)Uᵀ on the svec space, block-diagonal over blocks.
Mat sym_kron(const BlockMatrix& g, const BlockMatrix& k);
// (G⊗_sK)·v without materializing the operator.
Vec sym_kron_apply(const BlockMatrix& g, const BlockMatrix& k, const Vec& v);

struct EigenDecomposition {
    std::vector<Vec> values;  // ascending per block
    std::vector<Mat> vectors; // orthonormal columns per block

    Vec all_values() const;
};

EigenDecomposition eig_sym(const SymMat& m);

enum class MatFn { Sqrt, InvSqrt, Inv, Power };

// Q f(Λ) Qᵀ. Every eigenvalue must exceed psd_tol; the default is 1e-10·(1 + ‖M‖_F).
SymMat mat_fn(const SymMat& m, MatFn f, double p = 1.0, std::optional<double> psd_tol = std::nullopt);

inline SymMat sqrtm(const SymMat& m, std::optional<double> tol = std::nullopt) { return mat_fn(m, MatFn::Sqrt, 1.0, tol); }
inline SymMat invsqrtm(const SymMat& m, std::optional<double> tol = std::nullopt) { return mat_fn(m, MatFn::InvSqrt, 1.0, tol); }
inline SymMat invm(const SymMat& m, std::optional<double> tol = std::nullopt) { return mat_fn(m, MatFn::Inv, 1.0, tol); }

double min_eig(const SymMat& m);
double max_eig(const SymMat& m);

// Cholesky test, no tolerance.
bool is_positive_definite(const SymMat& m);

enum class CondMode { Auto, ExactSvd, PowerIter };

// σ_max/σ_min of a dense square matrix.
double cond_estimate(const Mat& m, CondMode mode = CondMode::Auto);

} // namespace refine_sdo
