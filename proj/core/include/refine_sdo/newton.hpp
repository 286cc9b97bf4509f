#pragma once

#include <string>

#include "refine_sdo/embedding.hpp"
#include "refine_sdo/model.hpp"
#include "refine_sdo/solvers.hpp"

namespace refine_sdo {

// NT: P = W^{-1/2}; HKM: P = S^{1/2}; AHO: P = I.
enum class Scaling { NT, HKM, AHO };

const char* to_string(Scaling s);

// The matrix W ≻ 0 with W·S·W = X.
SymMat nt_scaling_point(const SymMat& x, const SymMat& s);
// Same point through the S^{-1/2}(S^{1/2}XS^{1/2})^{1/2}S^{-1/2} form.
SymMat nt_scaling_point_dual_form(const SymMat& x, const SymMat& s);

SymMat scaling_matrix(const SymMat& x, const SymMat& s, Scaling choice);
SymMat scaling_matrix(const PrimalDualPoint& pt, Scaling choice);

// ½(P·M·P⁻¹ + P⁻ᵀ·Mᵀ·Pᵀ). Throws SingularScaling when cond(P) ≥ 1e12.
SymMat h_p(const BlockMatrix& p, const BlockMatrix& m);

// Factors of E_s = P ⊗_s P⁻ᵀS and F_s = PX ⊗_s P⁻ᵀ.
struct ScaledFactors {
    BlockMatrix e_g; // P
    BlockMatrix e_k; // P⁻ᵀS
    BlockMatrix f_g; // PX
    BlockMatrix f_k; // P⁻ᵀ
};

ScaledFactors scaled_factors(const SymMat& x, const SymMat& s, const SymMat& p);
Mat e_operator(const ScaledFactors& f);
Mat f_operator(const ScaledFactors& f);

// Orthonormal basis of {x : A_s·x = 0}. Throws RankDeficient.
Mat nullspace_basis(const Mat& as);

// QR data of A_sᵀ shared by every Newton system of one problem.
struct ConstraintBasis {
    Layout layout;
    Mat As;   // m × d
    Mat Q1;   // d × m, spans the row space of A_s
    Mat Q2;   // d × (d − m), spans the null space
    Mat AsQ1; // m × m

    // Minimum-norm x with A_s·x = r.
    Vec particular(const Vec& r) const;
};

ConstraintBasis make_constraint_basis(const Mat& as, const Layout& layout);
ConstraintBasis make_constraint_basis(const SdoProblem& prob);

enum class OssKind { Standard, SelfDual };

struct OssSystem {
    OssKind kind = OssKind::Standard;
    Mat M;     // empty when assembled matrix-free
    Vec rhs;
    Mat basis; // Q₂ or V
    Scaling scaling = Scaling::NT;
    double mu = 0.0;
    double sigma = 0.0;
    int m = 0;
    Layout layout;

    // Standard form only.
    Mat As;
    ScaledFactors factors;
    Vec x_shift; // particular part of svec(ΔX); zero for feasible points
    Vec s_shift; // particular part of svec(ΔS); zero for feasible points

    int dim() const { return static_cast<int>(rhs.size()); }
};

// M = [E_sQ₂, −F_sA_sᵀ], rhs = svec(σμI − H_P(XS)).
OssSystem assemble_oss_standard(const SdoProblem& prob, const ConstraintBasis& basis, const PrimalDualPoint& pt,
                                const SymMat& p, double sigma, double mu, bool materialize = true);

// Same matrix with a right-hand side that also removes the primal and dual residuals:
// rhs = svec(σμI − H_P(XS)) − E_s·x_p − F_s·svec(R_d).
OssSystem assemble_oss_standard_infeasible(const SdoProblem& prob, const ConstraintBasis& basis,
                                           const PrimalDualPoint& pt, const SymMat& p, double sigma, double mu,
                                           bool materialize = true);

// Products with [E_sQ₂, −F_sA_sᵀ] without forming it.
class StandardOssOperator : public LinearOperator {
public:
    explicit StandardOssOperator(const OssSystem& sys) : sys_(sys) {}
    Eigen::Index size() const override { return sys_.dim(); }
    Vec apply(const Vec& x) const override;
    Vec apply_transpose(const Vec& x) const override;

private:
    const OssSystem& sys_;
};

struct StandardDirection {
    SymMat dX;
    Vec dy;
    SymMat dS;
};

// ΔX = smat(x_shift + Q₂λ), ΔS = smat(s_shift − A_sᵀΔy).
StandardDirection recover_direction_standard(const Vec& lambda, const Vec& dy, const OssSystem& sys);
StandardDirection recover_direction_standard(const Vec& solution, const OssSystem& sys);

// Skew matrix K of the embedding on z = (y, svec X, τ, θ): w = Kz + (0, 0, 0, N).
Mat selfdual_skew_matrix(const SelfDualProblem& emb);
// [I, −K] acting on (Δu, svec ΔS, Δφ, Δρ, Δy, svec ΔX, Δτ, Δθ).
Mat selfdual_constraint_matrix(const SelfDualProblem& emb);
// V = [−K; −I]; its columns span the null space of the constraint matrix.
Mat selfdual_basis(const SelfDualProblem& emb);

// M = D·V, rhs = (σμe − Yu, svec(σμI − H_P(XS)), σμ − τφ, σμ − θρ).
OssSystem assemble_oss_selfdual(const SelfDualProblem& emb, const Mat& v, const SelfDualPoint& pt, double sigma,
                                double mu, Scaling scaling);
OssSystem assemble_oss_selfdual(const SelfDualProblem& emb, const SelfDualPoint& pt, double sigma, double mu,
                                Scaling scaling);

// (Δu, svec ΔS, Δφ, Δρ, Δy, svec ΔX, Δτ, Δθ) = Vλ.
SelfDualDelta recover_direction_selfdual(const Vec& lambda, const OssSystem& sys);

} // namespace refine_sdo
