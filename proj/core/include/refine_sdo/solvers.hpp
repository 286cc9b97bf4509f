#pragma once

#include <cstdint>

#include "refine_sdo/symlin.hpp"

namespace refine_sdo {

// Square operator known only through products with M and Mᵀ.
class LinearOperator {
public:
    virtual ~LinearOperator() = default;
    virtual Eigen::Index size() const = 0;
    virtual Vec apply(const Vec& x) const = 0;
    virtual Vec apply_transpose(const Vec& x) const = 0;
};

class DenseOperator : public LinearOperator {
public:
    explicit DenseOperator(const Mat& m) : m_(m) {}
    Eigen::Index size() const override { return m_.rows(); }
    Vec apply(const Vec& x) const override { return m_ * x; }
    Vec apply_transpose(const Vec& x) const override { return m_.transpose() * x; }

private:
    const Mat& m_;
};

// Wraps an operator and counts every product taken through it.
class CountingOperator : public LinearOperator {
public:
    explicit CountingOperator(const LinearOperator& inner) : inner_(inner) {}
    Eigen::Index size() const override { return inner_.size(); }
    Vec apply(const Vec& x) const override;
    Vec apply_transpose(const Vec& x) const override;

    std::int64_t products() const { return forward_ + transpose_; }
    std::int64_t forward_products() const { return forward_; }
    std::int64_t transpose_products() const { return transpose_; }

private:
    const LinearOperator& inner_;
    mutable std::int64_t forward_ = 0;
    mutable std::int64_t transpose_ = 0;
};

enum class SolveMethod { Direct, IterativeNormal };

const char* to_string(SolveMethod method);

struct SolveReport {
    Vec solution;
    double residual_norm = 0.0; // ‖M·solution − v‖₂, recomputed
    int iterations = 0;
    SolveMethod method = SolveMethod::Direct;
    bool converged = true;
};

// LU with partial pivoting. Throws Singular when the reciprocal condition estimate vanishes.
SolveReport solve_direct(const Mat& m, const Vec& v);

// Conjugate gradients on MᵀMu = Mᵀv using only products with M and Mᵀ.
// Stops once ‖Mu − v‖ ≤ tol_abs or after max_iter iterations. Takes at most
// 2·max_iter + 1 products. converged = false flags a missed tolerance.
SolveReport solve_iterative_normal(const LinearOperator& m, const Vec& v, double tol_abs, int max_iter);
SolveReport solve_iterative_normal(const Mat& m, const Vec& v, double tol_abs, int max_iter);

// Throws NonConverged if the report missed its tolerance.
void require_converged(const SolveReport& report);

// ⌈2κ·ln(1/tol_rel)⌉, at least 1.
int default_max_iter(double kappa, double tol_rel);

// Power iteration on MᵀM.
double spectral_norm_estimate(const LinearOperator& m, int iterations = 20);

// βμ/‖M‖.
double newton_tolerance(double beta, double mu, double norm_m);
// βμ/(1.05·‖M‖_est) with ‖M‖_est from 20 power iterations.
double newton_tolerance(double beta, double mu, const LinearOperator& m);
double newton_tolerance(double beta, double mu, const Mat& m);

} // namespace refine_sdo
