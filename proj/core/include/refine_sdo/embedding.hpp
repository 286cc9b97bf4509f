#pragma once

#include "refine_sdo/model.hpp"

namespace refine_sdo {

// Homogeneous self-dual embedding of a canonical problem:
//   min Nθ,  N = n + m + 2
//   u = A(X) − bτ + b̄θ
//   S = −Σy_jA_j + Cτ − C̄θ
//   φ = bᵀy − C•X + ōθ
//   ρ = −b̄ᵀy + C̄•X − ōτ + N
// with all of y, X, τ, θ, u, S, φ, ρ nonnegative / PSD.
struct SelfDualProblem {
    SdoProblem base;
    Vec bbar;   // b_i + 1 − A_i•I
    SymMat Cbar; // C − I − Σ_j A_j
    double obar = 0.0; // 1 + C•I − bᵀe

    int m() const { return base.m(); }
    int n() const { return base.n(); }
    // n + m + 2
    int complementarity_dim() const { return base.n() + base.m() + 2; }
};

struct SelfDualPoint {
    Vec y;
    SymMat X;
    double tau = 0.0;
    double theta = 0.0;
    Vec u;
    SymMat S;
    double phi = 0.0;
    double rho = 0.0;

    double complementarity() const;
};

struct SelfDualDelta {
    Vec du;
    SymMat dS;
    double dphi = 0.0;
    double drho = 0.0;
    Vec dy;
    SymMat dX;
    double dtau = 0.0;
    double dtheta = 0.0;
};

SelfDualPoint add_scaled(const SelfDualPoint& pt, double alpha, const SelfDualDelta& d);

SelfDualProblem build_embedding(const SdoProblem& canonical);

// y = u = e, X = S = I, τ = θ = φ = ρ = 1.
SelfDualPoint initial_point(const SelfDualProblem& emb);

// Residuals of the four constraint groups, written as (computed − stated) for u, S, φ, ρ.
struct EmbeddingResiduals {
    Vec u;
    SymMat S;
    double phi = 0.0;
    double rho = 0.0;

    double norm() const;
};

EmbeddingResiduals embedding_residuals(const SelfDualProblem& emb, const SelfDualPoint& pt);

double selfdual_mu(const SelfDualProblem& emb, const SelfDualPoint& pt);
// Frobenius distance of all complementarity products to μ.
double selfdual_distance(const SelfDualProblem& emb, const SelfDualPoint& pt);

enum class OutcomeKind { Optimal, ImprovingRay, NoComplementaryPair };

const char* to_string(OutcomeKind kind);

struct Outcome {
    OutcomeKind kind;
    // Optimal: (X/τ, y/τ, S/τ, u/τ). ImprovingRay: the raw embedding block.
    PrimalDualPoint point;
    double tau = 0.0;
    double phi = 0.0;
};

Outcome extract_solution(const SelfDualPoint& pt, double tol);

} // namespace refine_sdo
