#pragma once

#include <vector>

#include "refine_sdo/symlin.hpp"

namespace refine_sdo {

// Standard: min C•X s.t. A_i•X = b_i, X ⪰ 0; dual max bᵀy s.t. Σy_iA_i + S = C.
// Canonical: min C•X s.t. A_i•X − u_i = b_i, X ⪰ 0, u ≥ 0; dual additionally y ≥ 0.
enum class Form { Standard, Canonical };

const char* to_string(Form form);

struct SdoProblem {
    std::vector<SymMat> A;
    Vec b;
    SymMat C;
    Form form = Form::Standard;

    int m() const { return static_cast<int>(A.size()); }
    const Layout& layout() const { return C.layout(); }
    int n() const { return C.total_dim(); }
    int svec_dim() const { return C.svec_dim(); }

    // Throws DimMismatch/LayoutMismatch on inconsistent data.
    void validate() const;
    // Throws RankDeficient when {svec(A_i)} is not linearly independent.
    void check_rank() const;

    // m × svec_dim matrix whose rows are svec(A_i).
    Mat constraint_matrix() const;
    // Σ y_i A_i.
    SymMat apply_adjoint(const Vec& y) const;
    // (A_i•X)_i.
    Vec apply(const SymMat& x) const;

    // Number of complementary pairs: n, or n + m in canonical form.
    int complementarity_dim() const;
};

struct PrimalDualPoint {
    SymMat X;
    Vec y;
    SymMat S;
    Vec u; // canonical form only

    double gap() const;
};

struct Residuals {
    Vec primal;    // b − A(X) (+ u in canonical form)
    SymMat dual;   // C − Σy_iA_i − S
    double gap;    // X•S (+ uᵀy)
    double mu;     // gap / complementarity_dim

    double primal_norm() const { return primal.norm(); }
    double dual_norm() const { return dual.norm(); }
};

Residuals residuals(const SdoProblem& prob, const PrimalDualPoint& pt);

// ‖X^{1/2}SX^{1/2} − μI‖_F with μ = X•S/n; canonical points (nonempty u) add the
// diagonal entries y_i·u_i − μ and use μ = (X•S + yᵀu)/(n+m).
double neighborhood_distance(const PrimalDualPoint& pt);
double central_mu(const PrimalDualPoint& pt);
bool in_neighborhood(const PrimalDualPoint& pt, double gamma);

enum class ConversionKind { SplitEqualities, SlackBlocks };

// Equivalent reformulation with solution maps in both directions.
struct Conversion {
    ConversionKind kind;
    SdoProblem source;
    SdoProblem target;

    PrimalDualPoint forward(const PrimalDualPoint& source_pt) const;
    PrimalDualPoint backward(const PrimalDualPoint& target_pt) const;
};

// Each equality becomes the pair A_i•X ≥ b_i, −A_i•X ≥ −b_i.
Conversion standard_to_canonical(const SdoProblem& prob);
// The slacks u become 1×1 diagonal blocks appended to X.
Conversion canonical_to_standard(const SdoProblem& prob);

} // namespace refine_sdo
