#pragma once

#include "crres/cr.hpp"

namespace crres {

/// The declared splitting of the coframe into ds, its conjugate, and the
/// leaf-transverse coordinate differentials. Carries the dual field d/ds
/// with <ds, X> = 1, <conj(ds), X> = 0, <dx_i, X> = 0.
struct AdaptedFrame {
    CoordsPtr coords;
    ScalarExpr s;
    int u = -1; ///< adapted coordinate pair realizing s
    int v = -1;
    VectorField dual; ///< d/ds

    AdaptedFrame() = default;

    /// Derives the dual field by inverting the (u,v)-Jacobian of (s, conj s).
    /// Requires s to depend only on the adapted pair.
    static AdaptedFrame derive(const CoordsPtr& coords, const ScalarExpr& s,
                               const std::string& u_name, const std::string& v_name);

    /// True when s is affine in (u, v) with constant partials; tube
    /// construction requires this.
    bool affine() const;
    /// Constant partials (s_u, s_v) when affine.
    std::pair<CRat, CRat> linear_part() const;
};

/// Numerator form with an ordered pole divisor:
/// phi = omega / (s_1^{q_1} ... s_m^{q_m}).
struct PoleEntry {
    PolarSubmanifold sub;
    AdaptedFrame frame;
    int order = 1;
};

struct SemiMeromorphicForm {
    DifferentialForm numerator;
    std::vector<PoleEntry> divisor;

    SemiMeromorphicForm() = default;
    SemiMeromorphicForm(DifferentialForm num, std::vector<PoleEntry> div);

    int degree() const { return numerator.degree(); }
    const CoordsPtr& coords() const { return numerator.coords(); }

    /// The literal rational-coefficient form omega / prod s_j^{q_j}.
    DifferentialForm as_form() const;
    /// d phi = 0 on the pole complement, checked on the cross-multiplied
    /// smooth form.
    ZeroCheck closedness(const ZeroTestOptions& opt = {}) const;
    /// Divides the numerator by s when exactly possible, lowering the order.
    SemiMeromorphicForm cancel_pole_factors() const;
};

struct ResidueResult {
    DifferentialForm residue;     ///< in the parameter coordinates of S
    DifferentialForm ambient_rep; ///< representative before pullback
    Verdict input_closed = Verdict::Undecidable;
    Verdict residue_closed = Verdict::Undecidable;
    std::optional<bool> residue_cr; ///< set when S carries a CR structure
    bool residue_cr_exact = true;
    std::string sign_convention = "operators applied last divisor first";
};

/// omega = alpha + ds /\ beta with beta = contract(d/ds, omega).
std::pair<DifferentialForm, DifferentialForm> decompose(const DifferentialForm& w,
                                                        const AdaptedFrame& fr);

/// The ds-component of d(lambda); lambda must carry no ds component.
DifferentialForm d_ds(const DifferentialForm& lambda, const AdaptedFrame& fr);

/// (d/ds)^r (d0/ds) omega.
DifferentialForm iterate_ds(const DifferentialForm& w, const AdaptedFrame& fr, int r);

/// Simple pole: residue form = (d0 omega/ds)|_S.
ResidueResult residue_simple(const SemiMeromorphicForm& phi,
                             const ZeroTestOptions& opt = {});

/// Order q >= 1: (1/(q-1)!) (d^{q-1} omega/ds^q)|_S.
ResidueResult residue_class(const SemiMeromorphicForm& phi,
                            const ZeroTestOptions& opt = {});

/// One reduction step for q >= 2: returns (phi_hat of order q-1, rho of
/// order q-1) with phi_hat = phi - d(rho).
std::pair<SemiMeromorphicForm, SemiMeromorphicForm>
reduce_pole(const SemiMeromorphicForm& phi, const ZeroTestOptions& opt = {});

struct LaurentExpansion {
    /// eta[j] is the numerator of the exact correction at order j+1, i.e.
    /// phi = simple + d( sum_j eta[j] / s^{j+1} ).
    std::vector<DifferentialForm> eta;
    SemiMeromorphicForm simple;
    ResidueResult residue;
};

LaurentExpansion laurent_expand(const SemiMeromorphicForm& phi,
                                const ZeroTestOptions& opt = {});

/// Iterated residue across a normal-crossing divisor list, pulled back to
/// the supplied parametrization of the intersection. Operators are applied
/// for the last divisor first; swapping adjacent divisors negates the
/// representative.
ResidueResult residue_multi(const SemiMeromorphicForm& phi,
                            const SmoothMap& intersection,
                            const ZeroTestOptions& opt = {});

/// The multivariable operator of the iterated calculus applied in ambient
/// coordinates, including the 1/prod (q_j - 1)! scaling (no pullback).
DifferentialForm multi_residue_representative(const SemiMeromorphicForm& phi);

} // namespace crres
