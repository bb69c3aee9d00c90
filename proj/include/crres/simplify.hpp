#pragma once

#include <optional>
#include <vector>

#include "crres/expr.hpp"

namespace crres {

/// Canonical simplification: rational normal form over atoms
/// (coordinates, pi, exp/sin/cos of canonical arguments), with conjugation
/// pushed onto constants and denominators kept factored. Idempotent.
ScalarExpr simplify(const ScalarExpr& e);

enum class Verdict : std::uint8_t {
    ExactZero,
    ExactNonzero,
    ProbablyZero,    ///< sampled, |e| <= tol at all points
    ProbablyNonzero, ///< sampled, witness found
    Undecidable      ///< persistent evaluation failures
};

struct SampleBox {
    std::vector<double> lo, hi;
    static SampleBox unit(int dim, double a = 0.1, double b = 0.9);
};

struct ZeroCheck {
    Verdict verdict = Verdict::Undecidable;
    std::vector<double> witness; ///< sample point for a nonzero verdict
    bool zero() const {
        return verdict == Verdict::ExactZero || verdict == Verdict::ProbablyZero;
    }
    bool exact() const {
        return verdict == Verdict::ExactZero || verdict == Verdict::ExactNonzero;
    }
};

struct ZeroTestOptions {
    double tol = 1e-9;
    int samples = 64;
    unsigned seed = 0x5eed;
    std::optional<SampleBox> box; ///< defaults to the unit box per coordinate
    /// Monomial budget before the exact cross-multiplied test falls back
    /// to sampling.
    std::size_t budget = 200000;
};

/// Decides whether e is identically zero. Exact for the rational class
/// (no transcendental atoms); probabilistic otherwise, flagged as such.
ZeroCheck is_zero(const ScalarExpr& e, const ZeroTestOptions& opt = {});

/// True when the expression contains no exp/sin/cos/pi atoms.
bool is_rational_class(const ScalarExpr& e);

/// Exact division of the canonical numerator polynomials of num by the
/// polynomial den. Succeeds only when den is a plain polynomial dividing
/// every fraction numerator of num; the denominators of num are untouched.
std::optional<ScalarExpr> divide_exact(const ScalarExpr& num, const ScalarExpr& den);

} // namespace crres
