#pragma once

#include <map>
#include <vector>

#include "crres/expr.hpp"
#include "crres/simplify.hpp"

namespace crres {

using MultiIndex = std::vector<int>; ///< strictly increasing coordinate indices

/// Alternating form with ScalarExpr coefficients over increasing
/// multi-indices on a fixed chart. Zero coefficients are pruned.
class DifferentialForm {
public:
    DifferentialForm() = default;
    DifferentialForm(int degree, CoordsPtr coords);

    static DifferentialForm zero(int degree, CoordsPtr coords);
    static DifferentialForm from_scalar(const ScalarExpr& f);
    /// The coordinate differential dx_i.
    static DifferentialForm d_coord(int i, CoordsPtr coords);

    int degree() const { return degree_; }
    const CoordsPtr& coords() const { return coords_; }
    const std::map<MultiIndex, ScalarExpr>& components() const { return comps_; }
    bool is_zero_form() const { return comps_.empty(); }

    ScalarExpr coefficient(const MultiIndex& idx) const;
    void set_coefficient(const MultiIndex& idx, const ScalarExpr& c);
    /// Adds c * dx_idx where idx need not be sorted; the sorting sign is applied.
    void add_term(MultiIndex idx, ScalarExpr c);

    /// Simplifies every coefficient and prunes canonical zeros.
    DifferentialForm simplified() const;

    DifferentialForm operator+(const DifferentialForm& o) const;
    DifferentialForm operator-(const DifferentialForm& o) const;
    DifferentialForm operator*(const ScalarExpr& s) const;
    DifferentialForm operator-() const;

    /// Coefficientwise zero test; exactness degrades per coefficient verdict.
    ZeroCheck is_zero(const ZeroTestOptions& opt = {}) const;

private:
    int degree_ = 0;
    CoordsPtr coords_;
    std::map<MultiIndex, ScalarExpr> comps_;
    void check(const DifferentialForm& o) const;
};

/// A smooth map between charts: one target-coordinate expression per
/// component, all over the source chart.
struct SmoothMap {
    CoordsPtr source;
    CoordsPtr target;
    std::vector<ScalarExpr> components;

    SmoothMap() = default;
    SmoothMap(CoordsPtr src, CoordsPtr tgt, std::vector<ScalarExpr> comps);

    std::vector<double> apply(const std::vector<double>& pt) const;
    static SmoothMap compose(const SmoothMap& g, const SmoothMap& f); ///< g after f
};

/// Complex vector field: one coefficient per coordinate.
struct VectorField {
    CoordsPtr coords;
    std::vector<ScalarExpr> coeffs;

    VectorField() = default;
    VectorField(CoordsPtr c, std::vector<ScalarExpr> v);

    static VectorField zero(CoordsPtr c);
    static VectorField coordinate(int i, CoordsPtr c); ///< d/dx_i
    /// Holomorphic coordinate field d/dz (or its conjugate) of a complex pair.
    static VectorField wirtinger(const std::string& alias, const CoordsPtr& c,
                                 bool conjugate);

    VectorField operator+(const VectorField& o) const;
    VectorField operator*(const ScalarExpr& s) const;
    VectorField conj() const;

    /// Applies the field to a function: sum_i a_i df/dx_i.
    ScalarExpr apply(const ScalarExpr& f) const;
    /// Lie bracket [this, other].
    VectorField bracket(const VectorField& o) const;
};

DifferentialForm wedge(const DifferentialForm& a, const DifferentialForm& b);
DifferentialForm exterior_derivative(const DifferentialForm& a);
DifferentialForm pullback(const SmoothMap& F, const DifferentialForm& a);
/// Interior product; throws on degree-0 input.
DifferentialForm contract(const VectorField& X, const DifferentialForm& a);

} // namespace crres
