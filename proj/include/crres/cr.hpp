#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crres/form.hpp"

namespace crres {

/// One named condition outcome inside a structure report.
struct CheckItem {
    std::string name;
    bool pass = false;
    bool exact = true; ///< false when a probabilistic verdict was involved
    std::string detail;
};

struct CheckReport {
    std::vector<CheckItem> items;
    bool pass() const {
        for (const auto& it : items)
            if (!it.pass) return false;
        return true;
    }
    bool exact() const {
        for (const auto& it : items)
            if (!it.exact) return false;
        return true;
    }
    void add(std::string name, bool pass, bool exact = true, std::string detail = {}) {
        items.push_back({std::move(name), pass, exact, std::move(detail)});
    }
};

/// A coordinate chart of a CR manifold of type (n,k): dimension 2n+k with a
/// declared frame L_1..L_n spanning the antiholomorphic tangent bundle.
struct CRChart {
    CoordsPtr coords;
    int n = 0;
    int k = 0;
    std::vector<VectorField> frame;

    CRChart() = default;
    CRChart(CoordsPtr c, int n_, int k_, std::vector<VectorField> fr);
};

using CRChartPtr = std::shared_ptr<const CRChart>;

/// A polar locus: codimension-two CR submanifold transversal to the Levi
/// distribution, given by a parametrization and a defining function.
struct PolarSubmanifold {
    CRChartPtr host;
    SmoothMap param;  ///< parameter chart -> host chart
    ScalarExpr s;     ///< defining function on the host chart
    std::optional<CRChart> sub_chart; ///< induced CR structure on parameters

    PolarSubmanifold() = default;
    PolarSubmanifold(CRChartPtr h, SmoothMap p, ScalarExpr s_,
                     std::optional<CRChart> sub = std::nullopt);
};

struct StructureOptions {
    int samples = 32;
    double tol = 1e-8;
    unsigned seed = 0xC0FFEE;
    ZeroTestOptions zero;
};

/// Decides [L_i, L_j] in span{L_1..L_n} for every pair; exact Gaussian
/// elimination over the rational-function field when coefficients allow,
/// sampled least-squares otherwise.
CheckReport check_integrability(const CRChart& chart,
                                const StructureOptions& opt = {});

/// f is CR iff every frame field annihilates it.
CheckReport check_cr_function(const CRChart& chart, const ScalarExpr& f,
                              const StructureOptions& opt = {});

/// Membership of a degree-p form in the p-th ideal power plus the
/// tangential closedness condition: all frame contractions of a and of da
/// vanish identically.
CheckReport check_cr_form(const CRChart& chart, const DifferentialForm& a,
                          const StructureOptions& opt = {});

/// Verifies the polar invariants: s vanishes on the image, ds is nonzero,
/// the frame annihilates s along the image, ds and its conjugate stay
/// independent, and T S + HM spans the tangent space at samples.
CheckReport check_polar(const PolarSubmanifold& sub,
                        const StructureOptions& opt = {});

} // namespace crres
