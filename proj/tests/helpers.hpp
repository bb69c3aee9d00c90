#pragma once

// Shared chart builders for the test suites.

#include <random>

#include "crres/integrate.hpp"

namespace crres::testing {

struct Plane { // C with z = x1 + i x2
    CoordsPtr C;
    CRChartPtr chart;
    ScalarExpr z;
    AdaptedFrame frame;
    PolarSubmanifold origin; ///< S = {z = 0}
    DifferentialForm dz;

    Plane() {
        auto c = std::make_shared<Coordinates>(std::vector<std::string>{"x1", "x2"});
        c->add_complex_alias("z", 0, 1);
        C = c;
        chart = std::make_shared<CRChart>(
            C, 1, 0,
            std::vector<VectorField>{VectorField::wirtinger("z", C, true)});
        z = ScalarExpr::complex_alias("z", C);
        frame = AdaptedFrame::derive(C, z, "x1", "x2");
        auto p0 = std::make_shared<Coordinates>(std::vector<std::string>{});
        CoordsPtr P0 = p0;
        SmoothMap incl(P0, C,
                       {ScalarExpr::integer(0, P0), ScalarExpr::integer(0, P0)});
        CRChart sub(P0, 0, 0, {});
        origin = PolarSubmanifold(chart, incl, z, sub);
        dz = exterior_derivative(DifferentialForm::from_scalar(z));
    }

    SemiMeromorphicForm mero(const DifferentialForm& num, int q) const {
        return SemiMeromorphicForm(num, {PoleEntry{origin, frame, q}});
    }

    Chain point_cycle() const {
        CoordsPtr P0 = origin.param.source;
        return Chain({Cell(SmoothMap(P0, P0, {}), {}, 1)});
    }
};

struct Torus3 { // T^3 with z = x1 + i x2 and periodic x3
    CoordsPtr C;
    CRChartPtr chart;
    ScalarExpr z;
    AdaptedFrame frame;
    PolarSubmanifold circle; ///< S = {z = 0}, parametrized by u1 (period 1)
    DifferentialForm dz, dx3;

    Torus3() {
        auto c = std::make_shared<Coordinates>(
            std::vector<std::string>{"x1", "x2", "x3"});
        c->set_period(0, 1.0);
        c->set_period(1, 1.0);
        c->set_period(2, 1.0);
        c->add_complex_alias("z", 0, 1);
        C = c;
        chart = std::make_shared<CRChart>(
            C, 1, 1,
            std::vector<VectorField>{VectorField::wirtinger("z", C, true)});
        z = ScalarExpr::complex_alias("z", C);
        frame = AdaptedFrame::derive(C, z, "x1", "x2");
        auto p = std::make_shared<Coordinates>(std::vector<std::string>{"u1"});
        p->set_period(0, 1.0);
        CoordsPtr P = p;
        SmoothMap param(P, C,
                        {ScalarExpr::integer(0, P), ScalarExpr::integer(0, P),
                         ScalarExpr::coordinate(0, P)});
        CRChart sub(P, 0, 1, {});
        circle = PolarSubmanifold(chart, param, z, sub);
        dz = exterior_derivative(DifferentialForm::from_scalar(z));
        dx3 = DifferentialForm::d_coord(2, C);
    }

    SemiMeromorphicForm mero(const DifferentialForm& num, int q) const {
        return SemiMeromorphicForm(num, {PoleEntry{circle, frame, q}});
    }

    Chain s_circle() const {
        CoordsPtr P = circle.param.source;
        auto t1 = std::make_shared<Coordinates>(std::vector<std::string>{"t1"});
        t1->set_period(0, 1.0);
        CoordsPtr T1 = t1;
        return Chain({Cell(SmoothMap(T1, P, {ScalarExpr::coordinate(0, T1)}),
                           {true}, 1)});
    }

    /// The same circle as an ambient-chart chain (for Abel components).
    Chain s_circle_ambient() const {
        auto t1 = std::make_shared<Coordinates>(std::vector<std::string>{"t1"});
        t1->set_period(0, 1.0);
        CoordsPtr T1 = t1;
        return Chain({Cell(SmoothMap(T1, C,
                                     {ScalarExpr::integer(0, T1),
                                      ScalarExpr::integer(0, T1),
                                      ScalarExpr::coordinate(0, T1)}),
                           {true}, 1)});
    }
};

struct C2 { // C^2 with z1, z2
    CoordsPtr C;
    CRChartPtr chart;
    ScalarExpr z1, z2;
    AdaptedFrame f1, f2;
    PolarSubmanifold S1, S2;
    SmoothMap origin; ///< intersection parametrization (a point)
    DifferentialForm dz1, dz2;

    C2() {
        auto c = std::make_shared<Coordinates>(
            std::vector<std::string>{"x1", "x2", "x3", "x4"});
        c->add_complex_alias("z1", 0, 1);
        c->add_complex_alias("z2", 2, 3);
        C = c;
        chart = std::make_shared<CRChart>(
            C, 2, 0,
            std::vector<VectorField>{VectorField::wirtinger("z1", C, true),
                                     VectorField::wirtinger("z2", C, true)});
        z1 = ScalarExpr::complex_alias("z1", C);
        z2 = ScalarExpr::complex_alias("z2", C);
        f1 = AdaptedFrame::derive(C, z1, "x1", "x2");
        f2 = AdaptedFrame::derive(C, z2, "x3", "x4");
        auto q = std::make_shared<Coordinates>(std::vector<std::string>{"y1", "y2"});
        q->add_complex_alias("w", 0, 1);
        CoordsPtr Q = q;
        SmoothMap p1(Q, C,
                     {ScalarExpr::integer(0, Q), ScalarExpr::integer(0, Q),
                      ScalarExpr::coordinate(0, Q), ScalarExpr::coordinate(1, Q)});
        SmoothMap p2(Q, C,
                     {ScalarExpr::coordinate(0, Q), ScalarExpr::coordinate(1, Q),
                      ScalarExpr::integer(0, Q), ScalarExpr::integer(0, Q)});
        CRChart subchart(Q, 1, 0,
                         std::vector<VectorField>{
                             VectorField::wirtinger("w", Q, true)});
        S1 = PolarSubmanifold(chart, p1, z1, subchart);
        S2 = PolarSubmanifold(chart, p2, z2, subchart);
        auto p0 = std::make_shared<Coordinates>(std::vector<std::string>{});
        CoordsPtr P0 = p0;
        origin = SmoothMap(P0, C,
                           {ScalarExpr::integer(0, P0), ScalarExpr::integer(0, P0),
                            ScalarExpr::integer(0, P0), ScalarExpr::integer(0, P0)});
        dz1 = exterior_derivative(DifferentialForm::from_scalar(z1));
        dz2 = exterior_derivative(DifferentialForm::from_scalar(z2));
    }

    SemiMeromorphicForm mero(const DifferentialForm& num, int q1, int q2) const {
        return SemiMeromorphicForm(
            num, {PoleEntry{S1, f1, q1}, PoleEntry{S2, f2, q2}});
    }

    Chain point_cycle() const {
        CoordsPtr P0 = origin.source;
        return Chain({Cell(SmoothMap(P0, P0, {}), {}, 1)});
    }
};

/// Random polynomial in z alone (a CR coefficient) with rational
/// complex coefficients.
inline ScalarExpr random_z_poly(const ScalarExpr& z, int maxdeg, std::mt19937& rng) {
    std::uniform_int_distribution<int> coeff(-4, 4);
    const CoordsPtr& C = z.coords();
    ScalarExpr acc = ScalarExpr::integer(0, C);
    for (int d = 0; d <= maxdeg; ++d)
        acc = acc + z.pow(d) * ScalarExpr::constant(
                                   CRat(Rat(coeff(rng)), Rat(coeff(rng))), C);
    return acc;
}

inline bool exact_zero(const ScalarExpr& e) {
    return is_zero(e).verdict == Verdict::ExactZero;
}

inline bool exact_zero(const DifferentialForm& w) {
    return w.is_zero().verdict == Verdict::ExactZero;
}

} // namespace crres::testing
