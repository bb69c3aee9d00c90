#pragma once

#include "crres/residue.hpp"

namespace crres {

/// A parametrized cell: a smooth map from the unit cube (some axes
/// periodic) into a chart, with an integer multiplicity.
struct Cell {
    SmoothMap param;
    std::vector<bool> periodic; ///< one flag per cube axis
    int multiplicity = 1;

    Cell() = default;
    Cell(SmoothMap p, std::vector<bool> per, int mult = 1);
    int dim() const { return param.source->dim(); }
};

/// Formal integer combination of cells over a common chart.
struct Chain {
    std::vector<Cell> cells;

    Chain() = default;
    explicit Chain(std::vector<Cell> cs);
    int dim() const { return cells.empty() ? 0 : cells[0].dim(); }
    const CoordsPtr& target() const;
};

/// Fresh parameter coordinates t1..tp for cells.
CoordsPtr cell_coords(int dim, const std::vector<bool>& periodic);

struct TubeSpec {
    double radius = 0.5;
    std::vector<AdaptedFrame> frames;

    TubeSpec(double t, std::vector<AdaptedFrame> fr);
};

/// The circle-bundle cycle of the given radius around the polar locus:
/// gamma lives in the parameter chart of into_ambient (the locus
/// parametrization); the result lives in the ambient chart with the circle
/// parameter prepended (counterclockwise, normalized so that the residue
/// formula holds with +2 pi i).
Chain tube(const Chain& gamma, const SmoothMap& into_ambient, const TubeSpec& spec);

/// m-fold torus tube across a normal-crossing divisor list: equal to the
/// iterated tube taken in divisor order (first divisor innermost, its
/// circle parameter last). into_ambient parametrizes the intersection.
Chain torus_tube(const Chain& gamma, const SmoothMap& into_ambient,
                 const TubeSpec& spec);

} // namespace crres
