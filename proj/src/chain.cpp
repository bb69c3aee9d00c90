#include "crres/chain.hpp"

namespace crres {

Cell::Cell(SmoothMap p, std::vector<bool> per, int mult)
    : param(std::move(p)), periodic(std::move(per)), multiplicity(mult) {
    if (static_cast<int>(periodic.size()) != param.source->dim())
        throw DomainError("cell needs one periodicity flag per axis");
    if (multiplicity == 0) throw DomainError("cell multiplicity must be nonzero");
}

Chain::Chain(std::vector<Cell> cs) : cells(std::move(cs)) {
    for (std::size_t i = 1; i < cells.size(); ++i) {
        if (cells[i].dim() != cells[0].dim())
            throw DomainError("chain cells must share one dimension");
        if (!same_coords(cells[i].param.target, cells[0].param.target))
            throw DomainError("chain cells must share one chart");
    }
}

const CoordsPtr& Chain::target() const {
    if (cells.empty()) throw DomainError("empty chain has no chart");
    return cells[0].param.target;
}

CoordsPtr cell_coords(int dim, const std::vector<bool>& periodic) {
    std::vector<std::string> names;
    std::vector<std::optional<double>> periods;
    for (int i = 0; i < dim; ++i) {
        names.push_back("t" + std::to_string(i + 1));
        if (i < static_cast<int>(periodic.size()) && periodic[i])
            periods.push_back(1.0);
        else
            periods.push_back(std::nullopt);
    }
    return std::make_shared<Coordinates>(std::move(names), std::move(periods));
}

TubeSpec::TubeSpec(double t, std::vector<AdaptedFrame> fr)
    : radius(t), frames(std::move(fr)) {
    if (!(radius > 0.0 && radius <= 1.0))
        throw DomainError("tube radius must lie in (0, 1]");
    if (frames.empty()) throw DomainError("tube needs at least one divisor frame");
}

namespace {

/// Ambient offsets (du, dv) with s(u0+du, v0+dv) = s(u0,v0) + t e^{i theta}
/// for an affine defining function; requires the real 2x2 system from the
/// linear part to be invertible (equivalent to ds /\ conj(ds) != 0).
struct CircleOffset {
    double a11, a12, a21, a22; // [du; dv] = t * A [cos; sin]
};

CircleOffset circle_offset(const AdaptedFrame& fr) {
    if (!fr.affine())
        throw DomainError("tube construction requires a defining function affine "
                          "in its adapted pair");
    auto [c1, c2] = fr.linear_part();
    double m11 = c1.re.convert_to<double>();
    double m12 = c2.re.convert_to<double>();
    double m21 = c1.im.convert_to<double>();
    double m22 = c2.im.convert_to<double>();
    double det = m11 * m22 - m12 * m21;
    if (std::abs(det) < 1e-14)
        throw DomainError("adapted pair is degenerate for the tube construction");
    return {m22 / det, -m12 / det, -m21 / det, m11 / det};
}

ScalarExpr rational_const(double x, const CoordsPtr& C) {
    // tube radii and offsets are binary rationals in practice; fall back to
    // a 1e-12 rational approximation otherwise
    Rat r(static_cast<long long>(std::llround(x * 4294967296.0)), 4294967296LL);
    return ScalarExpr::constant(CRat(r), C);
}

Cell tube_cell(const Cell& base_ambient, const AdaptedFrame& fr, double t) {
    const CoordsPtr& ambient = base_ambient.param.target;
    int p = base_ambient.dim();
    std::vector<bool> periodic;
    periodic.push_back(true);
    periodic.insert(periodic.end(), base_ambient.periodic.begin(),
                    base_ambient.periodic.end());
    CoordsPtr P = cell_coords(p + 1, periodic);

    // lift the base parametrization to the extended parameter chart
    std::vector<ScalarExpr> shift;
    for (int i = 0; i < p; ++i)
        shift.push_back(ScalarExpr::coordinate(i + 1, P));
    SmoothMap lift(P, base_ambient.param.source, std::move(shift));
    SmoothMap based = SmoothMap::compose(base_ambient.param, lift);

    CircleOffset A = circle_offset(fr);
    ScalarExpr theta = ScalarExpr::constant(CRat(2), P) * ScalarExpr::pi(P) *
                       ScalarExpr::coordinate(0, P);
    ScalarExpr c = ScalarExpr::cos(theta);
    ScalarExpr sn = ScalarExpr::sin(theta);
    ScalarExpr du =
        rational_const(t * A.a11, P) * c + rational_const(t * A.a12, P) * sn;
    ScalarExpr dv =
        rational_const(t * A.a21, P) * c + rational_const(t * A.a22, P) * sn;

    std::vector<ScalarExpr> comps = based.components;
    comps[fr.u] = comps[fr.u] + du;
    comps[fr.v] = comps[fr.v] + dv;
    return Cell(SmoothMap(P, ambient, std::move(comps)), periodic,
                base_ambient.multiplicity);
}

} // namespace

Chain tube(const Chain& gamma, const SmoothMap& into_ambient, const TubeSpec& spec) {
    if (spec.frames.size() != 1)
        throw DomainError("tube expects a single divisor frame");
    return torus_tube(gamma, into_ambient, spec);
}

Chain torus_tube(const Chain& gamma, const SmoothMap& into_ambient,
                 const TubeSpec& spec) {
    if (gamma.cells.empty()) throw DomainError("tube of an empty chain");
    if (!same_coords(gamma.target(), into_ambient.source))
        throw DomainError("tube: chain must live in the locus parameter chart");
    std::vector<Cell> cells;
    for (const auto& cell : gamma.cells) {
        // push the cell into the ambient chart through the parametrization
        SmoothMap ambient = SmoothMap::compose(into_ambient, cell.param);
        Cell cur(ambient, cell.periodic, cell.multiplicity);
        for (const auto& fr : spec.frames)
            cur = tube_cell(cur, fr, spec.radius);
        cells.push_back(std::move(cur));
    }
    return Chain(std::move(cells));
}

} // namespace crres
