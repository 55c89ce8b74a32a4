#include "dgreedy/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dgreedy/parallel.hpp"

namespace dgreedy {

namespace {

using Local = std::array<double, 4>;

struct ShapeEval {
    Local v{};
    Local dx{};
    Local dy{};
};

ShapeEval shape(double xi, double eta, double h) {
    ShapeEval s;
    s.v = {(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta};
    s.dx = {-(1 - eta) / h, (1 - eta) / h, -eta / h, eta / h};
    s.dy = {-(1 - xi) / h, -xi / h, (1 - xi) / h, xi / h};
    return s;
}

const double kGauss2[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
const double kGauss3[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
const double kGauss3w[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

bool needs_gradient(Kind k, bool trial) {
    switch (k) {
        case Kind::stiff:
        case Kind::dxdx:
        case Kind::dxdy:
        case Kind::dydx:
        case Kind::dydy:
            return true;
        case Kind::conv_x:
        case Kind::conv_y:
            return trial;
        case Kind::adjconv_x:
        case Kind::adjconv_y:
            return !trial;
        default:
            return false;
    }
}

double integrand(Kind k, const ShapeEval& t, int a, const ShapeEval& s, int b) {
    // a: trial local index, b: test local index
    switch (k) {
        case Kind::mass: return t.v[a] * s.v[b];
        case Kind::stiff: return t.dx[a] * s.dx[b] + t.dy[a] * s.dy[b];
        case Kind::conv_x: return t.dx[a] * s.v[b];
        case Kind::conv_y: return t.dy[a] * s.v[b];
        case Kind::adjconv_x: return t.v[a] * s.dx[b];
        case Kind::adjconv_y: return t.v[a] * s.dy[b];
        case Kind::dxdx: return t.dx[a] * s.dx[b];
        case Kind::dxdy: return t.dx[a] * s.dy[b];
        case Kind::dydx: return t.dy[a] * s.dx[b];
        case Kind::dydy: return t.dy[a] * s.dy[b];
        case Kind::edge_mass: return t.v[a] * s.v[b];
    }
    return 0.0;
}

// Parent cell and local coordinate of a point given by fine cell index plus offset in [0,1].
struct Located {
    int ci, cj;
    double xi, eta;
};

Located locate(const FESpace& sp, int fine_level, int fi, int fj, double sx, double sy) {
    const int shift = fine_level - sp.level();
    const int k = 1 << shift;
    Located l;
    l.ci = fi >> shift;
    l.cj = fj >> shift;
    l.xi = ((fi - l.ci * k) + sx) / k;
    l.eta = ((fj - l.cj * k) + sy) / k;
    return l;
}

Located locate_point(const FESpace& sp, double x, double y) {
    const int n = sp.grid().n;
    const double h = sp.grid().h;
    Located l;
    l.ci = std::min(n - 1, std::max(0, static_cast<int>(std::floor(x / h))));
    l.cj = std::min(n - 1, std::max(0, static_cast<int>(std::floor(y / h))));
    l.xi = x / h - l.ci;
    l.eta = y / h - l.cj;
    return l;
}

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter(const FESpace& trial, const Located& lt, const FESpace& test, const Located& ls,
             const std::array<std::array<double, 4>, 4>& local, Triplets& out) {
    for (int b = 0; b < 4; ++b) {
        const int row = test.free_index(test.cell_dof(ls.ci, ls.cj, b));
        if (row < 0) continue;
        for (int a = 0; a < 4; ++a) {
            const int col = trial.free_index(trial.cell_dof(lt.ci, lt.cj, a));
            if (col < 0 || local[a][b] == 0.0) continue;
            out.emplace_back(row, col, local[a][b]);
        }
    }
}

// Edge coordinate s ∈ [0,1] to a point on the edge.
std::pair<double, double> edge_point(Edge e, double s) {
    switch (e) {
        case Edge::left: return {0.0, s};
        case Edge::right: return {1.0, s};
        case Edge::bottom: return {s, 0.0};
        case Edge::top: return {s, 1.0};
    }
    return {0.0, 0.0};
}

}  // namespace

std::string to_string(Edge e) {
    switch (e) {
        case Edge::left: return "left";
        case Edge::right: return "right";
        case Edge::bottom: return "bottom";
        case Edge::top: return "top";
    }
    return "?";
}

std::string to_string(EdgeSet s) {
    std::string out;
    for (Edge e : kAllEdges) {
        if (!s.has(e)) continue;
        if (!out.empty()) out += ",";
        out += to_string(e);
    }
    return out;
}

Grid::Grid(int level_) : level(level_) {
    if (level_ <= 0) throw ConfigError("level", "grid level must be positive");
    if (level_ > 12) throw ConfigError("level", "grid level too large");
    n = 1 << level_;
    h = 1.0 / n;
}

FESpace::FESpace(int level, Continuity continuity, EdgeSet dirichlet)
    : grid_(level), continuity_(continuity), dirichlet_(dirichlet) {
    const int n = grid_.n;
    if (continuity == Continuity::discontinuous) {
        if (!dirichlet.empty())
            throw ConfigError("dirichlet_edges", "discontinuous spaces carry no strong constraints");
        full_to_free_.resize(static_cast<std::size_t>(4 * n * n));
        for (std::size_t i = 0; i < full_to_free_.size(); ++i) full_to_free_[i] = static_cast<int>(i);
        free_to_full_ = full_to_free_;
        return;
    }
    full_to_free_.assign(static_cast<std::size_t>((n + 1) * (n + 1)), -1);
    for (int j = 0; j <= n; ++j) {
        for (int i = 0; i <= n; ++i) {
            const bool constrained = (i == 0 && dirichlet.has(Edge::left)) ||
                                     (i == n && dirichlet.has(Edge::right)) ||
                                     (j == 0 && dirichlet.has(Edge::bottom)) ||
                                     (j == n && dirichlet.has(Edge::top));
            if (constrained) continue;
            const int full = j * (n + 1) + i;
            full_to_free_[full] = static_cast<int>(free_to_full_.size());
            free_to_full_.push_back(full);
        }
    }
}

int FESpace::cell_dof(int ci, int cj, int local) const {
    const int n = grid_.n;
    if (continuity_ == Continuity::discontinuous) return 4 * (cj * n + ci) + local;
    const int i = ci + (local & 1);
    const int j = cj + (local >> 1);
    return j * (n + 1) + i;
}

std::pair<double, double> FESpace::node_position(int full) const {
    const int n = grid_.n;
    const double h = grid_.h;
    if (continuity_ == Continuity::discontinuous) {
        const int cell = full / 4;
        const int local = full % 4;
        return {((cell % n) + (local & 1)) * h, ((cell / n) + (local >> 1)) * h};
    }
    return {(full % (n + 1)) * h, (full / (n + 1)) * h};
}

Vec FESpace::prolong(const Vec& free) const {
    if (free.size() != dofs()) throw ShapeError("prolong: size mismatch");
    Vec full = Vec::Zero(full_size());
    for (Eigen::Index k = 0; k < free.size(); ++k) full(free_to_full_[k]) = free(k);
    return full;
}

Vec FESpace::restrict_to_free(const Vec& full) const {
    if (full.size() != full_size()) throw ShapeError("restrict_to_free: size mismatch");
    Vec free(dofs());
    for (Eigen::Index k = 0; k < free.size(); ++k) free(k) = full(free_to_full_[k]);
    return free;
}

FESpace build_space(int level, Continuity continuity, EdgeSet dirichlet) {
    return FESpace(level, continuity, dirichlet);
}

SpMat assemble(const FESpace& trial, const FESpace& test, ComponentKind kind) {
    if ((needs_gradient(kind.tag, true) && trial.continuity() == Continuity::discontinuous) ||
        (needs_gradient(kind.tag, false) && test.continuity() == Continuity::discontinuous))
        throw AssemblyError("assemble: derivative of a discontinuous space is not supported");

    const int L = std::max(trial.level(), test.level());
    const int n = 1 << L;
    const double hf = 1.0 / n;
    const double ht = trial.grid().h;
    const double hs = test.grid().h;

    std::vector<Triplets> rows(static_cast<std::size_t>(n));

    if (kind.tag == Kind::edge_mass) {
        const Edge e = kind.edge;
        const double w = 0.5 * hf;
        for (int k = 0; k < n; ++k) {
            int fi = 0, fj = 0;
            double sx = 0, sy = 0;
            std::array<std::array<double, 4>, 4> local{};
            Located lt{}, ls{};
            for (double g : kGauss2) {
                switch (e) {
                    case Edge::left: fi = 0; fj = k; sx = 0; sy = g; break;
                    case Edge::right: fi = n - 1; fj = k; sx = 1; sy = g; break;
                    case Edge::bottom: fi = k; fj = 0; sx = g; sy = 0; break;
                    case Edge::top: fi = k; fj = n - 1; sx = g; sy = 1; break;
                }
                lt = locate(trial, L, fi, fj, sx, sy);
                ls = locate(test, L, fi, fj, sx, sy);
                const ShapeEval t = shape(lt.xi, lt.eta, ht);
                const ShapeEval s = shape(ls.xi, ls.eta, hs);
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b) local[a][b] += w * t.v[a] * s.v[b];
            }
            scatter(trial, lt, test, ls, local, rows[static_cast<std::size_t>(k)]);
        }
    } else {
        const double w = 0.25 * hf * hf;
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t fj_) {
            const int fj = static_cast<int>(fj_);
            Triplets& out = rows[fj_];
            out.reserve(static_cast<std::size_t>(16 * n));
            for (int fi = 0; fi < n; ++fi) {
                std::array<std::array<double, 4>, 4> local{};
                Located lt{}, ls{};
                for (double gy : kGauss2) {
                    for (double gx : kGauss2) {
                        lt = locate(trial, L, fi, fj, gx, gy);
                        ls = locate(test, L, fi, fj, gx, gy);
                        const ShapeEval t = shape(lt.xi, lt.eta, ht);
                        const ShapeEval s = shape(ls.xi, ls.eta, hs);
                        for (int a = 0; a < 4; ++a)
                            for (int b = 0; b < 4; ++b) local[a][b] += w * integrand(kind.tag, t, a, s, b);
                    }
                }
                scatter(trial, lt, test, ls, local, out);
            }
        });
    }

    std::size_t total = 0;
    for (const auto& r : rows) total += r.size();
    Triplets all;
    all.reserve(total);
    for (const auto& r : rows) all.insert(all.end(), r.begin(), r.end());
    SpMat m(test.dofs(), trial.dofs());
    m.setFromTriplets(all.begin(), all.end());
    m.makeCompressed();
    return m;
}

SpMat mass_matrix(const FESpace& space) { return assemble(space, space, {Kind::mass}); }

namespace {

void check_cut(const FESpace& test, const Source& src) {
    if (!src.f) throw DataError("assemble_rhs: source function missing");
    const double scaled = src.at * test.grid().n;
    switch (src.cut) {
        case Source::Cut::none: return;
        case Source::Cut::diagonal:
            if (src.at != 0.0) throw DataError("assemble_rhs: only the diagonal x = y is supported");
            return;
        case Source::Cut::vertical:
        case Source::Cut::horizontal:
            if (std::abs(scaled - std::round(scaled)) > 1e-12)
                throw DataError("assemble_rhs: discontinuity not aligned with grid lines");
            return;
    }
}

// Degree-2 interior rule on the reference triangle (area 1/2).
const double kTri[3][2] = {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}};

}  // namespace

Vec assemble_edge_load(const FESpace& test, Edge edge, const ScalarField& g,
                       const std::vector<double>& breakpoints) {
    const int n = test.grid().n;
    const double h = test.grid().h;
    Vec full = Vec::Zero(test.full_size());
    for (int k = 0; k < n; ++k) {
        std::vector<double> cuts{k * h, (k + 1) * h};
        for (double b : breakpoints)
            if (b > k * h && b < (k + 1) * h) cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double a = cuts[c], b = cuts[c + 1];
            for (int q = 0; q < 3; ++q) {
                const double s = a + (b - a) * kGauss3[q];
                const double w = (b - a) * kGauss3w[q];
                auto [x, y] = edge_point(edge, s);
                const double gv = g(x, y);
                if (gv == 0.0) continue;
                int ci = 0, cj = 0;
                double xi = 0, eta = 0;
                switch (edge) {
                    case Edge::left: ci = 0; cj = k; xi = 0; eta = s / h - k; break;
                    case Edge::right: ci = n - 1; cj = k; xi = 1; eta = s / h - k; break;
                    case Edge::bottom: ci = k; cj = 0; xi = s / h - k; eta = 0; break;
                    case Edge::top: ci = k; cj = n - 1; xi = s / h - k; eta = 1; break;
                }
                const ShapeEval sh = shape(xi, eta, h);
                for (int l = 0; l < 4; ++l) full(test.cell_dof(ci, cj, l)) += w * gv * sh.v[l];
            }
        }
    }
    return test.restrict_to_free(full);
}

Vec assemble_rhs(const FESpace& test, const Source& source, const std::optional<BoundaryData>& inflow) {
    check_cut(test, source);
    const int n = test.grid().n;
    const double h = test.grid().h;
    Vec full = Vec::Zero(test.full_size());
    auto add_point = [&](int ci, int cj, double xi, double eta, double w) {
        const double x = (ci + xi) * h, y = (cj + eta) * h;
        const double fv = source.f(x, y);
        if (fv == 0.0) return;
        const ShapeEval sh = shape(xi, eta, h);
        for (int l = 0; l < 4; ++l) full(test.cell_dof(ci, cj, l)) += w * fv * sh.v[l];
    };
    for (int cj = 0; cj < n; ++cj) {
        for (int ci = 0; ci < n; ++ci) {
            if (source.cut == Source::Cut::diagonal && ci == cj) {
                const double w = h * h / 6.0;
                for (const auto& p : kTri) {
                    // Map reference (r,s) to the lower triangle (0,0),(1,0),(1,1): xi = r+s, eta = s.
                    add_point(ci, cj, p[0] + p[1], p[1], w);
                    // Upper triangle (0,0),(1,1),(0,1): xi = r, eta = r+s.
                    add_point(ci, cj, p[0], p[0] + p[1], w);
                }
                continue;
            }
            const double w = 0.25 * h * h;
            for (double gy : kGauss2)
                for (double gx : kGauss2) add_point(ci, cj, gx, gy, w);
        }
    }
    Vec out = test.restrict_to_free(full);
    if (inflow) {
        if (!inflow->g) throw DataError("assemble_rhs: boundary data missing");
        for (const auto& [edge, weight] : inflow->weighted_edges)
            out += weight * assemble_edge_load(test, edge, inflow->g, inflow->breakpoints);
    }
    return out;
}

double l2_distance(const FESpace& space, const Vec& a, const Vec& b) {
    if (a.size() != space.dofs() || b.size() != space.dofs())
        throw ShapeError("l2_distance: dimension mismatch");
    const Vec d = a - b;
    const SpMat m = mass_matrix(space);
    return std::sqrt(std::max(0.0, d.dot(m * d)));
}

Vec interpolate(const FESpace& space, const ScalarField& f) {
    Vec out(space.dofs());
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        auto [x, y] = space.node_position(space.full_index(static_cast<int>(k)));
        out(k) = f(x, y);
    }
    return out;
}

double evaluate(const FESpace& space, const Vec& coeffs, double x, double y) {
    const Vec full = space.prolong(coeffs);
    const Located l = locate_point(space, x, y);
    const ShapeEval s = shape(l.xi, l.eta, space.grid().h);
    double v = 0.0;
    for (int a = 0; a < 4; ++a) v += s.v[a] * full(space.cell_dof(l.ci, l.cj, a));
    return v;
}

Vec prolongate(const FESpace& from, const Vec& coeffs, const FESpace& to) {
    if (to.level() < from.level() || to.continuity() != from.continuity())
        throw ShapeError("prolongate: target must be a nested refinement of the same kind");
    const Vec src = from.prolong(coeffs);
    const int L = to.level();
    const int n = to.grid().n;
    Vec full = Vec::Zero(to.full_size());
    for (int cj = 0; cj < n; ++cj) {
        for (int ci = 0; ci < n; ++ci) {
            for (int a = 0; a < 4; ++a) {
                const Located l = locate(from, L, ci, cj, a & 1, a >> 1);
                const ShapeEval s = shape(l.xi, l.eta, from.grid().h);
                double v = 0.0;
                for (int b = 0; b < 4; ++b) v += s.v[b] * src(from.cell_dof(l.ci, l.cj, b));
                full(to.cell_dof(ci, cj, a)) = v;
            }
        }
    }
    return to.restrict_to_free(full);
}

}  // namespace dgreedy
