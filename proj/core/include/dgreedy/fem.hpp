#pragma once

#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dgreedy/la.hpp"

namespace dgreedy {

enum class Edge : unsigned { left = 1u, right = 2u, bottom = 4u, top = 8u };

inline constexpr Edge kAllEdges[] = {Edge::left, Edge::right, Edge::bottom, Edge::top};

std::string to_string(Edge e);

struct EdgeSet {
    unsigned bits = 0;

    EdgeSet() = default;
    EdgeSet(std::initializer_list<Edge> edges) {
        for (Edge e : edges) bits |= static_cast<unsigned>(e);
    }
    bool has(Edge e) const { return (bits & static_cast<unsigned>(e)) != 0; }
    bool empty() const { return bits == 0; }
    bool operator==(const EdgeSet&) const = default;
};

std::string to_string(EdgeSet s);

struct Grid {
    int level = 1;
    int n = 2;  // cells per direction
    double h = 0.5;

    explicit Grid(int level_);
    int cells() const { return n * n; }
    int vertices() const { return (n + 1) * (n + 1); }
};

enum class Continuity { continuous, discontinuous };

// Q1 space on a uniform grid. Full numbering: vertex j*(n+1)+i for continuous
// spaces, 4*(cj*n+ci)+local for discontinuous ones with local order
// (0,0),(1,0),(0,1),(1,1). Constrained dofs are masked out of the free set.
class FESpace {
public:
    FESpace(int level, Continuity continuity, EdgeSet dirichlet);

    const Grid& grid() const { return grid_; }
    int level() const { return grid_.level; }
    Continuity continuity() const { return continuity_; }
    EdgeSet dirichlet() const { return dirichlet_; }

    Eigen::Index dofs() const { return static_cast<Eigen::Index>(free_to_full_.size()); }
    Eigen::Index full_size() const { return static_cast<Eigen::Index>(full_to_free_.size()); }
    int free_index(int full) const { return full_to_free_[full]; }
    int full_index(int free) const { return free_to_full_[free]; }

    int cell_dof(int ci, int cj, int local) const;  // full index
    std::pair<double, double> node_position(int full) const;

    Vec prolong(const Vec& free) const;
    Vec restrict_to_free(const Vec& full) const;

private:
    Grid grid_;
    Continuity continuity_;
    EdgeSet dirichlet_;
    std::vector<int> full_to_free_;
    std::vector<int> free_to_full_;
};

FESpace build_space(int level, Continuity continuity, EdgeSet dirichlet);

enum class Kind {
    mass,       // ⟨φ, ψ⟩
    stiff,      // ⟨∇φ, ∇ψ⟩
    conv_x,     // ⟨∂x φ, ψ⟩
    conv_y,     // ⟨∂y φ, ψ⟩
    adjconv_x,  // ⟨φ, ∂x ψ⟩
    adjconv_y,  // ⟨φ, ∂y ψ⟩
    dxdx,       // ⟨∂x φ, ∂x ψ⟩
    dxdy,       // ⟨∂x φ, ∂y ψ⟩
    dydx,       // ⟨∂y φ, ∂x ψ⟩
    dydy,       // ⟨∂y φ, ∂y ψ⟩
    edge_mass,  // ∫_edge φ ψ
};

struct ComponentKind {
    Kind tag = Kind::mass;
    Edge edge = Edge::left;

    static ComponentKind edge_mass(Edge e) { return {Kind::edge_mass, e}; }
};

// Rows index test functions ψ_i, columns trial functions φ_j (free dofs only).
SpMat assemble(const FESpace& trial, const FESpace& test, ComponentKind kind);

using ScalarField = std::function<double(double, double)>;

// Source with at most one discontinuity along x = y, x = at or y = at.
struct Source {
    enum class Cut { none, diagonal, vertical, horizontal };
    ScalarField f;
    Cut cut = Cut::none;
    double at = 0.0;

    static Source constant(double c) { return {[c](double, double) { return c; }, Cut::none, 0.0}; }
};

struct BoundaryData {
    std::vector<std::pair<Edge, double>> weighted_edges;
    ScalarField g;
    std::vector<double> breakpoints;  // along-edge coordinates where g may jump
};

Vec assemble_rhs(const FESpace& test, const Source& source,
                 const std::optional<BoundaryData>& inflow = std::nullopt);

// ∫_edge g ψ_i with quadrature intervals split at grid nodes and breakpoints.
Vec assemble_edge_load(const FESpace& test, Edge edge, const ScalarField& g,
                       const std::vector<double>& breakpoints = {});

SpMat mass_matrix(const FESpace& space);

double l2_distance(const FESpace& space, const Vec& a, const Vec& b);

// Nodal interpolant; constrained dofs are dropped.
Vec interpolate(const FESpace& space, const ScalarField& f);

double evaluate(const FESpace& space, const Vec& coeffs, double x, double y);

// Exact transfer of a finite element function to a nested finer space of the same
// continuity class. Values at constrained target dofs must vanish.
Vec prolongate(const FESpace& from, const Vec& coeffs, const FESpace& to);

}  // namespace dgreedy
