#pragma once

#include <optional>
#include <vector>

#include "padyn/series.hpp"

namespace padyn {

// Lower convex hull of the points (i, v(a_i)).  A segment of slope s and
// length l accounts for l roots of valuation -s.
struct NewtonPolygon {
    struct Vertex {
        long index;
        Rat val;
    };
    struct Segment {
        Rat slope;
        long length;
        Rat root_val() const { return -slope; }
    };
    std::vector<Vertex> vertices;
    std::vector<Segment> segments;
};

struct HenselStep {
    ExtRat residual_val;  // v(f(z_n))
    ExtRat deriv_val;     // v(f'(z_n))
};

// Newton iteration from z0 under |f(z0)| < |f'(z0)|^2.  If trace is given
// it receives one entry per iterate, z0 first.
Elem hensel_lift(const Series& fn, const Elem& z0, std::vector<HenselStep>* trace = nullptr);

NewtonPolygon newton_polygon(const Series& fn);

// Number of roots in C_p with |z| = p^-r_v, counted with multiplicity.
long count_roots_on_sphere(const Series& fn, const Rat& r_v);

// Roots of fn in the ball around center of radius p^-r_v.
long count_roots_in_ball(const Series& fn, const Elem& center, const Rat& r_v, bool closed);

struct SolveResult {
    std::vector<Elem> roots;
    long polygon_count = 0;  // roots on the sphere over C_p
    ExtRat best_residual;    // best v(fn(x) - target) seen during the search
};

struct SolveOptions {
    long count_limit = 1;
    std::optional<Rat> residual_goal;  // default: half the context precision
    long node_budget = 200000;
};

/**
 * Roots x in K with |x| = p^-r_v and v(fn(x) - target) >= residual_goal,
 * found by digit-by-digit refinement along the Newton polygon.  Residue
 * digits are tried in increasing code order, so the output is
 * deterministic.
 */
SolveResult solve_on_sphere(const Series& fn, const Elem& target, const Rat& r_v, const SolveOptions& opt = {});

UltraBall image_ball(const Series& fn, const UltraBall& D);
ExtRat image_diameter_bound(const Series& fn, const UltraBall& D);
long map_degree(const Series& fn, const UltraBall& B);

} // namespace padyn
