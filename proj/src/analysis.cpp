#include "padyn/analysis.hpp"

#include <algorithm>

namespace padyn {

namespace {

// Indices attaining min_i v(a_i) + i*r over the listed coefficients from
// index lo on, with the usual checks that unknown digits and the tail stay
// strictly above.
struct Dominant {
    Rat g;
    long imin = -1, imax = -1;
};

Dominant dominant(const Series& fn, const Rat& r, long lo = 0) {
    if (fn.domain() && r <= *fn.domain())
        throw ConditionViolated("radius exponent " + rat_str(r) + " outside the domain of convergence");
    Dominant d;
    bool have = false;
    for (long i = lo; i < fn.size(); ++i) {
        const Elem& a = fn.coeffs()[i];
        if (a.is_zero()) continue;
        Rat t = *a.valuation() + r * i;
        if (!have || t < d.g) {
            d.g = t;
            d.imin = d.imax = i;
            have = true;
        } else if (t == d.g) {
            d.imax = i;
        }
    }
    if (!have) throw PrecisionLoss("no coefficient is known to be nonzero");
    for (long i = lo; i < fn.size(); ++i) {
        const Elem& a = fn.coeffs()[i];
        if (a.is_zero() && a.prec_val() + r * i <= d.g)
            throw PrecisionLoss("coefficient " + std::to_string(i) + " is below precision at the dominant term");
    }
    if (fn.tail()) {
        const auto& t = *fn.tail();
        if (t.slope + r <= 0) throw ConditionViolated("tail does not converge at this radius");
        long i0 = std::max(t.from, lo);
        if (t.offset + (t.slope + r) * i0 <= d.g) throw PrecisionLoss("tail bound reaches the dominant term");
    }
    return d;
}

struct SolveState {
    const Series* g;
    const Context* ctx;
    long goal;
    long limit;
    long budget;
    long nodes = 0;
    bool too_small = false;
    bool lost = false;
    ExtRat best;
    std::vector<Elem> roots;
};

void note_residual(SolveState& st, const Elem& r) {
    ExtRat v = r.is_zero() ? ExtRat(r.prec_val()) : r.valuation();
    if (!st.best || *v > *st.best) st.best = v;
}

// Roots of g in c + pi^L O_K (or on the sphere |t| = |pi^L| when first).
void solve_node(SolveState& st, const Elem& c, long L, bool first) {
    if (static_cast<long>(st.roots.size()) >= st.limit) return;
    if (++st.nodes > st.budget) return;
    const Context& ctx = *st.ctx;
    Series b = c.is_zero() ? *st.g : recenter(*st.g, c);
    Elem b0 = b.coeff(0);
    note_residual(st, b0);
    bool hit = false;
    if (!first) {
        if (b0.is_zero() && b0.prec() < st.goal) {
            st.lost = true;
            return;
        }
        if (b0.vpi() >= st.goal) {
            // roots closer than the goal are one cluster
            hit = true;
            bool dup = false;
            for (const auto& r : st.roots) dup = dup || (r - c).vpi() >= st.goal;
            if (!dup) st.roots.push_back(c);
            if (static_cast<long>(st.roots.size()) >= st.limit || L >= st.goal) return;
        }
    }
    // graded terms at level L in pi-units
    long W = 0, imin = -1, imax = -1;
    for (long k = hit ? 1 : 0; k < b.size(); ++k) {
        const Elem& a = b.coeffs()[k];
        if (a.is_zero()) continue;
        long w = a.vpi() + k * L;
        if (imin < 0 || w < W) {
            W = w;
            imin = imax = k;
        } else if (w == W) {
            imax = k;
        }
    }
    if (imin < 0) {
        if (!hit) st.lost = true;
        return;
    }
    if (hit) imin = 0;  // c itself is a root; look for the others
    for (long k = hit ? 1 : 0; k < b.size(); ++k) {
        const Elem& a = b.coeffs()[k];
        if (a.is_zero() && a.prec() + k * L <= W) {
            st.lost = true;
            return;
        }
    }
    if (imax == 0) return;  // no roots in this disc

    // a simple root close enough to c: finish by Newton
    if (!first && !hit && imax == 1 && !b0.is_zero()) {
        const Elem& b1 = b.coeffs()[1];
        long v0 = b0.vpi(), v1 = b1.vpi();
        if (v0 > 2 * v1 && v0 - v1 >= L) {
            Elem w = hensel_lift(*st.g, c);
            Elem r = eval(*st.g, w);
            note_residual(st, r);
            if (r.vpi() < st.goal) {
                st.lost = true;
                return;
            }
            bool dup = false;
            for (const auto& x : st.roots) dup = dup || (x - w).vpi() >= st.goal;
            if (!dup) st.roots.push_back(w);
            return;
        }
    }

    if (!first && (imin > 0 || hit)) solve_node(st, c, L + 1, false);
    if (imax == imin) return;
    // residual polynomial on the sphere v(t) = L
    std::vector<std::pair<long, long>> terms;
    for (long k = imin; k <= imax; ++k) {
        const Elem& a = b.coeffs()[k];
        if (a.is_zero() || a.vpi() + k * L != W) continue;
        terms.emplace_back(k, a.shift(k * L - W).residue());
    }
    bool any = false;
    for (long d = 1; d < ctx.q(); ++d) {
        long s = 0;
        for (auto [k, r] : terms) s = ctx.res_add(s, ctx.res_mul(r, ctx.res_pow(d, k)));
        if (s != 0) continue;
        any = true;
        solve_node(st, c + Elem::digit_at(ctx, d, L), L + 1, false);
        if (static_cast<long>(st.roots.size()) >= st.limit) return;
    }
    if (!any) st.too_small = true;
}

} // namespace

Elem hensel_lift(const Series& fn, const Elem& z0, std::vector<HenselStep>* trace) {
    Series d = derivative(fn);
    Elem z = z0;
    Elem fz = eval(fn, z), dz = eval(d, z);
    if (dz.is_zero()) throw HenselPreconditionFailed("derivative vanishes at the starting point");
    long vd = dz.vpi();
    if (!fz.is_zero() && fz.vpi() <= 2 * vd)
        throw HenselPreconditionFailed("|f(z0)| >= |f'(z0)|^2: v(f) = " + ext_str(fz.valuation()) +
                                       ", v(f') = " + ext_str(dz.valuation()));
    auto record = [&] {
        if (trace) trace->push_back({fz.is_zero() ? ExtRat() : fz.valuation(), dz.valuation()});
    };
    record();
    for (int it = 0; it < 200 && !fz.is_zero(); ++it) {
        Elem step = fz / dz;
        if (step.is_zero()) break;
        z = z - step;
        fz = eval(fn, z);
        dz = eval(d, z);
        if (dz.is_zero()) throw PrecisionLoss("derivative lost to precision during Newton iteration");
        record();
    }
    return z;
}

NewtonPolygon newton_polygon(const Series& fn) {
    std::vector<NewtonPolygon::Vertex> pts;
    for (long i = 0; i < fn.size(); ++i) {
        const Elem& a = fn.coeffs()[i];
        if (!a.is_zero()) pts.push_back({i, *a.valuation()});
    }
    NewtonPolygon np;
    // lower hull, monotone chain
    for (const auto& pt : pts) {
        while (np.vertices.size() >= 2) {
            const auto& a = np.vertices[np.vertices.size() - 2];
            const auto& b = np.vertices.back();
            // drop b unless it lies strictly below the chord a -> pt
            Rat lhs = (b.val - a.val) * (pt.index - a.index);
            Rat rhs = (pt.val - a.val) * (b.index - a.index);
            if (lhs >= rhs) np.vertices.pop_back();
            else break;
        }
        np.vertices.push_back(pt);
    }
    for (size_t k = 1; k < np.vertices.size(); ++k) {
        const auto& a = np.vertices[k - 1];
        const auto& b = np.vertices[k];
        long len = b.index - a.index;
        np.segments.push_back({Rat(b.val - a.val) / len, len});
    }
    // zero-at-precision coefficients must lie strictly above the hull
    for (long i = 0; i < fn.size() && np.vertices.size() >= 2; ++i) {
        const Elem& a = fn.coeffs()[i];
        if (!a.is_zero() || i < np.vertices.front().index || i > np.vertices.back().index) continue;
        for (size_t k = 1; k < np.vertices.size(); ++k) {
            const auto& u = np.vertices[k - 1];
            const auto& w = np.vertices[k];
            if (i < u.index || i > w.index) continue;
            Rat h = u.val + np.segments[k - 1].slope * (i - u.index);
            if (a.prec_val() <= h) throw PrecisionLoss("coefficient " + std::to_string(i) + " is below precision on the hull");
        }
    }
    return np;
}

long count_roots_on_sphere(const Series& fn, const Rat& r_v) {
    Dominant d = dominant(fn, r_v);
    return d.imax - d.imin;
}

long count_roots_in_ball(const Series& fn, const Elem& center, const Rat& r_v, bool closed) {
    Dominant d = dominant(recenter(fn, center), r_v);
    return closed ? d.imax : d.imin;
}

SolveResult solve_on_sphere(const Series& fn, const Elem& target, const Rat& r_v, const SolveOptions& opt) {
    const Context& ctx = fn.ctx();
    Series g = fn - Series::constant(target);
    SolveResult res;
    res.polygon_count = count_roots_on_sphere(g, r_v);
    if (res.polygon_count < 1) throw NoRootAtRadius("no roots on the sphere |z| = p^-" + rat_str(r_v));
    long L0 = ctx.to_pi(r_v);

    SolveState st;
    st.g = &g;
    st.ctx = &ctx;
    st.goal = opt.residual_goal ? rat_ceil(*opt.residual_goal * ctx.e()).get_si() : (ctx.N() + 1) / 2;
    st.limit = opt.count_limit;
    st.budget = opt.node_budget;
    solve_node(st, Elem::zero(ctx), L0, true);
    res.roots = std::move(st.roots);
    res.best_residual = st.best;
    if (res.roots.empty()) {
        std::string tail = " (best residual valuation " + ext_str(st.best) + ", " +
                           std::to_string(res.polygon_count) + " roots over C_p)";
        if (st.too_small) throw ResidueFieldTooSmall("residue equation has no solution in the residue field" + tail);
        if (st.lost) throw PrecisionLoss("root search ran out of precision" + tail);
        throw NoRootAtRadius("no root in K on the sphere" + tail);
    }
    return res;
}

UltraBall image_ball(const Series& fn, const UltraBall& D) {
    Series b = recenter(fn, D.center);
    UltraBall out{b.coeff(0), std::nullopt, D.closed};
    if (!D.radius_val) return out;
    const Rat& r = *D.radius_val;
    ExtRat g;
    for (long k = 1; k < b.size(); ++k) {
        const Elem& a = b.coeffs()[k];
        if (a.is_zero()) continue;
        Rat t = *a.valuation() + r * k;
        if (!g || t < *g) g = t;
    }
    for (long k = 1; k < b.size(); ++k) {
        const Elem& a = b.coeffs()[k];
        if (a.is_zero() && (!g || a.prec_val() + r * k < *g))
            throw PrecisionLoss("coefficient " + std::to_string(k) + " may set the image radius");
    }
    if (b.tail()) {
        // a ball that certainly contains the image
        const auto& t = *b.tail();
        if (t.slope + r <= 0) throw ConditionViolated("tail does not converge on the ball");
        Rat tm = t.offset + (t.slope + r) * std::max<long>(t.from, 1);
        g = ext_min(g, ExtRat(tm));
    }
    out.radius_val = g;
    return out;
}

ExtRat image_diameter_bound(const Series& fn, const UltraBall& D) { return image_ball(fn, D).radius_val; }

long map_degree(const Series& fn, const UltraBall& B) {
    if (!B.radius_val) throw ConditionViolated("map degree needs a ball of positive radius");
    Dominant d = dominant(recenter(fn, B.center), *B.radius_val, 1);
    return B.closed ? d.imax : d.imin;
}

} // namespace padyn
