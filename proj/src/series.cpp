#include "padyn/series.hpp"

#include <algorithm>

namespace padyn {

namespace {

// floor of a rational valuation in pi-units
long floor_pi(const Context& ctx, const Rat& v) {
    mpz_class f = rat_floor(v * ctx.e());
    if (!f.fits_slong_p()) throw PrecisionLoss("tail bound out of range");
    return f.get_si();
}

// Least value of offset + slope*i + shift*(i - k) over i >= i0, for a
// nondecreasing sequence (slope + shift >= 0).
Rat tail_min(const TailBound& t, const Rat& shift, long k) {
    long i0 = std::max(t.from, k);
    return t.offset + t.slope * i0 + shift * (i0 - k);
}

} // namespace

Series Series::monomial(const Elem& c, long i) {
    Series s(c.ctx());
    s.set_coeff(i, c);
    return s;
}

Series Series::identity(const Context& ctx) { return monomial(Elem::one(ctx), 1); }

Series Series::from_spec(const Context& ctx, const std::vector<CoeffSpec>& spec, std::optional<TailBound> tail) {
    Series s(ctx);
    for (const auto& c : spec) {
        if (c.index < 0) throw ParseError("negative coefficient index");
        if (c.den == 0) throw ParseError("zero denominator in coefficient");
        s.set_coeff(c.index, s.coeff(c.index) + Elem::from_rational(ctx, Rat(c.num, c.den)));
    }
    s.set_tail(tail);
    return s;
}

Elem Series::coeff(long i) const {
    if (i >= 0 && i < size()) return coeffs_[i];
    return Elem::zero(*ctx_);
}

void Series::set_coeff(long i, const Elem& c) {
    if (i >= size()) coeffs_.resize(i + 1, Elem::zero(*ctx_));
    coeffs_[i] = c;
}

long Series::degree() const {
    for (long i = size() - 1; i >= 0; --i)
        if (!coeffs_[i].is_zero()) return i;
    return -1;
}

void Series::set_tail(std::optional<TailBound> t) {
    if (t && t->from < size()) {
        // listed coefficients always sit below the tail
        for (long i = t->from; i < size(); ++i)
            if (!coeffs_[i].is_zero()) throw ParseError("tail overlaps listed coefficients");
        coeffs_.resize(t->from, Elem::zero(*ctx_));
    }
    tail_ = std::move(t);
    // the tail converges exactly where v(z) > -slope
    if (tail_) domain_ = domain_ ? std::max(*domain_, Rat(-tail_->slope)) : Rat(-tail_->slope);
}

Series Series::operator-() const {
    Series r = *this;
    for (auto& c : r.coeffs_) c = -c;
    return r;
}

Series& Series::operator+=(const Series& o) {
    if (!ctx_) ctx_ = o.ctx_;
    for (long i = 0; i < o.size(); ++i) set_coeff(i, coeff(i) + o.coeffs_[i]);
    if (o.tail_) {
        if (!tail_) {
            tail_ = o.tail_;
        } else {
            // pointwise minimum of two affine bounds, kept affine by taking
            // the smaller slope and the offset that makes it valid at from
            TailBound t;
            t.from = std::max(tail_->from, o.tail_->from);
            t.slope = std::min(tail_->slope, o.tail_->slope);
            Rat a = tail_->offset + (tail_->slope - t.slope) * t.from;
            Rat b = o.tail_->offset + (o.tail_->slope - t.slope) * t.from;
            t.offset = std::min(a, b);
            tail_ = t;
        }
        if (size() > tail_->from) tail_->from = size();
    }
    if (o.domain_) domain_ = domain_ ? std::max(*domain_, *o.domain_) : *o.domain_;
    return *this;
}

Series& Series::operator-=(const Series& o) { return *this += -o; }

Series operator*(const Series& a, const Series& b) {
    if (a.tail_ || b.tail_) throw ConditionViolated("product of series with tails is not supported");
    Series r(*a.ctx_);
    long da = a.degree(), db = b.degree();
    if (da < 0 || db < 0) return r;
    r.coeffs_.assign(da + db + 1, Elem::zero(*a.ctx_));
    for (long i = 0; i <= da; ++i) {
        if (a.coeffs_[i].is_zero()) continue;
        for (long j = 0; j <= db; ++j) {
            if (b.coeffs_[j].is_zero()) continue;
            r.coeffs_[i + j] += a.coeffs_[i] * b.coeffs_[j];
        }
    }
    return r;
}

Series Series::scaled(const Elem& c) const {
    Series r = *this;
    for (auto& x : r.coeffs_) x *= c;
    if (r.tail_) {
        if (c.is_zero()) {
            r.tail_.reset();
        } else {
            r.tail_->offset += *c.valuation();
        }
    }
    return r;
}

ExtRat gauss_norm(const Series& fn, const Rat& r_v) {
    if (fn.domain() && r_v <= *fn.domain())
        throw ConditionViolated("radius exponent " + rat_str(r_v) + " outside the domain of convergence");
    ExtRat g;
    for (long i = 0; i < fn.size(); ++i) {
        const Elem& a = fn.coeffs()[i];
        if (a.is_zero()) continue;
        Rat t = *a.valuation() + r_v * i;
        if (!g || t < *g) g = t;
    }
    // zero coefficients known only to finite precision, and the tail, must
    // stay strictly below the maximum for it to be exact
    for (long i = 0; i < fn.size(); ++i) {
        const Elem& a = fn.coeffs()[i];
        if (!a.is_zero()) continue;
        Rat t = a.prec_val() + r_v * i;
        if (g && t <= *g) throw PrecisionLoss("coefficient " + std::to_string(i) + " may dominate the Gauss norm");
    }
    if (fn.tail()) {
        const auto& t = *fn.tail();
        if (t.slope + r_v <= 0) throw ConditionViolated("tail does not converge at this radius");
        Rat tm = tail_min(t, r_v, 0);
        if (!g || tm <= *g) throw PrecisionLoss("tail bound may dominate the Gauss norm");
    }
    return g;
}

Elem eval(const Series& fn, const Elem& x) {
    const Context& ctx = fn.ctx();
    if (fn.domain()) {
        ExtRat vx = x.valuation();
        if (vx && *vx <= *fn.domain()) throw ConditionViolated("evaluation point outside the domain");
    }
    Elem r = Elem::zero(ctx);
    for (long i = fn.size() - 1; i >= 0; --i) r = r * x + fn.coeffs()[i];
    if (fn.tail()) {
        ExtRat vx = x.valuation();
        Rat v = vx ? *vx : x.prec_val();
        const auto& t = *fn.tail();
        if (t.slope + v <= 0) throw ConditionViolated("tail does not converge at the evaluation point");
        r = r.with_prec(floor_pi(ctx, tail_min(t, v, 0)));
    }
    return r;
}

Series derivative(const Series& fn) {
    const Context& ctx = fn.ctx();
    Series d(ctx);
    for (long i = 1; i < fn.size(); ++i) d.set_coeff(i - 1, fn.coeffs()[i] * Elem::from_int(ctx, i));
    if (fn.tail()) {
        TailBound t = *fn.tail();
        // v(i a_i) >= offset + slope*i = (offset + slope) + slope*(i-1)
        t.offset += t.slope;
        t.from = std::max<long>(0, t.from - 1);
        d.set_tail(t);
    }
    d.set_domain(fn.domain());
    return d;
}

Series recenter(const Series& fn, const Elem& c) {
    const Context& ctx = fn.ctx();
    if (fn.domain()) {
        ExtRat vc = c.valuation();
        if (vc && *vc <= *fn.domain()) throw ConditionViolated("recentring point outside the domain");
    }
    // Taylor shift by repeated synthetic division
    std::vector<Elem> b = fn.coeffs();
    long n = static_cast<long>(b.size());
    for (long k = 0; k < n; ++k)
        for (long i = n - 2; i >= k; --i) b[i] = b[i] + c * b[i + 1];
    Series r(ctx, b);
    if (fn.tail()) {
        const auto& t = *fn.tail();
        ExtRat vc = c.valuation();
        Rat shift = vc ? *vc : c.prec_val();
        if (t.slope + shift < 0) throw ConditionViolated("tail does not converge at the recentring point");
        std::vector<Elem> bb = r.coeffs();
        for (long k = 0; k < static_cast<long>(bb.size()); ++k)
            bb[k] = bb[k].with_prec(floor_pi(ctx, tail_min(t, shift, k)));
        r = Series(ctx, bb);
        r.set_tail(t);
    }
    r.set_domain(fn.domain());
    return r;
}

Series compose(const Series& fn, const Series& inner) {
    if (fn.tail()) throw ConditionViolated("compose needs a polynomial outer function");
    Series r(fn.ctx());
    for (long i = fn.size() - 1; i >= 0; --i) r = r * inner + Series::constant(fn.coeffs()[i]);
    return r;
}

} // namespace padyn
