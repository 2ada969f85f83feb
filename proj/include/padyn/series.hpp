#pragma once

#include <optional>
#include <vector>

#include "padyn/padic.hpp"

namespace padyn {

// Certified bound on the unlisted coefficients:
// v(a_i) >= offset + slope * i for every i >= from.
struct TailBound {
    long from = 0;
    Rat slope = 0;
    Rat offset = 0;
};

// One coefficient of an exact series specification: a_index = num / den.
struct CoeffSpec {
    long index = 0;
    mpz_class num = 0;
    mpz_class den = 1;
};

/**
 * Power series sum a_i z^i over K: a dense list of coefficients for
 * i < size() plus an optional certified tail.  domain is the radius
 * exponent of the ball on which the series is known to converge; a
 * polynomial has no domain restriction.
 */
class Series {
public:
    Series() = default;
    explicit Series(const Context& ctx) : ctx_(&ctx) {}
    Series(const Context& ctx, std::vector<Elem> coeffs) : ctx_(&ctx), coeffs_(std::move(coeffs)) {}

    static Series constant(const Elem& c) { return Series(c.ctx(), {c}); }
    static Series monomial(const Elem& c, long i);
    static Series identity(const Context& ctx);
    static Series from_spec(const Context& ctx, const std::vector<CoeffSpec>& spec,
                            std::optional<TailBound> tail = std::nullopt);

    const Context& ctx() const { return *ctx_; }
    long size() const { return static_cast<long>(coeffs_.size()); }
    const std::vector<Elem>& coeffs() const { return coeffs_; }
    Elem coeff(long i) const;
    void set_coeff(long i, const Elem& c);
    // highest index with a nonzero listed coefficient, -1 for none
    long degree() const;

    const std::optional<TailBound>& tail() const { return tail_; }
    void set_tail(std::optional<TailBound> t);
    const ExtRat& domain() const { return domain_; }
    void set_domain(ExtRat r) { domain_ = std::move(r); }

    Series operator-() const;
    Series& operator+=(const Series& o);
    Series& operator-=(const Series& o);
    friend Series operator+(Series a, const Series& b) { return a += b; }
    friend Series operator-(Series a, const Series& b) { return a -= b; }
    // Polynomial product; tails are not supported here.
    friend Series operator*(const Series& a, const Series& b);
    Series scaled(const Elem& c) const;

private:
    const Context* ctx_ = nullptr;
    std::vector<Elem> coeffs_;
    std::optional<TailBound> tail_;
    ExtRat domain_;
};

// Exponent g with ||fn||_B = p^-g on the ball of radius p^-r_v.
ExtRat gauss_norm(const Series& fn, const Rat& r_v);
Elem eval(const Series& fn, const Elem& x);
Series derivative(const Series& fn);
// Coefficients of t -> fn(c + t).
Series recenter(const Series& fn, const Elem& c);
// fn(inner) for a polynomial fn.
Series compose(const Series& fn, const Series& inner);

} // namespace padyn
