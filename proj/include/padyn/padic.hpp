#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "padyn/errors.hpp"

namespace padyn {

using Rat = mpq_class;

// A valuation or radius exponent; nullopt stands for +infinity (the zero
// element, or a ball of radius 0).
using ExtRat = std::optional<Rat>;

std::string rat_str(const Rat& q);
Rat parse_rat(const std::string& s);
std::string ext_str(const ExtRat& v);
bool ext_ge(const ExtRat& a, const Rat& b);
bool ext_gt(const ExtRat& a, const Rat& b);
ExtRat ext_min(const ExtRat& a, const ExtRat& b);

mpz_class rat_ceil(const Rat& q);
mpz_class rat_floor(const Rat& q);
bool is_prime(long n);

/**
 * The working field K: the unramified extension of Q_p of degree f, with
 * a totally ramified layer on top generated by pi, pi^e = p.  Elements are
 * known modulo pi^N at best.
 *
 * Residue field elements are encoded as integers sum a_i p^i (0 <= a_i < p),
 * i.e. coefficients of 1, w, ..., w^{f-1} for the fixed generator w.
 */
class Context {
public:
    Context(long p, int f, long e, long N);

    long p() const { return p_; }
    int f() const { return f_; }
    long e() const { return e_; }
    long N() const { return N_; }
    long q() const { return q_; }

    // Monic modulus of the residue field, low coefficient first (size f+1).
    const std::vector<long>& modulus() const { return modulus_; }

    long res_add(long a, long b) const;
    long res_neg(long a) const;
    long res_mul(long a, long b) const;
    long res_inv(long a) const;
    long res_pow(long a, unsigned long k) const;

    // p^k for k >= 0; small exponents come from a table.
    mpz_class ppow(long k) const;

    // v * e as an integer, or RadiusNotRepresentable.
    long to_pi(const Rat& v) const;
    Rat from_pi(long k) const {
        Rat r(k, e_);
        r.canonicalize();
        return r;
    }

private:
    std::vector<long> unpack(long a) const;
    long pack(const std::vector<long>& v) const;

    long p_;
    int f_;
    long e_;
    long N_;
    long q_;
    std::vector<long> modulus_;
    std::vector<mpz_class> pow_table_;
};

using ContextPtr = std::shared_ptr<const Context>;

ContextPtr make_context(long p, int f, long e, long N);

/**
 * Element of K with absolute precision: the value is known modulo
 * pi^prec.  Stored as p^s * sum_{j<e} c_j pi^j where each c_j (a vector of
 * f integers for the unramified part) is reduced to the canonical
 * representative allowed by the precision.  Because 0 <= c_j < p^K the
 * base-p digits of the c_j are exactly the pi-adic digits.
 */
class Elem {
public:
    Elem() = default;

    static Elem zero(const Context& ctx, long prec);
    static Elem zero(const Context& ctx) { return zero(ctx, ctx.N()); }
    static Elem one(const Context& ctx) { return from_int(ctx, 1); }
    static Elem from_int(const Context& ctx, const mpz_class& n);
    static Elem from_int(const Context& ctx, long n) { return from_int(ctx, mpz_class(n)); }
    static Elem from_rational(const Context& ctx, const Rat& q);
    static Elem pi_power(const Context& ctx, long k);
    // Canonical lift of a residue digit times pi^k.
    static Elem digit_at(const Context& ctx, long code, long k);
    static Elem parse(const Context& ctx, const std::string& s);

    const Context& ctx() const { return *ctx_; }
    bool valid() const { return ctx_ != nullptr; }

    bool is_zero() const { return zero_; }
    long prec() const { return prec_; }
    Rat prec_val() const { return ctx_->from_pi(prec_); }
    // Valuation in pi-units; for the zero element returns prec().
    long vpi() const;
    // Exact valuation, nullopt for zero.
    ExtRat valuation() const;
    // Valuation in pi-units, PrecisionLoss if the element is zero at its
    // precision.
    long exact_vpi(const char* where = "valuation") const;

    Elem with_prec(long prec) const;
    // The finite digit string read as an exact element (precision N).
    Elem as_exact() const;
    long residue() const;
    long digit(long k) const;
    std::vector<long> digits() const;

    Elem operator-() const;
    Elem& operator+=(const Elem& o);
    Elem& operator-=(const Elem& o);
    Elem& operator*=(const Elem& o);
    friend Elem operator+(Elem a, const Elem& b) { return a += b; }
    friend Elem operator-(Elem a, const Elem& b) { return a -= b; }
    friend Elem operator*(Elem a, const Elem& b) { return a *= b; }
    friend Elem operator/(const Elem& a, const Elem& b) { return a * b.inv(); }

    Elem inv() const;
    Elem pow(unsigned long k) const;
    Elem shift(long k) const;  // times pi^k, exact

    // Congruent modulo the smaller of the two precisions.
    bool same(const Elem& o) const { return (*this - o).is_zero(); }

    std::string str() const;

private:
    friend Elem mul_impl(const Elem& a, const Elem& b, long prec);
    void normalize();
    void set_all_zero();
    long block_vp(long j) const;

    const Context* ctx_ = nullptr;
    long s_ = 0;
    std::vector<mpz_class> c_;
    long prec_ = 0;
    bool zero_ = true;
};

Elem add(const Elem& x, const Elem& y);
Elem mul(const Elem& x, const Elem& y);
Elem inv(const Elem& x);
ExtRat valuation(const Elem& x);
long residue(const Elem& x);

// Uniform random element with exact valuation vpi (pi-units) known to
// absolute precision prec.
Elem random_elem(const Context& ctx, std::mt19937_64& rng, long vpi, long prec);
// Random element with valuation >= vpi (zero allowed).
Elem random_at_least(const Context& ctx, std::mt19937_64& rng, long vpi, long prec);

/**
 * Ball {x : |x - center| < p^-r} (open) or <= (closed).  A null radius
 * means the ball is the single point.
 */
struct UltraBall {
    Elem center;
    ExtRat radius_val;
    bool closed = true;

    bool contains(const Elem& x) const;
    bool contains(const UltraBall& b) const;
    bool intersects(const UltraBall& b) const;
};

} // namespace padyn
