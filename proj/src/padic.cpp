#include "padyn/padic.hpp"

#include <algorithm>
#include <climits>
#include <sstream>

namespace padyn {

// ---------------------------------------------------------------- rationals

std::string rat_str(const Rat& q) {
    Rat c = q;
    c.canonicalize();
    return c.get_str();
}

Rat parse_rat(const std::string& s) {
    std::string t;
    for (char ch : s)
        if (ch != ' ') t += ch;
    if (t.empty()) throw ParseError("empty rational");
    Rat q;
    if (q.set_str(t, 10) != 0) throw ParseError("bad rational '" + s + "'");
    if (q.get_den() == 0) throw ParseError("zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
}

std::string ext_str(const ExtRat& v) { return v ? rat_str(*v) : "inf"; }
bool ext_ge(const ExtRat& a, const Rat& b) { return !a || *a >= b; }
bool ext_gt(const ExtRat& a, const Rat& b) { return !a || *a > b; }
ExtRat ext_min(const ExtRat& a, const ExtRat& b) {
    if (!a) return b;
    if (!b) return a;
    return *a < *b ? a : b;
}

mpz_class rat_floor(const Rat& q) {
    mpz_class r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

mpz_class rat_ceil(const Rat& q) {
    mpz_class r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

bool is_prime(long n) {
    if (n < 2) return false;
    for (long d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

namespace {

long floor_div(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

long ceil_div(long a, long b) { return -floor_div(-a, b); }

long mod_pos(long a, long m) {
    long r = a % m;
    return r < 0 ? r + m : r;
}

// p-adic valuation of a nonzero integer
long vp_int(const mpz_class& a, long p) {
    if (p == 2) return static_cast<long>(mpz_scan1(a.get_mpz_t(), 0));
    mpz_class t = a;
    long v = 0;
    while (mpz_divisible_ui_p(t.get_mpz_t(), static_cast<unsigned long>(p))) {
        mpz_divexact_ui(t.get_mpz_t(), t.get_mpz_t(), static_cast<unsigned long>(p));
        ++v;
    }
    return v;
}

long bitlen(long x) {
    long b = 0;
    while (x > 0) {
        ++b;
        x >>= 1;
    }
    return b;
}

// polynomial helpers over F_p, low coefficient first
std::vector<long> poly_mod(std::vector<long> a, const std::vector<long>& m, long p) {
    long dm = static_cast<long>(m.size()) - 1;
    long inv_lead = 1;
    for (long x = 1; x < p; ++x)
        if ((x * m.back()) % p == 1) inv_lead = x;
    for (long i = static_cast<long>(a.size()) - 1; i >= dm; --i) {
        long c = mod_pos(a[i], p) * inv_lead % p;
        if (c == 0) continue;
        for (long k = 0; k <= dm; ++k)
            a[i - dm + k] = mod_pos(a[i - dm + k] - c * m[k], p);
    }
    a.resize(std::max<long>(dm, 0));
    for (auto& x : a) x = mod_pos(x, p);
    return a;
}

bool poly_is_zero(const std::vector<long>& a) {
    return std::all_of(a.begin(), a.end(), [](long x) { return x == 0; });
}

bool irreducible_small(const std::vector<long>& g, long p) {
    int f = static_cast<int>(g.size()) - 1;
    if (f <= 1) return true;
    // divisors of degree 1 .. f/2
    for (int d = 1; d <= f / 2; ++d) {
        long count = 1;
        for (int i = 0; i < d; ++i) count *= p;
        for (long code = 0; code < count; ++code) {
            std::vector<long> h(d + 1);
            long c = code;
            for (int i = 0; i < d; ++i) {
                h[i] = c % p;
                c /= p;
            }
            h[d] = 1;
            if (poly_is_zero(poly_mod(g, h, p))) return false;
        }
    }
    return true;
}

std::vector<long> choose_modulus(long p, int f) {
    // Conway polynomials for the small primes, low coefficient first.
    struct Entry {
        long p;
        int f;
        std::vector<long> c;
    };
    static const std::vector<Entry> table = {
        {2, 2, {1, 1, 1}},       {2, 3, {1, 1, 0, 1}},       {2, 4, {1, 1, 0, 0, 1}},
        {3, 2, {2, 2, 1}},       {3, 3, {1, 2, 0, 1}},       {3, 4, {2, 0, 0, 2, 1}},
        {5, 2, {2, 4, 1}},       {5, 3, {3, 3, 0, 1}},       {5, 4, {2, 4, 4, 0, 1}},
        {7, 2, {3, 6, 1}},       {7, 3, {4, 0, 6, 1}},       {7, 4, {3, 4, 5, 0, 1}},
    };
    if (f == 1) return {0, 1};
    for (const auto& en : table)
        if (en.p == p && en.f == f) return en.c;
    // lexicographically first monic irreducible
    long count = 1;
    for (int i = 0; i < f; ++i) count *= p;
    for (long code = 0; code < count; ++code) {
        std::vector<long> g(f + 1);
        long c = code;
        for (int i = 0; i < f; ++i) {
            g[i] = c % p;
            c /= p;
        }
        g[f] = 1;
        if (g[0] != 0 && irreducible_small(g, p)) return g;
    }
    throw InvalidContext("no irreducible polynomial found");
}

} // namespace

// ---------------------------------------------------------------- Context

Context::Context(long p, int f, long e, long N) : p_(p), f_(f), e_(e), N_(N) {
    if (!is_prime(p)) throw InvalidContext("p = " + std::to_string(p) + " is not prime");
    if (f < 1 || f > 4) throw InvalidContext("residue degree f must be in 1..4");
    if (e < 1) throw InvalidContext("ramification index e must be >= 1");
    if (N < 1) throw InvalidContext("precision N must be >= 1");
    q_ = 1;
    for (int i = 0; i < f; ++i) {
        if (q_ > (1L << 24) / p) throw InvalidContext("residue field too large");
        q_ *= p;
    }
    modulus_ = choose_modulus(p, f);
    long table = std::max<long>(64, N / e + 16);
    pow_table_.resize(table + 1);
    pow_table_[0] = 1;
    for (long k = 1; k <= table; ++k) pow_table_[k] = pow_table_[k - 1] * p;
}

ContextPtr make_context(long p, int f, long e, long N) {
    return std::make_shared<const Context>(p, f, e, N);
}

mpz_class Context::ppow(long k) const {
    if (k < 0) throw std::logic_error("negative power of p");
    if (k < static_cast<long>(pow_table_.size())) return pow_table_[k];
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(p_), static_cast<unsigned long>(k));
    return r;
}

long Context::to_pi(const Rat& v) const {
    Rat t = v * e_;
    t.canonicalize();
    if (t.get_den() != 1)
        throw RadiusNotRepresentable("valuation " + rat_str(v) + " needs a ramification index divisible by " +
                                     mpz_class(Rat(v).get_den()).get_str());
    if (!t.get_num().fits_slong_p()) throw RadiusNotRepresentable("valuation out of range");
    return t.get_num().get_si();
}

std::vector<long> Context::unpack(long a) const {
    std::vector<long> v(f_);
    for (int i = 0; i < f_; ++i) {
        v[i] = a % p_;
        a /= p_;
    }
    return v;
}

long Context::pack(const std::vector<long>& v) const {
    long a = 0;
    for (int i = f_ - 1; i >= 0; --i) a = a * p_ + mod_pos(v[i], p_);
    return a;
}

long Context::res_add(long a, long b) const {
    auto x = unpack(a), y = unpack(b);
    for (int i = 0; i < f_; ++i) x[i] = (x[i] + y[i]) % p_;
    return pack(x);
}

long Context::res_neg(long a) const {
    auto x = unpack(a);
    for (auto& c : x) c = mod_pos(-c, p_);
    return pack(x);
}

long Context::res_mul(long a, long b) const {
    if (f_ == 1) return (a * b) % p_;
    auto x = unpack(a), y = unpack(b);
    std::vector<long> r(2 * f_ - 1, 0);
    for (int i = 0; i < f_; ++i)
        for (int j = 0; j < f_; ++j) r[i + j] = (r[i + j] + x[i] * y[j]) % p_;
    return pack(poly_mod(r, modulus_, p_));
}

long Context::res_pow(long a, unsigned long k) const {
    long r = 1, b = a;
    while (k) {
        if (k & 1) r = res_mul(r, b);
        b = res_mul(b, b);
        k >>= 1;
    }
    return r;
}

long Context::res_inv(long a) const {
    if (a == 0) throw DivisionByZero("inverse of zero residue");
    return res_pow(a, static_cast<unsigned long>(q_ - 2));
}

// ---------------------------------------------------------------- Elem

void Elem::set_all_zero() {
    zero_ = true;
    s_ = 0;
    c_.clear();
}

long Elem::block_vp(long j) const {
    long f = ctx_->f();
    long best = LONG_MAX;
    for (long i = 0; i < f; ++i) {
        const mpz_class& v = c_[j * f + i];
        if (v != 0) best = std::min(best, vp_int(v, ctx_->p()));
    }
    return best;
}

void Elem::normalize() {
    if (c_.empty()) {
        set_all_zero();
        return;
    }
    const long e = ctx_->e(), f = ctx_->f();
    if (prec_ > ctx_->N()) prec_ = ctx_->N();
    bool any = false;
    for (long j = 0; j < e; ++j) {
        long K = ceil_div(prec_ - e * s_ - j, e);
        for (long i = 0; i < f; ++i) {
            mpz_class& v = c_[j * f + i];
            if (K <= 0) {
                v = 0;
                continue;
            }
            if (v < 0 || mpz_sizeinbase(v.get_mpz_t(), 2) >= static_cast<size_t>(K) * static_cast<size_t>(bitlen(ctx_->p()) - 1)) {
                mpz_class m = ctx_->ppow(K);
                mpz_fdiv_r(v.get_mpz_t(), v.get_mpz_t(), m.get_mpz_t());
            }
            if (v != 0) any = true;
        }
    }
    if (!any) {
        set_all_zero();
        return;
    }
    zero_ = false;
    long t = LONG_MAX;
    for (long j = 0; j < e; ++j) t = std::min(t, block_vp(j));
    if (t > 0) {
        mpz_class m = ctx_->ppow(t);
        for (auto& v : c_)
            if (v != 0) mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), m.get_mpz_t());
        s_ += t;
    }
}

Elem Elem::zero(const Context& ctx, long prec) {
    Elem z;
    z.ctx_ = &ctx;
    z.prec_ = std::min(prec, ctx.N());
    z.set_all_zero();
    return z;
}

Elem Elem::from_int(const Context& ctx, const mpz_class& n) {
    return from_rational(ctx, Rat(n));
}

Elem Elem::from_rational(const Context& ctx, const Rat& q0) {
    Rat q = q0;
    q.canonicalize();
    Elem x;
    x.ctx_ = &ctx;
    x.prec_ = ctx.N();
    if (q == 0) {
        x.set_all_zero();
        return x;
    }
    mpz_class num = q.get_num(), den = q.get_den();
    long vn = vp_int(num, ctx.p()), vd = vp_int(den, ctx.p());
    mpz_class pn = ctx.ppow(vn), pd = ctx.ppow(vd);
    mpz_divexact(num.get_mpz_t(), num.get_mpz_t(), pn.get_mpz_t());
    mpz_divexact(den.get_mpz_t(), den.get_mpz_t(), pd.get_mpz_t());
    long s = vn - vd;
    long K = ceil_div(x.prec_ - ctx.e() * s, ctx.e());
    if (K <= 0) {
        x.set_all_zero();
        return x;
    }
    mpz_class m = ctx.ppow(K), dinv;
    mpz_invert(dinv.get_mpz_t(), den.get_mpz_t(), m.get_mpz_t());
    x.c_.assign(ctx.e() * ctx.f(), 0);
    x.c_[0] = num * dinv;
    x.s_ = s;
    x.zero_ = false;
    x.normalize();
    return x;
}

Elem Elem::pi_power(const Context& ctx, long k) { return one(ctx).shift(k); }

Elem Elem::digit_at(const Context& ctx, long code, long k) {
    Elem x;
    x.ctx_ = &ctx;
    x.prec_ = ctx.N();
    x.c_.assign(ctx.e() * ctx.f(), 0);
    long c = code;
    for (long i = 0; i < ctx.f(); ++i) {
        x.c_[i] = c % ctx.p();
        c /= ctx.p();
    }
    x.s_ = 0;
    x.zero_ = false;
    x.normalize();
    return x.shift(k);
}

long Elem::vpi() const {
    if (zero_) return prec_;
    const long e = ctx_->e();
    long best = LONG_MAX;
    for (long j = 0; j < e; ++j) {
        long b = block_vp(j);
        if (b != LONG_MAX) best = std::min(best, e * b + j);
    }
    return e * s_ + best;
}

ExtRat Elem::valuation() const {
    if (zero_) return std::nullopt;
    return ctx_->from_pi(vpi());
}

long Elem::exact_vpi(const char* where) const {
    if (zero_)
        throw PrecisionLoss(std::string(where) + ": element is zero modulo pi^" + std::to_string(prec_));
    return vpi();
}

Elem Elem::with_prec(long prec) const {
    Elem r = *this;
    if (prec < r.prec_) {
        r.prec_ = prec;
        if (!r.zero_) r.normalize();
    }
    return r;
}

Elem Elem::as_exact() const {
    if (zero_) return zero(*ctx_, ctx_->N());
    Elem r = *this;
    r.prec_ = ctx_->N();
    return r;
}

long Elem::residue() const {
    if (zero_ || vpi() != 0)
        throw NotAUnit("residue of an element of valuation " + ext_str(valuation()));
    long code = 0;
    for (long i = ctx_->f() - 1; i >= 0; --i) {
        mpz_class r;
        mpz_fdiv_r_ui(r.get_mpz_t(), c_[i].get_mpz_t(), static_cast<unsigned long>(ctx_->p()));
        code = code * ctx_->p() + r.get_si();
    }
    return code;
}

long Elem::digit(long k) const {
    if (k >= prec_) throw PrecisionLoss("digit " + std::to_string(k) + " beyond precision");
    if (zero_) return 0;
    const long e = ctx_->e(), f = ctx_->f(), p = ctx_->p();
    long j = mod_pos(k, e);
    long t = (k - j) / e - s_;
    if (t < 0) return 0;
    long code = 0;
    mpz_class pt = ctx_->ppow(t);
    for (long i = f - 1; i >= 0; --i) {
        mpz_class d;
        mpz_fdiv_q(d.get_mpz_t(), c_[j * f + i].get_mpz_t(), pt.get_mpz_t());
        mpz_fdiv_r_ui(d.get_mpz_t(), d.get_mpz_t(), static_cast<unsigned long>(p));
        code = code * p + d.get_si();
    }
    return code;
}

std::vector<long> Elem::digits() const {
    std::vector<long> out;
    if (zero_) return out;
    const long e = ctx_->e(), f = ctx_->f(), p = ctx_->p();
    long v = vpi();
    out.assign(static_cast<size_t>(std::max<long>(0, prec_ - v)), 0);
    // base-p expansion of every coefficient, scattered to its pi-position
    for (long j = 0; j < e; ++j) {
        for (long i = 0; i < f; ++i) {
            mpz_class c = c_[j * f + i];
            long t = 0;
            long scale = 1;
            for (long k = 0; k < i; ++k) scale *= p;
            while (c != 0) {
                unsigned long d = mpz_fdiv_q_ui(c.get_mpz_t(), c.get_mpz_t(), static_cast<unsigned long>(p));
                long pos = e * (s_ + t) + j - v;
                if (pos >= 0 && pos < static_cast<long>(out.size())) out[pos] += static_cast<long>(d) * scale;
                ++t;
            }
        }
    }
    return out;
}

std::string Elem::str() const {
    std::ostringstream os;
    if (zero_) {
        os << "0 @" << rat_str(prec_val());
        return os.str();
    }
    os << ctx_->p() << "^" << rat_str(ctx_->from_pi(vpi())) << " * [";
    auto d = digits();
    for (size_t i = 0; i < d.size(); ++i) os << (i ? "," : "") << d[i];
    os << "] @" << rat_str(prec_val());
    return os.str();
}

Elem Elem::parse(const Context& ctx, const std::string& s) {
    auto at = s.find('@');
    if (at == std::string::npos) throw ParseError("missing '@' in element '" + s + "'");
    Rat precv = parse_rat(s.substr(at + 1));
    long prec = ctx.to_pi(precv);
    std::string head = s.substr(0, at);
    auto star = head.find('*');
    if (star == std::string::npos) {
        std::string t;
        for (char ch : head)
            if (ch != ' ') t += ch;
        if (t != "0") throw ParseError("bad element '" + s + "'");
        return zero(ctx, prec);
    }
    std::string base = head.substr(0, star);
    auto caret = base.find('^');
    if (caret == std::string::npos) throw ParseError("missing exponent in '" + s + "'");
    if (std::stol(base.substr(0, caret)) != ctx.p()) throw ParseError("prime mismatch in '" + s + "'");
    long v = ctx.to_pi(parse_rat(base.substr(caret + 1)));
    auto lb = head.find('[', star), rb = head.find(']', star);
    if (lb == std::string::npos || rb == std::string::npos) throw ParseError("missing digit list in '" + s + "'");
    std::vector<long> digs;
    std::string body = head.substr(lb + 1, rb - lb - 1);
    std::stringstream ss(body);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (tok.find_first_not_of(' ') != std::string::npos) digs.push_back(std::stol(tok));
    if (prec > ctx.N()) throw ParseError("element precision exceeds context precision");
    // assemble p^s * sum c_j pi^j directly from the digits
    const long e = ctx.e(), f = ctx.f(), p = ctx.p();
    Elem x;
    x.ctx_ = &ctx;
    x.prec_ = prec;
    x.s_ = floor_div(v, e);
    x.c_.assign(e * f, 0);
    for (size_t k = 0; k < digs.size(); ++k) {
        long d = digs[k];
        if (d < 0 || d >= ctx.q()) throw ParseError("digit out of range in '" + s + "'");
        long pos = v + static_cast<long>(k) - e * x.s_;
        long j = pos % e, t = pos / e;
        mpz_class pt = ctx.ppow(t);
        for (long i = 0; i < f; ++i) {
            x.c_[j * f + i] += pt * (d % p);
            d /= p;
        }
    }
    x.zero_ = false;
    x.normalize();
    if (!x.zero_ && x.vpi() != v) throw ParseError("leading digit of '" + s + "' is zero");
    return x;
}

Elem Elem::operator-() const {
    Elem r = *this;
    if (!r.zero_) {
        for (auto& v : r.c_) v = -v;
        r.normalize();
    }
    return r;
}

Elem& Elem::operator+=(const Elem& o) {
    long prec = std::min(prec_, o.prec_);
    if (o.zero_) {
        if (prec < prec_) *this = with_prec(prec);
        return *this;
    }
    if (zero_) {
        *this = o.with_prec(prec);
        return *this;
    }
    long s = std::min(s_, o.s_);
    if (s_ > s) {
        mpz_class m = ctx_->ppow(s_ - s);
        for (auto& v : c_) v *= m;
    }
    if (o.s_ > s) {
        mpz_class m = ctx_->ppow(o.s_ - s);
        for (size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k] * m;
    } else {
        for (size_t k = 0; k < c_.size(); ++k) c_[k] += o.c_[k];
    }
    s_ = s;
    prec_ = prec;
    normalize();
    return *this;
}

Elem& Elem::operator-=(const Elem& o) { return *this += -o; }

namespace {

// Kronecker substitution: pack the e coefficients into one big integer with
// limb-aligned slots, multiply once, and read the slots back.
void kronecker_conv(const std::vector<mpz_class>& a, const std::vector<mpz_class>& b, long e,
                    std::vector<mpz_class>& out) {
    size_t ba = 1, bb = 1;
    for (const auto& v : a) ba = std::max(ba, mpz_sizeinbase(v.get_mpz_t(), 2));
    for (const auto& v : b) bb = std::max(bb, mpz_sizeinbase(v.get_mpz_t(), 2));
    size_t W = ba + bb + static_cast<size_t>(bitlen(e)) + 2;
    size_t L = (W + GMP_NUMB_BITS - 1) / GMP_NUMB_BITS;
    std::vector<mp_limb_t> A(e * L, 0), B(e * L, 0);
    for (long j = 0; j < e; ++j) {
        size_t n = mpz_size(a[j].get_mpz_t());
        const mp_limb_t* src = mpz_limbs_read(a[j].get_mpz_t());
        std::copy(src, src + n, A.begin() + j * L);
        n = mpz_size(b[j].get_mpz_t());
        src = mpz_limbs_read(b[j].get_mpz_t());
        std::copy(src, src + n, B.begin() + j * L);
    }
    mpz_t av, bv;
    mpz_class R;
    mpz_mul(R.get_mpz_t(), mpz_roinit_n(av, A.data(), static_cast<mp_size_t>(A.size())),
            mpz_roinit_n(bv, B.data(), static_cast<mp_size_t>(B.size())));
    size_t rs = mpz_size(R.get_mpz_t());
    const mp_limb_t* rl = mpz_limbs_read(R.get_mpz_t());
    out.assign(2 * e, 0);
    for (long n = 0; n < 2 * e - 1; ++n) {
        size_t lo = n * L;
        if (lo >= rs) break;
        size_t len = std::min(L, rs - lo);
        mpz_t view;
        mpz_set(out[n].get_mpz_t(), mpz_roinit_n(view, rl + lo, static_cast<mp_size_t>(len)));
    }
}

} // namespace

Elem mul_impl(const Elem& a, const Elem& b, long prec) {
    const Context& ctx = *a.ctx_;
    const long e = ctx.e(), f = ctx.f(), p = ctx.p();
    Elem r;
    r.ctx_ = &ctx;
    r.prec_ = std::min(prec, ctx.N());
    r.s_ = a.s_ + b.s_;
    // inputs only matter modulo p^K with K the widest block the result keeps
    long K = ceil_div(r.prec_ - e * r.s_, e);
    if (K <= 0) {
        r.set_all_zero();
        return r;
    }
    mpz_class m = ctx.ppow(K);
    size_t mbits = mpz_sizeinbase(m.get_mpz_t(), 2);
    auto trimmed = [&](const std::vector<mpz_class>& src) {
        std::vector<mpz_class> t = src;
        for (auto& v : t)
            if (mpz_sizeinbase(v.get_mpz_t(), 2) > mbits) mpz_fdiv_r(v.get_mpz_t(), v.get_mpz_t(), m.get_mpz_t());
        return t;
    };
    std::vector<mpz_class> ca = trimmed(a.c_), cb = trimmed(b.c_);
    r.c_.assign(e * f, 0);
    if (f == 1) {
        std::vector<mpz_class> conv;
        kronecker_conv(ca, cb, e, conv);
        for (long n = 0; n < e; ++n) {
            r.c_[n] = conv[n];
            if (conv[n + e] != 0) mpz_addmul_ui(r.c_[n].get_mpz_t(), conv[n + e].get_mpz_t(), static_cast<unsigned long>(p));
        }
    } else {
        const auto& g = ctx.modulus();
        std::vector<mpz_class> tmp(2 * f - 1);
        for (long j = 0; j < e; ++j) {
            for (long k = 0; k < e; ++k) {
                for (auto& t : tmp) t = 0;
                bool nz = false;
                for (long i = 0; i < f; ++i) {
                    if (ca[j * f + i] == 0) continue;
                    for (long l = 0; l < f; ++l) {
                        if (cb[k * f + l] == 0) continue;
                        tmp[i + l] += ca[j * f + i] * cb[k * f + l];
                        nz = true;
                    }
                }
                if (!nz) continue;
                // w^f = -sum g_i w^i, lifted to integers
                for (long d = 2 * f - 2; d >= f; --d) {
                    if (tmp[d] == 0) continue;
                    for (long i = 0; i < f; ++i) tmp[d - f + i] -= tmp[d] * g[i];
                    tmp[d] = 0;
                }
                long n = j + k;
                bool wrap = n >= e;
                if (wrap) n -= e;
                for (long i = 0; i < f; ++i) r.c_[n * f + i] += wrap ? tmp[i] * p : tmp[i];
            }
        }
    }
    r.zero_ = false;
    r.normalize();
    return r;
}

Elem& Elem::operator*=(const Elem& o) {
    long prec = std::min(prec_ + o.vpi(), o.prec_ + vpi());
    if (zero_ || o.zero_) {
        *this = zero(*ctx_, prec);
        return *this;
    }
    *this = mul_impl(*this, o, prec);
    return *this;
}

Elem Elem::shift(long k) const {
    Elem r = *this;
    r.prec_ = std::min(prec_ + k, ctx_->N());
    if (zero_) return r;
    const long e = ctx_->e(), f = ctx_->f();
    long q = floor_div(k, e), rr = k - q * e;
    if (rr != 0) {
        std::vector<mpz_class> c(e * f, 0);
        for (long j = 0; j < e; ++j) {
            long n = j + rr;
            bool wrap = n >= e;
            if (wrap) n -= e;
            for (long i = 0; i < f; ++i) {
                c[n * f + i] = c_[j * f + i];
                if (wrap) c[n * f + i] *= ctx_->p();
            }
        }
        r.c_ = std::move(c);
    }
    r.s_ = s_ + q;
    r.normalize();
    return r;
}

Elem Elem::inv() const {
    if (zero_) throw DivisionByZero("inverse of an element that is zero modulo pi^" + std::to_string(prec_));
    const Context& ctx = *ctx_;
    long v = vpi();
    long rel = prec_ - v;  // relative precision carried over to the inverse
    Elem u = shift(-v);    // a unit known to absolute precision rel
    Elem y = digit_at(ctx, ctx.res_inv(u.residue()), 0).with_prec(rel);
    Elem one_ = one(ctx).with_prec(rel);
    long good = 1;
    while (good < rel) {
        y = y + y * (one_ - u * y);
        good *= 2;
    }
    y = y.with_prec(rel);
    return y.shift(-v);
}

Elem Elem::pow(unsigned long k) const {
    Elem r = one(*ctx_);
    Elem b = *this;
    while (k) {
        if (k & 1) r *= b;
        k >>= 1;
        if (k) b *= b;
    }
    return r;
}

Elem add(const Elem& x, const Elem& y) { return x + y; }
Elem mul(const Elem& x, const Elem& y) { return x * y; }
Elem inv(const Elem& x) { return x.inv(); }
ExtRat valuation(const Elem& x) { return x.valuation(); }
long residue(const Elem& x) { return x.residue(); }

// ---------------------------------------------------------------- sampling

namespace {

mpz_class random_below(const mpz_class& m, std::mt19937_64& rng) {
    size_t bits = mpz_sizeinbase(m.get_mpz_t(), 2) + 64;
    mpz_class r = 0;
    for (size_t b = 0; b < bits; b += 64) {
        r <<= 64;
        r += mpz_class(static_cast<unsigned long>(rng()));
    }
    mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), m.get_mpz_t());
    return r;
}

} // namespace

Elem random_elem(const Context& ctx, std::mt19937_64& rng, long vpi, long prec) {
    if (prec <= vpi) throw PrecisionLoss("random_elem: precision below valuation");
    const long e = ctx.e(), f = ctx.f();
    long rel = prec - vpi;
    Elem acc = Elem::zero(ctx, rel);
    // independent random blocks, then force a nonzero leading residue
    for (long j = 0; j < e && j < rel; ++j) {
        long K = ceil_div(rel - j, e);
        long code = 1;
        for (long i = 0; i < f; ++i, code *= ctx.p()) {
            mpz_class c = random_below(ctx.ppow(K), rng);
            if (c == 0) continue;
            Elem t = Elem::digit_at(ctx, code, 0) * Elem::from_int(ctx, c);
            acc += t.shift(j).with_prec(rel);
        }
    }
    long lead = static_cast<long>(1 + rng() % static_cast<unsigned long>(ctx.q() - 1));
    long cur = acc.is_zero() || acc.vpi() > 0 ? 0 : acc.residue();
    // replace the residue of acc by lead
    Elem fix = Elem::digit_at(ctx, ctx.res_add(lead, ctx.res_neg(cur)), 0);
    Elem u = (acc + fix).with_prec(rel);
    if (u.is_zero() || u.vpi() != 0) u = Elem::digit_at(ctx, lead, 0).with_prec(rel);
    return u.shift(vpi);
}

Elem random_at_least(const Context& ctx, std::mt19937_64& rng, long vpi, long prec) {
    long span = std::min<long>(3 * ctx.e(), prec - vpi - 1);
    if (span < 0) return Elem::zero(ctx, prec);
    long off = static_cast<long>(rng() % static_cast<unsigned long>(span + 1));
    return random_elem(ctx, rng, vpi + off, prec);
}

// ---------------------------------------------------------------- balls

bool UltraBall::contains(const Elem& x) const {
    Elem d = x - center;
    if (d.is_zero()) {
        if (!radius_val) return true;
        Rat pv = d.prec_val();
        if (closed ? pv >= *radius_val : pv > *radius_val) return true;
        throw PrecisionLoss("ball membership undecidable at precision " + rat_str(pv));
    }
    if (!radius_val) return false;
    Rat v = *d.valuation();
    return closed ? v >= *radius_val : v > *radius_val;
}

bool UltraBall::contains(const UltraBall& b) const {
    if (!contains(b.center)) return false;
    if (!b.radius_val) return true;
    if (!radius_val) return false;
    if (*b.radius_val > *radius_val) return true;
    if (*b.radius_val < *radius_val) return false;
    return closed || !b.closed;
}

bool UltraBall::intersects(const UltraBall& b) const { return contains(b.center) || b.contains(center); }

} // namespace padyn
