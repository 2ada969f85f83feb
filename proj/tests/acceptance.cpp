// Acceptance run: one PASS/FAIL line per criterion, with wall time.
#include <chrono>
#include <cstdio>
#include <functional>
#include <set>

#include "padyn/wander.hpp"

using namespace padyn;

namespace {

struct Outcome {
    bool pass = true;
    std::string note;
    void fail(const std::string& why) {
        if (pass) note = why;
        pass = false;
    }
};

void run(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.fail(std::string("exception: ") + e.what());
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.pass && s > budget_s) o.fail("over time budget");
    std::printf("[%d] %s %s (%.2fs)%s%s\n", id, o.pass ? "PASS" : "FAIL", title, s, o.note.empty() ? "" : ": ",
                o.note.c_str());
    std::fflush(stdout);
}

// p-adic valuation of a nonzero rational, by trial division
long vp(const Rat& q, long p) {
    long v = 0;
    mpz_class n = q.get_num(), d = q.get_den();
    while (n % p == 0) n /= p, ++v;
    while (d % p == 0) d /= p, --v;
    return v;
}

mpz_class unit(std::mt19937_64& rng, long p) {
    for (;;) {
        long u = static_cast<long>(rng() % 100000) + 1;
        if (u % p) return rng() % 2 ? u : -u;
    }
}

Rat random_rat(std::mt19937_64& rng, long p) {
    long k = static_cast<long>(rng() % 21) - 10;
    Rat q(unit(rng, p), unit(rng, p));
    q.canonicalize();
    mpz_class pk;
    mpz_ui_pow_ui(pk.get_mpz_t(), p, std::abs(k));
    return k >= 0 ? Rat(q * pk) : Rat(q / pk);
}

long mod_pk(const Elem& x, long k) {
    long r = 0, pk = 1;
    for (long i = 0; i < k; ++i, pk *= x.ctx().p()) r += x.digit(i) * pk;
    return r;
}

Outcome ultrametric() {
    Outcome o;
    for (long p : {2L, 3L, 5L}) {
        // rationals: valuations checked against exact rational arithmetic
        Context ctx(p, 1, 1, 400);
        std::mt19937_64 rng(p);
        for (int k = 0; k < 10000; ++k) {
            Rat a = random_rat(rng, p), b = random_rat(rng, p), c = random_rat(rng, p);
            Elem x = Elem::from_rational(ctx, a), y = Elem::from_rational(ctx, b), z = Elem::from_rational(ctx, c);
            long vx = x.vpi(), vy = y.vpi();
            if (vx != vp(a, p) || vy != vp(b, p)) o.fail("valuation of a rational");
            Rat s = a + b;
            Elem xs = x + y;
            if (s != 0 && xs.vpi() != vp(s, p)) o.fail("sum valuation");
            if (xs.vpi() < std::min(vx, vy)) o.fail("strong triangle");
            if (vx != vy && xs.vpi() != std::min(vx, vy)) o.fail("isosceles");
            if ((x * y).vpi() != vx + vy) o.fail("product valuation");
            if ((x - z).vpi() < std::min((x - y).vpi(), (y - z).vpi())) o.fail("triangle on triples");
        }
        // ramified, unramified-extended elements
        Context ram(p, 2, 3, 150);
        for (int k = 0; k < 10000; ++k) {
            Elem x = random_elem(ram, rng, static_cast<long>(rng() % 40) - 10, 120);
            Elem y = random_elem(ram, rng, static_cast<long>(rng() % 40) - 10, 120);
            Elem z = random_elem(ram, rng, static_cast<long>(rng() % 40) - 10, 120);
            long vx = x.vpi(), vy = y.vpi();
            Elem s = x + y;
            if (s.vpi() < std::min(vx, vy)) o.fail("strong triangle (ramified)");
            if (vx != vy && s.vpi() != std::min(vx, vy)) o.fail("isosceles (ramified)");
            if ((x * y).vpi() != vx + vy) o.fail("product valuation (ramified)");
            if ((x - z).vpi() < std::min((x - y).vpi(), (y - z).vpi())) o.fail("triangle on triples (ramified)");
        }
    }
    return o;
}

Outcome hensel() {
    Outcome o;
    Context ctx(5, 1, 1, 60);
    Series f = Series::from_spec(ctx, {{0, 1, 1}, {2, 1, 1}});
    std::vector<HenselStep> tr;
    Elem w = hensel_lift(f, Elem::from_int(ctx, 2), &tr);
    std::set<long> roots;
    for (long x = 0; x < 625; ++x)
        if ((x * x + 1) % 625 == 0) roots.insert(x);
    if (mod_pk(w, 2) != 7) o.fail("w mod 25 = " + std::to_string(mod_pk(w, 2)));
    if (!roots.count(mod_pk(w, 4))) o.fail("w mod 625 is not a root");
    if (!eval(f, w).is_zero()) o.fail("residual not zero at working precision");
    for (size_t n = 0; n < tr.size(); ++n) {
        if (tr[n].deriv_val != tr[0].deriv_val) o.fail("|f'(z_n)| changed");
        if (n + 1 < tr.size() && tr[n + 1].residual_val && *tr[n + 1].residual_val < 2 * *tr[n].residual_val)
            o.fail("residual valuation did not double");
    }
    if (tr.size() < 3) o.fail("trace too short");
    return o;
}

Outcome newton_oracle() {
    Outcome o;
    long polys = 0;
    for (long p : {2L, 3L}) {
        Context ctx(p, 1, 4, 200);
        std::mt19937_64 rng(p * 31);
        Series z = Series::identity(ctx);
        for (int k = 0; k < 500; ++k, ++polys) {
            int deg = 1 + static_cast<int>(rng() % 6);
            std::vector<long> vals;
            Series f = Series::constant(Elem::one(ctx));
            for (int j = 0; j < deg; ++j) {
                long v = static_cast<long>(rng() % 13) - 4;
                vals.push_back(v);
                f = f * (z - Series::constant(random_elem(ctx, rng, v, 150)));
            }
            for (long v = -6; v <= 10; ++v) {
                long want = std::count(vals.begin(), vals.end(), v);
                if (count_roots_on_sphere(f, ctx.from_pi(v)) != want) o.fail("count mismatch");
            }
            // radii strictly between pi-units carry no roots
            if (count_roots_on_sphere(f, Rat(1, 8)) != 0) o.fail("root off the value group");
        }
    }
    o.note = o.pass ? std::to_string(polys) + " polynomials" : o.note;
    return o;
}

std::vector<Series> admitted_qs(const Context& ctx) {
    long p = ctx.p();
    return {Series(ctx), Series::constant(Elem::from_int(ctx, p * p)),
            Series::from_spec(ctx, {{0, p * p, 1}, {1, p * p * p, 1}, {3, p * p * p * p * p, 1}})};
}

Outcome regions() {
    Outcome o;
    for (long p : {2L, 3L}) {
        // f = 2 so that the escape sphere has points off both residue discs
        Context ctx(p, 2, 4, 160);
        std::mt19937_64 rng(p + 7);
        for (const auto& q : admitted_qs(ctx)) {
            FamilyInstance F(ctx, q, Elem::one(ctx) + random_at_least(ctx, rng, 1, 120));
            for (Region r : {Region::FixedBall, Region::Annulus, Region::NearOne, Region::EscapeSphere, Region::Outside}) {
                for (int i = 0; i < 1000; ++i) {
                    Elem z = sample_region(F, r, rng);
                    auto pr = region_classify(F, z);
                    if (pr.region != r) o.fail(std::string("sample left ") + region_name(r));
                    if (!region_prediction_holds(F, z, pr)) o.fail(std::string("prediction in ") + region_name(r));
                    if (r == Region::EscapeSphere && q_conj_eval(F, z).vpi() != -ctx.e())
                        o.fail("escape sphere image not on |z| = p");
                }
            }
        }
    }
    return o;
}

Outcome parameter_lemmas() {
    Outcome o;
    Context ctx(2, 1, 8, 500);
    std::set<std::string> seen;
    for (long c : {0L, 4L}) {
        for (const auto& r : verify_local_estimates(ctx, Series::constant(Elem::from_int(ctx, c)), 200, 11)) {
            seen.insert(r.name);
            if (r.samples < 200) o.fail(r.name + " has fewer than 200 samples");
            if (!r.ok()) o.fail(r.name + ": " + r.witness);
        }
    }
    for (const char* n : {"diferg.1", "diferg.2", "res9", "res10", "res11", "res2"})
        if (!seen.count(n)) o.fail(std::string("missing ") + n);
    return o;
}

Outcome fixed_point() {
    Outcome o;
    Context ctx(2, 1, 4, 240);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        FamilyInstance F(ctx, Series(ctx), Elem::one(ctx) + random_at_least(ctx, rng, 1, 200));
        if (!F.h().same(Elem::one(ctx))) o.fail("h != 1 for Q = 0");
    }
    // h = 1 mod 8 solves h^3 + h^2 - 2h + 8 = 0 when lambda = 1, Q = 4
    std::vector<long> want;
    for (long x = 1; x < 64; x += 8)
        if ((x * x * x + x * x - 2 * x + 8) % 128 == 0) want.push_back(x);
    Context c1(2, 1, 1, 80);
    Series four = Series::constant(Elem::from_int(c1, 4));
    long got = mod_pk(FamilyInstance(c1, four, Elem::one(c1)).h(), 6);
    if (want != std::vector<long>{41} || got != 41) o.fail("h(1) mod 64 = " + std::to_string(got));
    FamilyInstance G(ctx, Series::constant(Elem::from_int(ctx, 4)), Elem::one(ctx));
    for (int i = 0; i < 100; ++i) {
        FamilyInstance H = G.with_lambda(Elem::one(ctx) + random_at_least(ctx, rng, 1, 200));
        if ((H.h() - Elem::one(ctx)).vpi() < 3 * ctx.e()) o.fail("|h - 1| > 1/8");
    }
    return o;
}

Outcome schedules() {
    Outcome o;
    Schedule s = schedule_sequences(2, 3);
    if (s.M != std::vector<long>{2, 4, 6} || s.m != std::vector<long>{4, 6, 8}) o.fail("p = 2 schedule");
    Schedule t = schedule_sequences(3, 1);
    if (t.M[0] != 1 || t.m[0] != 4) o.fail("p = 3 schedule");
    for (long p : {2L, 3L, 5L}) {
        Schedule u = schedule_sequences(p, 4);
        for (long i = 0; i < 4; ++i) {
            if (!check_wandering_condition(p, {u.m[i]}, {u.M[i]}).ok) o.fail("schedule violates its condition");
            if (check_wandering_condition(p, {u.m[i] - 1}, {u.M[i]}).ok) o.fail("m not minimal");
        }
        auto k = FamilyConstants::make(p);
        if (Rat(u.M[0]) < k.S_val || Rat(u.M[0] - 1) >= k.S_val) o.fail("M_0 not minimal");
    }
    return o;
}

Outcome wander_run(const std::vector<CoeffSpec>& Q) {
    Outcome o;
    WanderConfig cfg;
    cfg.p = 2;
    cfg.Q = Q;
    cfg.depth = 2;
    WanderCertificate c = wander_search(cfg);
    if (!c.complete) {
        o.fail("search stopped at stage " + std::to_string(c.failed_stage) + ": " + c.failure);
        return o;
    }
    VerifyReport r = verify_certificate(c, 2);
    for (const char* need : {"itinerary", "disc_itinerary", "disjoint", "diameter"}) {
        bool found = false;
        for (const auto& k : r.checks) found = found || (k.name == need && k.pass);
        if (!found) o.fail(std::string("check ") + need + " missing or failing");
    }
    if (!r.valid) o.fail("certificate not VALID at 2x precision");
    return o;
}

Outcome degree() {
    Outcome o;
    for (long p : {2L, 3L}) {
        Context ctx(p, 1, 4, 200);
        std::mt19937_64 rng(p + 40);
        for (const auto& q : admitted_qs(ctx)) {
            for (int i = 0; i < 10; ++i) {
                FamilyInstance F(ctx, q, Elem::one(ctx) + random_at_least(ctx, rng, 1, 160));
                UltraBall B{Elem::zero(ctx), F.consts().r_hat_val, true};
                long d = map_degree(F.q_conj_series(), B);
                if (d != p + 1) o.fail("degree " + std::to_string(d) + " for p = " + std::to_string(p));
            }
        }
    }
    return o;
}

} // namespace

int main() {
    run(1, "ultrametric axioms", 10, ultrametric);
    run(2, "hensel suite", 1, hensel);
    run(3, "newton polygon oracle", 30, newton_oracle);
    run(4, "region lemma", 60, regions);
    run(5, "parameter lemmas", 60, parameter_lemmas);
    run(6, "fixed point", 60, fixed_point);
    run(7, "schedules", 60, schedules);
    run(8, "wandering disc p=2 Q=0 depth 2", 120, [] { return wander_run({}); });
    run(8, "wandering disc p=2 Q=4 depth 2", 120, [] { return wander_run({{0, 4, 1}}); });
    run(9, "degree p+1", 60, degree);
    return 0;
}
