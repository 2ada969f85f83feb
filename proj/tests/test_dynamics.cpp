#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "padyn/dynamics.hpp"

using namespace padyn;

namespace {

Series constant(const Context& ctx, long c) { return Series::constant(Elem::from_int(ctx, c)); }

long mod_pk(const Elem& x, long k) {
    long r = 0, pk = 1;
    for (long i = 0; i < k; ++i, pk *= x.ctx().p()) r += x.digit(i) * pk;
    return r;
}

// x mod 2^k with x = 1 mod 8 and x^3 + x^2 - 2x + 8 = 0 mod 2^k, by exhaustion
std::vector<long> h_oracle(long k) {
    long m = 1L << k;
    std::vector<long> out;
    for (long x = 1; x < m; x += 8)
        if (((x * x * x + x * x - 2 * x + 8) % (2 * m)) == 0) out.push_back(x);
    return out;
}

} // namespace

TEST_CASE("family constants") {
    auto k2 = FamilyConstants::make(2), k3 = FamilyConstants::make(3);
    CHECK(k2.rho_val == 1);
    CHECK(k3.rho_val == Rat(1, 2));
    CHECK(k2.S_val == 2);
    CHECK(k3.S_val == Rat(3, 4));
    CHECK(k3.S_val > k3.rho_val);
    CHECK(k2.rho_n_val(0) == 0);
    for (long n = 1; n < 8; ++n) {
        CHECK(k3.rho_n_val(n) == (k3.rho_n_val(n - 1) + 1) / 3);
        CHECK(k2.rho_n_val(n) < k2.rho_val);
        CHECK(k2.rho_n_val(n) > k2.rho_n_val(n - 1));
    }
    CHECK_THROWS_AS(FamilyConstants::make(2, 1), InvalidContext);
}

TEST_CASE("P_lambda evaluation") {
    for (long p : {2L, 3L, 5L}) {
        Context ctx(p, 1, 1, 40);
        Elem lam = Elem::from_int(ctx, 1 + p * 7);
        CHECK(p_family_eval(lam, Elem::one(ctx)).same(Elem::one(ctx)));
        CHECK(p_family_eval(lam, Elem::zero(ctx)).is_zero());
    }
    Context c3(3, 1, 1, 40);
    CHECK(p_family_eval(Elem::one(c3), Elem::from_int(c3, -1)).same(Elem::from_rational(c3, Rat(1, 3))));
}

TEST_CASE("fixed point h") {
    Context ctx(2, 1, 4, 200);
    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) {
        Elem lam = Elem::one(ctx) + random_at_least(ctx, rng, 1, 150);
        FamilyInstance F(ctx, Series(ctx), lam);
        CHECK(F.h().same(Elem::one(ctx)));
    }
    Context c1(2, 1, 1, 60);
    auto want = h_oracle(6);
    REQUIRE(want.size() == 1);
    CHECK(want[0] == 41);
    CHECK(mod_pk(FamilyInstance(c1, constant(c1, 4), Elem::one(c1)).h(), 6) == 41);
    FamilyInstance G(ctx, constant(ctx, 4), Elem::one(ctx));
    for (int i = 0; i < 30; ++i) {
        FamilyInstance H = G.with_lambda(Elem::one(ctx) + random_at_least(ctx, rng, 1, 150));
        CHECK((H.h() - Elem::one(ctx)).vpi() >= 3 * ctx.e());
        CHECK(q_conj_eval(H, Elem::one(ctx)).same(Elem::one(ctx)));
    }
}

TEST_CASE("admission") {
    Context ctx(2, 1, 1, 60);
    CHECK_THROWS_AS(FamilyInstance(ctx, constant(ctx, 2), Elem::one(ctx)), AdmissionError);
    CHECK_NOTHROW(FamilyInstance(ctx, constant(ctx, 4), Elem::one(ctx)));
    CHECK_THROWS_AS(FamilyInstance(ctx, Series(ctx), Elem::from_int(ctx, 2)), AdmissionError);
    // on |z| <= 2, 32 z^2 has norm 2^-3 < rho = 1/2; 8 z^2 sits on the boundary
    Series q = Series::from_spec(ctx, {{2, 32, 1}});
    CHECK_NOTHROW(FamilyInstance(ctx, q, Elem::one(ctx)));
    Series big = Series::from_spec(ctx, {{2, 8, 1}});
    CHECK_THROWS_AS(FamilyInstance(ctx, big, Elem::one(ctx)), AdmissionError);
}

TEST_CASE("conjugated map") {
    for (long p : {2L, 3L}) {
        Context ctx(p, 1, 2, 120);
        for (long c : {0L, p * p}) {
            FamilyInstance F(ctx, constant(ctx, c), Elem::from_int(ctx, 1 + p));
            CHECK(q_conj_eval(F, Elem::one(ctx)).same(Elem::one(ctx)));
            Series s = F.q_conj_series();
            CHECK(*eval(derivative(s), Elem::one(ctx)).valuation() == -1);
            CHECK(map_degree(s, UltraBall{Elem::zero(ctx), Rat(-1), true}) == p + 1);
            Elem z = Elem::from_rational(ctx, Rat(3, 7));
            CHECK(eval(s, z).same(q_conj_eval(F, z)));
        }
    }
    Context c3(3, 1, 1, 40);
    FamilyInstance F(c3, Series(c3), Elem::one(c3));
    CHECK(q_conj_eval(F, Elem::from_int(c3, -1)).same(Elem::from_rational(c3, Rat(1, 3))));
}

TEST_CASE("region examples") {
    Context ctx(3, 1, 3, 90);
    FamilyInstance F(ctx, Series(ctx), Elem::one(ctx));
    auto a = region_classify(F, Elem::pi_power(ctx, 1));
    CHECK(a.region == Region::Annulus);
    CHECK(a.val == 0);
    CHECK(region_prediction_holds(F, Elem::pi_power(ctx, 1), a));
    CHECK(region_classify(F, Elem::from_int(ctx, 3)).region == Region::FixedBall);
    auto esc = region_classify(F, Elem::from_int(ctx, -1));
    CHECK(esc.region == Region::EscapeSphere);
    CHECK(esc.val == -1);
    CHECK(region_prediction_holds(F, Elem::from_int(ctx, -1), esc));
}

TEST_CASE("region predictions on constructed samples") {
    for (long p : {2L, 3L}) {
        Context ctx(p, 2, 4, 160);
        std::vector<Series> qs{Series(ctx), constant(ctx, p * p),
                               Series::from_spec(ctx, {{0, p * p, 1}, {1, p * p * p, 1}, {3, p * p * p * p * p, 1}})};
        std::mt19937_64 rng(p + 100);
        for (const auto& q : qs) {
            FamilyInstance F(ctx, q, Elem::one(ctx) + random_at_least(ctx, rng, 1, 120));
            for (Region r : {Region::FixedBall, Region::Annulus, Region::NearOne, Region::EscapeSphere, Region::Outside}) {
                for (int i = 0; i < 60; ++i) {
                    Elem z = sample_region(F, r, rng);
                    auto pr = region_classify(F, z);
                    REQUIRE(pr.region == r);
                    CHECK(region_prediction_holds(F, z, pr));
                }
            }
        }
    }
}

TEST_CASE("itineraries") {
    Context ctx(3, 1, 1, 60);
    FamilyInstance F(ctx, Series(ctx), Elem::one(ctx));
    auto one = itinerary(F, Elem::one(ctx), 12);
    CHECK(one.word == std::string(12, '1'));
    CHECK(one.status == ItinStatus::AtHorizon);
    auto zero = itinerary(F, Elem::zero(ctx), 5);
    CHECK(zero.word == "00000");
    CHECK(zero.status_str() == "FellToFixedBall(0)");
    auto m1 = itinerary(F, Elem::from_int(ctx, -1), 5);
    CHECK(m1.status_str() == "Escaped(1)");
    CHECK(m1.word.empty());

    CHECK(filled_julia_member(F, Elem::one(ctx), 20).in_k);
    CHECK(filled_julia_member(F, Elem::zero(ctx), 20).in_k);
    auto out = filled_julia_member(F, Elem::from_rational(ctx, Rat(1, 3)), 20);
    CHECK(!out.in_k);
    CHECK(out.escaped_at == 0);
}

TEST_CASE("first return to B_1(1) from the sphere |x| = rho_n") {
    Context ctx(2, 1, 8, 400);
    std::mt19937_64 rng(8);
    FamilyInstance F(ctx, Series(ctx), Elem::one(ctx) + Elem::from_int(ctx, 2));
    auto k = F.consts();
    for (long n = 1; n <= 3; ++n) {
        long v = ctx.to_pi(k.rho_n_val(n));
        for (int i = 0; i < 20; ++i) {
            Elem x = random_elem(ctx, rng, v, 300);
            auto rec = itinerary(F, x, n + 1);
            CHECK(rec.word == std::string(n, '0') + "1");
        }
    }
}

TEST_CASE("local estimates") {
    for (long c : {0L, 4L}) {
        Context ctx(2, 1, 8, 500);
        auto reps = verify_local_estimates(ctx, Series::constant(Elem::from_int(ctx, c)), 40, 17);
        REQUIRE(reps.size() == 6);
        for (const auto& r : reps) {
            INFO(r.name, " ", r.witness);
            CHECK(r.ok());
        }
    }
    Context c3(3, 1, 36, 1800);
    for (const auto& r : verify_local_estimates(c3, Series(c3), 20, 5, 2)) {
        INFO(r.name, " ", r.witness);
        CHECK(r.ok());
    }
}
