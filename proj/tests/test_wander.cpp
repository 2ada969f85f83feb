#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "padyn/wander.hpp"

using namespace padyn;

namespace {

// sum_{k=1}^{m-1} (1 - p^-k)/(p - 1), summed term by term
Rat margin_oracle(long p, long m, long M) {
    Rat s = 0, pk = 1;
    for (long k = 1; k < m; ++k) {
        pk *= p;
        s += (1 - 1 / pk) / (p - 1);
    }
    return s - M;
}

} // namespace

TEST_CASE("schedules") {
    Schedule s = schedule_sequences(2, 3);
    CHECK(s.M == std::vector<long>{2, 4, 6});
    CHECK(s.m == std::vector<long>{4, 6, 8});
    CHECK(s.N(0) == 0);
    CHECK(s.N(1) == 6);
    CHECK(s.N(2) == 16);
    CHECK(s.N(3) == 30);
    CHECK(s.prefix(2) == "0000110000001111");
    Schedule t = schedule_sequences(3, 1);
    CHECK(t.M[0] == 1);
    CHECK(t.m[0] == 4);
    for (long p : {2L, 3L, 5L}) {
        auto k = FamilyConstants::make(p);
        Schedule u = schedule_sequences(p, 4);
        CHECK(Rat(u.M[0]) >= k.S_val);
        CHECK(Rat(u.M[0] - 1) < k.S_val);
        for (long i = 0; i < 4; ++i) {
            CHECK(margin_oracle(p, u.m[i], u.M[i]) >= 0);
            // minimality flips
            CHECK(!check_wandering_condition(p, {u.m[i] - 1}, {u.M[i]}).ok);
            CHECK(!check_wandering_condition(p, {u.m[i]}, {u.M[i] + 1}).ok);
        }
    }
}

TEST_CASE("wandering condition") {
    auto a = check_wandering_condition(2, {4}, {2});
    CHECK(a.ok);
    CHECK(a.margins[0] == Rat(1, 8));
    auto b = check_wandering_condition(2, {3}, {2});
    CHECK(!b.ok);
    CHECK(b.failing == 0);
    CHECK(check_wandering_condition(2, {1}, {0}).ok);
    CHECK(check_wandering_condition(3, {4}, {1}).margins[0] == Rat(34, 27) - 1);
    CHECK_THROWS_AS(check_wandering_condition(2, {1, 2}, {0}), ConditionViolated);
}

TEST_CASE("ramification sizing") {
    CHECK(auto_ramification(2, schedule_sequences(2, 3)) == 256);
    CHECK(auto_ramification(3, schedule_sequences(3, 1)) % 4 == 0);
}

TEST_CASE("seed by backward induction") {
    Context ctx(3, 1, 3, 90);
    FamilyInstance F(ctx, Series(ctx), Elem::one(ctx));
    CHECK(seed_point(F, 0).same(Elem::one(ctx)));
    // the three preimages of 1 on |x| = 3^-1/3 are not in K
    CHECK_THROWS_AS(seed_point(F, 1), NoRootAtRadius);
}

TEST_CASE("seed by parameter") {
    for (long q : {0L, 4L}) {
        Context ctx(2, 1, 16, 800);
        FamilyInstance F(ctx, Series::constant(Elem::from_int(ctx, q)), Elem::one(ctx));
        SeedResult s = seed_by_parameter(F, 4);
        CHECK(*s.x.valuation() == Rat(15, 16));
        FamilyInstance G = F.with_lambda(s.lambda);
        CHECK((q_conj_iterate(G, s.x, 4) - Elem::one(ctx)).vpi() >= 400);
        CHECK(itinerary(G, s.x, 10).word == "0000111111");
        CHECK((s.lambda - Elem::one(ctx)).vpi() > 0);
        if (q) CHECK(!G.h().same(Elem::one(ctx)));

        // isometry of lambda -> Q^4_lambda(x) on the disc of radius S
        std::mt19937_64 rng(q + 1);
        for (int i = 0; i < 20; ++i) {
            Elem w0 = (s.lambda + random_at_least(ctx, rng, 32, 700)).as_exact();
            Elem w1 = (s.lambda + random_at_least(ctx, rng, 32, 700)).as_exact();
            if (w0.same(w1)) continue;
            Elem d = q_conj_iterate(F.with_lambda(w0), s.x, 4) - q_conj_iterate(F.with_lambda(w1), s.x, 4);
            CHECK(*d.valuation() == *(w0 - w1).valuation());
        }
    }
}

TEST_CASE("phi step and stage gates") {
    Context ctx(2, 1, 64, 3000);
    FamilyInstance F(ctx, Series(ctx), Elem::one(ctx));
    SeedResult s = seed_by_parameter(F, 4);
    StageState st{s.lambda, s.x, 4, Rat(2)};
    Elem w0 = phi_root(F, st, 2);
    CHECK(*(w0 - s.lambda).valuation() == 2);
    FamilyInstance G = F.with_lambda(w0);
    CHECK(q_conj_iterate(G, s.x, 6).vpi() >= 1500);
    CHECK(itinerary(G, s.x, 8).word == "00001100");

    CHECK_THROWS_AS(extend_parameter(F, st, 1, 6), ConditionViolated);  // p^-1 > S
    CHECK_THROWS_AS(extend_parameter(F, st, 2, 3), ConditionViolated);  // margin < 0
    // the return to 1 has no root in K; the search says so and how close it got
    try {
        extend_parameter(F, st, 2, 6);
        FAIL("expected NoRootAtRadius");
    } catch (const NoRootAtRadius& e) {
        CHECK(std::string(e.what()).find("best residual valuation") != std::string::npos);
    }
}

TEST_CASE("certificates") {
    WanderConfig cfg;
    cfg.depth = 1;
    WanderCertificate c = wander_search(cfg);
    CHECK(c.complete);
    CHECK(c.e == 16);
    REQUIRE(c.stages.size() == 1);
    CHECK(c.stages[0].prefix_len == 6);

    auto round = certificate_from_json(certificate_to_json(c));
    CHECK(certificate_to_json(round) == certificate_to_json(c));

    VerifyReport r = verify_certificate(c, 2);
    auto find = [&](const std::string& n) {
        for (const auto& k : r.checks)
            if (k.name == n) return k.pass;
        FAIL("missing check " << n);
        return false;
    };
    CHECK(find("schedule"));
    CHECK(find("itinerary"));
    CHECK(find("disc_itinerary"));
    CHECK(find("diameter"));
    // the seed orbit lands on the fixed point, so its disc cannot wander
    CHECK(!find("disjoint"));
    CHECK(!r.valid);

    // a corrupted parameter digit breaks the itinerary
    WanderCertificate bad = c;
    auto& s = bad.stages[0].lambda;
    auto pos = s.find('[') + 3;
    s[pos] = s[pos] == '0' ? '1' : '0';
    VerifyReport rb = verify_certificate(bad, 2);
    bool itin_fail = false;
    for (const auto& k : rb.checks) itin_fail = itin_fail || (k.name == "itinerary" && !k.pass);
    CHECK(itin_fail);

    // nothing claimed: only the schedule is checked
    WanderCertificate empty = c;
    empty.stages.clear();
    VerifyReport re = verify_certificate(empty, 2);
    CHECK(re.valid);
    CHECK(re.checks.size() == 1);
}

TEST_CASE("partial certificate") {
    WanderConfig cfg;
    cfg.depth = 2;
    WanderCertificate c = wander_search(cfg);
    CHECK(!c.complete);
    CHECK(c.failed_stage == 1);
    CHECK(c.stages.size() == 1);
    CHECK(!verify_certificate(c, 2).valid);
    CHECK(certificate_to_json(c).find("\"failed_stage\": 1") != std::string::npos);
}
