#include "padyn/wander.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

namespace padyn {

long Schedule::N(long i) const {
    long n = 0;
    for (long k = 0; k < i && k < depth(); ++k) n += m[k] + M[k];
    return n;
}

std::string Schedule::prefix(long i) const {
    std::string s;
    for (long k = 0; k < i && k < depth(); ++k) s += std::string(m[k], '0') + std::string(M[k], '1');
    return s;
}

namespace {

// sum_{k=1}^{m-1} r_k
Rat rho_product_val(const FamilyConstants& k, long m) {
    Rat s = 0;
    for (long j = 1; j < m; ++j) s += k.rho_n_val(j);
    return s;
}

long lcm_den(long acc, const Rat& v) {
    mpz_class d = v.get_den();
    return std::lcm(acc, d.get_si());
}

ExtRat val_or_prec(const Elem& x) { return x.is_zero() ? ExtRat(x.prec_val()) : x.valuation(); }

// larger is better; failures rank below everything
Rat score_of(const std::function<Elem()>& f) {
    try {
        Elem y = f();
        return *val_or_prec(y);
    } catch (const Error&) {
        return Rat(-1000000);
    }
}

/**
 * Secant iteration for F(w) = 0 when F scales distances by a fixed power of
 * p near the root.  Iterates are kept exact: they are parameters we choose,
 * not measured quantities.
 */
std::optional<Elem> secant_solve(const std::function<Elem(const Elem&)>& F, Elem w, Elem w_prev, long goal_pi,
                                 ExtRat* best) {
    Elem f = F(w), fp = F(w_prev);
    long stall = 0;
    Rat last = -1000000;
    for (int it = 0; it < 200; ++it) {
        ExtRat v = val_or_prec(f);
        if (best && (!*best || *v > **best)) *best = v;
        if (f.is_zero() || f.vpi() >= goal_pi) return w;
        if (*v <= last) {
            if (++stall > 6) return std::nullopt;
        } else {
            stall = 0;
            last = *v;
        }
        Elem den = f - fp;
        if (den.is_zero()) return std::nullopt;
        Elem next = (w - (f * (w - w_prev)) / den).as_exact();
        w_prev = w;
        fp = f;
        w = next;
        f = F(w);
    }
    return std::nullopt;
}

} // namespace

Schedule schedule_sequences(long p, long depth) {
    auto k = FamilyConstants::make(p);
    Schedule s;
    long step = rat_ceil(k.S_val).get_si();  // least M with p^-M <= S
    long M = step;
    for (long i = 0; i < depth; ++i) {
        long m = 1;
        while (rho_product_val(k, m) < M) ++m;
        s.M.push_back(M);
        s.m.push_back(m);
        M += step;
    }
    return s;
}

WanderingCheck check_wandering_condition(long p, const std::vector<long>& m, const std::vector<long>& M) {
    if (m.size() != M.size()) throw ConditionViolated("schedule lists differ in length");
    auto k = FamilyConstants::make(p);
    WanderingCheck c;
    for (size_t i = 0; i < m.size(); ++i) {
        Rat margin = rho_product_val(k, m[i]) - M[i];
        c.margins.push_back(margin);
        if (margin < 0 && c.ok) {
            c.ok = false;
            c.failing = static_cast<long>(i);
        }
    }
    return c;
}

long auto_ramification(long p, const Schedule& s) {
    auto k = FamilyConstants::make(p);
    long e = lcm_den(1, k.S_val);
    e = lcm_den(e, k.rho_val);
    for (long i = 0; i < s.depth(); ++i) e = lcm_den(e, k.rho_n_val(s.m[i]));
    return e;
}

long auto_precision(long e, const Schedule& s) { return e * (3 * s.N(s.depth()) + 40); }

Elem seed_point(const FamilyInstance& inst, long m0) {
    const Context& ctx = inst.ctx();
    Elem y = Elem::one(ctx);
    if (m0 == 0) return y;
    Series q = inst.q_conj_series();
    for (long j = 1; j <= m0; ++j) {
        auto r = solve_on_sphere(q, y, inst.consts().rho_n_val(j));
        y = r.roots.front();
    }
    return y;
}

SeedResult seed_by_parameter(const FamilyInstance& inst, long m0) {
    const Context& ctx = inst.ctx();
    const Elem one = Elem::one(ctx);
    if (m0 == 0) return {one, inst.lambda()};
    Elem x = Elem::pi_power(ctx, ctx.to_pi(inst.consts().rho_n_val(m0)));
    auto F = [&](const Elem& lam) { return q_conj_iterate(inst.with_lambda(lam), x, m0) - one; };
    // lambda -> Q^{m0}_lambda(x) is an isometry on discs of radius S; the
    // first probe sits one p-digit below the current residual
    Elem lam = inst.lambda().as_exact();
    long v0 = F(lam).vpi();
    Elem lam1 = lam + Elem::pi_power(ctx, std::max<long>(v0 + ctx.e(), 1));
    ExtRat best;
    auto r = secant_solve(F, lam, lam1, ctx.N() / 2, &best);
    if (!r) throw NoRootAtRadius("seed parameter search stalled at residual valuation " + ext_str(best));
    return {x, *r};
}

Elem phi_root(const FamilyInstance& base, const StageState& st, long M) {
    const Context& ctx = base.ctx();
    // phi(w) = Q_w^{n+M}(x) scales distances by p^M near lambda
    auto phi = [&](const Elem& w) { return q_conj_iterate(base.with_lambda(w), st.x, st.n + M); };
    Elem lam = st.lambda.as_exact();
    ExtRat best;
    auto w0 = secant_solve(phi, lam, lam + Elem::pi_power(ctx, ctx.e() * (M + 1)), ctx.N() / 2, &best);
    if (!w0) throw NoRootAtRadius("phi-step stalled at residual valuation " + ext_str(best));
    return *w0;
}

StageResult extend_parameter(const FamilyInstance& base, const StageState& st, long M, long m, long final_ones) {
    const Context& ctx = base.ctx();
    const auto& k = base.consts();
    const Elem one = Elem::one(ctx);
    if (Rat(M) < st.eps_val) throw ConditionViolated("p^-M = p^-" + std::to_string(M) + " exceeds the isometry radius p^-" + rat_str(st.eps_val));
    Rat margin = rho_product_val(k, m) - M;
    if (margin <= 0) throw ConditionViolated("p^M rho_{m-1}...rho_1 < 1 fails (margin " + rat_str(margin) + ")");
    Elem back = q_conj_iterate(base.with_lambda(st.lambda), st.x, st.n) - one;
    if (!back.is_zero() && back.vpi() < ctx.N() / 2)
        throw ConditionViolated("stage state does not return to 1 (residual " + ext_str(back.valuation()) + ")");

    const long e = ctx.e();
    const long goal = ctx.N() / 2;
    StageResult res;

    res.w0 = phi_root(base, st, M);
    const std::optional<Elem> w0 = res.w0;

    // psi(w) = Q_w^{n+M+m}(x) = 1 on |w - w0| = p^-M rho_m
    const long n2 = st.n + M + m;
    auto psi = [&](const Elem& w) { return q_conj_iterate(base.with_lambda(w), st.x, n2) - one; };
    auto score = [&](const Elem& w) { return score_of([&] { return psi(w); }); };
    long a = ctx.to_pi(Rat(M) + k.rho_n_val(m));
    Elem w;
    Rat cur = -1000000;
    for (long d = 1; d < ctx.q(); ++d) {
        Elem c = *w0 + Elem::digit_at(ctx, d, a);
        Rat s = score(c);
        if (s > cur) {
            cur = s;
            w = c;
        }
    }
    // greedy digit refinement until the isometry level is reached
    const Rat iso = Rat(M) + k.S_val;
    for (long pos = a + 1; pos <= a + 4 * e && cur < iso; ++pos) {
        for (long d = 1; d < ctx.q(); ++d) {
            Elem c = w + Elem::digit_at(ctx, d, pos);
            Rat s = score(c);
            if (s > cur) {
                cur = s;
                w = c;
            }
        }
    }
    res.best_residual = cur;
    if (cur >= iso) {
        ExtRat best_psi;
        long probe = ctx.to_pi(cur) + e;
        auto lam2 = secant_solve(psi, w, w + Elem::pi_power(ctx, probe), goal, &best_psi);
        if (lam2) {
            res.exact = true;
            res.best_residual = val_or_prec(psi(*lam2));
            res.next = {*lam2, st.x, n2, iso};
            return res;
        }
        cur = std::max(cur, *best_psi);
        res.best_residual = cur;
    }
    if (final_ones > 0 && cur > final_ones - 1) {
        res.next = {w, st.x, n2, iso};
        return res;
    }
    throw NoRootAtRadius("psi-step: no parameter in K returns the orbit to 1; best residual valuation " + rat_str(cur) +
                         (final_ones > 0 ? ", need more than " + std::to_string(final_ones - 1)
                                         : ", isometry level " + rat_str(iso)));
}

namespace {

void add(std::vector<CertCheck>& out, const std::string& name, bool pass, const std::string& witness) {
    out.push_back({name, pass, witness});
}

std::vector<CertCheck> run_checks(const WanderCertificate& cert, const Context& ctx, std::uint64_t seed) {
    std::vector<CertCheck> out;
    auto k = FamilyConstants::make(cert.p, cert.r_hat_val);
    const Schedule& sch = cert.schedule;

    // schedule inequalities
    {
        auto w = check_wandering_condition(cert.p, sch.m, sch.M);
        std::string wit;
        bool ok = w.ok;
        if (!ok) wit = "index " + std::to_string(w.failing) + " margin " + rat_str(w.margins[w.failing]);
        for (long i = 0; i < sch.depth() && ok; ++i) {
            Rat step = i == 0 ? Rat(sch.M[0]) : Rat(sch.M[i] - sch.M[i - 1]);
            if (step < k.S_val) {
                ok = false;
                wit = "p^-" + rat_str(step) + " > S at index " + std::to_string(i);
            }
        }
        add(out, "schedule", ok, wit);
    }
    if (!cert.complete) add(out, "complete", false, cert.failure.empty() ? "search did not finish" : cert.failure);
    if (cert.stages.empty()) return out;

    Series Q = Series::from_spec(ctx, cert.Q);
    Elem x = Elem::parse(ctx, cert.seed).as_exact();
    Elem lam = Elem::parse(ctx, cert.stages.back().lambda).as_exact();
    FamilyInstance F(ctx, Q, lam, cert.r_hat_val);
    const long L = cert.stages.back().prefix_len;
    const std::string want = sch.prefix(sch.depth()).substr(0, L);

    // itinerary of x
    auto rec = itinerary(F, x, L);
    add(out, "itinerary", rec.word == want, rec.word == want ? "" : "got " + rec.word + " " + rec.status_str() + ", want " + want);

    // all of D shares the prefix
    const long S_pi = ctx.to_pi(k.S_val);
    {
        std::mt19937_64 rng(seed);
        std::string wit;
        for (int j = 0; j < 20 && wit.empty(); ++j) {
            Elem y = (x + random_at_least(ctx, rng, S_pi, ctx.N() - ctx.e())).as_exact();
            auto r = itinerary(F, y, L);
            if (r.word != want) wit = "y=" + y.str() + " gives " + r.word;
        }
        add(out, "disc_itinerary", wit.empty(), wit);
    }

    // images of D, diameters and pairwise disjointness
    {
        Series q = F.q_conj_series();
        std::vector<UltraBall> balls{UltraBall{x, k.S_val, true}};
        std::string wit;
        try {
            for (long j = 1; j <= L; ++j) balls.push_back(image_ball(q, balls.back()));
        } catch (const Error& e) {
            wit = std::string("image balls: ") + e.what();
        }
        std::string dwit = wit;
        for (long i = 0; i < sch.depth() && dwit.empty(); ++i) {
            long a = sch.N(i) + sch.m[i], b = sch.N(i + 1);
            if (a <= L && static_cast<long>(balls.size()) > a && !ext_ge(balls[a].radius_val, sch.M[i] + k.S_val))
                dwit = "diam Q^" + std::to_string(a) + "(D) = p^-" + ext_str(balls[a].radius_val);
            if (b <= L && static_cast<long>(balls.size()) > b && !ext_ge(balls[b].radius_val, k.S_val))
                dwit = "diam Q^" + std::to_string(b) + "(D) = p^-" + ext_str(balls[b].radius_val);
        }
        add(out, "diameter", dwit.empty(), dwit);
        std::string jwit = wit;
        for (size_t a = 0; a < balls.size() && jwit.empty(); ++a)
            for (size_t b = a + 1; b < balls.size() && jwit.empty(); ++b)
                if (balls[a].intersects(balls[b]))
                    jwit = "Q^" + std::to_string(a) + "(D) meets Q^" + std::to_string(b) + "(D)";
        add(out, "disjoint", jwit.empty(), jwit);
    }

    // Cauchy distances
    {
        std::string wit;
        for (size_t i = 1; i < cert.stages.size() && wit.empty(); ++i) {
            Elem a = Elem::parse(ctx, cert.stages[i].lambda).as_exact();
            Elem b = Elem::parse(ctx, cert.stages[i - 1].lambda).as_exact();
            ExtRat d = (a - b).is_zero() ? ExtRat() : (a - b).valuation();
            Rat need = sch.M[i - 1] + k.S_val;
            if (!ext_ge(d, need)) wit = "stage " + std::to_string(i) + ": v = " + ext_str(d) + " < " + rat_str(need);
        }
        add(out, "cauchy", wit.empty(), wit);
    }
    return out;
}

} // namespace

WanderCertificate wander_search(const WanderConfig& cfg) {
    if (cfg.depth < 0) throw InvalidContext("depth must be nonnegative");
    Schedule sch = schedule_sequences(cfg.p, std::max<long>(cfg.depth, 1));
    long e = cfg.e > 0 ? cfg.e : auto_ramification(cfg.p, sch);
    long N = cfg.N > 0 ? cfg.N : auto_precision(e, sch);
    if (N > 4000000) throw InvalidContext("implied precision " + std::to_string(N) + " exceeds the memory cap");
    auto ctx = make_context(cfg.p, cfg.f, e, N);
    Series Q = Series::from_spec(*ctx, cfg.Q);
    FamilyInstance base(*ctx, Q, Elem::from_rational(*ctx, cfg.lambda), cfg.r_hat_val);

    WanderCertificate cert;
    cert.p = cfg.p;
    cert.f = cfg.f;
    cert.e = e;
    cert.N = N;
    cert.r_hat_val = cfg.r_hat_val;
    cert.Q = cfg.Q;
    cert.schedule = sch;

    StageState st;
    try {
        SeedResult sd = seed_by_parameter(base, sch.m[0]);
        cert.seed = sd.x.str();
        Elem d = sd.lambda - base.lambda();
        long len = cfg.depth == 0 ? sch.m[0] : sch.N(1);
        cert.stages.push_back({0, sd.lambda.str(), d.is_zero() ? ExtRat() : d.valuation(), len});
        st = {sd.lambda, sd.x, sch.m[0], base.consts().S_val};
    } catch (const Error& ex) {
        cert.failed_stage = 0;
        cert.failure = ex.what();
        cert.checks = run_checks(cert, *ctx, 1);
        return cert;
    }
    for (long i = 1; i < cfg.depth; ++i) {
        try {
            long final_ones = i + 1 == cfg.depth ? sch.M[i] : 0;
            StageResult r = extend_parameter(base, st, sch.M[i - 1], sch.m[i], final_ones);
            Elem d = r.next.lambda - st.lambda;
            cert.stages.push_back({i, r.next.lambda.str(), d.is_zero() ? ExtRat() : d.valuation(), sch.N(i + 1)});
            st = r.next;
        } catch (const Error& ex) {
            cert.failed_stage = i;
            cert.failure = "stage " + std::to_string(i) + ": " + ex.what();
            cert.checks = run_checks(cert, *ctx, 1);
            return cert;
        }
    }
    cert.complete = true;
    cert.checks = run_checks(cert, *ctx, 1);
    return cert;
}

VerifyReport verify_certificate(const WanderCertificate& cert, const Rat& precision_factor) {
    if (precision_factor < 1) throw ConditionViolated("precision factor must be at least 1");
    long N = rat_ceil(precision_factor * cert.N).get_si();
    auto ctx = make_context(cert.p, cert.f, cert.e, N);
    VerifyReport rep;
    try {
        rep.checks = run_checks(cert, *ctx, 2);
    } catch (const Error& ex) {
        rep.checks.push_back({"evaluation", false, ex.what()});
    }
    rep.valid = !rep.checks.empty() &&
                std::all_of(rep.checks.begin(), rep.checks.end(), [](const CertCheck& c) { return c.pass; });
    return rep;
}

} // namespace padyn
