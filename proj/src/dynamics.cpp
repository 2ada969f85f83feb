#include "padyn/dynamics.hpp"

#include <algorithm>
#include <functional>

namespace padyn {

Rat FamilyConstants::rho_n_val(long n) const {
    Rat r = 0;
    for (long i = 0; i < n; ++i) r = (r + 1) / p;
    return r;
}

FamilyConstants FamilyConstants::make(long p, const Rat& r_hat_val) {
    if (!is_prime(p)) throw InvalidContext("p must be prime");
    if (r_hat_val >= 0) throw InvalidContext("the ball B needs radius > 1 (r_hat_val < 0)");
    FamilyConstants k;
    k.p = p;
    k.rho_val = Rat(1, p - 1);
    k.S_val = Rat(p, (p - 1) * (p - 1));
    k.r_hat_val = r_hat_val;
    return k;
}

bool q_admissible(const Series& Q, const FamilyConstants& k, std::string* why) {
    try {
        ExtRat g = gauss_norm(Q, k.r_hat_val);
        if (!g || *g > k.rho_val) return true;
        if (why) *why = "||Q||_B = p^-" + rat_str(*g) + " is not below rho = p^-" + rat_str(k.rho_val);
    } catch (const Error& e) {
        if (why) *why = e.what();
    }
    return false;
}

bool lambda_admissible(const Elem& lambda) {
    Elem d = lambda - Elem::one(lambda.ctx());
    return d.is_zero() ? d.prec() > 0 : d.vpi() > 0;
}

Series p_family_series(const Context& ctx, const Elem& lambda) {
    Elem a = lambda.shift(-ctx.e());
    Series s(ctx);
    s.set_coeff(ctx.p(), a);
    s.set_coeff(ctx.p() + 1, Elem::one(ctx) - a);
    return s;
}

Elem p_family_eval(const Elem& lambda, const Elem& z) { return eval(p_family_series(lambda.ctx(), lambda), z); }

FamilyInstance::FamilyInstance(const Context& ctx, Series Q, const Elem& lambda, const Rat& r_hat_val)
    : ctx_(&ctx), k_(FamilyConstants::make(ctx.p(), r_hat_val)), Q_(std::move(Q)), lambda_(lambda) {
    std::string why;
    if (!q_admissible(Q_, k_, &why)) throw AdmissionError("perturbation rejected: " + why);
    if (!lambda_admissible(lambda_)) throw AdmissionError("lambda must satisfy |lambda - 1| < 1");
    P_ = p_family_series(ctx, lambda_);
    compute_h();
}

FamilyInstance FamilyInstance::with_lambda(const Elem& lambda) const {
    if (!lambda_admissible(lambda)) throw AdmissionError("lambda must satisfy |lambda - 1| < 1");
    FamilyInstance r = *this;
    r.lambda_ = lambda;
    r.P_ = p_family_series(*ctx_, lambda);
    r.compute_h();
    return r;
}

void FamilyInstance::compute_h() {
    const Elem one = Elem::one(*ctx_);
    if (Q_.degree() < 0 && !Q_.tail()) {
        h_ = one;
        return;
    }
    // Newton from h_0 = 1 on Q*_lambda(z) - z
    h_ = hensel_lift(q_star_series() - Series::identity(*ctx_), one);
}

Series FamilyInstance::q_star_series() const { return P_ + Q_; }

Series FamilyInstance::q_conj_series() const {
    const Elem one = Elem::one(*ctx_);
    Elem c = h_ - one;
    Series s = recenter(P_, c) + recenter(Q_, c);
    s.set_coeff(0, s.coeff(0) + one - h_);
    return s;
}

Elem fixed_point_h(const FamilyInstance& inst) { return inst.h(); }

Elem q_conj_eval(const FamilyInstance& inst, const Elem& z) {
    const auto& k = inst.consts();
    if (!z.is_zero() && *z.valuation() < k.r_hat_val) throw ConditionViolated("point outside the ball B");
    const Elem one = Elem::one(inst.ctx());
    Elem a = z + inst.h() - one;
    Elem y = eval(inst.P(), a);
    if (inst.Q().degree() >= 0 || inst.Q().tail()) y += eval(inst.Q(), a);
    return y + one - inst.h();
}

Elem q_conj_iterate(const FamilyInstance& inst, const Elem& z, long n) {
    Elem x = z;
    for (long i = 0; i < n; ++i) x = q_conj_eval(inst, x);
    return x;
}

const char* region_name(Region r) {
    switch (r) {
    case Region::FixedBall: return "FixedBall";
    case Region::Annulus: return "Annulus";
    case Region::NearOne: return "NearOne";
    case Region::EscapeSphere: return "EscapeSphere";
    case Region::Outside: return "Outside";
    }
    return "?";
}

RegionPrediction region_classify(const FamilyInstance& inst, const Elem& z) {
    const auto& k = inst.consts();
    const Rat p(k.p);
    if (z.is_zero()) {
        if (z.prec_val() >= k.rho_val) return {Region::FixedBall, k.rho_val, false, false};
        throw PrecisionLoss("point too imprecise to classify");
    }
    Rat vz = *z.valuation();
    if (vz >= k.rho_val) return {Region::FixedBall, k.rho_val, false, false};
    if (vz > 0) return {Region::Annulus, p * vz - 1, true, false};
    if (vz < k.r_hat_val) throw ConditionViolated("point outside the ball B");
    if (vz < 0) return {Region::Outside, (p + 1) * vz - 1, true, false};
    Elem w = z - Elem::one(inst.ctx());
    if (w.is_zero()) throw PrecisionLoss("|z - 1| not decidable at this precision");
    Rat vw = *w.valuation();
    if (vw > 0) return {Region::NearOne, vw - 1, true, true};
    return {Region::EscapeSphere, Rat(-1), true, false};
}

bool region_prediction_holds(const FamilyInstance& inst, const Elem& z, const RegionPrediction& pr) {
    Elem y = q_conj_eval(inst, z);
    if (pr.minus_one) y -= Elem::one(inst.ctx());
    if (y.is_zero()) {
        if (!pr.exact && y.prec_val() >= pr.val) return true;
        if (y.prec_val() <= pr.val) throw PrecisionLoss("image known only to valuation " + rat_str(y.prec_val()));
        return false;
    }
    Rat v = *y.valuation();
    return pr.exact ? v == pr.val : v >= pr.val;
}

Elem sample_region(const FamilyInstance& inst, Region r, std::mt19937_64& rng) {
    const Context& ctx = inst.ctx();
    const auto& k = inst.consts();
    long e = ctx.e();
    long prec = std::max(ctx.N() - 4 * e, ctx.N() / 2);
    auto pick = [&](long lo, long hi) { return lo + static_cast<long>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
    long rho_pi = rat_ceil(k.rho_val * e).get_si();
    switch (r) {
    case Region::FixedBall:
        return random_elem(ctx, rng, pick(rho_pi, rho_pi + 3 * e), prec);
    case Region::Annulus: {
        // 0 < v < rho
        long hi = rat_ceil(k.rho_val * e).get_si() - 1;
        if (hi < 1) throw ConditionViolated("no annulus points at this ramification");
        return random_elem(ctx, rng, pick(1, hi), prec);
    }
    case Region::NearOne:
        return Elem::one(ctx) + random_elem(ctx, rng, pick(1, 4 * e), prec);
    case Region::EscapeSphere: {
        if (ctx.q() <= 2) throw ResidueFieldTooSmall("the sphere |z| = |z - 1| = 1 has no points over F_2");
        long code = pick(2, ctx.q() - 1);
        return Elem::digit_at(ctx, code, 0) + random_at_least(ctx, rng, 1, prec);
    }
    case Region::Outside: {
        long lo = rat_ceil(k.r_hat_val * e).get_si();
        return random_elem(ctx, rng, pick(lo, -1), prec);
    }
    }
    return Elem::zero(ctx);
}

std::string ItineraryRecord::status_str() const {
    switch (status) {
    case ItinStatus::AtHorizon: return "AtHorizon";
    case ItinStatus::Escaped: return "Escaped(" + std::to_string(step) + ")";
    case ItinStatus::FellToFixedBall: return "FellToFixedBall(" + std::to_string(step) + ")";
    case ItinStatus::PrecisionLoss: return "PrecisionLoss(" + std::to_string(step) + ")";
    }
    return "?";
}

ItineraryRecord itinerary(const FamilyInstance& inst, const Elem& z, long horizon) {
    const auto& k = inst.consts();
    const Elem one = Elem::one(inst.ctx());
    ItineraryRecord rec;
    Elem x = z;
    for (long n = 0; static_cast<long>(rec.word.size()) < horizon; ++n) {
        rec.step = n;
        if (x.prec() <= 0) {
            rec.status = ItinStatus::PrecisionLoss;
            return rec;
        }
        ExtRat vx = x.is_zero() ? ExtRat(x.prec_val()) : x.valuation();
        if (*vx >= k.rho_val) {
            // the fixed ball is forward invariant and lies in B_1(0)
            rec.word.resize(horizon, '0');
            rec.status = ItinStatus::FellToFixedBall;
            return rec;
        }
        if (x.is_zero()) {
            rec.status = ItinStatus::PrecisionLoss;
            return rec;
        }
        if (*vx < 0) {
            rec.status = ItinStatus::Escaped;
            return rec;
        }
        if (*vx > 0) {
            rec.word.push_back('0');
        } else if ((x - one).vpi() > 0) {
            rec.word.push_back('1');
        } else if (n > 2 * horizon + 2) {
            throw ConditionViolated("orbit stuck on the escape sphere");
        }
        // escape sphere: no symbol, the next iterate has |.| = p
        try {
            x = q_conj_eval(inst, x);
        } catch (const PrecisionLoss&) {
            rec.status = ItinStatus::PrecisionLoss;
            rec.step = n + 1;
            return rec;
        }
    }
    rec.status = ItinStatus::AtHorizon;
    rec.step = horizon;
    return rec;
}

JuliaMembership filled_julia_member(const FamilyInstance& inst, const Elem& z, long horizon) {
    ItineraryRecord r = itinerary(inst, z, horizon);
    JuliaMembership m;
    m.horizon = horizon;
    if (r.status == ItinStatus::PrecisionLoss) throw PrecisionLoss("orbit lost to precision at step " + std::to_string(r.step));
    if (r.status == ItinStatus::Escaped) {
        m.escaped_at = r.step;
        return m;
    }
    m.in_k = true;
    return m;
}

namespace {

struct Sampler {
    const Context& ctx;
    std::mt19937_64 rng;
    long prec;

    long pick(long lo, long hi) { return lo + static_cast<long>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); }
    Elem unit_ball(long v) { return random_elem(ctx, rng, v, prec); }
    Elem lambda() { return Elem::one(ctx) + random_at_least(ctx, rng, 1, prec); }
};

std::optional<long> pi_units(const Context& ctx, const Rat& v) {
    try {
        return ctx.to_pi(v);
    } catch (const RadiusNotRepresentable&) {
        return std::nullopt;
    }
}

ExtRat val_of(const Elem& x) {
    if (x.is_zero()) throw PrecisionLoss("difference vanished at precision");
    return x.valuation();
}

} // namespace

std::vector<LemmaReport> verify_local_estimates(const Context& ctx, const Series& Q, long count, std::uint64_t seed,
                                                long max_depth) {
    const long e = ctx.e();
    const auto k = FamilyConstants::make(ctx.p());
    const Rat p(ctx.p());
    Sampler s{ctx, std::mt19937_64(seed), std::max(ctx.N() - 4 * e, ctx.N() / 2)};
    auto inst = [&](const Elem& lam) { return FamilyInstance(ctx, Q, lam); };

    // depths m whose radius rho_m is a valuation in K
    std::vector<long> depths;
    for (long m = 1; m <= max_depth; ++m)
        if (pi_units(ctx, k.rho_n_val(m)) && pi_units(ctx, k.rho_n_val(m - 1))) depths.push_back(m);
    auto S_pi = pi_units(ctx, k.S_val);

    std::vector<LemmaReport> out;
    auto run = [&](const std::string& name, bool possible, const std::function<std::string(long)>& one) {
        LemmaReport r;
        r.name = name;
        if (!possible) {
            r.witness = "hypotheses not representable in this context";
            out.push_back(r);
            return;
        }
        for (long i = 0; i < count; ++i) {
            ++r.samples;
            try {
                std::string bad = one(i);
                if (bad.empty()) {
                    ++r.passed;
                } else if (r.witness.empty()) {
                    r.witness = "seed " + std::to_string(seed) + " sample " + std::to_string(i) + ": " + bad;
                }
            } catch (const PrecisionLoss&) {
                ++r.skipped;
            }
        }
        out.push_back(r);
    };

    // |z0| = |z1| = rho_m, |z0 - z1| <= S  =>  |Q(z0) - Q(z1)| <= rho_{m-1} |z0 - z1|
    run("diferg.1", !depths.empty() && S_pi.has_value(), [&](long) -> std::string {
        long m = depths[s.pick(0, static_cast<long>(depths.size()) - 1)];
        auto F = inst(s.lambda());
        Elem z0 = s.unit_ball(*pi_units(ctx, k.rho_n_val(m)));
        Elem z1 = z0 + s.unit_ball(s.pick(*S_pi, *S_pi + 2 * e));
        Rat dz = *val_of(z0 - z1);
        Rat dq = *val_of(q_conj_eval(F, z0) - q_conj_eval(F, z1));
        if (dq >= dz + k.rho_n_val(m - 1)) return "";
        return "m=" + std::to_string(m) + " z0=" + z0.str() + " z1=" + z1.str();
    });

    // z0, z1 in B_1(1)  =>  |Q(z0) - Q(z1)| = p |z0 - z1|
    run("diferg.2", true, [&](long) -> std::string {
        auto F = inst(s.lambda());
        Elem z0 = Elem::one(ctx) + s.unit_ball(s.pick(1, 3 * e));
        Elem z1 = z0 + s.unit_ball(s.pick(1, 4 * e));
        if ((z1 - Elem::one(ctx)).vpi() < 1) return "";  // not in B_1(1) after all; cannot happen
        Rat dz = *val_of(z0 - z1);
        Rat dq = *val_of(q_conj_eval(F, z0) - q_conj_eval(F, z1));
        if (dq == dz - 1) return "";
        return "z0=" + z0.str() + " z1=" + z1.str();
    });

    // P_lambda0(z) - P_lambda1(z) on B_0 and on B_1
    run("res9", true, [&](long i) -> std::string {
        Elem l0 = s.lambda(), l1 = l0 + s.unit_ball(s.pick(1, 3 * e));
        Rat dl = *val_of(l0 - l1);
        Elem z = (i % 2 == 0) ? s.unit_ball(s.pick(1, 3 * e)) : Elem::one(ctx) + s.unit_ball(s.pick(1, 3 * e));
        Rat want = (i % 2 == 0) ? Rat(-1 + p * *z.valuation() + dl) : Rat(-1 + dl + *val_of(z - Elem::one(ctx)));
        Rat got = *val_of(p_family_eval(l0, z) - p_family_eval(l1, z));
        if (got == want) return "";
        return "z=" + z.str() + " lambda0=" + l0.str() + " lambda1=" + l1.str();
    });

    // |x_i - 1| <= p^-M, |lambda0 - lambda1| = |x0 - x1|  =>  difference of M-th iterates is p^M |dlambda|
    run("res10", true, [&](long) -> std::string {
        long M = s.pick(1, max_depth);
        long d = s.pick(M * e, M * e + 2 * e);
        Elem x0 = Elem::one(ctx) + random_at_least(ctx, s.rng, M * e, s.prec);
        Elem x1 = x0 + s.unit_ball(d);
        Elem l0 = s.lambda(), l1 = l0 + s.unit_ball(d);
        Rat got = *val_of(q_conj_iterate(inst(l0), x0, M) - q_conj_iterate(inst(l1), x1, M));
        if (got == ctx.from_pi(d) - M) return "";
        return "M=" + std::to_string(M) + " x0=" + x0.str() + " x1=" + x1.str() + " lambda0=" + l0.str() +
               " lambda1=" + l1.str();
    });

    // |x_i| = rho_m, |x0 - x1| <= S, rho_{m-1}...rho_1 |x0 - x1| < |dlambda| <= S  =>  = |dlambda|
    run("res11", !depths.empty() && S_pi.has_value(), [&](long) -> std::string {
        long m = depths[s.pick(0, static_cast<long>(depths.size()) - 1)];
        Rat sum = 0;
        for (long j = 1; j < m; ++j) sum += k.rho_n_val(j);
        auto sum_pi = pi_units(ctx, sum);
        if (!sum_pi) throw PrecisionLoss("radius product not representable");
        long dx = s.pick(*S_pi + (m == 1 ? 1 : 0), *S_pi + 2 * e);
        long dl = s.pick(*S_pi, *sum_pi + dx - 1);
        Elem x0 = s.unit_ball(*pi_units(ctx, k.rho_n_val(m)));
        Elem x1 = x0 + s.unit_ball(dx);
        Elem l0 = s.lambda(), l1 = l0 + s.unit_ball(dl);
        Rat got = *val_of(q_conj_iterate(inst(l0), x0, m) - q_conj_iterate(inst(l1), x1, m));
        if (got == ctx.from_pi(dl)) return "";
        return "m=" + std::to_string(m) + " x0=" + x0.str() + " x1=" + x1.str() + " lambda0=" + l0.str() +
               " lambda1=" + l1.str();
    });

    // |h(lambda0) - h(lambda1)| <= rho |lambda0 - lambda1|
    run("res2", true, [&](long) -> std::string {
        Elem l0 = s.lambda(), l1 = l0 + s.unit_ball(s.pick(1, 3 * e));
        Rat dl = *val_of(l0 - l1);
        Elem dh = inst(l0).h() - inst(l1).h();
        if (dh.is_zero() ? dh.prec_val() >= dl + k.rho_val : *dh.valuation() >= dl + k.rho_val) return "";
        return "lambda0=" + l0.str() + " lambda1=" + l1.str();
    });
    return out;
}

} // namespace padyn
