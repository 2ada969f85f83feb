#pragma once

#include <string>
#include <vector>

#include "padyn/analysis.hpp"

namespace padyn {

// Radii of the family, as valuations: |z| = p^-v.
struct FamilyConstants {
    long p = 2;
    Rat rho_val;    // 1/(p-1)
    Rat S_val;      // p/(p-1)^2
    Rat r_hat_val;  // the ball B = {|z| <= p^-r_hat_val}, r_hat_val < 0

    // r_n = (1 - p^-n)/(p-1); r_0 = 0 and r_n = (r_{n-1} + 1)/p.
    Rat rho_n_val(long n) const;

    static FamilyConstants make(long p, const Rat& r_hat_val = -1);
};

/**
 * One member of the perturbed family: P_lambda + Q conjugated so that 1 is
 * fixed.  Construction runs the admission test (||Q||_B < rho strictly,
 * |lambda - 1| < 1) and computes h(lambda) once.
 */
class FamilyInstance {
public:
    FamilyInstance(const Context& ctx, Series Q, const Elem& lambda, const Rat& r_hat_val = -1);

    const Context& ctx() const { return *ctx_; }
    const FamilyConstants& consts() const { return k_; }
    const Series& Q() const { return Q_; }
    const Elem& lambda() const { return lambda_; }
    const Elem& h() const { return h_; }
    const Series& P() const { return P_; }

    // Same Q, new parameter; h is recomputed.
    FamilyInstance with_lambda(const Elem& lambda) const;

    // Q*_lambda = P_lambda + Q as a series.
    Series q_star_series() const;
    // Q_lambda(t) = Q*_lambda(t + h - 1) + 1 - h.
    Series q_conj_series() const;

private:
    FamilyInstance() = default;
    void compute_h();

    const Context* ctx_ = nullptr;
    FamilyConstants k_;
    Series Q_;
    Series P_;
    Elem lambda_;
    Elem h_;
};

// Thrown-free checks used by the CLI and certificates.
bool q_admissible(const Series& Q, const FamilyConstants& k, std::string* why = nullptr);
bool lambda_admissible(const Elem& lambda);

Series p_family_series(const Context& ctx, const Elem& lambda);
Elem p_family_eval(const Elem& lambda, const Elem& z);
Elem fixed_point_h(const FamilyInstance& inst);
Elem q_conj_eval(const FamilyInstance& inst, const Elem& z);
Elem q_conj_iterate(const FamilyInstance& inst, const Elem& z, long n);

enum class Region { FixedBall, Annulus, NearOne, EscapeSphere, Outside };
const char* region_name(Region r);

// Predicted valuation of Q_lambda(z), or of Q_lambda(z) - 1 for NearOne.
// For FixedBall the prediction is a lower bound.
struct RegionPrediction {
    Region region;
    Rat val;
    bool exact = true;
    bool minus_one = false;
};

RegionPrediction region_classify(const FamilyInstance& inst, const Elem& z);

// Does q_conj_eval agree with the prediction?
bool region_prediction_holds(const FamilyInstance& inst, const Elem& z, const RegionPrediction& pr);

// A point of the requested region, built directly (no rejection).
Elem sample_region(const FamilyInstance& inst, Region r, std::mt19937_64& rng);

enum class ItinStatus { AtHorizon, Escaped, FellToFixedBall, PrecisionLoss };

struct ItineraryRecord {
    std::string word;  // '0' for B_1(0), '1' for B_1(1)
    ItinStatus status = ItinStatus::AtHorizon;
    long step = 0;     // step at which the status was decided

    std::string status_str() const;
};

ItineraryRecord itinerary(const FamilyInstance& inst, const Elem& z, long horizon);

struct JuliaMembership {
    bool in_k = false;  // in K(Q_lambda, B) up to the horizon
    long escaped_at = -1;
    long horizon = 0;
};

JuliaMembership filled_julia_member(const FamilyInstance& inst, const Elem& z, long horizon);

struct LemmaReport {
    std::string name;
    long samples = 0;
    long passed = 0;
    long skipped = 0;  // lost to precision
    std::string witness;  // first failure, reproducible from the seed
    bool ok() const { return passed + skipped == samples && passed > 0; }
};

/**
 * Exact valuation checks of the local estimates (difference of iterates in
 * z and in lambda, and the Lipschitz bound on h) on constructed samples
 * satisfying each hypothesis.  Sample depths are limited to those whose
 * radii are representable in the context.
 */
std::vector<LemmaReport> verify_local_estimates(const Context& ctx, const Series& Q, long count,
                                                std::uint64_t seed, long max_depth = 3);

} // namespace padyn
