#pragma once

#include <string>
#include <vector>

#include "padyn/dynamics.hpp"

namespace padyn {

// Depths M_i (ones) and m_i (zeros) of the target itinerary
// 0^{m_0} 1^{M_0} 0^{m_1} 1^{M_1} ...
struct Schedule {
    std::vector<long> M;
    std::vector<long> m;

    long depth() const { return static_cast<long>(M.size()); }
    // N_0 = 0, N_i = N_{i-1} + m_{i-1} + M_{i-1}
    long N(long i) const;
    // the first N(i) symbols of the target itinerary
    std::string prefix(long i) const;
};

Schedule schedule_sequences(long p, long depth);

struct WanderingCheck {
    bool ok = true;
    std::vector<Rat> margins;  // sum_{k<m_i} r_k - M_i
    long failing = -1;
};

WanderingCheck check_wandering_condition(long p, const std::vector<long>& m, const std::vector<long>& M);

// Smallest e making every radius the search touches a valuation in K.
long auto_ramification(long p, const Schedule& s);
// Absolute precision (pi-units) that survives N_d expanding steps.
long auto_precision(long e, const Schedule& s);

/**
 * x with |x| = rho_{m0} and Q_lambda^{m0}(x) = 1, by backward induction
 * through solve_on_sphere.  For the unperturbed family these preimages
 * generate wild extensions, so this usually ends in NoRootAtRadius.
 */
Elem seed_point(const FamilyInstance& inst, long m0);

// x = pi^{e r_{m0}} held fixed; lambda moved near the given one until
// Q_lambda^{m0}(x) = 1 exactly.
struct SeedResult {
    Elem x;
    Elem lambda;
};
SeedResult seed_by_parameter(const FamilyInstance& inst, long m0);

struct StageState {
    Elem lambda;
    Elem x;
    long n = 0;       // Q_lambda^n(x) = 1
    Rat eps_val;      // isometry radius of lambda -> Q_lambda^n(x)
};

struct StageResult {
    StageState next;
    Elem w0;               // Q_{w0}^{n+M}(x) = 0
    ExtRat best_residual;  // v(Q_{lambda'}^{n+M+m}(x) - 1) reached
    bool exact = false;
};

// w0 with |w0 - lambda| = p^-M and Q_{w0}^{n+M}(x) = 0.
Elem phi_root(const FamilyInstance& base, const StageState& st, long M);

/**
 * One inductive step: move lambda by at most p^-M so that the orbit of x
 * continues 1^M 0^m and returns to 1.  final_ones > 0 accepts an inexact
 * return as long as the next final_ones symbols are 1.
 */
StageResult extend_parameter(const FamilyInstance& base, const StageState& st, long M, long m, long final_ones = 0);

struct CertCheck {
    std::string name;
    bool pass = false;
    std::string witness;
};

struct StageRecord {
    long i = 0;
    std::string lambda;
    ExtRat dist_exponent;  // v(lambda_i - lambda_{i-1})
    long prefix_len = 0;
};

struct WanderCertificate {
    int version = 1;
    long p = 2;
    int f = 1;
    long e = 1;
    long N = 0;
    Rat r_hat_val = -1;
    std::vector<CoeffSpec> Q;
    Schedule schedule;
    std::string seed;
    std::vector<StageRecord> stages;
    std::vector<CertCheck> checks;
    bool complete = false;
    long failed_stage = -1;
    std::string failure;
};

struct WanderConfig {
    long p = 2;
    int f = 1;
    long e = 0;  // 0: auto
    long N = 0;  // 0: auto
    Rat r_hat_val = -1;
    std::vector<CoeffSpec> Q;
    long depth = 2;
    Rat lambda = 1;
};

WanderCertificate wander_search(const WanderConfig& cfg);

struct VerifyReport {
    bool valid = false;
    std::vector<CertCheck> checks;
};

VerifyReport verify_certificate(const WanderCertificate& cert, const Rat& precision_factor = 2);

std::string certificate_to_json(const WanderCertificate& cert);
WanderCertificate certificate_from_json(const std::string& text);

} // namespace padyn
