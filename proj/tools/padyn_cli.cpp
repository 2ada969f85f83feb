#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "padyn/wander.hpp"

using namespace padyn;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kBadConfig = 1, kComputation = 2, kVerification = 3 };

// Raised for malformed or inadmissible configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Rat rat_field(const json& j, const char* key, const Rat& dflt) {
    if (!j.contains(key)) return dflt;
    const json& v = j.at(key);
    if (v.is_number_integer()) return Rat(v.get<long>());
    if (v.is_string()) return parse_rat(v.get<std::string>());
    throw ConfigError(std::string(key) + " must be an integer or a rational string");
}

mpz_class big(const json& v) {
    if (v.is_number_integer()) return mpz_class(v.get<long>());
    if (v.is_string()) return mpz_class(v.get<std::string>());
    throw ConfigError("coefficient entries must be integers");
}

std::vector<CoeffSpec> coeff_list(const json& j, const char* key) {
    std::vector<CoeffSpec> out;
    if (!j.contains(key)) return out;
    for (const auto& c : j.at(key)) {
        if (!c.is_array() || c.size() != 3) throw ConfigError(std::string(key) + " entries are [index, num, den]");
        out.push_back({c.at(0).get<long>(), big(c.at(1)), big(c.at(2))});
        if (out.back().den == 0) throw ConfigError("zero denominator in " + std::string(key));
    }
    return out;
}

std::optional<TailBound> tail_of(const json& j, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    const json& t = j.at(key);
    TailBound b;
    b.from = t.at("from_index").get<long>();
    b.slope = rat_field(t, "val_slope", 0);
    b.offset = rat_field(t, "offset", 0);
    return b;
}

struct Setup {
    json cfg;
    ContextPtr ctx;
    Rat r_hat_val = -1;
    std::uint64_t seed = 1;
};

Setup load(const std::string& path, std::optional<std::uint64_t> seed) {
    Setup s;
    try {
        s.cfg = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    const json& c = s.cfg;
    long p = c.value("p", 2L);
    if (!is_prime(p)) throw ConfigError("p must be prime");
    int f = c.value("f", 1);
    long e = 1;
    if (c.contains("e") && c.at("e").is_number_integer()) e = c.at("e").get<long>();
    long N = c.contains("precision") && c.at("precision").is_number_integer() ? c.at("precision").get<long>() : 200 * e;
    s.r_hat_val = rat_field(c, "r_hat_val", -1);
    if (s.r_hat_val >= 0) throw ConfigError("r_hat_val must be negative (r_hat > 1)");
    s.seed = seed ? *seed : c.value("seed", 1UL);
    try {
        s.ctx = make_context(p, f, e, N);
    } catch (const InvalidContext& ex) {
        throw ConfigError(ex.what());
    }
    return s;
}

Series q_series(const Setup& s) {
    Series Q = Series::from_spec(*s.ctx, coeff_list(s.cfg, "Q"), tail_of(s.cfg, "Q_tail"));
    std::string why;
    if (!q_admissible(Q, FamilyConstants::make(s.ctx->p(), s.r_hat_val), &why)) throw ConfigError("admission: " + why);
    return Q;
}

Elem point(const Setup& s, const json& v) {
    if (v.is_number_integer()) return Elem::from_int(*s.ctx, v.get<long>());
    std::string t = v.get<std::string>();
    if (t.find('@') != std::string::npos) return Elem::parse(*s.ctx, t);
    return Elem::from_rational(*s.ctx, parse_rat(t));
}

FamilyInstance family(const Setup& s) {
    Elem lam = s.cfg.contains("lambda") ? point(s, s.cfg.at("lambda")) : Elem::one(*s.ctx);
    if (!lambda_admissible(lam)) throw ConfigError("admission: lambda must satisfy |lambda - 1| < 1");
    return FamilyInstance(*s.ctx, q_series(s), lam, s.r_hat_val);
}

json checks_json(const std::vector<CertCheck>& cs) {
    json a = json::array();
    for (const auto& c : cs) a.push_back({{"name", c.name}, {"pass", c.pass}, {"witness", c.witness}});
    return a;
}

int cmd_verify_lemmas(const Setup& s, json& out) {
    long count = s.cfg.value("samples", 200L);
    Series Q = q_series(s);
    bool ok = true;
    json lemmas = json::array();
    for (const auto& r : verify_local_estimates(*s.ctx, Q, count, s.seed, s.cfg.value("depth", 3L))) {
        ok = ok && r.ok();
        lemmas.push_back({{"name", r.name}, {"samples", r.samples}, {"passed", r.passed}, {"skipped", r.skipped},
                          {"pass", r.ok()}, {"witness", r.witness}});
    }
    json regions = json::array();
    FamilyInstance F = family(s);
    std::mt19937_64 rng(s.seed);
    for (Region reg : {Region::FixedBall, Region::Annulus, Region::NearOne, Region::EscapeSphere, Region::Outside}) {
        long passed = 0, n = 0;
        std::string witness;
        try {
            for (; n < count; ++n) {
                Elem z = sample_region(F, reg, rng);
                auto pr = region_classify(F, z);
                if (pr.region == reg && region_prediction_holds(F, z, pr)) ++passed;
                else if (witness.empty()) witness = z.str();
            }
        } catch (const ResidueFieldTooSmall& ex) {
            regions.push_back({{"region", region_name(reg)}, {"samples", 0}, {"pass", true}, {"witness", ex.what()}});
            continue;
        }
        ok = ok && passed == n;
        regions.push_back({{"region", region_name(reg)}, {"samples", n}, {"passed", passed}, {"pass", passed == n},
                           {"witness", witness}});
    }
    out = {{"lemmas", lemmas}, {"regions", regions}, {"pass", ok}};
    return ok ? kOk : kVerification;
}

int cmd_hensel(const Setup& s, json& out) {
    Series fn = Series::from_spec(*s.ctx, coeff_list(s.cfg, "series"));
    std::vector<HenselStep> trace;
    Elem w = hensel_lift(fn, point(s, s.cfg.at("z0")), &trace);
    json t = json::array();
    for (const auto& h : trace) t.push_back({{"residual_val", ext_str(h.residual_val)}, {"deriv_val", ext_str(h.deriv_val)}});
    out = {{"root", w.str()}, {"trace", t}};
    return kOk;
}

int cmd_newton(const Setup& s, json& out) {
    Series fn = Series::from_spec(*s.ctx, coeff_list(s.cfg, "series"), tail_of(s.cfg, "tail"));
    NewtonPolygon np = newton_polygon(fn);
    json v = json::array(), sg = json::array();
    for (const auto& x : np.vertices) v.push_back({x.index, rat_str(x.val)});
    for (const auto& x : np.segments)
        sg.push_back({{"slope", rat_str(x.slope)}, {"length", x.length}, {"root_val", rat_str(x.root_val())}});
    out = {{"vertices", v}, {"segments", sg}};
    if (s.cfg.contains("radius")) {
        Rat r = rat_field(s.cfg, "radius", 0);
        out["radius_val"] = rat_str(r);
        out["roots_on_sphere"] = count_roots_on_sphere(fn, r);
    }
    return kOk;
}

int cmd_itinerary(const Setup& s, json& out) {
    FamilyInstance F = family(s);
    long horizon = s.cfg.value("horizon", 30L);
    auto rec = itinerary(F, point(s, s.cfg.at("z")), horizon);
    out = {{"word", rec.word}, {"status", rec.status_str()}, {"horizon", horizon}, {"h", F.h().str()}};
    return kOk;
}

int cmd_wander(const Setup& s, std::string& text) {
    WanderConfig w;
    w.p = s.ctx->p();
    w.f = s.ctx->f();
    w.e = s.cfg.contains("e") && s.cfg.at("e").is_number_integer() ? s.cfg.at("e").get<long>() : 0;
    w.N = s.cfg.contains("precision") && s.cfg.at("precision").is_number_integer() ? s.cfg.at("precision").get<long>() : 0;
    w.r_hat_val = s.r_hat_val;
    w.Q = coeff_list(s.cfg, "Q");
    q_series(s);
    w.depth = s.cfg.value("depth", 2L);
    w.lambda = rat_field(s.cfg, "lambda", 1);
    WanderCertificate c = wander_search(w);
    text = certificate_to_json(c);
    if (!c.complete) return kComputation;
    return kOk;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream o(path);
    o << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Certified p-adic dynamics for the perturbed family P_lambda + Q"};
    app.require_subcommand(1);
    app.footer(R"(Config keys (JSON): p, f, e (integer or "auto"), precision (pi-units), r_hat_val,
  Q [[index, num, den], ...], Q_tail {from_index, val_slope, offset}, lambda,
  depth, horizon, samples, seed; hensel/newton take series, z0, radius, tail;
  itinerary takes z.  Elements are integers, rationals "a/b", or "p^v * [digits] @prec".
Exit codes: 0 ok, 1 invalid config or inadmissible Q/lambda, 2 computation
  error (error document on output), 3 verification failed.)");
    std::string config, output, cert_path;
    std::optional<std::uint64_t> seed;
    std::string factor = "2";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config, "JSON config document")->required();
        sub->add_option("-o,--output", output, "write the result document here instead of stdout");
        sub->add_option("--seed", seed, "sampler seed (overrides the config)");
    };
    auto* vl = app.add_subcommand("verify-lemmas", "check the local estimates and region predictions on samples");
    auto* he = app.add_subcommand("hensel", "Newton lift of a root of `series` from `z0`");
    auto* nw = app.add_subcommand("newton", "Newton polygon of `series`, root count at `radius`");
    auto* it = app.add_subcommand("itinerary", "itinerary of `z` under Q_lambda up to `horizon`");
    auto* wa = app.add_subcommand("wander", "search for a wandering disc; emits a certificate");
    for (auto* sub : {vl, he, nw, it, wa}) add_common(sub);
    auto* ch = app.add_subcommand("check", "re-verify a certificate in a fresh context");
    ch->add_option("certificate", cert_path, "certificate document")->required();
    ch->add_option("--factor", factor, "precision multiplier, a rational >= 1");
    ch->add_option("-o,--output", output, "write the report here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    std::string text;
    int code = kOk;
    try {
        if (ch->parsed()) {
            WanderCertificate c;
            try {
                c = certificate_from_json(read_file(cert_path));
            } catch (const ParseError& e) {
                throw ConfigError(e.what());
            }
            VerifyReport r = verify_certificate(c, parse_rat(factor));
            json out = {{"valid", r.valid}, {"checks", checks_json(r.checks)}};
            text = out.dump(2) + "\n";
            code = r.valid ? kOk : kVerification;
        } else {
            Setup s = load(config, seed);
            json out;
            if (vl->parsed()) code = cmd_verify_lemmas(s, out);
            else if (he->parsed()) code = cmd_hensel(s, out);
            else if (nw->parsed()) code = cmd_newton(s, out);
            else if (it->parsed()) code = cmd_itinerary(s, out);
            else code = cmd_wander(s, text);
            if (text.empty()) text = out.dump(2) + "\n";
        }
    } catch (const ConfigError& e) {
        text = json{{"error", "InvalidConfig"}, {"message", e.what()}}.dump(2) + "\n";
        code = kBadConfig;
    } catch (const AdmissionError& e) {
        text = json{{"error", e.kind()}, {"message", e.what()}}.dump(2) + "\n";
        code = kBadConfig;
    } catch (const InvalidContext& e) {
        text = json{{"error", e.kind()}, {"message", e.what()}}.dump(2) + "\n";
        code = kBadConfig;
    } catch (const Error& e) {
        text = json{{"error", e.kind()}, {"message", e.what()}}.dump(2) + "\n";
        code = kComputation;
    } catch (const json::exception& e) {
        text = json{{"error", "InvalidConfig"}, {"message", e.what()}}.dump(2) + "\n";
        code = kBadConfig;
    }
    emit(text, output);
    return code;
}
