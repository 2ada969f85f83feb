#include <json.hpp>

#include "padyn/wander.hpp"

namespace padyn {

using nlohmann::json;

namespace {

json big(const mpz_class& z) {
    if (z.fits_slong_p()) return z.get_si();
    return z.get_str();
}

mpz_class big_in(const json& j) {
    if (j.is_string()) return mpz_class(j.get<std::string>());
    return mpz_class(j.get<long>());
}

json ext_json(const ExtRat& v) { return v ? json(rat_str(*v)) : json(nullptr); }

} // namespace

std::string certificate_to_json(const WanderCertificate& c) {
    json j;
    j["version"] = c.version;
    j["p"] = c.p;
    j["f"] = c.f;
    j["e"] = c.e;
    j["precision"] = c.N;
    j["r_hat_val"] = rat_str(c.r_hat_val);
    j["Q"] = json::array();
    for (const auto& q : c.Q) j["Q"].push_back({q.index, big(q.num), big(q.den)});
    j["schedule"] = {{"M", c.schedule.M}, {"m", c.schedule.m}};
    j["seed"] = c.seed;
    j["stages"] = json::array();
    for (const auto& s : c.stages)
        j["stages"].push_back(
            {{"i", s.i}, {"lambda", s.lambda}, {"dist_exponent", ext_json(s.dist_exponent)}, {"prefix_len", s.prefix_len}});
    j["checks"] = json::array();
    for (const auto& k : c.checks) j["checks"].push_back({{"name", k.name}, {"pass", k.pass}, {"witness", k.witness}});
    j["complete"] = c.complete;
    if (c.failed_stage >= 0) {
        j["failed_stage"] = c.failed_stage;
        j["failure"] = c.failure;
    }
    return j.dump(2) + "\n";
}

WanderCertificate certificate_from_json(const std::string& text) {
    WanderCertificate c;
    try {
        json j = json::parse(text);
        c.version = j.at("version").get<int>();
        c.p = j.at("p").get<long>();
        c.f = j.at("f").get<int>();
        c.e = j.at("e").get<long>();
        c.N = j.at("precision").get<long>();
        c.r_hat_val = parse_rat(j.at("r_hat_val").get<std::string>());
        for (const auto& q : j.at("Q")) c.Q.push_back({q.at(0).get<long>(), big_in(q.at(1)), big_in(q.at(2))});
        c.schedule.M = j.at("schedule").at("M").get<std::vector<long>>();
        c.schedule.m = j.at("schedule").at("m").get<std::vector<long>>();
        c.seed = j.at("seed").get<std::string>();
        for (const auto& s : j.at("stages")) {
            StageRecord r;
            r.i = s.at("i").get<long>();
            r.lambda = s.at("lambda").get<std::string>();
            if (!s.at("dist_exponent").is_null()) r.dist_exponent = parse_rat(s.at("dist_exponent").get<std::string>());
            r.prefix_len = s.at("prefix_len").get<long>();
            c.stages.push_back(r);
        }
        for (const auto& k : j.at("checks"))
            c.checks.push_back({k.at("name").get<std::string>(), k.at("pass").get<bool>(), k.at("witness").get<std::string>()});
        c.complete = j.value("complete", false);
        c.failed_stage = j.value("failed_stage", -1L);
        c.failure = j.value("failure", std::string());
    } catch (const json::exception& ex) {
        throw ParseError(std::string("certificate: ") + ex.what());
    }
    if (c.schedule.M.size() != c.schedule.m.size()) throw ParseError("certificate: schedule lists differ in length");
    return c;
}

} // namespace padyn
