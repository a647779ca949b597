#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "runner.hpp"

using namespace gkpot;
using nlohmann::json;

namespace {
const char* kAffine = R"({
  "schema": 1,
  "model": {"kind": "affine"},
  "potential": {"catalog": "quadratic"},
  "grid": {"lo": [-0.5, 0, -0.6, -0.6], "hi": [0.5, 0, 0.6, 0.6], "count": [2, 1, 3, 3]},
  "checks": {"dirac": true}
})";

json with(const char* base, const std::string& key, const json& value) {
    json j = json::parse(base);
    j[key] = value;
    return j;
}
}  // namespace

TEST_CASE("config validation") {
    CHECK_NOTHROW(parse_config(kAffine));
    CHECK_THROWS_AS(parse_config("{"), Error);
    CHECK_THROWS_AS(parse_config(R"({"schema": 2})"), Error);
    CHECK_THROWS_AS(parse_config(with(kAffine, "colour", "red").dump()), Error);
    json nested = json::parse(kAffine);
    nested["grid"]["step"] = 1;
    CHECK_THROWS_AS(cmd_verify(parse_config(nested.dump())), Error);
    json samples = with(kAffine, "samples", {{"count", 3}, {"lo", {0, 0, 0, 0}}, {"hi", {1, 1, 1, 1}}});
    try {
        cmd_verify(parse_config(samples.dump()));
        FAIL("samples without a seed must be rejected");
    } catch (const Error& e) {
        CHECK(e.code == ErrorCode::config);
    }
    json bad_expr = json::parse(kAffine);
    bad_expr["potential"] = {{"expression", "abs2(q3)"}};
    CHECK_THROWS_AS(cmd_verify(parse_config(bad_expr.dump())), Error);
}

TEST_CASE("verify report") {
    Report r = cmd_verify(parse_config(kAffine));
    CHECK(r.exit_code == 0);
    CHECK(r.doc.at("records").size() == 18);
    CHECK(r.doc.at("summary").at("max_star1").get<double>() < 1e-8);
    CHECK(r.doc.at("summary").at("max_dirac").get<double>() < 1e-10);
    CHECK(r.doc.at("provenance").at("expression_grammar") == 1);
    CHECK(r.csv.rfind("u1,u2,u3,u4,min_eig,star1,star2,ok\n", 0) == 0);

    json pos = json::parse(kAffine);
    pos["grid"] = {{"lo", {0, 0, 1.5, 0}}, {"hi", {0, 0, 1.5, 0}}, {"count", {1, 1, 1, 1}}};
    CHECK(cmd_verify(parse_config(pos.dump())).exit_code == 0);
    pos["tolerances"] = {{"require_positive", true}};
    Report neg = cmd_verify(parse_config(pos.dump()));
    CHECK(neg.exit_code == 1);
    CHECK(neg.doc.at("records")[0].at("positive") == false);
}

TEST_CASE("identical config and seed give identical reports") {
    json s = with(kAffine, "samples", {{"count", 10}, {"lo", {-1, -1, -0.5, -0.5}}, {"hi", {1, 1, 0.5, 0.5}}});
    s["seed"] = 99;
    RunConfig c1 = parse_config(s.dump()), c4 = parse_config(s.dump());
    c4.threads = 4;
    CHECK(cmd_verify(c1).doc == cmd_verify(c4).doc);
    s["seed"] = 100;
    CHECK(cmd_verify(c1).doc.at("records") != cmd_verify(parse_config(s.dump())).doc.at("records"));
}

TEST_CASE("thread precedence: config, then environment, then explicit override") {
    RunConfig c = parse_config(with(kAffine, "threads", 3).dump());
    unsetenv("GKPOT_THREADS");
    CHECK(resolve_threads(c, 0) == 3);
    setenv("GKPOT_THREADS", "2", 1);
    CHECK(resolve_threads(c, 0) == 2);
    CHECK(resolve_threads(c, 5) == 5);
    setenv("GKPOT_THREADS", "zero", 1);
    CHECK_THROWS_AS(resolve_threads(c, 0), Error);
    unsetenv("GKPOT_THREADS");
}

TEST_CASE("flow command") {
    json f = json::parse(R"({
      "schema": 1,
      "flow": {"bivector": {"kind": "zero"}, "f": {"catalog": "quadratic", "scale": -0.5},
               "compare": {"catalog": "quadratic"}},
      "grid": {"lo": [-0.5, -0.5, -0.5, -0.5], "hi": [0.5, 0.5, 0.5, 0.5], "count": [2, 2, 2, 2]}
    })");
    Report r = cmd_flow(parse_config(f.dump()));
    CHECK(r.exit_code == 0);
    CHECK(r.doc.at("summary").at("max_compare").get<double>() < 1e-9);
    f["flow"]["f"] = {{"expression", "0"}};
    Report z = cmd_flow(parse_config(f.dump()));
    CHECK(z.exit_code == 1);  // F = 0 differs from the comparison form
    for (auto& rec : z.doc.at("records")) CHECK(rec.at("compare").get<double>() == doctest::Approx(2.0));
    f["integrator"] = {{"steps", 5}};
    CHECK_THROWS_AS(cmd_flow(parse_config(f.dump())), Error);
}

TEST_CASE("scan command") {
    json s = json::parse(R"({
      "schema": 1,
      "model": {"kind": "affine"},
      "potential": {"catalog": "quadratic"},
      "rays": [{"origin": [0, 0, 0, 0], "direction": [0, 0, 1, 0], "t0": 0, "t1": 2, "samples": 21, "expect": [1.0]}]
    })");
    Report r = cmd_scan(parse_config(s.dump()));
    CHECK(r.exit_code == 0);
    CHECK(std::abs(r.doc.at("boundaries")[0].at("params")[0].get<double>() - 1.0) < 1e-3);
    CHECK(r.doc.at("boundaries_csv").get<std::string>().rfind("ray,param,u1,u2,u3,u4\n", 0) == 0);
    s["rays"][0]["expect"] = {1.2};
    CHECK(cmd_scan(parse_config(s.dump())).exit_code == 1);
    s["model"] = {{"kind", "cotangent"}};
    s["rays"][0]["expect"] = json::array();
    CHECK(cmd_scan(parse_config(s.dump())).exit_code == 0);
}

TEST_CASE("golden comparison") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "gkpot_golden_test";
    fs::create_directories(dir);
    json g = json::parse(kAffine);
    g["golden"] = {{"command", "verify"}, {"path", (dir / "g.json").string()}};
    RunConfig cfg = parse_config(g.dump());
    write_report(cmd_verify(cfg), dir.string(), "g");
    CHECK(fs::exists(dir / "g.csv"));
    Report same = cmd_golden(cfg, "");
    CHECK(same.exit_code == 0);
    CHECK(same.doc.at("diff_count") == 0);

    json stored;
    std::ifstream(dir / "g.json") >> stored;
    stored["records"][0]["star1"] = stored["records"][0]["star1"].get<double>() + 1e-6;
    std::ofstream(dir / "h.json") << stored.dump();
    Report diff = cmd_golden(cfg, (dir / "h.json").string());
    CHECK(diff.exit_code == 1);
    CHECK(diff.doc.at("diff_count") == 1);
    CHECK(diff.doc.at("diffs")[0].get<std::string>().find("records[0].star1") != std::string::npos);

    // a looser field tolerance absorbs the perturbation
    g["golden"]["field_tolerances"] = {{"star1", 1e-5}};
    json loose = stored;
    loose["config"] = parse_config(g.dump()).raw.dump();
    std::ofstream(dir / "l.json") << loose.dump();
    CHECK(cmd_golden(parse_config(g.dump()), (dir / "l.json").string()).exit_code == 0);

    CHECK_THROWS_AS(cmd_golden(cfg, (dir / "missing.json").string()), Error);
    fs::remove_all(dir);
}
