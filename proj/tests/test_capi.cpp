#include <doctest.h>
#include <gkpot/gkpot.h>

#include <cstring>
#include <string>

namespace {
const char* kAffine = R"({
  "schema": 1,
  "model": {"kind": "affine"},
  "potential": {"catalog": "quadratic"},
  "grid": {"lo": [0, 0, -0.5, 0], "hi": [0, 0, 0.5, 0], "count": [1, 1, 3, 1]}
})";
}

TEST_CASE("config handles and error codes") {
    CHECK(std::string(gkp_version()) == "0.1.0");
    gkp_config* cfg = nullptr;
    CHECK(gkp_config_from_string("{\"schema\": 1, \"bogus\": 0}", &cfg) == GKP_ERR_CONFIG);
    CHECK(cfg == nullptr);
    CHECK(std::strstr(gkp_last_error(), "bogus") != nullptr);
    CHECK(gkp_config_from_file("/nonexistent/cfg.json", &cfg) == GKP_ERR_IO);
    CHECK(gkp_config_from_string(nullptr, &cfg) == GKP_ERR_INVALID_ARGUMENT);
    REQUIRE(gkp_config_from_string(kAffine, &cfg) == GKP_OK);
    CHECK(std::string(gkp_last_error()).empty());
    CHECK(gkp_config_set_seed(cfg, 5) == GKP_OK);
    CHECK(gkp_config_set_threads(cfg, 2) == GKP_OK);
    gkp_report* rep = nullptr;
    CHECK(gkp_run(cfg, "dance", &rep) == GKP_ERR_CONFIG);
    CHECK(rep == nullptr);
    gkp_config_free(cfg);
    gkp_config_free(nullptr);
}

TEST_CASE("run and read a report") {
    gkp_config* cfg = nullptr;
    REQUIRE(gkp_config_from_string(kAffine, &cfg) == GKP_OK);
    gkp_report* rep = nullptr;
    REQUIRE(gkp_run(cfg, "verify", &rep) == GKP_OK);
    CHECK(gkp_report_exit_code(rep) == 0);
    std::string js = gkp_report_json(rep);
    CHECK(js.find("\"command\": \"verify\"") != std::string::npos);
    gkp_report_free(rep);

    double u[4] = {0, 0, 1.5, 0}, s1 = -1, s2 = -1, me = 0;
    CHECK(gkp_evaluate_point(cfg, u, 4, &s1, &s2, &me) == GKP_OK);
    CHECK(s1 < 1e-12);
    CHECK(s2 < 1e-12);
    CHECK(me < 0);
    CHECK(gkp_evaluate_point(cfg, u, 4, nullptr, nullptr, nullptr) == GKP_OK);
    CHECK(gkp_evaluate_point(cfg, u, 3, &s1, &s2, &me) == GKP_ERR_INVALID_ARGUMENT);
    gkp_config_free(cfg);
}

TEST_CASE("transversality failures surface as status codes") {
    const char* text = R"({"schema": 1, "model": {"kind": "pair", "preset": "quaternionic"},
                           "brane": {"kind": "potential"}, "potential": {"catalog": "split_quadratic"}})";
    gkp_config* cfg = nullptr;
    REQUIRE(gkp_config_from_string(text, &cfg) == GKP_OK);
    double u[4] = {0.1, 0.2, 0.3, 0.4};
    CHECK(gkp_evaluate_point(cfg, u, 4, nullptr, nullptr, nullptr) == GKP_ERR_TRANSVERSALITY);
    CHECK(std::strstr(gkp_last_error(), "ker(d") != nullptr);
    gkp_config_free(cfg);
}
