#include <gkpot/gkpot.h>

#include <string>

#include "runner.hpp"

struct gkp_config {
    gkpot::RunConfig cfg;
    int threads_override = 0;
};

struct gkp_report {
    gkpot::Report rep;
    std::string text;
};

namespace {

thread_local std::string last_error;

gkp_status fail(gkp_status s, const std::string& msg) {
    last_error = msg;
    return s;
}

template <class Fn>
gkp_status guard(Fn fn) {
    try {
        last_error.clear();
        fn();
        return GKP_OK;
    } catch (const gkpot::Error& e) {
        return fail(static_cast<gkp_status>(e.code), e.what());
    } catch (const std::exception& e) {
        return fail(GKP_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(GKP_ERR_INTERNAL, "unknown error");
    }
}

gkpot::RunConfig effective(const gkp_config* c) {
    gkpot::RunConfig r = c->cfg;
    r.threads = gkpot::resolve_threads(c->cfg, c->threads_override);
    return r;
}

}  // namespace

extern "C" {

const char* gkp_version(void) { return gkpot::library_version(); }

const char* gkp_last_error(void) { return last_error.c_str(); }

gkp_status gkp_config_from_file(const char* path, gkp_config** out) {
    if (!path || !out) return fail(GKP_ERR_INVALID_ARGUMENT, "null argument");
    return guard([&] { *out = new gkp_config{gkpot::load_config(path)}; });
}

gkp_status gkp_config_from_string(const char* json_text, gkp_config** out) {
    if (!json_text || !out) return fail(GKP_ERR_INVALID_ARGUMENT, "null argument");
    return guard([&] { *out = new gkp_config{gkpot::parse_config(json_text)}; });
}

gkp_status gkp_config_set_seed(gkp_config* cfg, uint64_t seed) {
    if (!cfg) return fail(GKP_ERR_INVALID_ARGUMENT, "null config");
    cfg->cfg.seed = seed;
    return GKP_OK;
}

gkp_status gkp_config_set_threads(gkp_config* cfg, int threads) {
    if (!cfg) return fail(GKP_ERR_INVALID_ARGUMENT, "null config");
    cfg->threads_override = threads > 0 ? threads : 0;
    return GKP_OK;
}

void gkp_config_free(gkp_config* cfg) { delete cfg; }

gkp_status gkp_run(const gkp_config* cfg, const char* command, gkp_report** out) {
    if (!cfg || !command || !out) return fail(GKP_ERR_INVALID_ARGUMENT, "null argument");
    return guard([&] {
        auto* r = new gkp_report{gkpot::run_command(effective(cfg), command), {}};
        r->text = r->rep.doc.dump(2);
        *out = r;
    });
}

gkp_status gkp_golden(const gkp_config* cfg, const char* golden_path, gkp_report** out) {
    if (!cfg || !out) return fail(GKP_ERR_INVALID_ARGUMENT, "null argument");
    return guard([&] {
        auto* r = new gkp_report{gkpot::cmd_golden(effective(cfg), golden_path ? golden_path : ""), {}};
        r->text = r->rep.doc.dump(2);
        *out = r;
    });
}

int gkp_report_exit_code(const gkp_report* rep) { return rep ? rep->rep.exit_code : 2; }

const char* gkp_report_json(const gkp_report* rep) { return rep ? rep->text.c_str() : ""; }

gkp_status gkp_report_write(const gkp_report* rep, const char* dir, const char* prefix) {
    if (!rep || !dir || !prefix) return fail(GKP_ERR_INVALID_ARGUMENT, "null argument");
    return guard([&] { gkpot::write_report(rep->rep, dir, prefix); });
}

void gkp_report_free(gkp_report* rep) { delete rep; }

gkp_status gkp_evaluate_point(const gkp_config* cfg, const double* u, size_t len, double* star1, double* star2,
                              double* min_eig) {
    if (!cfg || !u) return fail(GKP_ERR_INVALID_ARGUMENT, "null argument");
    return guard([&] {
        const auto& raw = cfg->cfg.raw;
        if (!raw.contains("model")) throw gkpot::Error(gkpot::ErrorCode::config, "config: model section is required");
        gkpot::MoritaModel m = gkpot::build_model(raw.at("model"));
        if (len != static_cast<size_t>(2 * m.n))
            throw gkpot::Error(gkpot::ErrorCode::invalid_argument, "point dimension differs from the chart");
        gkpot::BraneBisection L = gkpot::build_brane(cfg->cfg, m);
        gkpot::Vec x = Eigen::Map<const gkpot::Vec>(u, static_cast<Eigen::Index>(len));
        gkpot::GKReport r = gkpot::analyze(gkpot::induced_structures(m, L, x));
        if (star1) *star1 = r.star1_residual;
        if (star2) *star2 = r.star2_residual;
        if (min_eig) *min_eig = r.min_metric_eigenvalue;
    });
}

}  // extern "C"
