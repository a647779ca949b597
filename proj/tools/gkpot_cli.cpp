#include <gkpot/gkpot.h>

#include <CLI11.hpp>
#include <cstdio>
#include <string>

namespace {

int report_error(const char* what) {
    std::fprintf(stderr, "gkpot: %s: %s\n", what, gkp_last_error());
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gkpot: chart-level generalized Kähler potentials"};
    app.require_subcommand(1);
    std::string config, out, prefix, golden;
    int threads = 0;
    uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "directory for the JSON and CSV reports");
        sub->add_option("--prefix", prefix, "report file name stem (default: the subcommand)");
        sub->add_option("--threads", threads, "worker threads; overrides GKPOT_THREADS")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "RNG seed; overrides the config");
    };
    CLI::App* verify = app.add_subcommand("verify", "pipeline and invariant checks on a grid");
    CLI::App* flow = app.add_subcommand("flow", "Hamiltonian flow construction on a grid");
    CLI::App* scan = app.add_subcommand("scan", "positivity scan and boundary location along rays");
    CLI::App* gold = app.add_subcommand("golden", "rerun a config and compare with a stored report");
    for (auto* s : {verify, flow, scan, gold}) add_common(s);
    gold->add_option("--golden", golden, "golden report (default: golden.path in the config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();

    gkp_config* cfg = nullptr;
    if (gkp_config_from_file(config.c_str(), &cfg) != GKP_OK) return report_error("config");
    if (sub->count("--seed")) gkp_config_set_seed(cfg, seed);
    gkp_config_set_threads(cfg, threads);

    gkp_report* rep = nullptr;
    gkp_status st = command == "golden" ? gkp_golden(cfg, golden.empty() ? nullptr : golden.c_str(), &rep)
                                        : gkp_run(cfg, command.c_str(), &rep);
    gkp_config_free(cfg);
    if (st != GKP_OK) return report_error(command.c_str());

    if (!out.empty()) {
        if (gkp_report_write(rep, out.c_str(), (prefix.empty() ? command : prefix).c_str()) != GKP_OK) {
            gkp_report_free(rep);
            return report_error("write");
        }
    } else {
        std::puts(gkp_report_json(rep));
    }
    int rc = gkp_report_exit_code(rep);
    gkp_report_free(rep);
    return rc;
}
