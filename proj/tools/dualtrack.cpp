#include <CLI11.hpp>

#include <cstdint>
#include <string>
#include <vector>

#include "dualtrack/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"dual-branch tracker: simulate, track, evaluate, sweep, calibrate"};
    app.set_version_flag("--version", dualtrack::kToolVersion);
    app.require_subcommand(1);

    int rc = dualtrack::kExitOk;

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic sequence directory");
    std::string sim_config;
    std::string sim_out;
    std::uint64_t sim_seed = 0;
    simulate->add_option("--config", sim_config, "key=value config file");
    simulate->add_option("--out", sim_out, "sequence directory to write")->required();
    auto* sim_seed_opt = simulate->add_option("--seed", sim_seed, "override sim.seed");
    simulate->callback(
        [&] { rc = dualtrack::cmd_simulate(sim_config, sim_out, sim_seed_opt->count() > 0, sim_seed); });

    auto* track = app.add_subcommand("track", "run the tracker over a sequence directory");
    dualtrack::TrackOptions topt;
    track->add_option("--seq", topt.sequence_dir, "sequence directory")->required();
    track->add_option("--config", topt.config_path, "key=value config file");
    track->add_option("--out", topt.out_path, "run record to write")->required();
    track->add_option("--protocol", topt.protocol, "reset (default) or ope");
    track->add_option("--dump-heatmaps", topt.dump_dir, "directory for per-frame fused responses");
    auto* track_seed_opt = track->add_option("--seed", topt.seed, "override tracker.seed");
    track->callback([&] {
        topt.has_seed = track_seed_opt->count() > 0;
        rc = dualtrack::cmd_track(topt);
    });

    auto* eval = app.add_subcommand("eval", "aggregate run records into a metrics report");
    std::vector<std::string> eval_records;
    std::string eval_protocol = "reset";
    std::string eval_out;
    std::uint64_t eval_seed = 0;
    eval->add_option("records", eval_records, "run record files")->required();
    eval->add_option("--protocol", eval_protocol, "reset (default) or ope");
    eval->add_option("--out", eval_out, "metrics report to write")->required();
    eval->add_option("--seed", eval_seed, "seed echoed into the report");
    eval->callback([&] { rc = dualtrack::cmd_eval(eval_records, eval_protocol, eval_out, eval_seed); });

    auto* ablate = app.add_subcommand("ablate", "sweep one parameter and tabulate metrics");
    std::vector<std::string> ablate_seqs;
    std::string ablate_sweep;
    std::string ablate_config;
    std::string ablate_out;
    ablate->add_option("--seq", ablate_seqs, "sequence directories")->required();
    ablate->add_option("--sweep", ablate_sweep, "key=lo:hi:step, key=value, or a grid file")->required();
    ablate->add_option("--config", ablate_config, "key=value config file");
    ablate->add_option("--out", ablate_out, "csv table to write")->required();
    ablate->callback([&] { rc = dualtrack::cmd_ablate(ablate_seqs, ablate_sweep, ablate_config, ablate_out); });

    auto* calibrate = app.add_subcommand("calibrate", "grid-search layer weights on a calibration set");
    std::vector<std::string> cal_seqs;
    std::string cal_config;
    std::string cal_out;
    std::string cal_objective = "eao";
    calibrate->add_option("--seq", cal_seqs, "calibration sequence directories (at least 3)")->required();
    calibrate->add_option("--config", cal_config, "key=value config file");
    calibrate->add_option("--out", cal_out, "calibration report to write")->required();
    calibrate->add_option("--objective", cal_objective, "eao (default) or loss");
    calibrate->callback([&] { rc = dualtrack::cmd_calibrate(cal_seqs, cal_config, cal_out, cal_objective); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return dualtrack::kExitConfig;
    }
    return rc;
}
