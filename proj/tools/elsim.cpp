#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace elsim::cli;

int main(int argc, char** argv)
{
    CLI::App app{"Periodic-domain liquid crystal flow solver and diagnostics"};
    app.require_subcommand(1);

    RunOptions run_opt;
    std::string restart, run_out;
    auto* run = app.add_subcommand("run", "Run the solver from a JSON config");
    run->add_option("config", run_opt.config_path, "Config file")->required();
    auto* run_out_opt = run->add_option("--output-dir,-o", run_out, "Output directory (overrides " +
                                        std::string(kOutputDirEnv) + " and the config)");
    auto* restart_opt = run->add_option("--restart", restart, "Continue from a snapshot (direct mode)");

    VerifyCliOptions verify_opt;
    std::string fault;
    auto* verify = app.add_subcommand("verify", "Run the identity suites");
    auto* fault_opt = verify->add_option("--inject-fault", fault)->group("");

    MmsCliOptions mms_opt;
    auto* mms = app.add_subcommand("mms", "Manufactured-solution convergence study");
    mms->add_option("--resolutions", mms_opt.resolutions, "Grid sizes, each double the previous")
        ->delimiter(',')
        ->capture_default_str();
    mms->add_option("--t-end", mms_opt.t_end, "Final time")->capture_default_str();

    PhiScanCliOptions phi_opt;
    std::string phi_config, phi_out;
    double threshold = 0.0, pexp = 0.0;
    int stride = 1, time_stride = 1;
    auto* phi = app.add_subcommand("phi-scan", "Scan Phi over cylinders of a snapshot series");
    phi->add_option("snapshots", phi_opt.snapshot_glob, "Snapshot glob, e.g. out/snap_*.bin")->required();
    auto* phi_config_opt = phi->add_option("--config", phi_config, "Take phi_scan settings from a run config");
    phi->add_option("--radii", phi_opt.radii, "Strictly decreasing radii")->delimiter(',');
    auto* thr_opt = phi->add_option("--threshold", threshold, "Candidate threshold on min Phi");
    auto* stride_opt = phi->add_option("--stride", stride, "Lattice stride");
    auto* tstride_opt = phi->add_option("--time-stride", time_stride, "Snapshot stride");
    auto* pexp_opt = phi->add_option("--pressure-exponent", pexp, "Radius exponent of the pressure term");
    phi->add_option("--discretization", phi_opt.discretization, "spectral or fd2")->capture_default_str();
    auto* phi_out_opt = phi->add_option("--output-dir,-o", phi_out, "Output directory");

    DimCliOptions dim_opt;
    std::string dim_out;
    auto* dim = app.add_subcommand("dim-estimate", "Parabolic box-counting dimension of a candidate set");
    dim->add_option("candidates", dim_opt.candidates_path, "candidates.json from phi-scan")->required();
    dim->add_option("--r-min", dim_opt.r_min, "Smallest box scale")->required();
    dim->add_option("--r-max", dim_opt.r_max, "Largest box scale")->required();
    dim->add_option("--scales", dim_opt.scales, "Number of scales")->capture_default_str();
    auto* dim_out_opt = dim->add_option("--output-dir,-o", dim_out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return finish(std::cerr, kConfigError, std::string("usage: ") + e.what());
    }

    try {
        if (*run) {
            if (*run_out_opt)
                run_opt.output_dir = run_out;
            if (*restart_opt)
                run_opt.restart = restart;
            return cmd_run(run_opt, std::cout, std::cerr);
        }
        if (*verify) {
            if (*fault_opt)
                verify_opt.inject_fault = fault;
            return cmd_verify(verify_opt, std::cout, std::cerr);
        }
        if (*mms)
            return cmd_mms(mms_opt, std::cout, std::cerr);
        if (*phi) {
            if (*phi_config_opt)
                phi_opt.config_path = phi_config;
            if (*thr_opt)
                phi_opt.threshold = threshold;
            if (*stride_opt)
                phi_opt.stride = stride;
            if (*tstride_opt)
                phi_opt.time_stride = time_stride;
            if (*pexp_opt)
                phi_opt.pressure_exponent = pexp;
            if (*phi_out_opt)
                phi_opt.output_dir = phi_out;
            return cmd_phi_scan(phi_opt, std::cout, std::cerr);
        }
        if (*dim) {
            if (*dim_out_opt)
                dim_opt.output_dir = dim_out;
            return cmd_dim_estimate(dim_opt, std::cout, std::cerr);
        }
    } catch (const std::exception& e) {
        return finish(std::cerr, kConfigError, e.what());
    }
    return finish(std::cerr, kConfigError, "no subcommand");
}
