#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htbandit/commands.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitAuditOrBound = 3;

htbandit::ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw htbandit::InvalidInput("cannot open config '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string base_dir = std::filesystem::path(path).parent_path().string();
    return htbandit::parse_config(buffer.str(), base_dir.empty() ? "." : base_dir);
}

int run_command(const std::string& config_path) {
    const auto config = load_config(config_path);
    const auto result = htbandit::cmd_run(config);

    std::cout << "wrote " << result.regret_csv;
    if (!result.trace_csv.empty()) std::cout << ", " << result.trace_csv;
    std::cout << ", " << result.bounds_json << ", " << result.plot_script << "\n";
    const auto& last = result.series.checkpoints.back();
    std::cout << "final pseudo-regret at T=" << last.t << ": "
              << htbandit::format_number(last.mean_regret) << " +/- "
              << htbandit::format_number(last.std_error) << " (" << result.series.replicates
              << " replicates)\n";
    for (const auto& b : result.bounds)
        std::cout << b.bound_name << ": measured+3se=" << htbandit::format_number(b.measured_regret)
                  << " bound=" << htbandit::format_number(b.bound_value) << " -> "
                  << (b.satisfied ? "satisfied" : "VIOLATED") << "\n";
    for (const auto& note : result.notes) std::cout << "note: " << note << "\n";
    return result.all_bounds_satisfied ? 0 : kExitAuditOrBound;
}

int slope_command(const std::vector<std::string>& csvs, long t_min) {
    const auto fit = htbandit::cmd_slope(csvs, t_min);
    std::cout << "slope=" << htbandit::format_number(fit.slope) << " ci95=+/-"
              << htbandit::format_number(fit.ci_half_width) << " points=" << fit.points << "\n";
    return 0;
}

int audit_command(const std::string& trace_csv, int num_arms) {
    const auto results = htbandit::cmd_audit(trace_csv, num_arms);
    for (const auto& r : results)
        std::cout << "replicate " << r.replicate << ": rounds=" << r.rounds
                  << " doublings=" << r.doublings << " final_epoch=" << r.final_epoch << " -> pass\n";
    std::cout << results.size() << " replicate(s) audited, all epochs consistent\n";
    return 0;
}

int verify_env_command(const std::string& config_path) {
    const auto config = load_config(config_path);
    const auto report = htbandit::cmd_verify_env(config);
    std::cout << report.text;
    return (report.heavy_tail_ok && report.truncated_nonnegative_ok) ? 0 : kExitAuditOrBound;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Heavy-tailed multi-armed bandit simulator"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run an experiment config and write its artifacts");
    run->add_option("config", config_path, "experiment config (JSON)")->required();

    std::vector<std::string> slope_csvs;
    long t_min = 1;
    auto* slope = app.add_subcommand("slope", "fit log-log regret growth over checkpoints");
    slope->add_option("csv", slope_csvs, "regret.csv file(s)")->required();
    slope->add_option("--t-min", t_min, "use checkpoints with t >= this value");

    std::string trace_path;
    int audit_arms = 0;
    auto* audit = app.add_subcommand("audit", "replay the epoch bookkeeping of a trace.csv");
    audit->add_option("trace", trace_path, "trace.csv written by an adatinf run")->required();
    audit->add_option("--k", audit_arms, "number of arms (default: highest arm index in the trace)");

    std::string verify_path;
    auto* verify = app.add_subcommand("verify-env", "check an environment's assumptions analytically");
    verify->add_option("config", verify_path, "experiment config (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (run->parsed()) return run_command(config_path);
        if (slope->parsed()) return slope_command(slope_csvs, t_min);
        if (audit->parsed()) return audit_command(trace_path, audit_arms);
        if (verify->parsed()) return verify_env_command(verify_path);
    } catch (const htbandit::AuditFailure& err) {
        std::cerr << "audit failure: " << err.what() << "\n";
        return kExitAuditOrBound;
    } catch (const htbandit::InvalidInput& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
