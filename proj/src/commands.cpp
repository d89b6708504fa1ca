#include "htbandit/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "htbandit/tsallis.hpp"

namespace htbandit {

namespace {

namespace fs = std::filesystem;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_double(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw InvalidInput(where + ": not a number: '" + text + "'");
    }
}

long parse_long(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const long v = std::stol(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw InvalidInput(where + ": not an integer: '" + text + "'");
    }
}

// 97.5% Student-t quantiles for small samples; normal beyond df=30.
double t_quantile_975(int df) {
    static const double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306,
                                   2.262,  2.228, 2.201, 2.179, 2.160, 2.145, 2.131, 2.120,
                                   2.110,  2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
                                   2.060,  2.056, 2.052, 2.048, 2.045, 2.042};
    if (df < 1) return std::numeric_limits<double>::infinity();
    if (df <= 30) return table[df - 1];
    return 1.960;
}

}  // namespace

std::string format_number(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.12g", v);
    return buffer;
}

int resolve_thread_cap() {
    if (const char* env = std::getenv("HTBANDIT_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 0;  // runner falls back to hardware concurrency
}

RunResult cmd_run(const ExperimentConfig& config) {
    const EnvironmentSpec env = build_environment(config);

    PolicySpec policy;
    policy.kind = config.policy;
    if (config.policy == PolicyKind::Htinf)
        policy.params = HeavyTailParams(*config.alpha, *config.sigma);

    ExperimentSpec spec;
    spec.policy = policy;
    spec.checkpoints = config.checkpoints;
    spec.replicates = config.replicates;
    spec.base_seed = config.base_seed;
    spec.max_threads = resolve_thread_cap();

    // Per-replicate trace.csv chunks, assembled in replicate order afterwards.
    std::vector<std::string> trace_chunks(config.write_trace ? config.replicates : 0);
    TraceSink sink;
    if (config.write_trace) {
        sink = [&](int r, const EpisodeTrace& trace) {
            std::string chunk;
            std::vector<double> arm_sum(static_cast<std::size_t>(env.num_arms()), 0.0);
            double played = 0.0;
            for (const RoundRecord& rec : trace.records) {
                played += env.mean_at(rec.t, rec.arm);
                for (int i = 1; i <= env.num_arms(); ++i)
                    arm_sum[static_cast<std::size_t>(i - 1)] += env.mean_at(rec.t, i);
                double best = arm_sum[0];
                for (double s : arm_sum) best = std::min(best, s);
                chunk += std::to_string(r) + ',' + std::to_string(rec.t) + ',' +
                         std::to_string(rec.arm) + ',' + format_number(rec.loss) + ',' +
                         (rec.skipped ? '1' : '0') + ',' + format_number(rec.lambda) + ',' +
                         format_number(rec.threshold) + ',' +
                         (rec.cost ? format_number(*rec.cost) : std::string()) + ',' +
                         format_number(played - best) + '\n';
            }
            trace_chunks[static_cast<std::size_t>(r)] = std::move(chunk);
        };
    }

    RunResult result;
    result.series = run_experiment(spec, env, sink);
    result.bounds = bound_report(result.series, env, config.policy);
    for (const BoundReport& b : result.bounds)
        if (!b.satisfied) result.all_bounds_satisfied = false;

    if ((config.policy == PolicyKind::Htinf || config.policy == PolicyKind::Opttinf) &&
        env.gap_profile() && env.tail_params() && !gap_bound_applicable(env.tail_params()->alpha)) {
        result.notes.push_back("gap-dependent bound not applicable: alpha below " +
                               format_number(kGapBoundMinAlpha));
    }

    fs::create_directories(config.output_dir);
    const std::string dir = config.output_dir;

    std::string regret = "t,mean_regret,stderr,replicates\n";
    for (const CheckpointStat& c : result.series.checkpoints)
        regret += std::to_string(c.t) + ',' + format_number(c.mean_regret) + ',' +
                  format_number(c.std_error) + ',' + std::to_string(result.series.replicates) + '\n';
    result.regret_csv = dir + "/regret.csv";
    write_file(result.regret_csv, regret);

    if (config.write_trace) {
        std::string trace = "replicate,t,arm,loss,skipped,lambda,threshold,cost,cum_regret\n";
        for (const std::string& chunk : trace_chunks) trace += chunk;
        result.trace_csv = dir + "/trace.csv";
        write_file(result.trace_csv, trace);
    }

    nlohmann::ordered_json report;
    report["policy"] = std::string(policy_kind_name(config.policy));
    report["T"] = config.horizon;
    report["K"] = config.num_arms;
    report["replicates"] = config.replicates;
    report["base_seed"] = config.base_seed;
    nlohmann::ordered_json bounds = nlohmann::ordered_json::array();
    for (const BoundReport& b : result.bounds) {
        nlohmann::ordered_json entry;
        entry["bound_name"] = b.bound_name;
        entry["measured_regret"] = b.measured_regret;
        entry["bound_value"] = b.bound_value;
        entry["satisfied"] = b.satisfied;
        bounds.push_back(std::move(entry));
    }
    report["bounds"] = std::move(bounds);
    report["notes"] = result.notes;
    result.bounds_json = dir + "/bounds.json";
    write_file(result.bounds_json, report.dump(2) + "\n");

    std::string plot =
        "set datafile separator ','\n"
        "set logscale xy\n"
        "set xlabel 't'\n"
        "set ylabel 'mean pseudo-regret'\n"
        "set key left top\n"
        "plot 'regret.csv' using 1:2:3 skip 1 with yerrorlines title '" +
        std::string(policy_kind_name(config.policy)) + "'\n";
    result.plot_script = dir + "/plot.gp";
    write_file(result.plot_script, plot);

    return result;
}

SlopeFit cmd_slope(const std::vector<std::string>& regret_csv_paths, long t_min) {
    std::vector<std::pair<double, double>> points;  // (log t, log regret)
    for (const std::string& path : regret_csv_paths) {
        std::ifstream in(path);
        if (!in) throw InvalidInput("slope: cannot open '" + path + "'");
        std::string line;
        if (!std::getline(in, line)) throw InvalidInput("slope: empty file '" + path + "'");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto fields = split_csv_line(line);
            if (fields.size() < 2) throw InvalidInput("slope: malformed row in '" + path + "'");
            const double t = parse_double(fields[0], "slope: '" + path + "' column t");
            const double regret = parse_double(fields[1], "slope: '" + path + "' column mean_regret");
            if (t >= static_cast<double>(t_min) && regret > 0.0)
                points.emplace_back(std::log(t), std::log(regret));
        }
    }
    if (points.size() < 3)
        throw InvalidInput("slope: fewer than 3 usable checkpoints at t >= " + std::to_string(t_min));

    const int n = static_cast<int>(points.size());
    double mean_x = 0.0, mean_y = 0.0;
    for (const auto& [x, y] : points) {
        mean_x += x;
        mean_y += y;
    }
    mean_x /= n;
    mean_y /= n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if (sxx == 0.0) throw InvalidInput("slope: all checkpoints share one t value");
    const double slope = sxy / sxx;
    const double intercept = mean_y - slope * mean_x;
    double ssr = 0.0;
    for (const auto& [x, y] : points) {
        const double resid = y - (intercept + slope * x);
        ssr += resid * resid;
    }
    SlopeFit fit;
    fit.slope = slope;
    fit.points = n;
    if (n > 2) {
        const double se = std::sqrt(ssr / (n - 2) / sxx);
        fit.ci_half_width = t_quantile_975(n - 2) * se;
    }
    return fit;
}

std::vector<CsvAuditResult> cmd_audit(const std::string& trace_csv_path, int num_arms) {
    std::ifstream in(trace_csv_path);
    if (!in) throw InvalidInput("audit: cannot open '" + trace_csv_path + "'");
    std::string line;
    if (!std::getline(in, line) ||
        line != "replicate,t,arm,loss,skipped,lambda,threshold,cost,cum_regret")
        throw InvalidInput("audit: '" + trace_csv_path + "' is not a trace.csv");

    struct Row {
        long t;
        double loss;
        bool skipped;
        double lambda;
        double threshold;
        double cost;
    };
    std::map<int, std::vector<Row>> replicates;
    int max_arm = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 9) throw InvalidInput("audit: malformed row in '" + trace_csv_path + "'");
        if (fields[7].empty())
            throw InvalidInput("audit: trace has no cost entries (not an adaptive-policy trace)");
        const std::string where = "audit: '" + trace_csv_path + "'";
        Row row{parse_long(fields[1], where),   parse_double(fields[3], where), fields[4] == "1",
                parse_double(fields[5], where), parse_double(fields[6], where),
                parse_double(fields[7], where)};
        max_arm = std::max(max_arm, static_cast<int>(parse_long(fields[2], where)));
        replicates[static_cast<int>(parse_long(fields[0], where))].push_back(row);
    }
    if (replicates.empty()) throw InvalidInput("audit: no data rows");
    if (num_arms <= 0) num_arms = max_arm;

    const double theta2 = theta_alpha(2.0);
    const double tol = 1e-9;
    std::vector<CsvAuditResult> results;
    for (const auto& [replicate, rows] : replicates) {
        const long horizon = rows.back().t;
        const double root =
            std::sqrt(static_cast<double>(num_arms) * static_cast<double>(horizon + 1));
        int epoch = 0;
        double acc = 0.0, epoch_sum = 0.0;
        long doublings = 0;
        for (const Row& row : rows) {
            const double lambda = std::exp2(static_cast<double>(epoch));
            if (std::abs(row.lambda - lambda) > tol * lambda)
                throw AuditFailure("replicate " + std::to_string(replicate) +
                                   ": lambda mismatch at round " + std::to_string(row.t) +
                                   " (epoch " + std::to_string(epoch) + ")");
            // Kept-round cost via the threshold identity 2*eta*x^(-1/2)*l^2 = 2*theta_2*l^2/r.
            const double c = row.skipped ? row.loss : 2.0 * theta2 * row.loss * row.loss / row.threshold;
            if (std::abs(c - row.cost) > 1e-9 * std::max(1.0, std::abs(c)))
                throw AuditFailure("replicate " + std::to_string(replicate) +
                                   ": cost mismatch at round " + std::to_string(row.t));
            acc += c;
            epoch_sum += c;
            if (lambda * root < acc) {
                if (acc - c > lambda * root + tol)
                    throw AuditFailure("replicate " + std::to_string(replicate) +
                                       ": pre-close accumulator above budget in epoch " +
                                       std::to_string(epoch));
                if (!(epoch_sum > 0.5 * lambda * root - tol))
                    throw AuditFailure("replicate " + std::to_string(replicate) + ": closed epoch " +
                                       std::to_string(epoch) + " did not exceed half its budget");
                int jump = epoch + 1;
                if (c > 0.0) {
                    int k = static_cast<int>(std::ceil(std::log2(c / root)));
                    while (std::exp2(static_cast<double>(k)) < c / root) ++k;
                    while (std::exp2(static_cast<double>(k - 1)) >= c / root) --k;
                    jump = std::max(jump, k + 1);
                }
                epoch = jump;
                acc = c;
                epoch_sum = 0.0;
                ++doublings;
            }
        }
        if (acc > std::exp2(static_cast<double>(epoch)) * root + tol)
            throw AuditFailure("replicate " + std::to_string(replicate) +
                               ": final epoch accumulator above its budget");
        results.push_back({replicate, epoch, doublings, horizon});
    }
    return results;
}

EnvVerifyReport cmd_verify_env(const ExperimentConfig& config) {
    const EnvironmentSpec env = build_environment(config);
    const HeavyTailParams tail(config.env.alpha, config.env.sigma);

    EnvVerifyReport report;
    report.heavy_tail_ok = verify_heavy_tail(env, tail);
    report.optimal_arm = env.gap_profile() ? env.gap_profile()->optimal_arm
                                           : best_arm_in_hindsight(env.mean_schedule());

    report.truncated_nonnegative_ok = true;
    const long rows = static_cast<long>(env.num_rows());
    for (long r = 1; r <= std::min(rows, env.horizon()); ++r)
        if (!verify_truncated_nonnegative(env.dist_at(r, report.optimal_arm)))
            report.truncated_nonnegative_ok = false;

    std::ostringstream text;
    const double budget = std::pow(tail.sigma, tail.alpha);
    text << "alpha=" << format_number(tail.alpha) << " sigma=" << format_number(tail.sigma)
         << " sigma^alpha=" << format_number(budget) << "\n";
    for (long r = 1; r <= std::min(rows, env.horizon()); ++r) {
        for (int i = 1; i <= env.num_arms(); ++i) {
            const auto& dist = env.dist_at(r, i);
            text << "row " << r << " arm " << i << ": mean=" << format_number(dist.mean())
                 << " moment=" << format_number(analytic_moment(dist, tail.alpha))
                 << " truncated_nonneg=" << (verify_truncated_nonnegative(dist) ? "yes" : "no");
            if (i == report.optimal_arm) text << " (optimal)";
            text << "\n";
        }
    }
    text << "heavy_tail: " << (report.heavy_tail_ok ? "pass" : "FAIL") << "\n";
    text << "truncated_nonnegative(optimal arm " << report.optimal_arm
         << "): " << (report.truncated_nonnegative_ok ? "pass" : "FAIL") << "\n";
    report.text = text.str();
    return report;
}

}  // namespace htbandit
