#include <cmath>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "convtail/expansion.hpp"
#include "convtail/oracle.hpp"
#include "convtail/selfcheck.hpp"
#include "convtail/sweep.hpp"

namespace {

using namespace convtail;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
    std::string f_spec, g_spec, config;
    double rel_tol = 1e-10;
};

void add_model_flags(CLI::App* cmd, CommonFlags& cf, bool g_required = false) {
    cmd->add_option("--f", cf.f_spec, "model spec for F (family:key=value,...)");
    auto* g = cmd->add_option("--g", cf.g_spec, "model spec for G; omit for F convolved with itself");
    if (g_required) g->required();
    cmd->add_option("--rel-tol", cf.rel_tol, "oracle relative tolerance");
}

int cmd_oracle(const CommonFlags& cf, double t) {
    LightTailModel f = make_model(cf.f_spec);
    LightTailModel g = cf.g_spec.empty() ? f : make_model(cf.g_spec);
    ConvTailResult r = conv_tail(f, g, t, cf.rel_tol);
    std::printf("log_value          = %.17g\n", r.log_value);
    std::printf("value              = %.17g\n", std::exp(r.log_value));
    std::printf("rel_error_estimate = %.3e\n", r.rel_error_estimate);
    std::printf("evaluations        = %ld\n", r.evaluations);
    std::printf("split_point        = %.17g\n", r.split_point);
    return kExitOk;
}

int cmd_expand(const CommonFlags& cf, double t, const std::string& theorem) {
    LightTailModel f = make_model(cf.f_spec);
    ExpansionResult e;
    if (theorem == "1" || (theorem == "auto" && cf.g_spec.empty() &&
                           f.kind() == ModelKind::WeibullType)) {
        if (!cf.g_spec.empty() && cf.g_spec != cf.f_spec)
            throw std::invalid_argument("Theorem 1 covers the self-convolution only");
        e = thm1_predict(f, t);
    } else {
        LightTailModel g = cf.g_spec.empty() ? f : make_model(cf.g_spec);
        e = thm4_predict(f, g, t);
    }
    std::printf("branch              = %s\n", to_string(e.branch));
    std::printf("leading             = %.17g\n", e.leading);
    for (const auto& [name, v] : e.corrections)
        std::printf("correction %-14s = %.17g\n", name.c_str(), v);
    std::printf("predicted_log_tail  = %.17g\n", e.predicted_log_tail);
    std::printf("first_order_log     = %.17g\n", e.first_order_log_tail);
    std::printf("error_order         = %s\n", e.error_order.c_str());
    return kExitOk;
}

int cmd_sweep(SweepConfig cfg) {
    auto records = run_sweep(cfg);
    // records reach the sink before any rate fitting happens
    if (cfg.out_path.empty() || cfg.out_path == "-") {
        write_csv(std::cout, records);
        std::cout.flush();
    } else {
        std::ofstream out(cfg.out_path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open output file: " + cfg.out_path);
        write_csv(out, records);
    }
    if (!cfg.plot_path.empty()) {
        std::ofstream pf(cfg.plot_path, std::ios::binary);
        if (!pf) throw std::runtime_error("cannot open plot file: " + cfg.plot_path);
        write_plot_data(pf, records);
    }
    for (const char* col : {"rel_err1", "rel_err2"}) {
        try {
            RateFit fit = fit_rate(records, col);
            std::fprintf(stderr, "%s: slope %.4f intercept %.4f r2 %.6f points %d\n", col,
                         fit.slope, fit.intercept, fit.r_squared, fit.points_used);
            if (fit.points_used < int(records.size()))
                std::fprintf(stderr, "%s: note: %d zero-error rows excluded from the fit\n", col,
                             int(records.size()) - fit.points_used);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "%s: rate fit skipped: %s\n", col, e.what());
        }
    }
    return kExitOk;
}

int cmd_rate(const std::string& in_path, const std::string& column) {
    std::ifstream in(in_path);
    if (!in) throw std::runtime_error("cannot open CSV file: " + in_path);
    auto records = read_csv(in);
    RateFit fit = fit_rate(records, column);
    std::printf("slope      = %.6f\n", fit.slope);
    std::printf("intercept  = %.6f\n", fit.intercept);
    std::printf("r_squared  = %.8f\n", fit.r_squared);
    std::printf("points     = %d\n", fit.points_used);
    if (fit.points_used < int(records.size()))
        std::printf("note: %d zero-error rows excluded\n", int(records.size()) - fit.points_used);
    return kExitOk;
}

int cmd_selftest() {
    auto rep = selfcheck::run_acceptance_suite();
    std::map<std::string, std::pair<int, int>> per_criterion;
    for (const auto& o : rep.outcomes) {
        std::printf("[%s] %s%s%s\n", o.pass ? "PASS" : "FAIL", o.id.c_str(),
                    o.detail.empty() ? "" : " — ", o.detail.c_str());
        auto& [total, passed] = per_criterion[o.id.substr(0, 2)];
        ++total;
        passed += o.pass;
    }
    for (const auto& [crit, counts] : per_criterion)
        std::printf("%s: %s (%d/%d)\n", crit.c_str(),
                    counts.second == counts.first ? "PASS" : "FAIL", counts.second, counts.first);
    return rep.all_passed() ? kExitOk : kExitCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"convtail — convolution-tail oracle and second-order expansion harness"};
    app.require_subcommand(1);

    CommonFlags cf;
    double t = 0;
    std::string theorem = "auto";
    SweepConfig sweep_cfg;
    std::string rate_in, rate_column = "rel_err2";

    auto* oracle = app.add_subcommand("oracle", "evaluate the convolution tail at one t");
    add_model_flags(oracle, cf);
    oracle->add_option("--t", t, "evaluation point")->required();

    auto* expand = app.add_subcommand("expand", "evaluate one prediction with term breakdown");
    add_model_flags(expand, cf);
    expand->add_option("--t", t, "evaluation point")->required();
    expand->add_option("--theorem", theorem, "auto|1|4")
        ->check(CLI::IsMember({"auto", "1", "4"}));

    auto* sweep = app.add_subcommand("sweep", "oracle-vs-expansion convergence study (CSV)");
    sweep->add_option("--config", cf.config, "key-value config file; flags override it");
    sweep->add_option("--f", sweep_cfg.f_spec, "model spec for F");
    sweep->add_option("--g", sweep_cfg.g_spec, "model spec for G");
    double t_min = 0, t_max = 0, rel_tol = 0;
    int points = 0, jobs = 0;
    std::string out_path, plot_path;
    sweep->add_option("--t-min", t_min, "grid start");
    sweep->add_option("--t-max", t_max, "grid end");
    sweep->add_option("--points", points, "grid size (geometric)");
    sweep->add_option("--rel-tol", rel_tol, "oracle relative tolerance");
    sweep->add_option("--jobs", jobs, "concurrent grid evaluations");
    sweep->add_option("--out", out_path, "CSV path ('-' for stdout)");
    sweep->add_option("--plot", plot_path, "optional (log t, log rel_err2) data file");
    sweep->add_option("--theorem", theorem, "auto|1|4")
        ->check(CLI::IsMember({"auto", "1", "4"}));

    auto* rate = app.add_subcommand("rate", "fit a convergence rate on an existing sweep CSV");
    rate->add_option("--in", rate_in, "CSV produced by sweep")->required();
    rate->add_option("--column", rate_column, "rel_err1 or rel_err2");

    app.add_subcommand("selftest", "run the acceptance property suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (oracle->parsed()) return cmd_oracle(cf, t);
        if (expand->parsed()) return cmd_expand(cf, t, theorem);
        if (sweep->parsed()) {
            if (!cf.config.empty()) load_config_file(cf.config, sweep_cfg);
            if (t_min != 0) sweep_cfg.t_min = t_min;
            if (t_max != 0) sweep_cfg.t_max = t_max;
            if (points != 0) sweep_cfg.points = points;
            if (rel_tol != 0) sweep_cfg.rel_tol = rel_tol;
            if (jobs != 0) sweep_cfg.jobs = jobs;
            if (!out_path.empty()) sweep_cfg.out_path = out_path;
            if (!plot_path.empty()) sweep_cfg.plot_path = plot_path;
            sweep_cfg.theorem = theorem == "1"   ? TheoremChoice::Thm1
                                : theorem == "4" ? TheoremChoice::Thm4
                                                 : TheoremChoice::Auto;
            return cmd_sweep(sweep_cfg);
        }
        if (rate->parsed()) return cmd_rate(rate_in, rate_column);
        return cmd_selftest();
    } catch (const SpecParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitCheckFailure;
    }
}
