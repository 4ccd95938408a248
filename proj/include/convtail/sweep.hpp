#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "convtail/expansion.hpp"
#include "convtail/oracle.hpp"

namespace convtail {

struct SweepRecord {
    double t;
    double oracle_log;
    double pred1_log;  // first-order prediction
    double pred2_log;  // second-order prediction
    double rel_err1;   // |exp(pred1_log - oracle_log) - 1|
    double rel_err2;
    std::string branch;
};

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    int points_used = 0;
};

enum class TheoremChoice { Auto, Thm1, Thm4 };

struct SweepConfig {
    std::string f_spec;
    std::string g_spec;  // empty -> F convolved with itself
    double t_min = 0.0;
    double t_max = 0.0;
    int points = 0;
    double rel_tol = 1e-10;
    int jobs = 1;
    TheoremChoice theorem = TheoremChoice::Auto;
    std::string out_path;   // empty or "-": stdout
    std::string plot_path;  // optional (log t, log rel_err2) two-column file
};

/// Loads the `[models] [grid] [tolerances] [output]` key-value config file
/// into `cfg`, leaving keys the file does not mention untouched (so
/// command-line flags can override afterwards).
void load_config_file(const std::string& path, SweepConfig& cfg);

/// One record per geometric grid point, evaluated independently (up to
/// cfg.jobs in flight); rows come back in grid order regardless of
/// completion order.
std::vector<SweepRecord> run_sweep(const SweepConfig& cfg);

/// Header is exactly `t,oracle_log,pred1_log,pred2_log,rel_err1,rel_err2,branch`;
/// numbers printed with %.17g so repeated runs are byte-identical.
void write_csv(std::ostream& os, const std::vector<SweepRecord>& records);
std::vector<SweepRecord> read_csv(std::istream& is);

void write_plot_data(std::ostream& os, const std::vector<SweepRecord>& records);

/// Least-squares slope of log err against log t. `column` is "rel_err1" or
/// "rel_err2". Rows with zero error are excluded; fewer than 3 usable points
/// is an error.
RateFit fit_rate(const std::vector<SweepRecord>& records, const std::string& column);

}  // namespace convtail
