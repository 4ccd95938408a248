#include "convtail/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace convtail {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void load_config_file(const std::string& path, SweepConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[' && s.back() == ']') {
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(s.substr(0, eq));
        std::string val = trim(s.substr(eq + 1));
        auto num = [&] {
            try {
                return std::stod(val);
            } catch (...) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": bad numeric value for " + key);
            }
        };
        if (section == "models" && key == "f") cfg.f_spec = val;
        else if (section == "models" && key == "g") cfg.g_spec = val;
        else if (section == "grid" && key == "t_min") cfg.t_min = num();
        else if (section == "grid" && key == "t_max") cfg.t_max = num();
        else if (section == "grid" && key == "points") cfg.points = int(num());
        else if (section == "tolerances" && key == "rel_tol") cfg.rel_tol = num();
        else if (section == "output" && key == "out") cfg.out_path = val;
        else if (section == "output" && key == "plot") cfg.plot_path = val;
        else
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": unknown key '" +
                                     key + "' in section [" + section + "]");
    }
}

std::vector<SweepRecord> run_sweep(const SweepConfig& cfg) {
    if (cfg.f_spec.empty()) throw std::invalid_argument("run_sweep: model f not set");
    LightTailModel F = make_model(cfg.f_spec);
    LightTailModel G = cfg.g_spec.empty() ? F : make_model(cfg.g_spec);

    if (!(cfg.points >= 1)) throw std::invalid_argument("run_sweep: points must be >= 1");
    if (cfg.points == 1) {
        if (cfg.t_max != 0.0 && cfg.t_max != cfg.t_min)
            throw std::invalid_argument("run_sweep: single-point grid needs t_max == t_min");
    } else if (!(cfg.t_max > cfg.t_min && cfg.t_min > 0)) {
        throw std::invalid_argument("run_sweep: need 0 < t_min < t_max");
    }

    bool thm1 = cfg.theorem == TheoremChoice::Thm1;
    if (cfg.theorem == TheoremChoice::Auto)
        thm1 = F.kind() == ModelKind::WeibullType && cfg.g_spec.empty();
    if (thm1 && !cfg.g_spec.empty() && cfg.g_spec != cfg.f_spec)
        throw std::invalid_argument("run_sweep: Theorem 1 covers the self-convolution only");

    std::vector<double> grid(cfg.points);
    for (int i = 0; i < cfg.points; ++i)
        grid[i] = cfg.points == 1
                      ? cfg.t_min
                      : cfg.t_min * std::pow(cfg.t_max / cfg.t_min, double(i) / (cfg.points - 1));

    // validate hypotheses once; branch rejections should surface before the grid runs
    std::string branch_text;
    if (thm1) {
        thm1_predict(F, grid.front());
        branch_text = "THM1";
    } else {
        thm4_predict(F, G, grid.front());
        const bool flip = G.spec_string() < F.spec_string();
        const LightTailModel& A = flip ? G : F;
        const LightTailModel& B = flip ? F : G;
        branch_text = std::string("m1:") + to_string(classify_branch(B)) + "|m2:" +
                      to_string(classify_branch(A));
    }

    std::vector<SweepRecord> records(grid.size());
    std::atomic<size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= grid.size()) return;
            try {
                double t = grid[i];
                SweepRecord& r = records[i];
                r.t = t;
                r.branch = branch_text;
                r.oracle_log = conv_tail(F, G, t, cfg.rel_tol).log_value;
                ExpansionResult e = thm1 ? thm1_predict(F, t) : thm4_predict(F, G, t);
                r.pred1_log = e.first_order_log_tail;
                r.pred2_log = e.predicted_log_tail;
                r.rel_err1 = std::abs(std::expm1(r.pred1_log - r.oracle_log));
                r.rel_err2 = std::abs(std::expm1(r.pred2_log - r.oracle_log));
            } catch (...) {
                std::lock_guard<std::mutex> lk(err_mu);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return records;
}

void write_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
    os << "t,oracle_log,pred1_log,pred2_log,rel_err1,rel_err2,branch\n";
    char buf[512];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,", r.t, r.oracle_log,
                      r.pred1_log, r.pred2_log, r.rel_err1, r.rel_err2);
        os << buf << r.branch << "\n";
    }
}

std::vector<SweepRecord> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("read_csv: empty input");
    if (trim(line) != "t,oracle_log,pred1_log,pred2_log,rel_err1,rel_err2,branch")
        throw std::runtime_error("read_csv: unexpected header: " + line);
    std::vector<SweepRecord> out;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        SweepRecord r;
        double* fields[6] = {&r.t, &r.oracle_log, &r.pred1_log, &r.pred2_log, &r.rel_err1,
                             &r.rel_err2};
        for (double* f : fields) {
            if (!std::getline(ss, cell, ',')) throw std::runtime_error("read_csv: short row");
            *f = std::stod(cell);
        }
        std::getline(ss, r.branch);
        out.push_back(std::move(r));
    }
    return out;
}

void write_plot_data(std::ostream& os, const std::vector<SweepRecord>& records) {
    char buf[128];
    for (const auto& r : records) {
        if (r.rel_err2 <= 0) continue;
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", std::log(r.t), std::log(r.rel_err2));
        os << buf;
    }
}

RateFit fit_rate(const std::vector<SweepRecord>& records, const std::string& column) {
    bool second;
    if (column == "rel_err1") second = false;
    else if (column == "rel_err2") second = true;
    else throw std::invalid_argument("fit_rate: column must be rel_err1 or rel_err2");
    std::vector<double> lx, ly;
    for (const auto& r : records) {
        double e = second ? r.rel_err2 : r.rel_err1;
        if (e > 0) {  // exact closed-form coincidences are excluded
            lx.push_back(std::log(r.t));
            ly.push_back(std::log(e));
        }
    }
    if (lx.size() < 3)
        throw std::invalid_argument("fit_rate: need at least 3 records with positive error");
    LineFit f = fit_line(lx, ly);
    return {f.slope, f.intercept, f.r_squared, int(lx.size())};
}

}  // namespace convtail
