// Acceptance suite runner: one line per criterion check, nonzero exit on any
// failure. The same checks back the CLI selftest subcommand.
#include <cstdio>
#include <map>
#include <string>

#include "convtail/selfcheck.hpp"

int main() {
    auto rep = convtail::selfcheck::run_acceptance_suite();
    std::map<std::string, std::pair<int, int>> per_criterion;
    for (const auto& o : rep.outcomes) {
        std::printf("[%s] %s%s%s\n", o.pass ? "PASS" : "FAIL", o.id.c_str(),
                    o.detail.empty() ? "" : " — ", o.detail.c_str());
        auto& [total, passed] = per_criterion[o.id.substr(0, 2)];
        ++total;
        passed += o.pass;
    }
    std::printf("----\n");
    bool all = true;
    for (const auto& [crit, counts] : per_criterion) {
        bool ok = counts.second == counts.first;
        all = all && ok;
        std::printf("%s: %s (%d/%d)\n", crit.c_str(), ok ? "PASS" : "FAIL", counts.second,
                    counts.first);
    }
    return all ? 0 : 1;
}
