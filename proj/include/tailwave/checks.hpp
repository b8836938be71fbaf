#pragma once

#include <string>
#include <vector>

namespace tailwave {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// The fast property suite behind `tailwave check`: inequality sweeps, the
// commuted-equation and divergence-identity convergence audits on small
// grids, flat-space exactness and determinism. Names containing `filter`
// run; empty filter runs everything. Total budget well under a minute.
std::vector<CheckResult> run_checks(const std::string& filter, unsigned seed = 20240811u);

} // namespace tailwave
