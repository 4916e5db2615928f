#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace restartlab {

struct CheckResult {
    std::string name;
    bool pass;
    double residual;     // max residual measured by the check
    std::string detail;
};

struct ValidationOptions {
    // Self-test: flip a sign inside the chi recurrence so a working suite
    // must report failure.
    bool inject_chi_fault = false;
};

/// Embedded oracle suite: recurrence vs matrix power vs closed form, regime
/// interval endpoints, full-vector vs eigenmode equivalence, restart-block
/// composition. Deterministic (fixed seeds).
std::vector<CheckResult> run_validation(const ValidationOptions& opts = {});

/// Prints one line per check plus max residuals; returns true iff all passed.
bool report_validation(std::ostream& os, const std::vector<CheckResult>& results);

}  // namespace restartlab
