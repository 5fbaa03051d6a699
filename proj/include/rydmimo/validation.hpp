#pragma once

// Fast self-check suite run by `rydsim validate`.

#include <functional>
#include <string>
#include <vector>

namespace rydmimo {

enum class CheckStatus { Pass, Fail, Skip };

struct CheckResult {
    std::string name;
    CheckStatus status = CheckStatus::Pass;
    std::string detail;
};

/// Replaceable pieces, so tests can confirm that a broken component is caught.
struct ValidationHooks {
    std::function<double(double, int)> quantizer;
};

std::vector<CheckResult> run_validation(const ValidationHooks& hooks = {});

std::string to_string(CheckStatus status);

} // namespace rydmimo
