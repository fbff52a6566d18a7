#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace tscale::suite {

struct Options {
    /// Escape threshold used by the blow-up check.
    double norm_cap = 1e8;
    std::uint64_t seed = 20240917;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    double seconds = 0.0;
    double limit_seconds = 0.0;  // 0: no limit
    std::vector<std::string> details;
};

/// Number of acceptance criteria.
int criterion_count();

CriterionResult run_criterion(int id, const Options& opt = {});

/// Runs all criteria in order; `on_result` is called after each one.
std::vector<CriterionResult> run_all(const Options& opt = {},
                                     const std::function<void(const CriterionResult&)>& on_result = {});

/// One line per criterion: PASS/FAIL, id, title, time.
std::string format_line(const CriterionResult& r);

}  // namespace tscale::suite
