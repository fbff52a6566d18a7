// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <iostream>
#include <string>

#include "tscale/suite.hpp"

int main(int argc, char** argv) {
    bool verbose = false;
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]) == "-v") verbose = true;

    bool all = true;
    tscale::suite::run_all({}, [&](const tscale::suite::CriterionResult& r) {
        all = all && r.passed;
        std::cout << tscale::suite::format_line(r) << "\n";
        for (const auto& d : r.details)
            if (verbose || !r.passed) std::cout << "    " << d << "\n";
        std::cout.flush();
    });
    return all ? 0 : 1;
}
