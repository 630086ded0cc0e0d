#pragma once

#include <functional>
#include <string>
#include <vector>

namespace nlp {

struct AcceptanceCheck {
    int criterion = 0;
    std::string id;      // e.g. "7b"
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

struct AcceptanceOptions {
    bool quick = false;             // reduced problem sizes
    std::vector<int> only;          // criteria to run (empty = all)
    std::function<void(const AcceptanceCheck&)> on_check;
};

std::vector<AcceptanceCheck> run_acceptance(const AcceptanceOptions& opt = {});

/// Fixed-width PASS/FAIL table, one line per check.
std::string format_acceptance(const std::vector<AcceptanceCheck>& checks);
std::string format_check(const AcceptanceCheck& c);

/// True when every check passed.
bool acceptance_ok(const std::vector<AcceptanceCheck>& checks);

}  // namespace nlp
