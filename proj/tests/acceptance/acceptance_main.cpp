#include <cstdio>
#include <cstdlib>
#include <string>

#include "nlperim/acceptance.hpp"

int main(int argc, char** argv) {
    nlp::AcceptanceOptions opt;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--quick") opt.quick = true;
        else opt.only.push_back(std::atoi(a.c_str()));
    }
    opt.on_check = [](const nlp::AcceptanceCheck& c) {
        std::printf("%s\n", nlp::format_check(c).c_str());
        std::fflush(stdout);
    };
    const auto checks = nlp::run_acceptance(opt);
    int pass = 0;
    for (const auto& c : checks) pass += c.pass;
    std::printf("%d/%zu checks passed\n", pass, checks.size());
    return nlp::acceptance_ok(checks) ? 0 : 1;
}
