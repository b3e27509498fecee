#include "cbec/acceptance.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Runs the acceptance criteria and prints one PASS/FAIL line each"};
    cbec::AcceptanceOptions opt;
    std::vector<int> only;
    std::string fault = "none";
    app.add_option("--seed", opt.seed, "seed for the randomized checks")->capture_default_str();
    app.add_option("--jobs", opt.jobs, "concurrent sweep points")->check(CLI::PositiveNumber)->capture_default_str();
    app.add_option("--only", only, "criterion ids to run")->check(CLI::Range(1, cbec::criterion_count));
    app.add_option("--inject-fault", fault, "test fixture: none or weight_sign")
        ->check(CLI::IsMember({"none", "weight_sign"}))
        ->capture_default_str();
    CLI11_PARSE(app, argc, argv);
    opt.only.insert(only.begin(), only.end());
    if (fault == "weight_sign") opt.fault = cbec::Fault::weight_sign;

    int failed = 0;
    for (int id = 1; id <= cbec::criterion_count; ++id) {
        if (!opt.only.empty() && !opt.only.count(id)) continue;
        const auto r = cbec::run_criterion(id, opt);
        cbec::print_result(std::cout, r);
        std::cout.flush();
        failed += !r.pass();
    }
    std::cout << (failed ? "FAILED " + std::to_string(failed) + " criteria" : std::string("all criteria passed")) << '\n';
    return failed ? 1 : 0;
}
