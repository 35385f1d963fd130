#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "qhj/cli_args.hpp"
#include "qhj/scenario.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const qhj::ScenarioConfig cfg = qhj::parse_args(args);
        const qhj::OutputBundle bundle = qhj::run_scenario(cfg);
        for (const auto& chk : bundle.report.at("checks"))
            std::cout << (chk.at("pass").get<bool>() ? "[PASS] " : "[FAIL] ")
                      << chk.at("name").get<std::string>() << " value=" << chk.at("value")
                      << " tol=" << chk.at("tolerance") << "\n";
        std::cout << "wrote " << bundle.files.size() << " files to " << bundle.dir.string() << "\n";
        return bundle.exit_code;
    } catch (const qhj::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
