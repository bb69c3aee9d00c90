#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "crres/manifest.hpp"

int main(int argc, char** argv) {
    CLI::App app{"crres: residue calculus on CR charts"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run the tasks in a manifest");
    std::string manifest_path, json_path;
    double tolerance = -1.0;
    int order = -1;
    bool parallel = false;
    run->add_option("manifest", manifest_path, "manifest file")->required();
    run->add_option("--json", json_path, "write a JSON report to this path");
    run->add_option("--tolerance", tolerance, "override verification tolerance");
    run->add_option("--quadrature-order", order, "override quadrature order");
    run->add_flag("--parallel", parallel, "run independent tasks concurrently");

    CLI11_PARSE(app, argc, argv);

    crres::RunOptions opts;
    if (tolerance > 0) opts.tolerance = tolerance;
    if (order > 0) opts.order = order;
    opts.parallel = parallel;

    try {
        crres::RunResult result = crres::run_manifest_file(manifest_path, opts);
        std::cout << result.text_report();
        if (!json_path.empty()) {
            std::ofstream out(json_path);
            out << result.to_json() << "\n";
        }
        return result.exit_code();
    } catch (const crres::ManifestError& ex) {
        std::cerr << "manifest error: " << ex.what() << "\n";
        return 2;
    } catch (const crres::ParseError& ex) {
        std::cerr << "parse error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
}
