#include "bidc/config.hpp"
#include "bidc/io.hpp"
#include "bidc/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Simulator for two-excitation waveguide QED with on-site interaction: "
                 "spectra, doublon-continuum bound states, entangled-state preparation "
                 "and state transfer"};

    std::string config_path;
    std::string out_dir = "out";
    int workers = 0;
    std::string log_level = "info";
    app.add_option("--config", config_path, "path to the run config (key = value lines)")
        ->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--workers", workers, "sweep worker-pool width (overrides the config)");
    app.add_option("--log-level", log_level, "quiet|info|debug")
        ->check(CLI::IsMember({"quiet", "info", "debug"}));

    CLI11_PARSE(app, argc, argv);

    try {
        std::string text = bidc::read_file(config_path);
        text = bidc::apply_env_overrides(text, "BIDC_");
        bidc::RunConfig config = bidc::parse_config_text(text);
        if (workers > 0) config.workers = workers;

        if (log_level != "quiet") {
            std::cout << "task: " << bidc::to_string(config.task)
                      << "  convention: " << bidc::to_string(config.model.convention) << "\n";
            for (const auto& w : config.model.regime_warnings())
                std::cout << "warning: " << w << "\n";
        }
        if (log_level == "debug") std::cout << config.serialize();

        const auto manifest = bidc::run_task(config, out_dir);
        if (log_level != "quiet") {
            std::cout << "outputs in " << out_dir << ":\n";
            for (const auto& o : manifest.outputs) std::cout << "  " << o << "\n";
            for (const auto& [k, v] : manifest.metrics)
                std::cout << "  " << k << " = " << v << "\n";
        }
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 2;
    }
}
