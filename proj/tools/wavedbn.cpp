#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "wavedbn/commands.hpp"
#include "wavedbn/error.hpp"

namespace fs = std::filesystem;
using namespace wavedbn;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kIo = 2, kNumerical = 3 };

struct Options {
    std::string config;
    std::string model;
    std::string data;
    std::string out;
    std::string wavelet = "haar";
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
};

RunConfig effective_config(const Options& opt)
{
    if(opt.config.empty())
        throw ValidationError("--config is required");
    RunConfig config = load_run_config(opt.config);
    if(opt.seed) {
        config.seed = *opt.seed;
        config.train.seed = *opt.seed;
    }
    if(opt.workers)
        config.workers = *opt.workers;
    if(!opt.out.empty())
        config.output_dir = opt.out;
    config.validate();
    return config;
}

std::optional<fs::path> optional_path(const std::string& s)
{
    if(s.empty())
        return std::nullopt;
    return fs::path(s);
}

void require_flag(const std::string& value, const char* flag)
{
    if(value.empty())
        throw ValidationError(std::string(flag) + " is required");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Wavelet sub-band DBN ensemble classifier"};
    app.require_subcommand(0, 1);

    Options opt;
    bool print_defaults = false;
    app.add_flag("--print-defaults", print_defaults, "Print the default configuration and exit");

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", opt.config, "Run configuration file");
        cmd->add_option("--out", opt.out, "Output directory (overrides run.output_dir)");
        cmd->add_option("--seed", opt.seed, "Master seed (overrides run.seed)");
        cmd->add_option("--workers", opt.workers, "Training workers, 0 = one per core, 1 = sequential");
    };

    CLI::App* train = app.add_subcommand("train", "Train the 16-DBN ensemble and write model and report");
    add_common(train);
    train->add_option("--model", opt.model, "Model output path (default <out>/model.wdbn)");

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a saved model");
    eval->add_option("--model", opt.model, "Model file")->required();
    eval->add_option("--data", opt.data, "USPS file, COIL-20 directory or class-directory tree");
    eval->add_option("--config", opt.config, "Evaluate on the splits described by this configuration");
    eval->add_option("--out", opt.out, "Directory for eval_report.kv and eval_report.txt");

    CLI::App* bench = app.add_subcommand("bench", "Compare the ensemble with one DBN on raw pixels");
    add_common(bench);

    CLI::App* decompose = app.add_subcommand("decompose", "Write the 16 sub-band images of a PGM file");
    decompose->add_option("--data", opt.data, "Input PGM image")->required();
    decompose->add_option("--out", opt.out, "Output directory")->required();
    decompose->add_option("--wavelet", opt.wavelet, "Wavelet filter (haar, db4)");

    CLI::App* inspect = app.add_subcommand("inspect", "Print the contents of a model file");
    inspect->add_option("--model", opt.model, "Model file")->required();

    try {
        app.parse(argc, argv);
    } catch(const CLI::Success& e) {
        return app.exit(e);
    } catch(const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    }

    try {
        if(print_defaults) {
            std::cout << default_config_text();
            return kOk;
        }
        if(*train) {
            cmd_train(effective_config(opt), optional_path(opt.model), std::cout);
        } else if(*eval) {
            if(opt.data.empty() == opt.config.empty())
                throw ValidationError("eval needs exactly one of --data and --config");
            std::optional<RunConfig> config;
            if(!opt.config.empty())
                config = load_run_config(opt.config);
            cmd_eval(opt.model, config, optional_path(opt.data), optional_path(opt.out), std::cout);
        } else if(*bench) {
            cmd_bench(effective_config(opt), std::cout);
        } else if(*decompose) {
            cmd_decompose(opt.data, opt.wavelet, opt.out, std::cout);
        } else if(*inspect) {
            require_flag(opt.model, "--model");
            cmd_inspect(opt.model, std::cout);
        } else {
            std::cout << app.help();
            return kValidation;
        }
    } catch(const ValidationError& e) {
        std::cerr << "wavedbn: validation error: " << e.what() << "\n";
        return kValidation;
    } catch(const IoError& e) {
        std::cerr << "wavedbn: I/O error: " << e.what() << "\n";
        return kIo;
    } catch(const NumericalError& e) {
        std::cerr << "wavedbn: numerical error: " << e.what() << "\n";
        return kNumerical;
    } catch(const fs::filesystem_error& e) {
        std::cerr << "wavedbn: I/O error: " << e.what() << "\n";
        return kIo;
    } catch(const std::exception& e) {
        std::cerr << "wavedbn: error: " << e.what() << "\n";
        return kValidation;
    }
    return kOk;
}
