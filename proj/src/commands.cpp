#include "wavedbn/commands.hpp"

#include <chrono>
#include <cmath>
#include <ostream>
#include <regex>
#include <thread>

#include "wavedbn/error.hpp"
#include "wavedbn/pgm.hpp"

namespace fs = std::filesystem;

namespace wavedbn {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kMonolithicStream = 0x4000;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Matrix raw_pixel_features(const Preprocessing& prep, const std::vector<Image>& images)
{
    const int side_w = prep.input_width / prep.downsample;
    const int side_h = prep.input_height / prep.downsample;
    Matrix out(static_cast<Eigen::Index>(images.size()), side_w * side_h);
    for(std::size_t i = 0; i < images.size(); ++i) {
        const Image img = prep.downsample == 2 ? downsample_2x(images[i]) : images[i];
        for(std::size_t c = 0; c < img.size(); ++c)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = img.pixels[c];
    }
    return out;
}

ReportRecord evaluation_report(const std::string& command, const EnsembleModel& model,
                               const std::vector<std::pair<std::string, const LabeledDataset*>>& sets)
{
    ReportRecord report;
    report.command = command;
    report.weights = model.weights;
    for(const auto& [name, ds] : sets)
        report.splits.push_back({name, evaluate_ensemble(model, ds->images, ds->labels)});
    return report;
}

} // namespace

ExperimentData load_experiment_data(const RunConfig& config)
{
    config.validate();
    ExperimentData data;
    if(config.dataset == DatasetKind::usps) {
        auto [train, test] = load_usps(config.train_path, config.test_path);
        if(!config.classes.empty()) {
            train = select_classes(train, config.classes);
            test = select_classes(test, config.classes);
        }
        data.train = std::move(train);
        data.test = std::move(test);
        return data;
    }

    LabeledDataset all = config.dataset == DatasetKind::coil20 ? load_coil20(config.data_path)
                                                                : load_pgm_class_dirs(config.data_path);
    if(!config.classes.empty())
        all = select_classes(all, config.classes);
    auto [train, test] = split_holdout(all, config.split_spec());
    data.train = std::move(train);
    data.test = std::move(test);
    return data;
}

LabeledDataset load_dataset_auto(const fs::path& path)
{
    if(fs::is_regular_file(path))
        return load_usps_file(path);
    if(!fs::is_directory(path))
        throw IoError(path.string() + ": no such file or directory");

    static const std::regex coil_name(R"(obj\d+__\d+\.pgm)");
    for(const auto& entry : fs::directory_iterator(path))
        if(std::regex_match(entry.path().filename().string(), coil_name))
            return load_coil20(path);
    return load_pgm_class_dirs(path);
}

Preprocessing preprocessing_for(const RunConfig& config, const Image& sample)
{
    Preprocessing prep{sample.width, sample.height, config.downsample, config.wavelet};
    prep.validate();
    return prep;
}

EnsembleTrainOptions ensemble_options(const RunConfig& config)
{
    EnsembleTrainOptions options;
    options.hidden_sizes = config.hidden_sizes;
    options.train = config.train;
    options.train.seed = config.seed;
    options.visible_kind = config.visible_kind;
    options.workers = config.workers;
    return options;
}

TrainOutcome cmd_train(const RunConfig& config, const std::optional<fs::path>& model_path, std::ostream& log)
{
    config.validate();
    const auto start = Clock::now();
    const ExperimentData data = load_experiment_data(config);
    log << "loaded " << data.train.size() << " training and " << data.test.size() << " test images, "
        << data.train.n_classes << " classes\n";

    EnsembleTrainOptions options = ensemble_options(config);
    options.preprocessing = preprocessing_for(config, data.train.images.front());
    EnsembleTrainResult trained = train_ensemble(data.train.images, data.train.labels, data.train.n_classes, options);
    log << "trained 16 DBNs in " << trained.wall_seconds << " s\n";

    TrainOutcome outcome;
    outcome.model.model = std::move(trained.model);
    outcome.model.provenance = {config_hash(config), config.seed, utc_timestamp()};

    ReportRecord& report = outcome.report;
    report = evaluation_report("train", outcome.model.model, {{"train", &data.train}, {"test", &data.test}});
    report.has_training = true;
    report.dbn_timings = trained.timings;
    report.config_text = format_run_config(config);
    report.total_wall_seconds = seconds_since(start);

    write_report_files(config.output_dir, "train_report", to_key_values(report), format_table(report));
    const fs::path target = model_path.value_or(config.output_dir / "model.wdbn");
    if(target.has_parent_path())
        fs::create_directories(target.parent_path());
    save_model(target, outcome.model);
    log << format_table(report) << "model written to " << target.string() << "\n";
    return outcome;
}

ReportRecord cmd_eval(const fs::path& model_path, const std::optional<RunConfig>& config,
                      const std::optional<fs::path>& data_path, const std::optional<fs::path>& out_dir,
                      std::ostream& log)
{
    const auto start = Clock::now();
    const ModelFile file = load_model(model_path);

    ReportRecord report;
    if(data_path) {
        const LabeledDataset ds = load_dataset_auto(*data_path);
        report = evaluation_report("eval", file.model, {{"eval", &ds}});
    } else if(config) {
        const ExperimentData data = load_experiment_data(*config);
        report = evaluation_report("eval", file.model, {{"train", &data.train}, {"test", &data.test}});
        report.config_text = format_run_config(*config);
    } else {
        throw ValidationError("eval needs --data or --config");
    }
    report.total_wall_seconds = seconds_since(start);

    if(out_dir)
        write_report_files(*out_dir, "eval_report", to_key_values(report), format_table(report));
    log << format_table(report);
    return report;
}

std::vector<BandScale> cmd_decompose(const fs::path& image_path, const std::string& wavelet, const fs::path& out_dir,
                                     std::ostream& log)
{
    const WaveletFilter filter = filter_by_name(wavelet);
    const Image image = read_pgm_normalized(image_path);
    const SubbandSet set = decompose_full_2level(image, filter);

    fs::create_directories(out_dir);
    std::vector<BandScale> scales;
    for(std::size_t j = 0; j < kSubbandCount; ++j) {
        const Image& band = set.subbands[j];
        double max_abs = 0.0;
        for(double c : band.pixels)
            max_abs = std::max(max_abs, std::abs(c));

        Image out = band;
        for(double& p : out.pixels)
            p = max_abs > 0.0 ? 127.5 * (1.0 + p / max_abs) : 127.5;

        char name[32];
        std::snprintf(name, sizeof name, "band_%02zu.pgm", j);
        write_pgm(out_dir / name, out, 255);
        scales.push_back({max_abs});
        log << name << " " << subband_name(j) << " " << band.width << "x" << band.height << " scale: pixel = 127.5 * (1 + c / "
            << max_abs << ")\n";
    }
    return scales;
}

BenchReport cmd_bench(const RunConfig& config, std::ostream& log)
{
    config.validate();
    const ExperimentData data = load_experiment_data(config);
    EnsembleTrainOptions options = ensemble_options(config);
    options.preprocessing = preprocessing_for(config, data.train.images.front());

    BenchReport bench;

    options.workers = 1;
    auto t0 = Clock::now();
    EnsembleTrainResult sequential = train_ensemble(data.train.images, data.train.labels, data.train.n_classes, options);
    bench.sequential_wall_seconds = seconds_since(t0);
    log << "sequential ensemble: " << bench.sequential_wall_seconds << " s\n";

    options.workers = config.workers > 0 ? config.workers
                                         : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    t0 = Clock::now();
    const EnsembleTrainResult parallel = train_ensemble(data.train.images, data.train.labels, data.train.n_classes, options);
    bench.parallel_wall_seconds = seconds_since(t0);
    bench.parallel_workers = options.workers;
    bench.parallel_matches_sequential = parallel.model == sequential.model;
    log << "parallel ensemble (" << options.workers << " workers): " << bench.parallel_wall_seconds << " s\n";

    ReportRecord& report = bench.ensemble;
    report = evaluation_report("bench", sequential.model, {{"train", &data.train}, {"test", &data.test}});
    report.has_training = true;
    report.dbn_timings = sequential.timings;
    report.total_wall_seconds = bench.sequential_wall_seconds + bench.parallel_wall_seconds;
    report.config_text = format_run_config(config);

    const Dbn& sample = sequential.model.dbns.front();
    bench.subband_dbn_parameters = sample.parameter_count();
    bench.subband_input_dim = static_cast<std::size_t>(sample.input_dim());

    // One DBN on the whole (downsampled) raster, same hidden sizes and schedule.
    const Matrix raw_train = raw_pixel_features(options.preprocessing, data.train.images);
    const Matrix raw_test = raw_pixel_features(options.preprocessing, data.test.images);
    DbnTrainConfig mono_cfg = options.train;
    mono_cfg.seed = derive_seed(config.seed, kMonolithicStream);
    Dbn mono = build_dbn(static_cast<int>(raw_train.cols()), config.hidden_sizes, data.train.n_classes,
                         derive_seed(mono_cfg.seed, 0), config.visible_kind);
    t0 = Clock::now();
    mono = pretrain(std::move(mono), raw_train, mono_cfg).dbn;
    bench.monolithic_timing.pretrain_seconds = seconds_since(t0);
    t0 = Clock::now();
    mono = finetune(std::move(mono), raw_train, data.train.labels, mono_cfg).dbn;
    bench.monolithic_timing.finetune_seconds = seconds_since(t0);
    bench.monolithic_parameters = mono.parameter_count();
    bench.monolithic_input_dim = static_cast<std::size_t>(mono.input_dim());
    bench.monolithic_train_accuracy = accuracy(mono, raw_train, data.train.labels);
    bench.monolithic_test_accuracy = accuracy(mono, raw_test, data.test.labels);

    write_report_files(config.output_dir, "bench_report", to_key_values(bench), format_table(bench));
    log << format_table(bench);
    return bench;
}

void cmd_inspect(const fs::path& model_path, std::ostream& out)
{
    const ModelFile file = load_model(model_path);
    const EnsembleModel& m = file.model;
    const Preprocessing& p = m.preprocessing;

    out << "format version " << kModelFormatVersion << "\n"
        << "input " << p.input_width << "x" << p.input_height << ", downsample " << p.downsample << ", wavelet "
        << p.wavelet << ", sub-bands " << p.band_width() << "x" << p.band_height() << "\n"
        << "classes " << m.n_classes << "\n"
        << "architecture " << m.dbns.front().input_dim();
    for(int h : m.dbns.front().hidden_sizes())
        out << " -> " << h;
    out << " -> " << m.n_classes << " (softmax), " << m.dbns.front().parameter_count() << " parameters per DBN, visible "
        << to_string(m.dbns.front().layers.front().visible_kind) << "\n\n";

    out << " sub-band  weight              scaler min              scaler max\n";
    for(std::size_t j = 0; j < kSubbandCount; ++j) {
        char line[160];
        std::snprintf(line, sizeof line, " %2zu %-5s  %.17g  %-22.17g  %-22.17g\n", j, subband_name(j).c_str(),
                      m.weights[j], m.scalers[j].min, m.scalers[j].max);
        out << line;
    }
    out << "\nprovenance\n"
        << " config_hash " << (file.provenance.config_hash.empty() ? "-" : file.provenance.config_hash) << "\n"
        << " seed " << file.provenance.seed << "\n"
        << " timestamp " << (file.provenance.timestamp.empty() ? "-" : file.provenance.timestamp) << "\n";
}

} // namespace wavedbn
