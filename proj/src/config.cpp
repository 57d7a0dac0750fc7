#include "wavedbn/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "wavedbn/error.hpp"
#include "wavedbn/wavelet.hpp"

namespace wavedbn {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if(first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, const std::string& key)
{
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if(text.empty() || ec != std::errc() || ptr != text.data() + text.size())
        throw ValidationError(key + ": '" + std::string(text) + "' is not a valid number");
    if constexpr(std::is_floating_point_v<T>) {
        if(!std::isfinite(value))
            throw ValidationError(key + ": value must be finite");
    }
    return value;
}

bool parse_bool(std::string_view text, const std::string& key)
{
    if(text == "true")
        return true;
    if(text == "false")
        return false;
    throw ValidationError(key + ": expected true or false, got '" + std::string(text) + "'");
}

std::vector<int> parse_int_list(std::string_view text, const std::string& key)
{
    std::vector<int> out;
    if(trim(text).empty())
        return out;
    std::size_t start = 0;
    while(true) {
        const auto comma = text.find(',', start);
        out.push_back(parse_number<int>(trim(text.substr(start, comma - start)), key));
        if(comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

std::string join(const std::vector<int>& values)
{
    std::string out;
    for(std::size_t i = 0; i < values.size(); ++i) {
        if(i > 0)
            out += ",";
        out += std::to_string(values[i]);
    }
    return out;
}

std::string format_real(double value)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

DatasetKind dataset_kind_from_string(std::string_view name, const std::string& key)
{
    if(name == "coil20")
        return DatasetKind::coil20;
    if(name == "usps")
        return DatasetKind::usps;
    if(name == "generic-pgm-dir")
        return DatasetKind::generic_pgm_dir;
    throw ValidationError(key + ": unknown dataset kind '" + std::string(name)
                          + "' (expected coil20, usps or generic-pgm-dir)");
}

using Setter = std::function<void(RunConfig&, std::string_view, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"dataset.kind", [](RunConfig& c, std::string_view v, const std::string& k) { c.dataset = dataset_kind_from_string(v, k); }},
        {"dataset.path", [](RunConfig& c, std::string_view v, const std::string&) { c.data_path = std::string(v); }},
        {"dataset.train_path", [](RunConfig& c, std::string_view v, const std::string&) { c.train_path = std::string(v); }},
        {"dataset.test_path", [](RunConfig& c, std::string_view v, const std::string&) { c.test_path = std::string(v); }},
        {"dataset.classes", [](RunConfig& c, std::string_view v, const std::string& k) { c.classes = parse_int_list(v, k); }},
        {"preprocess.downsample", [](RunConfig& c, std::string_view v, const std::string& k) { c.downsample = parse_number<int>(v, k); }},
        {"preprocess.wavelet", [](RunConfig& c, std::string_view v, const std::string&) { c.wavelet = std::string(v); }},
        {"architecture.hidden", [](RunConfig& c, std::string_view v, const std::string& k) { c.hidden_sizes = parse_int_list(v, k); }},
        {"architecture.visible_kind",
         [](RunConfig& c, std::string_view v, const std::string& k) {
             try {
                 c.visible_kind = visible_kind_from_string(std::string(v));
             } catch(const ValidationError& e) {
                 throw ValidationError(k + ": " + e.what());
             }
         }},
        {"pretrain.learning_rate", [](RunConfig& c, std::string_view v, const std::string& k) { c.train.pretrain.learning_rate = parse_number<double>(v, k); }},
        {"pretrain.epochs", [](RunConfig& c, std::string_view v, const std::string& k) { c.train.pretrain.epochs = parse_number<int>(v, k); }},
        {"pretrain.batch_size", [](RunConfig& c, std::string_view v, const std::string& k) { c.train.pretrain.batch_size = parse_number<int>(v, k); }},
        {"pretrain.cd_steps", [](RunConfig& c, std::string_view v, const std::string& k) { c.train.pretrain.cd_steps = parse_number<int>(v, k); }},
        {"pretrain.momentum_initial", [](RunConfig& c, std::string_view v, const std::string& k) { c.train.pretrain.momentum_initial = parse_number<double>(v, k); }},
        {"pretrain.momentum_final", [](RunConfig& c, std::string_view v, const std::string& k) { c.train.pretrain.momentum_final = parse_number<double>(v, k); }},
        {"pretrain.momentum_switch_epoch", [](RunConfig& c, std::string_view v, const std::string& k) { c.train.pretrain.momentum_switch_epoch = parse_number<int>(v, k); }},
        {"pretrain.weight_decay", [](RunConfig& c, std::string_view v, const std::string& k) { c.train.pretrain.weight_decay = parse_number<double>(v, k); }},
        {"finetune.learning_rate", [](RunConfig& c, std::string_view v, const std::string& k) { c.train.finetune_learning_rate = parse_number<double>(v, k); }},
        {"finetune.epochs", [](RunConfig& c, std::string_view v, const std::string& k) { c.train.finetune_epochs = parse_number<int>(v, k); }},
        {"finetune.batch_size", [](RunConfig& c, std::string_view v, const std::string& k) { c.train.finetune_batch_size = parse_number<int>(v, k); }},
        {"split.train_fraction", [](RunConfig& c, std::string_view v, const std::string& k) { c.train_fraction = parse_number<double>(v, k); }},
        {"split.stratified", [](RunConfig& c, std::string_view v, const std::string& k) { c.stratified = parse_bool(v, k); }},
        {"split.seed", [](RunConfig& c, std::string_view v, const std::string& k) { c.split_seed = parse_number<std::uint64_t>(v, k); }},
        {"run.seed", [](RunConfig& c, std::string_view v, const std::string& k) { c.seed = parse_number<std::uint64_t>(v, k); }},
        {"run.workers", [](RunConfig& c, std::string_view v, const std::string& k) { c.workers = parse_number<int>(v, k); }},
        {"run.output_dir", [](RunConfig& c, std::string_view v, const std::string&) { c.output_dir = std::string(v); }},
    };
    return table;
}

} // namespace

std::string to_string(DatasetKind kind)
{
    switch(kind) {
    case DatasetKind::coil20: return "coil20";
    case DatasetKind::usps: return "usps";
    case DatasetKind::generic_pgm_dir: return "generic-pgm-dir";
    }
    return "unknown";
}

void RunConfig::validate() const
{
    auto check = [](bool ok, const std::string& key, const std::string& message) {
        if(!ok)
            throw ValidationError(key + ": " + message);
    };

    if(dataset == DatasetKind::usps) {
        check(!train_path.empty(), "dataset.train_path", "required for usps");
        check(!test_path.empty(), "dataset.test_path", "required for usps");
    } else {
        check(!data_path.empty(), "dataset.path", "required for " + to_string(dataset));
    }
    std::set<int> seen;
    for(int id : classes)
        check(seen.insert(id).second, "dataset.classes", "class " + std::to_string(id) + " listed twice");

    check(downsample == 1 || downsample == 2, "preprocess.downsample", "must be 1 or 2");
    try {
        validate_filter(filter_by_name(wavelet));
    } catch(const ValidationError& e) {
        throw ValidationError(std::string("preprocess.wavelet: ") + e.what());
    }

    check(!hidden_sizes.empty(), "architecture.hidden", "at least one hidden layer is required");
    for(int size : hidden_sizes)
        check(size > 0, "architecture.hidden", "layer sizes must be positive");

    const RbmTrainConfig& p = train.pretrain;
    check(p.learning_rate > 0.0, "pretrain.learning_rate", "must be positive");
    check(p.epochs > 0, "pretrain.epochs", "must be a positive integer");
    check(p.batch_size > 0, "pretrain.batch_size", "must be a positive integer");
    check(p.cd_steps > 0, "pretrain.cd_steps", "must be a positive integer");
    check(p.momentum_initial >= 0.0 && p.momentum_initial < 1.0, "pretrain.momentum_initial", "must lie in [0,1)");
    check(p.momentum_final >= 0.0 && p.momentum_final < 1.0, "pretrain.momentum_final", "must lie in [0,1)");
    check(p.momentum_switch_epoch > 0, "pretrain.momentum_switch_epoch", "must be a positive integer");
    check(p.weight_decay >= 0.0, "pretrain.weight_decay", "must be nonnegative");
    check(train.finetune_learning_rate > 0.0, "finetune.learning_rate", "must be positive");
    check(train.finetune_epochs > 0, "finetune.epochs", "must be a positive integer");
    check(train.finetune_batch_size > 0, "finetune.batch_size", "must be a positive integer");

    check(train_fraction > 0.0 && train_fraction < 1.0, "split.train_fraction", "must lie in (0,1)");
    check(workers >= 0, "run.workers", "must be nonnegative");
    check(!output_dir.empty(), "run.output_dir", "must not be empty");

    // Anything that slipped through the field checks above.
    train.validate();
}

RunConfig parse_run_config(std::string_view text, const std::string& source)
{
    RunConfig config;
    std::string section;
    std::set<std::string> seen;
    std::size_t line_no = 0;

    std::size_t pos = 0;
    while(pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        const auto comment = line.find_first_of("#;");
        if(comment != std::string_view::npos)
            line = line.substr(0, comment);
        line = trim(line);
        if(line.empty())
            continue;

        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        if(line.front() == '[') {
            if(line.back() != ']')
                throw ValidationError(where + "malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            static const std::set<std::string> sections = {"dataset", "preprocess", "architecture", "pretrain",
                                                           "finetune", "split", "run"};
            if(!sections.contains(section))
                throw ValidationError(where + "unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if(eq == std::string_view::npos)
            throw ValidationError(where + "expected 'key = value'");
        if(section.empty())
            throw ValidationError(where + "key outside of any section");
        const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
        const auto it = setters().find(key);
        if(it == setters().end())
            throw ValidationError(where + "unknown key '" + key + "'");
        if(!seen.insert(key).second)
            throw ValidationError(where + "duplicate key '" + key + "'");
        try {
            it->second(config, trim(line.substr(eq + 1)), key);
        } catch(const ValidationError& e) {
            throw ValidationError(where + e.what());
        }
    }

    config.train.seed = config.seed;
    config.validate();
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if(!in)
        throw IoError(path.string() + ": cannot open config file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str(), path.string());
}

std::string format_run_config(const RunConfig& c)
{
    const RbmTrainConfig& p = c.train.pretrain;
    std::ostringstream out;
    out << "[dataset]\n"
        << "kind = " << to_string(c.dataset) << "\n"
        << "path = " << c.data_path.string() << "\n"
        << "train_path = " << c.train_path.string() << "\n"
        << "test_path = " << c.test_path.string() << "\n"
        << "classes = " << join(c.classes) << "\n"
        << "\n[preprocess]\n"
        << "downsample = " << c.downsample << "\n"
        << "wavelet = " << c.wavelet << "\n"
        << "\n[architecture]\n"
        << "hidden = " << join(c.hidden_sizes) << "\n"
        << "visible_kind = " << to_string(c.visible_kind) << "\n"
        << "\n[pretrain]\n"
        << "learning_rate = " << format_real(p.learning_rate) << "\n"
        << "epochs = " << p.epochs << "\n"
        << "batch_size = " << p.batch_size << "\n"
        << "cd_steps = " << p.cd_steps << "\n"
        << "momentum_initial = " << format_real(p.momentum_initial) << "\n"
        << "momentum_final = " << format_real(p.momentum_final) << "\n"
        << "momentum_switch_epoch = " << p.momentum_switch_epoch << "\n"
        << "weight_decay = " << format_real(p.weight_decay) << "\n"
        << "\n[finetune]\n"
        << "learning_rate = " << format_real(c.train.finetune_learning_rate) << "\n"
        << "epochs = " << c.train.finetune_epochs << "\n"
        << "batch_size = " << c.train.finetune_batch_size << "\n"
        << "\n[split]\n"
        << "train_fraction = " << format_real(c.train_fraction) << "\n"
        << "stratified = " << (c.stratified ? "true" : "false") << "\n";
    if(c.split_seed)
        out << "seed = " << *c.split_seed << "\n";
    out << "\n[run]\n"
        << "seed = " << c.seed << "\n"
        << "workers = " << c.workers << "\n"
        << "output_dir = " << c.output_dir.string() << "\n";
    return out.str();
}

std::string default_config_text()
{
    RunConfig defaults;
    defaults.data_path = "data/coil-20";
    return "# wavedbn run configuration (defaults)\n"
           "# dataset.kind: coil20 | usps | generic-pgm-dir\n"
           "# dataset.classes: comma-separated class ids to keep (COIL object numbers); empty keeps all\n"
           "# split.seed defaults to run.seed when omitted\n"
           "# run.workers: parallel DBN trainings, 0 = one per hardware thread, 1 = sequential\n\n"
           + format_run_config(defaults);
}

std::string config_hash(const RunConfig& config)
{
    std::uint64_t hash = 0xCBF29CE484222325ull;
    for(unsigned char c : format_run_config(config)) {
        hash ^= c;
        hash *= 0x100000001B3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

} // namespace wavedbn
