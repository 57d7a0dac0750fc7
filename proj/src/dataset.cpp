#include "wavedbn/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "wavedbn/error.hpp"
#include "wavedbn/pgm.hpp"
#include "wavedbn/random.hpp"

namespace fs = std::filesystem;

namespace wavedbn {

namespace {

constexpr int kUspsSide = 16;
constexpr int kUspsFeatures = kUspsSide * kUspsSide;

std::vector<fs::path> sorted_entries(const fs::path& dir)
{
    if(!fs::is_directory(dir))
        throw IoError(dir.string() + ": not a directory");
    std::vector<fs::path> entries;
    for(const auto& entry : fs::directory_iterator(dir))
        entries.push_back(entry.path());
    std::sort(entries.begin(), entries.end());
    return entries;
}

double parse_real(std::string_view token, const fs::path& path, std::size_t line)
{
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if(ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value))
        throw IoError(path.string() + ":" + std::to_string(line) + ": invalid number '" + std::string(token) + "'");
    return value;
}

struct RawUsps {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::vector<std::size_t> line_numbers;
};

RawUsps parse_usps_text(const fs::path& path)
{
    std::ifstream in(path);
    if(!in)
        throw IoError(path.string() + ": cannot open file");

    RawUsps raw;
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> tokens;
    while(std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        tokens.clear();
        for(std::string t; fields >> t;)
            tokens.push_back(std::move(t));
        if(tokens.empty())
            continue;

        const double label = parse_real(tokens[0], path, line_no);
        if(label != std::floor(label) || label < 0.0 || label > 10.0)
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": unknown label '" + tokens[0] + "'");

        std::vector<double> row(kUspsFeatures, 0.0);
        const bool sparse = std::any_of(tokens.begin() + 1, tokens.end(),
                                        [](const std::string& t) { return t.find(':') != std::string::npos; });
        if(sparse) {
            for(std::size_t i = 1; i < tokens.size(); ++i) {
                const auto colon = tokens[i].find(':');
                if(colon == std::string::npos)
                    throw IoError(path.string() + ":" + std::to_string(line_no) + ": mixed sparse and dense features");
                const double index = parse_real(std::string_view(tokens[i]).substr(0, colon), path, line_no);
                if(index != std::floor(index) || index < 1 || index > kUspsFeatures)
                    throw IoError(path.string() + ":" + std::to_string(line_no) + ": feature index "
                                  + tokens[i].substr(0, colon) + " outside 1.." + std::to_string(kUspsFeatures));
                row[static_cast<std::size_t>(index) - 1] =
                    parse_real(std::string_view(tokens[i]).substr(colon + 1), path, line_no);
            }
        } else {
            if(tokens.size() - 1 != kUspsFeatures)
                throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected "
                              + std::to_string(kUspsFeatures) + " features, found " + std::to_string(tokens.size() - 1));
            for(std::size_t i = 1; i < tokens.size(); ++i)
                row[i - 1] = parse_real(tokens[i], path, line_no);
        }

        raw.rows.push_back(std::move(row));
        raw.labels.push_back(static_cast<int>(label));
        raw.line_numbers.push_back(line_no);
    }

    if(raw.rows.empty())
        throw IoError(path.string() + ": no samples");
    return raw;
}

// Label offset: 1 when the alphabet is 1..10, else 0.
int usps_label_offset(std::span<const RawUsps* const> files)
{
    bool has_zero = false;
    bool has_ten = false;
    for(const RawUsps* f : files) {
        for(int label : f->labels) {
            has_zero = has_zero || label == 0;
            has_ten = has_ten || label == 10;
        }
    }
    if(has_zero && has_ten)
        throw ValidationError("USPS labels mix the 0..9 and 1..10 alphabets");
    return has_ten ? 1 : 0;
}

LabeledDataset finish_usps(const RawUsps& raw, int offset, const fs::path& path)
{
    double lo = 0.0;
    double hi = 0.0;
    for(const auto& row : raw.rows) {
        const auto [mn, mx] = std::minmax_element(row.begin(), row.end());
        lo = std::min(lo, *mn);
        hi = std::max(hi, *mx);
    }

    constexpr double slack = 1e-6;
    ValueRange source{0.0, 1.0};
    if(lo < 0.0)
        source = {-1.0, 1.0};
    else if(hi > 1.0 + slack)
        source = {0.0, 2.0};
    if(lo < source.min - slack || hi > source.max + slack)
        throw ValidationError(path.string() + ": pixel values span [" + std::to_string(lo) + ", " + std::to_string(hi)
                              + "], not a recognised USPS range ([-1,1], [0,2] or [0,1])");

    LabeledDataset ds;
    ds.n_classes = 10;
    for(int d = 0; d < 10; ++d) {
        ds.class_ids.push_back(d);
        ds.class_names.push_back(std::to_string(d));
    }
    for(std::size_t i = 0; i < raw.rows.size(); ++i) {
        const int label = raw.labels[i] - offset;
        if(label < 0 || label > 9)
            throw ValidationError(path.string() + ":" + std::to_string(raw.line_numbers[i]) + ": unknown label "
                                  + std::to_string(raw.labels[i]));
        ds.images.push_back(normalize(Image(kUspsSide, kUspsSide, raw.rows[i]), source));
        ds.labels.push_back(label);
    }
    return ds;
}

} // namespace

void LabeledDataset::validate() const
{
    detail::require(images.size() == labels.size(), "dataset has different numbers of images and labels");
    detail::require(n_classes > 0, "dataset needs at least one class");
    detail::require(class_ids.empty() || class_ids.size() == static_cast<std::size_t>(n_classes),
                    "dataset class_ids do not match n_classes");
    for(int label : labels)
        detail::require(label >= 0 && label < n_classes, "dataset label out of range");
    for(const Image& img : images)
        detail::require(img.width == images.front().width && img.height == images.front().height,
                        "dataset images differ in size");
}

LabeledDataset load_coil20(const fs::path& dir)
{
    static const std::regex name_pattern(R"(obj(\d+)__(\d+)\.pgm)");

    // (object, angle) -> path
    std::map<std::pair<int, int>, fs::path> files;
    for(const fs::path& entry : sorted_entries(dir)) {
        std::smatch match;
        const std::string name = entry.filename().string();
        if(!std::regex_match(name, match, name_pattern))
            continue;
        const int object = std::stoi(match[1]);
        const int angle = std::stoi(match[2]);
        if(object < 1 || object > kCoilObjects)
            throw ValidationError(entry.string() + ": object id outside 1.." + std::to_string(kCoilObjects));
        files.emplace(std::make_pair(object, angle), entry);
    }
    if(files.empty())
        throw IoError(dir.string() + ": no COIL-20 images (obj<k>__<angle>.pgm) found");

    std::vector<int> views(kCoilObjects + 1, 0);
    for(const auto& [key, path] : files)
        ++views[static_cast<std::size_t>(key.first)];
    for(int k = 1; k <= kCoilObjects; ++k) {
        if(views[static_cast<std::size_t>(k)] != kCoilViews)
            throw ValidationError(dir.string() + ": object " + std::to_string(k) + " has "
                                  + std::to_string(views[static_cast<std::size_t>(k)]) + " views, expected "
                                  + std::to_string(kCoilViews));
    }

    LabeledDataset ds;
    ds.n_classes = kCoilObjects;
    for(int k = 1; k <= kCoilObjects; ++k) {
        ds.class_ids.push_back(k);
        ds.class_names.push_back("obj" + std::to_string(k));
    }
    ds.images.reserve(files.size());
    for(const auto& [key, path] : files) {
        Image img = read_pgm_normalized(path);
        if(img.width != kCoilSide || img.height != kCoilSide)
            throw ValidationError(path.string() + ": expected 128x128, found " + std::to_string(img.width) + "x"
                                  + std::to_string(img.height));
        ds.images.push_back(std::move(img));
        ds.labels.push_back(key.first - 1);
    }
    return ds;
}

LabeledDataset load_pgm_class_dirs(const fs::path& dir)
{
    LabeledDataset ds;
    for(const fs::path& class_dir : sorted_entries(dir)) {
        if(!fs::is_directory(class_dir))
            continue;
        const int label = ds.n_classes++;
        ds.class_ids.push_back(label);
        ds.class_names.push_back(class_dir.filename().string());
        for(const fs::path& file : sorted_entries(class_dir)) {
            if(file.extension() != ".pgm")
                continue;
            Image img = read_pgm_normalized(file);
            if(!ds.images.empty() && (img.width != ds.images.front().width || img.height != ds.images.front().height))
                throw ValidationError(file.string() + ": size " + std::to_string(img.width) + "x"
                                      + std::to_string(img.height) + " differs from the first image");
            ds.images.push_back(std::move(img));
            ds.labels.push_back(label);
        }
    }
    if(ds.images.empty())
        throw IoError(dir.string() + ": no class sub-directories with .pgm images found");
    return ds;
}

LabeledDataset load_usps_file(const fs::path& path)
{
    const RawUsps raw = parse_usps_text(path);
    const RawUsps* files[] = {&raw};
    return finish_usps(raw, usps_label_offset(files), path);
}

std::pair<LabeledDataset, LabeledDataset> load_usps(const fs::path& train, const fs::path& test)
{
    const RawUsps raw_train = parse_usps_text(train);
    const RawUsps raw_test = parse_usps_text(test);
    const RawUsps* files[] = {&raw_train, &raw_test};
    const int offset = usps_label_offset(files);
    return {finish_usps(raw_train, offset, train), finish_usps(raw_test, offset, test)};
}

void SplitSpec::validate() const
{
    detail::require(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must lie in (0,1)");
}

SplitIndices split_indices(const LabeledDataset& ds, const SplitSpec& spec)
{
    spec.validate();
    ds.validate();

    Rng rng(spec.seed);
    SplitIndices out;
    auto split_group = [&](std::vector<std::size_t>& group, const std::string& what) {
        if(group.size() < 2)
            throw ValidationError(what + " has " + std::to_string(group.size()) + " samples; a split needs at least 2");
        rng.shuffle(group);
        const auto wanted = static_cast<std::size_t>(std::lround(spec.train_fraction * static_cast<double>(group.size())));
        const std::size_t n_train = std::clamp<std::size_t>(wanted, 1, group.size() - 1);
        out.train.insert(out.train.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.insert(out.test.end(), group.begin() + static_cast<std::ptrdiff_t>(n_train), group.end());
    };

    if(spec.stratified) {
        std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(ds.n_classes));
        for(std::size_t i = 0; i < ds.size(); ++i)
            by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);
        for(std::size_t c = 0; c < by_class.size(); ++c)
            split_group(by_class[c], "class " + std::to_string(c));
    } else {
        std::vector<std::size_t> all(ds.size());
        for(std::size_t i = 0; i < all.size(); ++i)
            all[i] = i;
        split_group(all, "dataset");
    }
    return out;
}

LabeledDataset subset(const LabeledDataset& ds, std::span<const std::size_t> indices)
{
    LabeledDataset out;
    out.n_classes = ds.n_classes;
    out.class_ids = ds.class_ids;
    out.class_names = ds.class_names;
    out.images.reserve(indices.size());
    out.labels.reserve(indices.size());
    for(std::size_t i : indices) {
        detail::require(i < ds.size(), "subset index out of range");
        out.images.push_back(ds.images[i]);
        out.labels.push_back(ds.labels[i]);
    }
    return out;
}

std::pair<LabeledDataset, LabeledDataset> split_holdout(const LabeledDataset& ds, const SplitSpec& spec)
{
    const SplitIndices idx = split_indices(ds, spec);
    return {subset(ds, idx.train), subset(ds, idx.test)};
}

LabeledDataset select_classes(const LabeledDataset& ds, std::span<const int> keep)
{
    detail::require(!keep.empty(), "select_classes needs at least one class");

    // old label -> new label
    std::vector<int> remap(static_cast<std::size_t>(ds.n_classes), -1);
    LabeledDataset out;
    for(int id : keep) {
        std::size_t old = 0;
        if(ds.class_ids.empty()) {
            detail::require(id >= 0 && id < ds.n_classes, "unknown class id " + std::to_string(id));
            old = static_cast<std::size_t>(id);
        } else {
            const auto it = std::find(ds.class_ids.begin(), ds.class_ids.end(), id);
            if(it == ds.class_ids.end())
                throw ValidationError("unknown class id " + std::to_string(id));
            old = static_cast<std::size_t>(it - ds.class_ids.begin());
        }
        detail::require(remap[old] < 0, "class id " + std::to_string(id) + " listed twice");
        remap[old] = out.n_classes++;
        out.class_ids.push_back(id);
        out.class_names.push_back(old < ds.class_names.size() ? ds.class_names[old] : std::to_string(id));
    }

    for(std::size_t i = 0; i < ds.size(); ++i) {
        const int label = remap[static_cast<std::size_t>(ds.labels[i])];
        if(label < 0)
            continue;
        out.images.push_back(ds.images[i]);
        out.labels.push_back(label);
    }
    return out;
}

} // namespace wavedbn
