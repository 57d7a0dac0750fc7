#include "wavedbn/model_io.hpp"

#include <cctype>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "wavedbn/error.hpp"

namespace fs = std::filesystem;

namespace wavedbn {

namespace {

void append_real(std::string& out, double value)
{
    char buf[40];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific, 16);
    out.append(buf, ptr);
}

void append_vector(std::string& out, const char* label, const Vector& v)
{
    out += label;
    for(Eigen::Index i = 0; i < v.size(); ++i) {
        out += ' ';
        append_real(out, v[i]);
    }
    out += '\n';
}

void append_matrix(std::string& out, const char* label, const Matrix& m)
{
    out += label;
    out += '\n';
    for(Eigen::Index r = 0; r < m.rows(); ++r) {
        for(Eigen::Index c = 0; c < m.cols(); ++c) {
            if(c > 0)
                out += ' ';
            append_real(out, m(r, c));
        }
        out += '\n';
    }
}

class Tokenizer {
public:
    explicit Tokenizer(std::string_view text) : text_(text) {}

    std::string_view next(const char* what)
    {
        while(pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        if(pos_ >= text_.size())
            throw IoError("model file: unexpected end of file at byte offset " + std::to_string(pos_)
                          + " (expected " + what + ")");
        token_start_ = pos_;
        while(pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        return text_.substr(token_start_, pos_ - token_start_);
    }

    void expect(std::string_view keyword)
    {
        const std::string what = "'" + std::string(keyword) + "'";
        if(next(what.c_str()) != keyword)
            fail("expected " + what);
    }

    template <typename T>
    T number(const char* what)
    {
        const std::string_view tok = next(what);
        T value{};
        const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
        if(ec != std::errc() || ptr != tok.data() + tok.size())
            fail(std::string("invalid ") + what + " '" + std::string(tok) + "'");
        return value;
    }

    int positive(const char* what)
    {
        const int value = number<int>(what);
        if(value <= 0)
            fail(std::string(what) + " must be positive");
        return value;
    }

    // Every number takes at least two bytes ("0 "), which bounds what a
    // well-formed remainder of the file can hold.
    void require_room(Eigen::Index count)
    {
        if(static_cast<std::size_t>(count) > (text_.size() - pos_) / 2 + 1)
            fail("declared dimensions exceed the remaining file size");
    }

    Vector vector(Eigen::Index n, const char* what)
    {
        require_room(n);
        Vector v(n);
        for(Eigen::Index i = 0; i < n; ++i)
            v[i] = number<double>(what);
        return v;
    }

    Matrix matrix(Eigen::Index rows, Eigen::Index cols, const char* what)
    {
        require_room(rows * cols);
        Matrix m(rows, cols);
        for(Eigen::Index r = 0; r < rows; ++r)
            for(Eigen::Index c = 0; c < cols; ++c)
                m(r, c) = number<double>(what);
        return m;
    }

    bool at_end()
    {
        while(pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
        return pos_ >= text_.size();
    }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw IoError("model file: " + what + " at byte offset " + std::to_string(token_start_));
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t token_start_ = 0;
};

Dbn parse_dbn(Tokenizer& tok, std::size_t expected_index)
{
    tok.expect("dbn");
    if(tok.number<std::size_t>("DBN index") != expected_index)
        tok.fail("DBN index out of sequence");
    tok.expect("layers");
    const int depth = tok.positive("layer count");

    Dbn dbn;
    for(int l = 0; l < depth; ++l) {
        tok.expect("rbm");
        const int nv = tok.positive("visible size");
        const int nh = tok.positive("hidden size");
        Rbm rbm = Rbm::zeros(nv, nh);
        try {
            rbm.visible_kind = visible_kind_from_string(std::string(tok.next("visible kind")));
        } catch(const ValidationError& e) {
            tok.fail(e.what());
        }
        tok.expect("weights");
        rbm.weights = tok.matrix(nv, nh, "weight");
        tok.expect("visible_bias");
        rbm.visible_bias = tok.vector(nv, "visible bias");
        tok.expect("hidden_bias");
        rbm.hidden_bias = tok.vector(nh, "hidden bias");
        dbn.layers.push_back(std::move(rbm));
    }

    tok.expect("softmax");
    const int rows = tok.positive("softmax rows");
    const int classes = tok.positive("class count");
    tok.expect("softmax_weights");
    dbn.softmax_weights = tok.matrix(rows, classes, "softmax weight");
    tok.expect("softmax_bias");
    dbn.softmax_bias = tok.vector(classes, "softmax bias");
    tok.expect("end_dbn");

    try {
        dbn.validate();
    } catch(const ValidationError& e) {
        tok.fail(e.what());
    }
    return dbn;
}

} // namespace

std::string format_model(const ModelFile& file)
{
    const EnsembleModel& m = file.model;
    m.validate();

    std::string out;
    out += std::string(kModelMagic) + "\n";
    out += "version " + std::to_string(kModelFormatVersion) + "\n";
    out += "input_width " + std::to_string(m.preprocessing.input_width) + "\n";
    out += "input_height " + std::to_string(m.preprocessing.input_height) + "\n";
    out += "downsample " + std::to_string(m.preprocessing.downsample) + "\n";
    out += "wavelet " + m.preprocessing.wavelet + "\n";
    out += "n_classes " + std::to_string(m.n_classes) + "\n";
    out += "weights";
    for(double w : m.weights) {
        out += ' ';
        append_real(out, w);
    }
    out += '\n';
    for(std::size_t j = 0; j < kSubbandCount; ++j) {
        out += "scaler " + std::to_string(j) + " ";
        append_real(out, m.scalers[j].min);
        out += ' ';
        append_real(out, m.scalers[j].max);
        out += '\n';
    }

    for(std::size_t j = 0; j < kSubbandCount; ++j) {
        const Dbn& dbn = m.dbns[j];
        out += "dbn " + std::to_string(j) + "\nlayers " + std::to_string(dbn.layers.size()) + "\n";
        for(const Rbm& rbm : dbn.layers) {
            out += "rbm " + std::to_string(rbm.n_visible()) + " " + std::to_string(rbm.n_hidden()) + " "
                   + to_string(rbm.visible_kind) + "\n";
            append_matrix(out, "weights", rbm.weights);
            append_vector(out, "visible_bias", rbm.visible_bias);
            append_vector(out, "hidden_bias", rbm.hidden_bias);
        }
        out += "softmax " + std::to_string(dbn.softmax_weights.rows()) + " " + std::to_string(dbn.n_classes()) + "\n";
        append_matrix(out, "softmax_weights", dbn.softmax_weights);
        append_vector(out, "softmax_bias", dbn.softmax_bias);
        out += "end_dbn\n";
    }

    out += "provenance config_hash " + (file.provenance.config_hash.empty() ? "-" : file.provenance.config_hash) + "\n";
    out += "provenance seed " + std::to_string(file.provenance.seed) + "\n";
    out += "provenance timestamp " + (file.provenance.timestamp.empty() ? "-" : file.provenance.timestamp) + "\n";
    out += "end\n";
    return out;
}

ModelFile parse_model(std::string_view text)
{
    Tokenizer tok(text);
    if(tok.next("magic") != kModelMagic)
        tok.fail("not a wavedbn model (bad magic)");
    tok.expect("version");
    const int version = tok.number<int>("version");
    if(version != kModelFormatVersion)
        throw IoError("model file: format version " + std::to_string(version) + " is not supported (this build reads version "
                      + std::to_string(kModelFormatVersion) + ")");

    ModelFile file;
    EnsembleModel& m = file.model;
    tok.expect("input_width");
    m.preprocessing.input_width = tok.positive("input width");
    tok.expect("input_height");
    m.preprocessing.input_height = tok.positive("input height");
    tok.expect("downsample");
    m.preprocessing.downsample = tok.positive("downsample factor");
    tok.expect("wavelet");
    m.preprocessing.wavelet = std::string(tok.next("wavelet name"));
    tok.expect("n_classes");
    m.n_classes = tok.positive("class count");

    tok.expect("weights");
    for(std::size_t j = 0; j < kSubbandCount; ++j)
        m.weights.push_back(tok.number<double>("ensemble weight"));
    for(std::size_t j = 0; j < kSubbandCount; ++j) {
        tok.expect("scaler");
        if(tok.number<std::size_t>("scaler index") != j)
            tok.fail("scaler index out of sequence");
        m.scalers[j].min = tok.number<double>("scaler min");
        m.scalers[j].max = tok.number<double>("scaler max");
    }
    for(std::size_t j = 0; j < kSubbandCount; ++j)
        m.dbns.push_back(parse_dbn(tok, j));

    auto provenance_field = [&](std::string_view key) {
        tok.expect("provenance");
        tok.expect(key);
        const std::string_view value = tok.next("provenance value");
        return value == "-" ? std::string() : std::string(value);
    };
    file.provenance.config_hash = provenance_field("config_hash");
    tok.expect("provenance");
    tok.expect("seed");
    file.provenance.seed = tok.number<std::uint64_t>("seed");
    file.provenance.timestamp = provenance_field("timestamp");
    tok.expect("end");
    if(!tok.at_end())
        tok.fail("trailing data after 'end'");

    try {
        m.validate();
    } catch(const ValidationError& e) {
        throw IoError(std::string("model file: inconsistent model: ") + e.what());
    }
    return file;
}

void save_model(const fs::path& path, const ModelFile& file)
{
    const std::string text = format_model(file);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if(!out.write(text.data(), static_cast<std::streamsize>(text.size())) || !out.flush()) {
            out.close();
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw IoError(path.string() + ": cannot write model file");
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if(ec) {
        fs::remove(tmp, ec);
        throw IoError(path.string() + ": cannot move model file into place");
    }
}

ModelFile load_model(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if(!in)
        throw IoError(path.string() + ": cannot open model file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return parse_model(buffer.str());
    } catch(const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
    return buf;
}

} // namespace wavedbn
