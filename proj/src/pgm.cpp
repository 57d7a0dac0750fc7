#include "wavedbn/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wavedbn/error.hpp"

namespace wavedbn {

namespace {

class HeaderReader {
public:
    HeaderReader(std::string_view bytes, const std::string& source) : bytes_(bytes), source_(source) {}

    // Skips whitespace and '#' comments, then reads an unsigned decimal.
    long next_number(const char* what)
    {
        skip_space_and_comments();
        const char* begin = bytes_.data() + pos_;
        const char* end = bytes_.data() + bytes_.size();
        long value = 0;
        const auto [ptr, ec] = std::from_chars(begin, end, value);
        if(ec != std::errc() || value < 0)
            fail(std::string("bad or missing ") + what);
        pos_ += static_cast<std::size_t>(ptr - begin);
        return value;
    }

    // P5: exactly one whitespace byte separates maxval from the raster.
    void skip_single_space()
    {
        if(pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_])))
            fail("missing whitespace before raster data");
        ++pos_;
    }

    std::size_t position() const { return pos_; }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw IoError(source_ + ": " + what + " (byte offset " + std::to_string(pos_) + ")");
    }

private:
    void skip_space_and_comments()
    {
        while(pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if(c == '#') {
                while(pos_ < bytes_.size() && bytes_[pos_] != '\n')
                    ++pos_;
            } else if(std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::string_view bytes_;
    const std::string& source_;
    std::size_t pos_ = 2;  // past the magic number
};

} // namespace

PgmImage parse_pgm(std::string_view bytes, const std::string& source)
{
    if(bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw IoError(source + ": not a PGM file (expected P2 or P5 magic)");
    const bool binary = bytes[1] == '5';

    HeaderReader reader(bytes, source);
    const long width = reader.next_number("width");
    const long height = reader.next_number("height");
    const long maxval = reader.next_number("maxval");
    if(width <= 0 || height <= 0 || width > 1 << 15 || height > 1 << 15)
        reader.fail("unsupported dimensions");
    if(maxval <= 0 || maxval > 65535)
        reader.fail("maxval must be in 1..65535");

    PgmImage out{Image(static_cast<int>(width), static_cast<int>(height)), static_cast<int>(maxval)};
    const std::size_t count = out.image.size();

    if(binary) {
        reader.skip_single_space();
        const std::size_t start = reader.position();
        const std::size_t sample_bytes = maxval > 255 ? 2 : 1;
        if(bytes.size() < start + count * sample_bytes)
            throw IoError(source + ": truncated raster, expected " + std::to_string(count * sample_bytes)
                          + " bytes after header, found " + std::to_string(bytes.size() - std::min(bytes.size(), start)));
        const auto* raster = reinterpret_cast<const unsigned char*>(bytes.data() + start);
        for(std::size_t i = 0; i < count; ++i) {
            const unsigned value = sample_bytes == 2 ? (unsigned{raster[2 * i]} << 8) | raster[2 * i + 1] : raster[i];
            if(value > static_cast<unsigned>(maxval))
                throw IoError(source + ": sample " + std::to_string(i) + " exceeds maxval");
            out.image.pixels[i] = static_cast<double>(value);
        }
    } else {
        for(std::size_t i = 0; i < count; ++i) {
            const long value = reader.next_number("sample");
            if(value > maxval)
                reader.fail("sample exceeds maxval");
            out.image.pixels[i] = static_cast<double>(value);
        }
    }
    return out;
}

PgmImage read_pgm(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if(!in)
        throw IoError(path.string() + ": cannot open file");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_pgm(buffer.str(), path.string());
}

Image read_pgm_normalized(const std::filesystem::path& path)
{
    const PgmImage pgm = read_pgm(path);
    return normalize(pgm.image, {0.0, static_cast<double>(pgm.maxval)});
}

void write_pgm(const std::filesystem::path& path, const Image& img, int maxval)
{
    detail::require(maxval > 0 && maxval <= 65535, "maxval must be in 1..65535");

    std::string data = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n"
                       + std::to_string(maxval) + "\n";
    for(double p : img.pixels) {
        const auto value = static_cast<unsigned>(std::clamp(std::lround(p), 0L, static_cast<long>(maxval)));
        if(maxval > 255)
            data.push_back(static_cast<char>(value >> 8));
        data.push_back(static_cast<char>(value & 0xFF));
    }

    std::ofstream out(path, std::ios::binary);
    if(!out.write(data.data(), static_cast<std::streamsize>(data.size())))
        throw IoError(path.string() + ": cannot write file");
}

} // namespace wavedbn
