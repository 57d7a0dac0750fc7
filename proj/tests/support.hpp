#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "wavedbn/ensemble.hpp"
#include "wavedbn/image.hpp"
#include "wavedbn/pgm.hpp"
#include "wavedbn/random.hpp"
#include "wavedbn/rbm.hpp"

namespace testing_support {

namespace fs = std::filesystem;
using wavedbn::Image;

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir()
    {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path()
                / ("wavedbn_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Image random_image(int w, int h, wavedbn::Rng& rng, double lo = 0.0, double hi = 1.0)
{
    Image img(w, h);
    for(double& p : img.pixels)
        p = lo + (hi - lo) * rng.uniform();
    return img;
}

// A class-dependent 8-bit image: a bright bar whose position and orientation
// depend on the class, rotated a little with the view index, plus noise.
inline Image synthetic_object(int cls, int view, int side, wavedbn::Rng& rng)
{
    Image img(side, side);
    const double angle = 0.35 * cls + 0.02 * view;
    const double c = std::cos(angle), s = std::sin(angle);
    const double offset = 0.15 * side * ((cls % 5) - 2) / 2.0;
    for(int y = 0; y < side; ++y)
        for(int x = 0; x < side; ++x) {
            const double u = x - side / 2.0, v = y - side / 2.0;
            const double d = std::abs(u * s - v * c - offset);
            const double blob = std::exp(-(u * u + v * v) / (2.0 * (0.1 + 0.02 * (cls % 4)) * side * side));
            img.at(x, y) = std::clamp(200.0 * (d < side / 10.0 ? 1.0 : 0.15) * blob + 20.0 * rng.uniform(), 0.0, 255.0);
        }
    return img;
}

// COIL-20 style directory: obj<k>__<view>.pgm for k in 1..objects.
inline void write_coil_like(const fs::path& dir, int objects, int views, int side, std::uint64_t seed = 7)
{
    fs::create_directories(dir);
    wavedbn::Rng rng(seed);
    for(int k = 1; k <= objects; ++k)
        for(int a = 0; a < views; ++a)
            wavedbn::write_pgm(dir / ("obj" + std::to_string(k) + "__" + std::to_string(a) + ".pgm"),
                               synthetic_object(k - 1, a, side, rng));
}

// Enumerates binary vectors of length n as the bits of an integer.
inline wavedbn::Vector bits(unsigned code, int n)
{
    wavedbn::Vector v(n);
    for(int i = 0; i < n; ++i)
        v[i] = (code >> i) & 1u;
    return v;
}

// Unnormalized joint weight exp(-E) computed with explicit loops.
inline double boltzmann_weight(const wavedbn::Rbm& rbm, const wavedbn::Vector& v, const wavedbn::Vector& h)
{
    double e = 0.0;
    for(int s = 0; s < rbm.n_visible(); ++s)
        e -= rbm.visible_bias[s] * v[s];
    for(int t = 0; t < rbm.n_hidden(); ++t)
        e -= rbm.hidden_bias[t] * h[t];
    for(int s = 0; s < rbm.n_visible(); ++s)
        for(int t = 0; t < rbm.n_hidden(); ++t)
            e -= v[s] * h[t] * rbm.weights(s, t);
    return std::exp(-e);
}

// Joint probability table P[v_code][h_code] by brute force.
inline std::vector<std::vector<double>> joint_table(const wavedbn::Rbm& rbm)
{
    const int nv = rbm.n_visible(), nh = rbm.n_hidden();
    std::vector<std::vector<double>> table(1u << nv, std::vector<double>(1u << nh));
    double z = 0.0;
    for(unsigned a = 0; a < (1u << nv); ++a)
        for(unsigned b = 0; b < (1u << nh); ++b)
            z += table[a][b] = boltzmann_weight(rbm, bits(a, nv), bits(b, nh));
    for(auto& row : table)
        for(double& p : row)
            p /= z;
    return table;
}

inline wavedbn::Rbm random_rbm(int nv, int nh, wavedbn::Rng& rng, double scale = 1.0)
{
    wavedbn::Rbm rbm = wavedbn::Rbm::zeros(nv, nh);
    for(Eigen::Index i = 0; i < rbm.weights.size(); ++i)
        rbm.weights.data()[i] = scale * rng.normal();
    for(int s = 0; s < nv; ++s)
        rbm.visible_bias[s] = 0.5 * scale * rng.normal();
    for(int t = 0; t < nh; ++t)
        rbm.hidden_bias[t] = 0.5 * scale * rng.normal();
    return rbm;
}

// A structurally valid ensemble with random parameters, weights and scalers.
inline wavedbn::EnsembleModel random_ensemble(int side, int downsample, std::vector<int> hidden, int n_classes,
                                              std::uint64_t seed)
{
    using namespace wavedbn;
    Rng rng(seed);
    EnsembleModel m;
    m.preprocessing = Preprocessing{side, side, downsample, "haar"};
    m.n_classes = n_classes;
    auto fill = [&rng](auto& x) {
        for(Eigen::Index i = 0; i < x.size(); ++i)
            x.data()[i] = rng.normal();
    };
    for(std::size_t j = 0; j < kSubbandCount; ++j) {
        Dbn dbn = build_dbn(m.preprocessing.band_size(), hidden, n_classes, seed + j);
        for(Rbm& r : dbn.layers) {
            fill(r.weights);
            fill(r.visible_bias);
            fill(r.hidden_bias);
        }
        fill(dbn.softmax_weights);
        fill(dbn.softmax_bias);
        m.dbns.push_back(std::move(dbn));
        m.weights.push_back(rng.uniform());
        const double a = rng.normal(), b = rng.normal();
        m.scalers[j] = {std::min(a, b), std::max(a, b)};
    }
    return m;
}

} // namespace testing_support
