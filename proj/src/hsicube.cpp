#include "hcod/hsicube.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "hcod/errors.hpp"

namespace hcod {

namespace {

constexpr std::array<char, 4> kMagic = {'H', 'S', 'I', 'C'};
constexpr size_t kHeaderBytes = 4 + 4 * 4;

void put_u32(std::vector<unsigned char>& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
    }
}

uint32_t get_u32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

void put_f32(std::vector<unsigned char>& out, float v) {
    put_u32(out, std::bit_cast<uint32_t>(v));
}

float get_f32(const unsigned char* p) { return std::bit_cast<float>(get_u32(p)); }

}  // namespace

void validate_cube(const HsiCube& cube, bool require_min_extent) {
    if (cube.height <= 0 || cube.width <= 0 || cube.bands <= 0) {
        throw ValidationError("cube: dimensions must be positive");
    }
    if (require_min_extent && (cube.height < kMinCubeExtent || cube.width < kMinCubeExtent ||
                               cube.bands < kMinCubeBands)) {
        throw ValidationError("cube: " + std::to_string(cube.height) + "x" + std::to_string(cube.width) +
                              "x" + std::to_string(cube.bands) + " is below the 8x8x4 minimum");
    }
    if (cube.wavelengths_nm.size() != static_cast<size_t>(cube.bands)) {
        throw ValidationError("cube: wavelength count differs from band count");
    }
    if (cube.data.size() != cube.pixels() * cube.bands) {
        throw ValidationError("cube: payload size differs from H*W*C");
    }
    for (size_t i = 0; i < cube.wavelengths_nm.size(); ++i) {
        if (!std::isfinite(cube.wavelengths_nm[i]) ||
            (i > 0 && !(cube.wavelengths_nm[i] > cube.wavelengths_nm[i - 1]))) {
            throw ValidationError("cube: wavelengths must be finite and strictly increasing");
        }
    }
    for (float v : cube.data) {
        if (!std::isfinite(v)) {
            throw ValidationError("cube: payload contains NaN or Inf");
        }
        if (v < 0.0f) {
            throw ValidationError("cube: payload contains negative reflectance");
        }
    }
}

HsiCube load_cube(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic.data(), 4) != 0) {
        throw FormatError(path.string() + ": missing HSIC header");
    }
    const uint32_t version = get_u32(&bytes[4]);
    if (version != kHsicVersion) {
        throw FormatError(path.string() + ": unsupported HSIC version " + std::to_string(version));
    }
    const uint64_t h = get_u32(&bytes[8]);
    const uint64_t w = get_u32(&bytes[12]);
    const uint64_t c = get_u32(&bytes[16]);
    if (h == 0 || w == 0 || c == 0 || h > (1u << 20) || w > (1u << 20) || c > (1u << 16)) {
        throw FormatError(path.string() + ": implausible dimensions in header");
    }
    const uint64_t expected = kHeaderBytes + 4 * c + 4 * h * w * c;
    if (bytes.size() != expected) {
        throw FormatError(path.string() + ": payload is " + std::to_string(bytes.size()) +
                          " bytes, header implies " + std::to_string(expected));
    }

    HsiCube cube;
    cube.height = static_cast<int>(h);
    cube.width = static_cast<int>(w);
    cube.bands = static_cast<int>(c);
    cube.wavelengths_nm.resize(c);
    cube.data.resize(h * w * c);
    const unsigned char* p = bytes.data() + kHeaderBytes;
    for (auto& wl : cube.wavelengths_nm) {
        wl = get_f32(p);
        p += 4;
    }
    for (auto& v : cube.data) {
        v = get_f32(p);
        p += 4;
    }
    validate_cube(cube);
    return cube;
}

void save_cube(const HsiCube& cube, const std::filesystem::path& path) {
    validate_cube(cube);
    std::vector<unsigned char> out;
    out.reserve(kHeaderBytes + 4 * (cube.wavelengths_nm.size() + cube.data.size()));
    out.insert(out.end(), kMagic.begin(), kMagic.end());
    put_u32(out, kHsicVersion);
    put_u32(out, static_cast<uint32_t>(cube.height));
    put_u32(out, static_cast<uint32_t>(cube.width));
    put_u32(out, static_cast<uint32_t>(cube.bands));
    for (float wl : cube.wavelengths_nm) {
        put_f32(out, wl);
    }
    for (float v : cube.data) {
        put_f32(out, v);
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) {
        throw IoError("write failed for " + path.string());
    }
}

std::vector<int> uniform_band_indices(int bands, int n) {
    if (n < 1 || n > bands) {
        throw ValidationError("band_subsample: need 1 <= n <= C, got n=" + std::to_string(n) +
                              " C=" + std::to_string(bands));
    }
    std::vector<int> idx(static_cast<size_t>(n), 0);
    if (n == 1) {
        return idx;
    }
    // Integer round-half-up of i*(C-1)/(n-1).
    const int64_t num = bands - 1;
    const int64_t den = n - 1;
    for (int i = 0; i < n; ++i) {
        idx[static_cast<size_t>(i)] = static_cast<int>((2 * i * num + den) / (2 * den));
    }
    return idx;
}

HsiCube band_subsample(const HsiCube& cube, int n) {
    const auto idx = uniform_band_indices(cube.bands, n);
    HsiCube out;
    out.height = cube.height;
    out.width = cube.width;
    out.bands = n;
    out.wavelengths_nm.reserve(idx.size());
    for (int b : idx) {
        out.wavelengths_nm.push_back(cube.wavelengths_nm[static_cast<size_t>(b)]);
    }
    out.data.resize(cube.pixels() * static_cast<size_t>(n));
    for (size_t p = 0; p < cube.pixels(); ++p) {
        const float* src = cube.data.data() + p * cube.bands;
        float* dst = out.data.data() + p * n;
        for (int i = 0; i < n; ++i) {
            dst[i] = src[idx[static_cast<size_t>(i)]];
        }
    }
    return out;
}

}  // namespace hcod
