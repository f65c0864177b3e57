#include "hcod/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "json.hpp"

#include "hcod/errors.hpp"

namespace hcod {

namespace {

static_assert(std::endian::native == std::endian::little, "raw dumps assume a little-endian host");

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        throw IoError("cannot open " + path.string());
    }
    return f;
}

[[noreturn]] void png_fail(png_structp png, png_const_charp msg) {
    auto* slot = static_cast<std::string*>(png_get_error_ptr(png));
    if (slot) {
        *slot = msg;
    }
    png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

// rows: height rows of width*channels samples (8 or 16 bit, host order).
void write_png(const std::filesystem::path& path, int height, int width, int channels, int depth,
               const std::vector<uint8_t>& bytes) {
    FilePtr f = open_file(path, "wb");
    std::string err;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_fail, png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("libpng: cannot allocate writer");
    }
    const size_t row_bytes = static_cast<size_t>(width) * channels * (depth / 8);
    std::vector<png_bytep> rows(static_cast<size_t>(height));
    for (int r = 0; r < height; ++r) {
        rows[static_cast<size_t>(r)] = const_cast<png_bytep>(bytes.data() + r * row_bytes);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng: " + err + " writing " + path.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), depth,
                 channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (depth == 16) {
        png_set_swap(png);
    }
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

struct PngData {
    int height = 0;
    int width = 0;
    int channels = 0;  // after expansion: 1 gray, 3 rgb
    int depth = 0;     // 8 or 16
    std::vector<uint16_t> samples;
};

PngData read_png(const std::filesystem::path& path) {
    FilePtr f = open_file(path, "rb");
    uint8_t sig[8] = {};
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw FormatError("not a PNG file: " + path.string());
    }
    std::string err;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_fail, png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("libpng: cannot allocate reader");
    }
    PngData out;
    std::vector<uint8_t> bytes;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("libpng: " + err + " reading " + path.string());
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);
    if (color == PNG_COLOR_TYPE_PALETTE) {
        png_set_palette_to_rgb(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (color & PNG_COLOR_MASK_ALPHA) {
        png_set_strip_alpha(png);
    }
    if (depth == 16) {
        png_set_swap(png);
    }
    png_read_update_info(png, info);
    out.height = static_cast<int>(png_get_image_height(png, info));
    out.width = static_cast<int>(png_get_image_width(png, info));
    out.channels = png_get_channels(png, info);
    out.depth = png_get_bit_depth(png, info);
    const size_t row_bytes = png_get_rowbytes(png, info);
    bytes.resize(row_bytes * static_cast<size_t>(out.height));
    rows.resize(static_cast<size_t>(out.height));
    for (int r = 0; r < out.height; ++r) {
        rows[static_cast<size_t>(r)] = bytes.data() + r * row_bytes;
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const size_t n = static_cast<size_t>(out.height) * out.width * out.channels;
    out.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
        if (out.depth == 16) {
            std::memcpy(&out.samples[i], bytes.data() + 2 * i, 2);
        } else {
            out.samples[i] = bytes[i];
        }
    }
    return out;
}

uint16_t to_u16(double v) { return static_cast<uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0)); }

std::filesystem::path sidecar(const std::filesystem::path& path) {
    std::filesystem::path s = path;
    s += ".json";
    return s;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !out.write(text.data(), static_cast<std::streamsize>(text.size()))) {
        throw IoError("cannot write " + path.string());
    }
}

}  // namespace

void write_mask_png(const Mask& mask, const std::filesystem::path& path) {
    std::vector<uint8_t> bytes(mask.pixels());
    for (size_t i = 0; i < bytes.size(); ++i) {
        bytes[i] = mask.data[i] ? 255 : 0;
    }
    write_png(path, mask.height, mask.width, 1, 8, bytes);
}

Mask read_mask_png(const std::filesystem::path& path) {
    const PngData p = read_png(path);
    const uint16_t half = p.depth == 16 ? 32768 : 128;
    Mask m(p.height, p.width);
    for (size_t i = 0; i < m.pixels(); ++i) {
        m.data[i] = p.samples[i * static_cast<size_t>(p.channels)] >= half ? 1 : 0;
    }
    return m;
}

void write_map_png16(const Image& map, const std::filesystem::path& path) {
    if (map.channels != 1 && map.channels != 3) {
        throw ValidationError("write_map_png16: expected 1 or 3 channels, got " + std::to_string(map.channels));
    }
    std::vector<uint8_t> bytes(map.data.size() * 2);
    for (size_t i = 0; i < map.data.size(); ++i) {
        const uint16_t v = to_u16(map.data[i]);
        std::memcpy(bytes.data() + 2 * i, &v, 2);
    }
    write_png(path, map.height, map.width, map.channels, 16, bytes);
}

Image read_map_png(const std::filesystem::path& path) {
    const PngData p = read_png(path);
    if (p.channels != 1) {
        throw FormatError("expected a grayscale PNG: " + path.string());
    }
    const double full = p.depth == 16 ? 65535.0 : 255.0;
    Image img(p.height, p.width, 1);
    for (size_t i = 0; i < img.data.size(); ++i) {
        img.data[i] = p.samples[i] / full;
    }
    return img;
}

void write_raw_f32(const Image& map, const std::filesystem::path& path) {
    std::vector<float> planar(map.data.size());
    for (int c = 0; c < map.channels; ++c) {
        for (size_t p = 0; p < map.pixels(); ++p) {
            planar[c * map.pixels() + p] = static_cast<float>(map.data[p * map.channels + c]);
        }
    }
    FilePtr f = open_file(path, "wb");
    if (std::fwrite(planar.data(), sizeof(float), planar.size(), f.get()) != planar.size()) {
        throw IoError("cannot write " + path.string());
    }
    nlohmann::ordered_json j{{"height", map.height},   {"width", map.width}, {"channels", map.channels},
                             {"layout", "CHW"}, {"dtype", "float32le"}};
    write_text(sidecar(path), j.dump(2) + "\n");
}

Image read_raw_f32(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(sidecar(path)));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad raw sidecar for " + path.string() + ": " + e.what());
    }
    const int h = j.value("height", 0);
    const int w = j.value("width", 0);
    const int c = j.value("channels", 0);
    if (h <= 0 || w <= 0 || c <= 0) {
        throw FormatError("bad raw sidecar dimensions for " + path.string());
    }
    Image img(h, w, c);
    std::vector<float> planar(img.data.size());
    FilePtr f = open_file(path, "rb");
    if (std::fread(planar.data(), sizeof(float), planar.size(), f.get()) != planar.size() ||
        std::fgetc(f.get()) != EOF) {
        throw FormatError("raw payload size does not match sidecar: " + path.string());
    }
    for (int ch = 0; ch < c; ++ch) {
        for (size_t p = 0; p < img.pixels(); ++p) {
            img.data[p * c + ch] = planar[ch * img.pixels() + p];
        }
    }
    return img;
}

void save_weights(const std::vector<ParamRef>& params, const std::filesystem::path& blob,
                  const std::filesystem::path& manifest) {
    FilePtr f = open_file(blob, "wb");
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    size_t offset = 0;
    for (const auto& p : params) {
        const auto& v = *p.values;
        const std::vector<float> narrow(v.begin(), v.end());
        if (std::fwrite(narrow.data(), sizeof(float), narrow.size(), f.get()) != narrow.size()) {
            throw IoError("cannot write " + blob.string());
        }
        entries.push_back({{"name", p.name}, {"shape", p.shape}, {"offset", offset}, {"count", v.size()}});
        offset += v.size();
    }
    nlohmann::ordered_json j{{"dtype", "float32le"}, {"total", offset}, {"params", entries}};
    write_text(manifest, j.dump(2) + "\n");
}

void load_weights(const std::vector<ParamRef>& params, const std::filesystem::path& blob,
                  const std::filesystem::path& manifest) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(manifest));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad weight manifest " + manifest.string() + ": " + e.what());
    }
    const auto& entries = j.at("params");
    if (entries.size() != params.size()) {
        throw FormatError("weight manifest lists " + std::to_string(entries.size()) + " tensors, model has " +
                          std::to_string(params.size()));
    }
    FilePtr f = open_file(blob, "rb");
    // Staged so a failed load leaves `params` untouched.
    std::vector<std::vector<double>> staged(params.size());
    for (size_t i = 0; i < params.size(); ++i) {
        const auto& e = entries[i];
        const auto& p = params[i];
        if (e.at("name").get<std::string>() != p.name || e.at("shape").get<std::vector<int>>() != p.shape ||
            e.at("count").get<size_t>() != p.values->size()) {
            throw FormatError("weight manifest entry " + std::to_string(i) + " does not match " + p.name);
        }
        std::vector<float> narrow(p.values->size());
        if (std::fread(narrow.data(), sizeof(float), narrow.size(), f.get()) != narrow.size()) {
            throw FormatError("weight blob truncated at " + p.name);
        }
        staged[i].assign(narrow.begin(), narrow.end());
    }
    if (std::fgetc(f.get()) != EOF) {
        throw FormatError("weight blob longer than manifest: " + blob.string());
    }
    for (size_t i = 0; i < params.size(); ++i) {
        *params[i].values = std::move(staged[i]);
    }
}

}  // namespace hcod
