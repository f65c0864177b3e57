#pragma once

#include <filesystem>
#include <vector>

#include "hcod/image.hpp"
#include "hcod/nn.hpp"

namespace hcod {

// 8-bit grayscale, 0 / 255.
void write_mask_png(const Mask& mask, const std::filesystem::path& path);

// Any grayscale (or RGB, first channel) PNG; foreground where the sample is at
// least half of full scale. Throws IoError / FormatError.
Mask read_mask_png(const std::filesystem::path& path);

// 16-bit PNG of a 1- or 3-channel map; values clamped to [0,1] and scaled by
// 65535 with rounding.
void write_map_png16(const Image& map, const std::filesystem::path& path);

// Grayscale PNG (8 or 16 bit) scaled to [0,1].
Image read_map_png(const std::filesystem::path& path);

// Raw little-endian float32, channel-planar (C x H x W), with a JSON sidecar
// `<path>.json` holding height/width/channels.
void write_raw_f32(const Image& map, const std::filesystem::path& path);
Image read_raw_f32(const std::filesystem::path& path);

// Weight snapshot: one flat little-endian float32 blob plus a JSON manifest
// listing name, shape, offset and count of every parameter in order. Values
// are rounded to float on save.
void save_weights(const std::vector<ParamRef>& params, const std::filesystem::path& blob,
                  const std::filesystem::path& manifest);

// Loads into `params`, which must match the manifest's names and shapes
// exactly. Throws FormatError on any mismatch.
void load_weights(const std::vector<ParamRef>& params, const std::filesystem::path& blob,
                  const std::filesystem::path& manifest);

}  // namespace hcod
