#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hcod/hsicube.hpp"
#include "hcod/image.hpp"

namespace hcod {

enum class ObjectShape { Ellipse, Blob, Fragmented };

std::string to_string(ObjectShape shape);
ObjectShape parse_object_shape(const std::string& name);  // throws SpecError

struct SyntheticSceneSpec {
    uint64_t seed = 0;
    int height = 64;
    int width = 64;
    int bands = 20;
    ObjectShape object_shape = ObjectShape::Ellipse;
    double object_area_ratio = 0.05;
    // Peak reflectance offset of the object against the background inside
    // the object's band window.
    double spectral_contrast = 0.3;
    // Object and background share CIE-XYZ projections exactly (metamers).
    bool rgb_matched = false;
    double wavelength_min_nm = 400.0;
    double wavelength_max_nm = 1000.0;
};

struct SyntheticScene {
    HsiCube cube;
    Mask mask;
    // Untextured base spectra, one value per band.
    std::vector<double> background_spectrum;
    std::vector<double> object_spectrum;
};

// Deterministic for a fixed spec. The mask holds exactly
// round(ratio * H * W) foreground pixels. Throws SpecError when the request
// cannot be met (empty or full object, invalid sizes, a metamer pair whose
// spectral angle would not exceed 0.05 rad).
SyntheticScene generate_scene(const SyntheticSceneSpec& spec);

}  // namespace hcod
