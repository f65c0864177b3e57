#pragma once

#include <array>
#include <vector>

namespace hcod {

using Tristimulus = std::array<double, 3>;

// Colour matching functions (x-bar, y-bar, z-bar) sampled on an ascending grid.
struct CmfTable {
    std::vector<double> wavelengths_nm;
    std::vector<Tristimulus> weights;

    // Piecewise-linear interpolation; zero outside [front, back].
    Tristimulus at(double nm) const;

    // Ascending grid, matching lengths, finite nonnegative weights,
    // support covering 400-700 nm. Throws ValidationError.
    void validate() const;
};

const CmfTable& cie1931_2deg();

}  // namespace hcod
