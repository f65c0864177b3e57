#include "hcod/cmf.hpp"

#include <algorithm>
#include <cmath>

#include "hcod/errors.hpp"

namespace hcod {

Tristimulus CmfTable::at(double nm) const {
    if (wavelengths_nm.empty() || nm < wavelengths_nm.front() || nm > wavelengths_nm.back()) {
        return {0.0, 0.0, 0.0};
    }
    auto hi = std::lower_bound(wavelengths_nm.begin(), wavelengths_nm.end(), nm);
    const auto j = static_cast<size_t>(hi - wavelengths_nm.begin());
    if (*hi == nm) {
        return weights[j];
    }
    const size_t i = j - 1;
    const double t = (nm - wavelengths_nm[i]) / (wavelengths_nm[j] - wavelengths_nm[i]);
    Tristimulus out{};
    for (int k = 0; k < 3; ++k) {
        out[k] = weights[i][k] + t * (weights[j][k] - weights[i][k]);
    }
    return out;
}

void CmfTable::validate() const {
    if (wavelengths_nm.size() != weights.size() || wavelengths_nm.size() < 2) {
        throw ValidationError("cmf: wavelength and weight tables differ in length");
    }
    for (size_t i = 1; i < wavelengths_nm.size(); ++i) {
        if (!(wavelengths_nm[i] > wavelengths_nm[i - 1])) {
            throw ValidationError("cmf: wavelengths must be strictly increasing");
        }
    }
    for (const auto& w : weights) {
        for (double v : w) {
            if (!std::isfinite(v) || v < 0.0) {
                throw ValidationError("cmf: weights must be finite and nonnegative");
            }
        }
    }
    if (wavelengths_nm.front() > 400.0 || wavelengths_nm.back() < 700.0) {
        throw ValidationError("cmf: table must cover 400-700 nm");
    }
}

}  // namespace hcod
