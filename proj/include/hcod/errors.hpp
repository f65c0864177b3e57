#pragma once

#include <stdexcept>
#include <string>

namespace hcod {

// Malformed on-disk container (bad magic, truncated payload, unsupported version).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Well-formed input that violates a domain invariant or a shape contract.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Synthetic scene request that cannot be satisfied.
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Zero-norm spectrum handed to the spectral angle.
class DegenerateSpectrum : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Internal consistency check failed; maps to CLI exit code 3.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace hcod
