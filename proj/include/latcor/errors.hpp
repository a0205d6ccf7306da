#pragma once

#include <stdexcept>
#include <string>

namespace latcor {

/// Input data cannot support estimation: too few categories, empty
/// margins, zero variance, vanishing cell mass, and the like.
class degenerate_error : public std::runtime_error {
public:
    explicit degenerate_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical breakdown during iteration (nonpositive conditional
/// variance, singular weight matrix after regularization).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace latcor
