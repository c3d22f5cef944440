#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hcmm {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class InfeasibleCode : public Error {
public:
    using Error::Error;
};

class NotEnoughResults : public Error {
public:
    NotEnoughResults(std::size_t have, std::size_t need)
        : Error("not enough results to decode: have " + std::to_string(have) +
                ", need " + std::to_string(need)),
          have_(have),
          need_(need) {}

    std::size_t have() const noexcept { return have_; }
    std::size_t need() const noexcept { return need_; }

private:
    std::size_t have_;
    std::size_t need_;
};

}  // namespace hcmm
