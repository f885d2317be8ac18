#pragma once

#include <stdexcept>
#include <string>

namespace levywave {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DivergentMoment : Error {
    using Error::Error;
};

struct EmptyMeasure : Error {
    using Error::Error;
};

struct StillInfiniteActivity : Error {
    using Error::Error;
};

struct NonCenteredMeasure : Error {
    using Error::Error;
};

struct WindowTooSmall : Error {
    using Error::Error;
};

struct InsufficientSamples : Error {
    using Error::Error;
};

struct ConfigInvalid : Error {
    using Error::Error;
};

}  // namespace levywave
