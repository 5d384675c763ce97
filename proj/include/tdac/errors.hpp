#pragma once

#include <stdexcept>
#include <string>

namespace tdac {

// Error kinds map onto CLI exit codes in experiment.hpp.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParameterError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct DataError : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct ContractError : Error { using Error::Error; };
struct SizeError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace tdac
