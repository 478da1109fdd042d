#pragma once

#include <stdexcept>
#include <string>

namespace flowgan {

// Every failure raised by the library derives from Error so callers (the CLI
// in particular) can map categories to exit codes without string matching.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class DataError : public Error { using Error::Error; };
class FormatError : public Error { using Error::Error; };
class DecodeError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class DomainError : public Error { using Error::Error; };

class InsufficientFramesError : public DataError { using DataError::DataError; };
class SizeError : public ShapeError { using ShapeError::ShapeError; };

class DivergenceError : public NumericError {
public:
    DivergenceError(int epoch, int batch, const std::string& what)
        : NumericError("training diverged at epoch " + std::to_string(epoch) + ", batch "
                       + std::to_string(batch) + ": " + what),
          epoch_(epoch), batch_(batch) {}

    int epoch() const noexcept { return epoch_; }
    int batch() const noexcept { return batch_; }

private:
    int epoch_;
    int batch_;
};

} // namespace flowgan
