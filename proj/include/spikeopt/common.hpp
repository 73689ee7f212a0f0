#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace spikeopt {

using Tick = std::int64_t;
using NeuronId = std::uint32_t;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Binary assignment / readout state. Entries are 0 or 1.
using BitVector = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, 1>;

// Caller handed in something that violates a documented precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input text; carries the 1-based line number (0 when unknown).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Index that points outside the declared dimensions of an instance.
class BoundsError : public ParseError {
 public:
  using ParseError::ParseError;
};

// Exhaustive oracle asked to enumerate an instance beyond its cap.
class SizeCapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spikeopt
