#pragma once

#include <stdexcept>
#include <string>

namespace carmacds {

// Exit-code taxonomy: UsageError/ArgumentError -> 2, IoError/DataQualityError -> 3,
// NumericalError and descendants -> 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(what) {}
};

// Bad argument to a library operation (domain violations, empty inputs).
class ArgumentError : public UsageError {
 public:
  explicit ArgumentError(const std::string& what) : UsageError(what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

class DataQualityError : public Error {
 public:
  explicit DataQualityError(const std::string& what) : Error(what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

// Autoregressive polynomial has a root with non-negative real part.
class StationarityError : public NumericalError {
 public:
  explicit StationarityError(const std::string& what) : NumericalError(what) {}
};

class SingularityError : public NumericalError {
 public:
  explicit SingularityError(const std::string& what) : NumericalError(what) {}
};

// Repeated eigenvalues where a spectral decomposition is required.
class DegeneracyError : public NumericalError {
 public:
  explicit DegeneracyError(const std::string& what) : NumericalError(what) {}
};

// Filter covariance lost positive definiteness or blew up.
class ConditioningError : public NumericalError {
 public:
  explicit ConditioningError(const std::string& what) : NumericalError(what) {}
};

// Model is internally inconsistent (e.g. near-common AR/MA roots).
class SpecificationError : public NumericalError {
 public:
  explicit SpecificationError(const std::string& what) : NumericalError(what) {}
};

class UnsupportedDriverError : public NumericalError {
 public:
  explicit UnsupportedDriverError(const std::string& what) : NumericalError(what) {}
};

class UnsupportedConfigError : public NumericalError {
 public:
  explicit UnsupportedConfigError(const std::string& what) : NumericalError(what) {}
};

// Recovery map cannot be inverted on the requested domain.
class NonInvertibleParamsError : public NumericalError {
 public:
  explicit NonInvertibleParamsError(const std::string& what) : NumericalError(what) {}
};

class OptimizationFailure : public NumericalError {
 public:
  explicit OptimizationFailure(const std::string& what) : NumericalError(what) {}
};

}  // namespace carmacds
