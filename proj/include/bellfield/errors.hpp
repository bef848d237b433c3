#pragma once

#include <stdexcept>
#include <string>

namespace bellfield {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain (negative intensity, DOP > 1, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// The requested optical configuration carries no usable signal, e.g. the
/// stripped auxiliary beam is extinguished by the analyzer.
class DegenerateConfiguration : public Error {
public:
  using Error::Error;
};

} // namespace bellfield
