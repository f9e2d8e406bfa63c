#pragma once

#include <stdexcept>
#include <string>

namespace tprophet {

/// Base class for every domain failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Conditioning on an event of probability zero.
class ZeroProbabilityEvent : public Error {
 public:
  using Error::Error;
};

/// Threshold equation has no root because the CDF jumps over it.
class DiscontinuousCdf : public Error {
 public:
  using Error::Error;
};

class HorizonTooLarge : public Error {
 public:
  using Error::Error;
};

/// A trader tried to buy while holding or to sell while empty.
class InfeasibleAction : public Error {
 public:
  using Error::Error;
};

/// The adaptive adversary was driven outside its phase protocol.
class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

/// A closed-form competitive bound failed; always an implementation bug.
class BoundViolated : public Error {
 public:
  using Error::Error;
};

class DegenerateFit : public Error {
 public:
  using Error::Error;
};

}  // namespace tprophet
