#pragma once

#include <stdexcept>
#include <string>

namespace qlitho
{

// Caller passed arguments outside an operation's domain (bad mode index,
// empty mode set, N < 1, ...).
class UsageError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// A value object failed its invariants.
class ValidationError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// A Fock-space operation would exceed the declared photon cutoff.
class CapacityError : public std::out_of_range
{
  public:
    using std::out_of_range::out_of_range;
};

// Quantity undefined at the requested point (e.g. zero beam angle).
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

// Non-finite values encountered during quadrature or optimization.
class NumericError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace qlitho
