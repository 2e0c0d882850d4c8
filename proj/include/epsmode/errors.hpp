#pragma once

#include <stdexcept>
#include <string>

namespace epsmode
{

class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Two fields or profiles defined on different grids were combined.
class GridMismatch : public Error
{
public:
    GridMismatch() : Error("grid mismatch") {}
    explicit GridMismatch(const std::string &what) : Error("grid mismatch: " + what) {}
};

class InvalidArgument : public Error
{
public:
    using Error::Error;
};

class ProfileError : public Error
{
public:
    using Error::Error;
};

class ConvergenceError : public Error
{
public:
    using Error::Error;
};

class EigenSolverError : public Error
{
public:
    using Error::Error;
};

/// Probe frequency too close to a non-excluded eigenfrequency with zero broadening.
class ResonanceError : public Error
{
public:
    using Error::Error;
};

class SingularSystemError : public Error
{
public:
    using Error::Error;
};

} // namespace epsmode
