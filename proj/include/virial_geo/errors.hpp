#pragma once

#include <stdexcept>
#include <string>

namespace vgeo {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Metric determinant below the nondegeneracy floor: the point lies outside
// the valid region of the chart.
class SingularMetric : public Error {
public:
    using Error::Error;
};

// A point failed the system's domain guard (chart singularity, non-finite
// value). During integration `time()` holds the RK4 stage time.
class GuardViolation : public Error {
public:
    explicit GuardViolation(const std::string& what, double t = 0.0, bool has_time = false)
        : Error(what), time_(t), has_time_(has_time) {}

    double time() const { return time_; }
    bool has_time() const { return has_time_; }

private:
    double time_;
    bool has_time_;
};

class StepLimitExceeded : public Error {
public:
    using Error::Error;
};

class InsufficientSamples : public Error {
public:
    using Error::Error;
};

class RejectedTrajectory : public Error {
public:
    using Error::Error;
};

class RelationFieldMissing : public Error {
public:
    using Error::Error;
};

class DegenerateDegrees : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

}  // namespace vgeo
