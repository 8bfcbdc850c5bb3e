#pragma once

#include <stdexcept>
#include <string>

namespace spacecc {

// Base for every error the library reports. Each failure mode named in the
// public contracts gets its own type so callers can catch narrowly.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SPACECC_DEFINE_ERROR(Name)          \
    class Name : public Error {             \
    public:                                 \
        using Error::Error;                 \
    }

SPACECC_DEFINE_ERROR(SchedulingInPast);
SPACECC_DEFINE_ERROR(TooFewPoints);
SPACECC_DEFINE_ERROR(DegeneratePath);
SPACECC_DEFINE_ERROR(EmptyHistory);
SPACECC_DEFINE_ERROR(WindowNotElapsed);
SPACECC_DEFINE_ERROR(UnknownAlgorithm);
SPACECC_DEFINE_ERROR(InvalidConfig);
SPACECC_DEFINE_ERROR(NoCalls);
SPACECC_DEFINE_ERROR(DegenerateBdp);
SPACECC_DEFINE_ERROR(ConfigParse);
SPACECC_DEFINE_ERROR(MismatchedSweep);
SPACECC_DEFINE_ERROR(IoFailure);

#undef SPACECC_DEFINE_ERROR

}  // namespace spacecc
