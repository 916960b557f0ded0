#pragma once

#include <stdexcept>
#include <string>

namespace sixv {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define SIXV_DEFINE_ERROR(Name)                                        \
    struct Name : Error {                                              \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

SIXV_DEFINE_ERROR(OrderingViolation);
SIXV_DEFINE_ERROR(RangeViolation);
SIXV_DEFINE_ERROR(RandomnessGap);
SIXV_DEFINE_ERROR(DegenerateRow);
SIXV_DEFINE_ERROR(NoneFound);
SIXV_DEFINE_ERROR(OrderViolation);
SIXV_DEFINE_ERROR(BadThresholds);
SIXV_DEFINE_ERROR(TooFewSamples);
SIXV_DEFINE_ERROR(MixedShapes);
SIXV_DEFINE_ERROR(WindowTooLarge);
SIXV_DEFINE_ERROR(EqualStates);
SIXV_DEFINE_ERROR(ResolutionTooCoarse);
SIXV_DEFINE_ERROR(DomainMismatch);
SIXV_DEFINE_ERROR(EmptyInterval);
SIXV_DEFINE_ERROR(UnboundedSupport);
SIXV_DEFINE_ERROR(SupportMismatch);
SIXV_DEFINE_ERROR(InfiniteSystem);
SIXV_DEFINE_ERROR(ConfigInvalid);
SIXV_DEFINE_ERROR(IoError);

#undef SIXV_DEFINE_ERROR

}  // namespace sixv
