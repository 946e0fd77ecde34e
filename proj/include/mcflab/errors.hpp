#pragma once
#include <stdexcept>
#include <string>

namespace mcflab {

// Base class for every error this library raises on purpose.
struct McflabError : std::runtime_error {
  explicit McflabError(const std::string& msg) : std::runtime_error(msg) {}
};

#define MCFLAB_DEFINE_ERROR(Name)                                   \
  struct Name : McflabError {                                       \
    explicit Name(const std::string& msg) : McflabError(#Name ": " + msg) {} \
  }

// geometry
MCFLAB_DEFINE_ERROR(DegenerateEdge);
MCFLAB_DEFINE_ERROR(SelfIntersection);
MCFLAB_DEFINE_ERROR(AxisViolation);
MCFLAB_DEFINE_ERROR(TooCoarse);
MCFLAB_DEFINE_ERROR(OffAxisCenter);
// exact solutions
MCFLAB_DEFINE_ERROR(PastExtinction);
MCFLAB_DEFINE_ERROR(UnsupportedFactorization);
MCFLAB_DEFINE_ERROR(DomainViolation);
MCFLAB_DEFINE_ERROR(InvalidSpec);
MCFLAB_DEFINE_ERROR(NonNegativeTime);
// flow engine
MCFLAB_DEFINE_ERROR(DegenerateGeometry);
MCFLAB_DEFINE_ERROR(StepTooLarge);
// diagnostics
MCFLAB_DEFINE_ERROR(NonBackwardTime);
MCFLAB_DEFINE_ERROR(UncoveredTime);
MCFLAB_DEFINE_ERROR(NotMeanConvex);
MCFLAB_DEFINE_ERROR(NonPositiveDensity);
// surgery
MCFLAB_DEFINE_ERROR(InsufficientHistory);
MCFLAB_DEFINE_ERROR(NeckTooShort);
MCFLAB_DEFINE_ERROR(NoSeparatingNecks);
// cli / config
MCFLAB_DEFINE_ERROR(ConfigError);

#undef MCFLAB_DEFINE_ERROR

}  // namespace mcflab
