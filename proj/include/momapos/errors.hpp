#pragma once

#include <stdexcept>
#include <string>

namespace momapos {

// Base for every error the library throws. Outcomes that are expected during
// search (no IK solution, no path, infeasible placement) are reported through
// return values instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MOMAPOS_DEFINE_ERROR(Name)            \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  };

MOMAPOS_DEFINE_ERROR(ParseError)
MOMAPOS_DEFINE_ERROR(ValidationError)
MOMAPOS_DEFINE_ERROR(NotArticulated)
MOMAPOS_DEFINE_ERROR(ResolutionTooCoarse)
MOMAPOS_DEFINE_ERROR(EmptyScene)
MOMAPOS_DEFINE_ERROR(UnknownNode)
MOMAPOS_DEFINE_ERROR(DegenerateCorpus)
MOMAPOS_DEFINE_ERROR(UnknownTarget)
MOMAPOS_DEFINE_ERROR(JointLimitError)
MOMAPOS_DEFINE_ERROR(OutOfVerticalReach)
MOMAPOS_DEFINE_ERROR(IoError)
MOMAPOS_DEFINE_ERROR(FormatError)
MOMAPOS_DEFINE_ERROR(EmptyArea)
MOMAPOS_DEFINE_ERROR(NotInArea)
MOMAPOS_DEFINE_ERROR(InvalidEndpoint)

#undef MOMAPOS_DEFINE_ERROR

}  // namespace momapos
