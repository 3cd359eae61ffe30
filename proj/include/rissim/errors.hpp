#ifndef RISSIM_ERRORS_HPP
#define RISSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rissim {

#define RISSIM_DEFINE_ERROR(Name)                          \
  class Name : public std::runtime_error {                 \
   public:                                                 \
    explicit Name(const std::string& what)                 \
        : std::runtime_error(std::string(#Name ": ") + what) {} \
  }

RISSIM_DEFINE_ERROR(InvalidScenario);
RISSIM_DEFINE_ERROR(DimensionMismatch);
RISSIM_DEFINE_ERROR(IndexOutOfRange);
RISSIM_DEFINE_ERROR(ZeroChannel);
RISSIM_DEFINE_ERROR(RankDeficient);
RISSIM_DEFINE_ERROR(NonFiniteObjective);
RISSIM_DEFINE_ERROR(Infeasible);
RISSIM_DEFINE_ERROR(CombinatorialCap);
RISSIM_DEFINE_ERROR(DegenerateObjective);
RISSIM_DEFINE_ERROR(SearchSpaceTooLarge);
RISSIM_DEFINE_ERROR(MissingActiveChannels);
RISSIM_DEFINE_ERROR(MissingEveChannels);
RISSIM_DEFINE_ERROR(DemandInfeasible);
RISSIM_DEFINE_ERROR(MissingBroadcast);
RISSIM_DEFINE_ERROR(ParseError);
RISSIM_DEFINE_ERROR(ValidationError);
RISSIM_DEFINE_ERROR(IoError);

#undef RISSIM_DEFINE_ERROR

}  // namespace rissim

#endif  // RISSIM_ERRORS_HPP
