#include "surrosynth/search.hpp"

namespace surrosynth {

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kNone: return "none";
    case StopReason::kExhausted: return "exhausted";
    case StopReason::kMaxLevel: return "max-level";
    case StopReason::kDeadline: return "deadline";
    case StopReason::kMaxCandidates: return "max-candidates";
  }
  return "?";
}

}  // namespace surrosynth
