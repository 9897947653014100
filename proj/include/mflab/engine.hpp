#pragma once

#include <string>
#include <string_view>

#include "mflab/error.hpp"

namespace mflab {

enum class Engine { FFSim, SVSim };

inline const char* engine_name(Engine e) { return e == Engine::FFSim ? "ffsim" : "svsim"; }

inline Engine parse_engine(std::string_view s) {
  if (s == "ffsim") return Engine::FFSim;
  if (s == "svsim") return Engine::SVSim;
  throw ConfigError("unknown engine '" + std::string(s) + "'");
}

}  // namespace mflab
