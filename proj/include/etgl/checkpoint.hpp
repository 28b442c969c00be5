#pragma once

#include <string>

#include "etgl/agent.hpp"

namespace etgl {

// Versioned text checkpoint: header "etgl-checkpoint v1", the env name and
// hidden sizes, then the flat parameters of actor, critic and both targets.
// Numbers are written in shortest round-trip form, so loading is exact.
void save_checkpoint(const std::string& path, const std::string& env_name, const DdpgAgent& agent);

struct LoadedCheckpoint {
  std::string env_name;
  DdpgAgent agent;
};

// Rebuilds the agent for the env stored in the file. Throws ContractError on
// an unreadable or malformed file.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace etgl
